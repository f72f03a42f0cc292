use std::collections::{BTreeSet, HashMap};

use fplab_softfloat::{parse_literal, RoundingMode};

use super::ast::*;
use super::LangError;

struct Signature {
    ret: Type,
    params: Vec<Type>,
}

#[derive(Clone, Copy)]
struct VarInfo {
    ty: Type,
    len: Option<usize>,
}

/// Types a parsed program: binds literals to exact values (round to nearest
/// in the literal's type), inserts a `Cast` at every implicit conversion and
/// rejects recursion, undeclared names and type mismatches.
pub fn typecheck(prog: Program) -> Result<Program, LangError> {
    let mut sigs = HashMap::new();
    for f in &prog.functions {
        if BUILTINS.contains(&f.name.as_str()) {
            return Err(LangError::type_error(f.pos, format!("`{}` is a builtin function", f.name)));
        }
        let sig = Signature { ret: f.ret, params: f.params.iter().map(|p| p.ty).collect() };
        if sigs.insert(f.name.clone(), sig).is_some() {
            return Err(LangError::type_error(f.pos, format!("function `{}` defined twice", f.name)));
        }
    }
    if !sigs.contains_key(ENTRY) {
        return Err(LangError::type_error(Pos { line: 1, col: 1 }, "no `main` function"));
    }

    let mut globals = HashMap::new();
    let mut typed_globals = Vec::new();
    for d in prog.globals {
        if sigs.contains_key(&d.name) || BUILTINS.contains(&d.name.as_str()) || globals.contains_key(&d.name) {
            return Err(LangError::type_error(d.pos, format!("`{}` is already defined", d.name)));
        }
        if !d.ty.is_numeric() {
            return Err(LangError::type_error(d.pos, format!("global `{}` must have a numeric type", d.name)));
        }
        let mut ck = Checker::new(&sigs, &globals, Type::Void);
        ck.const_only = true;
        let d = ck.decl(d)?;
        globals.insert(d.name.clone(), VarInfo { ty: d.ty, len: d.len });
        typed_globals.push(d);
    }

    let mut graph = HashMap::new();
    let mut functions = Vec::new();
    for f in prog.functions {
        let mut ck = Checker::new(&sigs, &globals, f.ret);
        for p in &f.params {
            if !p.ty.is_numeric() && p.ty != Type::Bool {
                return Err(LangError::type_error(p.pos, format!("parameter `{}` cannot have type {}", p.name, p.ty)));
            }
            ck.declare(&p.name, VarInfo { ty: p.ty, len: None }, p.pos)?;
        }
        let body = ck.block(f.body)?;
        if f.ret != Type::Void && !returns(&body) {
            return Err(LangError::type_error(f.pos, format!("`{}` may finish without returning a value", f.name)));
        }
        graph.insert(f.name.clone(), ck.calls);
        functions.push(Function { body, ..f });
    }
    check_acyclic(&graph, &functions)?;
    Ok(Program { globals: typed_globals, functions })
}

fn check_acyclic(graph: &HashMap<String, BTreeSet<String>>, functions: &[Function]) -> Result<(), LangError> {
    // 0 = unvisited, 1 = on stack, 2 = done
    fn visit<'a>(
        f: &'a str,
        graph: &'a HashMap<String, BTreeSet<String>>,
        state: &mut HashMap<&'a str, u8>,
    ) -> Option<String> {
        match state.get(f) {
            Some(1) => return Some(f.to_string()),
            Some(2) => return None,
            _ => {}
        }
        state.insert(f, 1);
        for g in graph.get(f).into_iter().flatten() {
            if let Some(name) = visit(g, graph, state) {
                return Some(name);
            }
        }
        state.insert(f, 2);
        None
    }
    let mut state = HashMap::new();
    for f in functions {
        if let Some(name) = visit(&f.name, graph, &mut state) {
            let pos = functions.iter().find(|g| g.name == name).map_or(f.pos, |g| g.pos);
            return Err(LangError::type_error(pos, format!("recursion through `{name}` is not supported")));
        }
    }
    Ok(())
}

/// Whether every path through `body` ends in a `return`.
fn returns(body: &[Stmt]) -> bool {
    body.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If(_, a, b) => returns(a) && returns(b),
        _ => false,
    })
}

/// An expression whose type follows its context: an unsuffixed float
/// literal or an integer literal, possibly negated.
fn flexible(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Float(lit) => lit.suffix.is_none() && lit.value.is_none(),
        ExprKind::Int(_) => true,
        ExprKind::Neg(x) => flexible(x),
        _ => false,
    }
}

/// Literals, possibly negated or cast.
fn literal_shaped(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Float(_) | ExprKind::Int(_) => true,
        ExprKind::Neg(x) | ExprKind::Cast(_, x) => literal_shaped(x),
        _ => false,
    }
}

struct Checker<'a> {
    sigs: &'a HashMap<String, Signature>,
    globals: &'a HashMap<String, VarInfo>,
    locals: HashMap<String, VarInfo>,
    ret: Type,
    calls: BTreeSet<String>,
    const_only: bool,
}

impl<'a> Checker<'a> {
    fn new(sigs: &'a HashMap<String, Signature>, globals: &'a HashMap<String, VarInfo>, ret: Type) -> Self {
        Checker { sigs, globals, locals: HashMap::new(), ret, calls: BTreeSet::new(), const_only: false }
    }

    fn declare(&mut self, name: &str, info: VarInfo, pos: Pos) -> Result<(), LangError> {
        if self.locals.contains_key(name)
            || self.globals.contains_key(name)
            || self.sigs.contains_key(name)
            || BUILTINS.contains(&name)
        {
            return Err(LangError::type_error(pos, format!("`{name}` is already defined")));
        }
        self.locals.insert(name.to_string(), info);
        Ok(())
    }

    fn lookup(&self, name: &str, pos: Pos) -> Result<VarInfo, LangError> {
        if self.const_only {
            return Err(LangError::type_error(pos, "global initializers must be constants"));
        }
        self.locals
            .get(name)
            .or_else(|| self.globals.get(name))
            .copied()
            .ok_or_else(|| LangError::type_error(pos, format!("undeclared variable `{name}`")))
    }

    fn block(&mut self, body: Vec<Stmt>) -> Result<Vec<Stmt>, LangError> {
        body.into_iter().map(|s| self.stmt(s)).collect()
    }

    fn decl(&mut self, d: Decl) -> Result<Decl, LangError> {
        if !d.ty.is_numeric() && !(d.ty == Type::Bool && d.len.is_none()) {
            return Err(LangError::type_error(d.pos, format!("`{}` cannot have type {}", d.name, d.ty)));
        }
        let hint = Some(d.ty).filter(|t| t.is_float());
        if self.const_only {
            let items: Vec<&Expr> = match &d.init {
                Some(Init::Expr(e)) => vec![e],
                Some(Init::List(es)) => es.iter().collect(),
                None => vec![],
            };
            if let Some(e) = items.into_iter().find(|e| !literal_shaped(e)) {
                return Err(LangError::type_error(e.pos, "global initializers must be literals"));
            }
        }
        let init = match (d.init, d.len) {
            (None, _) => None,
            (Some(Init::Expr(e)), None) => {
                let e = self.expr(e, hint)?;
                Some(Init::Expr(coerce(e, d.ty)?))
            }
            (Some(Init::List(items)), Some(len)) => {
                if items.len() > len {
                    return Err(LangError::type_error(d.pos, format!("{} initializers for `{}[{len}]`", items.len(), d.name)));
                }
                let items = items
                    .into_iter()
                    .map(|e| {
                        let e = self.expr(e, hint)?;
                        coerce(e, d.ty)
                    })
                    .collect::<Result<_, _>>()?;
                Some(Init::List(items))
            }
            (Some(Init::List(_)), None) => {
                return Err(LangError::type_error(d.pos, format!("`{}` is not an array", d.name)))
            }
            (Some(Init::Expr(_)), Some(_)) => {
                return Err(LangError::type_error(d.pos, format!("array `{}` needs a `{{...}}` initializer", d.name)))
            }
        };
        if !self.const_only {
            self.declare(&d.name, VarInfo { ty: d.ty, len: d.len }, d.pos)?;
        }
        Ok(Decl { init, ..d })
    }

    fn cond(&mut self, e: Expr) -> Result<Expr, LangError> {
        let e = self.expr(e, None)?;
        if e.ty() != Type::Bool {
            return Err(LangError::type_error(e.pos, format!("condition has type {}, expected bool", e.ty())));
        }
        Ok(e)
    }

    fn scalar_target(&self, name: &str, pos: Pos, array: bool) -> Result<VarInfo, LangError> {
        if self.globals.contains_key(name) && !self.locals.contains_key(name) {
            return Err(LangError::type_error(pos, format!("global `{name}` is read-only")));
        }
        let info = self.lookup(name, pos)?;
        match (info.len, array) {
            (Some(_), false) => Err(LangError::type_error(pos, format!("cannot assign to array `{name}`"))),
            (None, true) => Err(LangError::type_error(pos, format!("`{name}` is not an array"))),
            _ => Ok(info),
        }
    }

    fn stmt(&mut self, s: Stmt) -> Result<Stmt, LangError> {
        let pos = s.pos;
        let kind = match s.kind {
            StmtKind::Decl(d) => StmtKind::Decl(self.decl(d)?),
            StmtKind::Assign(name, e) => {
                let info = self.scalar_target(&name, pos, false)?;
                let e = self.expr(e, Some(info.ty).filter(|t| t.is_float()))?;
                StmtKind::Assign(name, coerce(e, info.ty)?)
            }
            StmtKind::AssignIndex(name, i, e) => {
                let info = self.scalar_target(&name, pos, true)?;
                let i = self.index(i)?;
                let e = self.expr(e, Some(info.ty).filter(|t| t.is_float()))?;
                StmtKind::AssignIndex(name, i, coerce(e, info.ty)?)
            }
            StmtKind::If(c, a, b) => StmtKind::If(self.cond(c)?, self.block(a)?, self.block(b)?),
            StmtKind::While(c, b) => StmtKind::While(self.cond(c)?, self.block(b)?),
            StmtKind::Assert(c) => StmtKind::Assert(self.cond(c)?),
            StmtKind::Print(e) => {
                let e = self.expr(e, None)?;
                if e.ty() == Type::Void {
                    return Err(LangError::type_error(pos, "cannot print a void value"));
                }
                StmtKind::Print(e)
            }
            StmtKind::Return(e) => match (e, self.ret) {
                (None, Type::Void) => StmtKind::Return(None),
                (Some(e), Type::Void) => {
                    return Err(LangError::type_error(e.pos, "void function returns a value"));
                }
                (None, ret) => return Err(LangError::type_error(pos, format!("missing {ret} return value"))),
                (Some(e), ret) => {
                    let e = self.expr(e, Some(ret).filter(|t| t.is_float()))?;
                    StmtKind::Return(Some(coerce(e, ret)?))
                }
            },
            StmtKind::Expr(e) => StmtKind::Expr(self.expr(e, None)?),
            StmtKind::Skip => StmtKind::Skip,
        };
        Ok(Stmt { kind, pos })
    }

    fn index(&mut self, i: Expr) -> Result<Expr, LangError> {
        let i = self.expr(i, None)?;
        if i.ty() != Type::Int {
            return Err(LangError::type_error(i.pos, format!("array index has type {}, expected int", i.ty())));
        }
        Ok(i)
    }

    /// Types operands that meet in one operation and converts them to
    /// their common type: the widest float type, else `int` if allowed.
    /// Context-typed literals take the type of their typed siblings.
    fn unify(&mut self, es: Vec<Expr>, hint: Option<Type>, allow_int: bool) -> Result<(Vec<Expr>, Type), LangError> {
        let mut typed: Vec<Option<Expr>> = vec![None; es.len()];
        for (i, e) in es.iter().enumerate() {
            if !flexible(e) {
                typed[i] = Some(self.expr(e.clone(), hint)?);
            }
        }
        let fixed = typed.iter().flatten().map(Expr::ty).filter(|t| t.is_float()).max();
        let lit_hint = fixed.or(hint.filter(|t| t.is_float()));
        for (i, e) in es.into_iter().enumerate() {
            if typed[i].is_none() {
                typed[i] = Some(self.expr(e, lit_hint)?);
            }
        }
        let typed: Vec<Expr> = typed.into_iter().flatten().collect();
        for e in &typed {
            if !e.ty().is_numeric() {
                return Err(LangError::type_error(e.pos, format!("expected a number, found {}", e.ty())));
            }
        }
        let target = match typed.iter().map(Expr::ty).filter(|t| t.is_float()).max() {
            Some(t) => t,
            None if allow_int => Type::Int,
            None => lit_hint.unwrap_or(Type::Double),
        };
        let out = typed.into_iter().map(|e| coerce(e, target)).collect::<Result<_, _>>()?;
        Ok((out, target))
    }

    fn expr(&mut self, e: Expr, hint: Option<Type>) -> Result<Expr, LangError> {
        let pos = e.pos;
        let (kind, ty) = match e.kind {
            ExprKind::Float(lit) => {
                let (value, ty) = match lit.value {
                    Some(v) => {
                        let ty = Type::from_format(v.format())
                            .ok_or_else(|| LangError::type_error(pos, "literal in a non-declarable format"))?;
                        (v, ty)
                    }
                    None => {
                        let ty = lit.suffix.or(hint.filter(|t| t.is_float())).unwrap_or(Type::Double);
                        let fmt = ty.format().expect("float type");
                        let v = parse_literal(&lit.text, fmt, RoundingMode::NearestEven)
                            .map_err(|err| LangError::type_error(pos, err.to_string()))?;
                        (v, ty)
                    }
                };
                (ExprKind::Float(FloatLit { value: Some(value), ..lit }), ty)
            }
            ExprKind::Int(v) => (ExprKind::Int(v), Type::Int),
            ExprKind::Bool(b) => (ExprKind::Bool(b), Type::Bool),
            ExprKind::Var(name) => {
                let info = self.lookup(&name, pos)?;
                if info.len.is_some() {
                    return Err(LangError::type_error(pos, format!("array `{name}` used as a value")));
                }
                (ExprKind::Var(name), info.ty)
            }
            ExprKind::Index(name, i) => {
                let info = self.lookup(&name, pos)?;
                if info.len.is_none() {
                    return Err(LangError::type_error(pos, format!("`{name}` is not an array")));
                }
                (ExprKind::Index(name, Box::new(self.index(*i)?)), info.ty)
            }
            ExprKind::Neg(x) => {
                let x = self.expr(*x, hint)?;
                if !x.ty().is_numeric() {
                    return Err(LangError::type_error(pos, format!("cannot negate {}", x.ty())));
                }
                let ty = x.ty();
                (ExprKind::Neg(Box::new(x)), ty)
            }
            ExprKind::Not(x) => (ExprKind::Not(Box::new(self.cond(*x)?)), Type::Bool),
            ExprKind::Binary(op, l, r) => {
                let (mut v, ty) = self.unify(vec![*l, *r], hint, true)?;
                if op == BinOp::Rem && ty != Type::Int {
                    return Err(LangError::type_error(pos, "`%` needs int operands"));
                }
                let r = v.pop().expect("two operands");
                let l = v.pop().expect("two operands");
                (ExprKind::Binary(op, Box::new(l), Box::new(r)), ty)
            }
            ExprKind::Compare(op, l, r) => {
                let probe = self.expr((*l).clone(), None)?;
                if probe.ty() == Type::Bool {
                    let r = self.expr(*r, None)?;
                    if r.ty() != Type::Bool || !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                        return Err(LangError::type_error(pos, format!("cannot compare bool {} {}", op.symbol(), r.ty())));
                    }
                    (ExprKind::Compare(op, Box::new(probe), Box::new(r)), Type::Bool)
                } else {
                    let (mut v, _) = self.unify(vec![*l, *r], None, true)?;
                    let r = v.pop().expect("two operands");
                    let l = v.pop().expect("two operands");
                    (ExprKind::Compare(op, Box::new(l), Box::new(r)), Type::Bool)
                }
            }
            ExprKind::Logic(op, l, r) => {
                (ExprKind::Logic(op, Box::new(self.cond(*l)?), Box::new(self.cond(*r)?)), Type::Bool)
            }
            ExprKind::Call(name, args) => self.call(name, args, hint, pos)?,
            ExprKind::Cast(t, x) => {
                if !t.is_numeric() {
                    return Err(LangError::type_error(pos, format!("cannot cast to {t}")));
                }
                let x = self.expr(*x, Some(t).filter(|t| t.is_float()))?;
                if !x.ty().is_numeric() {
                    return Err(LangError::type_error(pos, format!("cannot cast {} to {t}", x.ty())));
                }
                (ExprKind::Cast(t, Box::new(x)), t)
            }
        };
        Ok(Expr { kind, ty: Some(ty), pos })
    }

    fn call(&mut self, name: String, args: Vec<Expr>, hint: Option<Type>, pos: Pos) -> Result<(ExprKind, Type), LangError> {
        if self.const_only {
            return Err(LangError::type_error(pos, "global initializers must be constants"));
        }
        let arity = |n: usize| {
            if args.len() != n {
                Err(LangError::type_error(pos, format!("`{name}` takes {n} argument(s), got {}", args.len())))
            } else {
                Ok(())
            }
        };
        match name.as_str() {
            "floor" | "fabs" | "sqrt" => {
                arity(1)?;
                let (args, ty) = self.unify(args, hint, false)?;
                Ok((ExprKind::Call(name, args), ty))
            }
            "fma" => {
                arity(3)?;
                let (args, ty) = self.unify(args, hint, false)?;
                Ok((ExprKind::Call(name, args), ty))
            }
            "nextafter" => {
                arity(2)?;
                let args = args
                    .into_iter()
                    .map(|a| {
                        let a = self.expr(a, Some(Type::Double))?;
                        coerce(a, Type::Double)
                    })
                    .collect::<Result<_, _>>()?;
                Ok((ExprKind::Call(name, args), Type::Double))
            }
            "ndt" => {
                if args.is_empty() || args.len() > 2 {
                    return Err(LangError::type_error(pos, "`ndt` takes a point id and optionally a variable"));
                }
                let mut it = args.into_iter();
                let k = it.next().expect("checked");
                if !matches!(k.kind, ExprKind::Int(n) if n >= 0) {
                    return Err(LangError::type_error(k.pos, "`ndt` point id must be a non-negative int literal"));
                }
                let mut out = vec![self.expr(k, None)?];
                if let Some(v) = it.next() {
                    if !matches!(v.kind, ExprKind::Var(_)) {
                        return Err(LangError::type_error(v.pos, "`ndt` second argument must be a variable"));
                    }
                    let v = self.expr(v, None)?;
                    if !v.ty().is_float() {
                        return Err(LangError::type_error(v.pos, "`ndt` variable must be floating-point"));
                    }
                    out.push(v);
                }
                Ok((ExprKind::Call(name, out), Type::Bool))
            }
            _ => {
                let sig = self
                    .sigs
                    .get(&name)
                    .ok_or_else(|| LangError::type_error(pos, format!("undefined function `{name}`")))?;
                arity(sig.params.len())?;
                let params = sig.params.clone();
                let ret = sig.ret;
                let args = args
                    .into_iter()
                    .zip(params)
                    .map(|(a, t)| {
                        let a = self.expr(a, Some(t).filter(|t| t.is_float()))?;
                        coerce(a, t)
                    })
                    .collect::<Result<_, _>>()?;
                self.calls.insert(name.clone());
                Ok((ExprKind::Call(name, args), ret))
            }
        }
    }
}

/// Converts `e` to `target`, inserting a `Cast` for numeric widenings and
/// narrowings between float types and int-to-float; float-to-int needs an
/// explicit cast.
fn coerce(e: Expr, target: Type) -> Result<Expr, LangError> {
    let ty = e.ty();
    if ty == target {
        return Ok(e);
    }
    if target.is_float() && ty.is_numeric() {
        return Ok(Expr::cast(target, e));
    }
    let what = if ty.is_float() && target == Type::Int { " without an explicit cast" } else { "" };
    Err(LangError::type_error(e.pos, format!("cannot convert {ty} to {target}{what}")))
}
