//! Nondeterministic rounding placement: every place a compiler may or may
//! not narrow a register value to its declared type becomes a guarded
//! choice `if (ndt(k, v)) { v = (T) v; }`, and the explorer enumerates the
//! choice vectors.

use std::collections::{BTreeSet, HashMap, HashSet};

use fplab_softfloat::FpFormat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contract::fuse;
use crate::eval::{main_scalars, run_with_choices, EvalError, Inputs, Outcome, RunConfig, RETURN_NAME};
use crate::lang::*;
use crate::model::{builtin_models, PlatformModel, SpillPolicy};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChoiceKind {
    /// `true` narrows `var` to `format`.
    OptionalNarrowRound { var: String, format: FpFormat },
    /// `true` rounds the product and the sum separately, `false` fuses them.
    FmaGrouping,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoicePoint {
    pub id: u32,
    pub pos: Pos,
    pub kind: ChoiceKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstrumentOptions {
    /// Format every elementary operation rounds to.
    pub compute: FpFormat,
    /// Optional narrowing after each assignment to a named variable.
    pub storage_narrowing: bool,
    /// A grouping choice for every `a*b ± c`.
    pub fma: bool,
    /// Narrow unconditionally when binding parameters and return values.
    pub narrow_at_calls: bool,
}

impl InstrumentOptions {
    pub fn new(compute: FpFormat) -> Self {
        InstrumentOptions { compute, storage_narrowing: true, fma: false, narrow_at_calls: false }
    }
}

#[derive(Clone, Debug)]
pub struct Instrumented {
    /// Single-function program with calls inlined and expressions in
    /// three-address form.
    pub program: Program,
    pub points: Vec<ChoicePoint>,
    pub compute: FpFormat,
    /// Scalars of the original `main`, the ones outcomes report.
    pub observed: Vec<String>,
}

impl Instrumented {
    /// The deterministic model the choices are resolved against: operations
    /// in the compute format, narrowing only where chosen.
    pub fn base_model(&self) -> PlatformModel {
        PlatformModel::X87 { compute: self.compute, spill: SpillPolicy::NeverSpill }
    }
}

pub fn instrument(prog: &Program, opts: InstrumentOptions) -> Instrumented {
    let main = prog.main().expect("typed program has main");
    let mut used: HashSet<String> = BUILTINS.iter().map(|s| s.to_string()).collect();
    used.extend(prog.globals.iter().map(|d| d.name.clone()));
    for f in &prog.functions {
        used.insert(f.name.clone());
        used.extend(main_scalars(f).into_iter().map(|(n, _)| n));
        walk_stmts(&f.body, &mut |s| {
            if let StmtKind::Decl(d) = &s.kind {
                used.insert(d.name.clone());
            }
        });
    }
    let mut ins = Instrumenter { prog, opts, points: Vec::new(), used, counter: 0 };
    let ctx = Ctx { rename: HashMap::new(), ret: None };
    let body = ins.block(&ctx, &main.body);
    let program = Program {
        globals: prog.globals.clone(),
        functions: vec![Function { body, ..main.clone() }],
    };
    let mut observed: Vec<String> = main_scalars(main).into_iter().map(|(n, _)| n).collect();
    if main.ret != Type::Void {
        observed.push(RETURN_NAME.to_string());
    }
    Instrumented { program, points: ins.points, compute: opts.compute, observed }
}

struct Ctx {
    rename: HashMap<String, String>,
    /// Inside an inlined body: result variable (if any) and done flag.
    ret: Option<(Option<(String, Type)>, String)>,
}

impl Ctx {
    fn name(&self, n: &str) -> String {
        self.rename.get(n).cloned().unwrap_or_else(|| n.to_string())
    }
}

struct Instrumenter<'a> {
    prog: &'a Program,
    opts: InstrumentOptions,
    points: Vec<ChoicePoint>,
    used: HashSet<String>,
    counter: usize,
}

fn stmt(kind: StmtKind, pos: Pos) -> Stmt {
    Stmt::new(kind, pos)
}

fn var(name: &str, ty: Type, pos: Pos) -> Expr {
    Expr::typed(ExprKind::Var(name.to_string()), ty, pos)
}

fn decl(name: &str, ty: Type, init: Option<Expr>, pos: Pos) -> Stmt {
    stmt(StmtKind::Decl(Decl { name: name.to_string(), ty, len: None, init: init.map(Init::Expr), pos }), pos)
}

fn is_atom(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Float(_) | ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_))
}

fn may_return(s: &Stmt) -> bool {
    let mut found = false;
    walk_stmts(std::slice::from_ref(s), &mut |s| found |= matches!(s.kind, StmtKind::Return(_)));
    found
}

impl Instrumenter<'_> {
    fn fresh(&mut self, hint: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("_{hint}{}", self.counter);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn point(&mut self, pos: Pos, kind: ChoiceKind) -> u32 {
        let id = self.points.len() as u32;
        self.points.push(ChoicePoint { id, pos, kind });
        id
    }

    /// `if (ndt(k, v)) { v = (T) v; }`
    fn narrow(&mut self, name: &str, ty: Type, pos: Pos, out: &mut Vec<Stmt>) {
        let Some(format) = ty.format() else { return };
        let k = self.point(pos, ChoiceKind::OptionalNarrowRound { var: name.to_string(), format });
        let v = var(name, ty, pos);
        let cond = Expr::typed(
            ExprKind::Call("ndt".into(), vec![Expr::typed(ExprKind::Int(k as i64), Type::Int, pos), v.clone()]),
            Type::Bool,
            pos,
        );
        let assign = stmt(StmtKind::Assign(name.to_string(), Expr::cast(ty, v)), pos);
        out.push(stmt(StmtKind::If(cond, vec![assign], vec![]), pos));
    }

    fn force_narrow(&mut self, name: &str, ty: Type, pos: Pos, out: &mut Vec<Stmt>) {
        if ty.is_float() {
            out.push(stmt(StmtKind::Assign(name.to_string(), Expr::cast(ty, var(name, ty, pos))), pos));
        }
    }

    fn block(&mut self, ctx: &Ctx, body: &[Stmt]) -> Vec<Stmt> {
        let parts: Vec<(bool, Vec<Stmt>)> = body.iter().map(|s| (may_return(s), self.stmt(ctx, s))).collect();
        let mut out: Vec<Stmt> = Vec::new();
        for (returns, mut part) in parts.into_iter().rev() {
            if returns && !out.is_empty() {
                if let Some((_, done)) = &ctx.ret {
                    let pos = out[0].pos;
                    let not_done = Expr::typed(ExprKind::Not(Box::new(var(done, Type::Bool, pos))), Type::Bool, pos);
                    out = vec![stmt(StmtKind::If(not_done, out, vec![]), pos)];
                }
            }
            part.extend(out);
            out = part;
        }
        out
    }

    fn stmt(&mut self, ctx: &Ctx, s: &Stmt) -> Vec<Stmt> {
        let pos = s.pos;
        let mut out = Vec::new();
        match &s.kind {
            StmtKind::Decl(d) => {
                let name = ctx.name(&d.name);
                let init = match &d.init {
                    Some(Init::Expr(e)) => Some(Init::Expr(self.simple(ctx, e, &mut out))),
                    Some(Init::List(es)) => Some(Init::List(es.iter().map(|e| self.atom(ctx, e, &mut out)).collect())),
                    None => None,
                };
                let has_init = matches!(init, Some(Init::Expr(_)));
                out.push(stmt(StmtKind::Decl(Decl { name: name.clone(), init, ..d.clone() }), pos));
                if has_init && d.len.is_none() && self.opts.storage_narrowing {
                    self.narrow(&name, d.ty, pos, &mut out);
                }
            }
            StmtKind::Assign(n, e) => {
                let e = self.simple(ctx, e, &mut out);
                let name = ctx.name(n);
                let ty = e.ty();
                out.push(stmt(StmtKind::Assign(name.clone(), e), pos));
                if self.opts.storage_narrowing {
                    self.narrow(&name, ty, pos, &mut out);
                }
            }
            StmtKind::AssignIndex(n, i, e) => {
                let i = self.atom(ctx, i, &mut out);
                let e = self.atom(ctx, e, &mut out);
                out.push(stmt(StmtKind::AssignIndex(ctx.name(n), i, e), pos));
            }
            StmtKind::If(c, a, b) => {
                let c = self.simple(ctx, c, &mut out);
                let a = self.block(ctx, a);
                let b = self.block(ctx, b);
                out.push(stmt(StmtKind::If(c, a, b), pos));
            }
            StmtKind::While(c, body) => {
                let mut head = Vec::new();
                let first = self.simple(ctx, c, &mut head);
                let mut body = self.block(ctx, body);
                if head.is_empty() && ctx.ret.is_none() {
                    out.push(stmt(StmtKind::While(first, body), pos));
                } else {
                    out.extend(head);
                    let flag = self.fresh("c");
                    out.push(decl(&flag, Type::Bool, Some(first), pos));
                    let mut again = Vec::new();
                    let next = self.simple(ctx, c, &mut again);
                    again.push(stmt(StmtKind::Assign(flag.clone(), next), pos));
                    match &ctx.ret {
                        Some((_, done)) => {
                            let d = var(done, Type::Bool, pos);
                            let not_done = Expr::typed(ExprKind::Not(Box::new(d)), Type::Bool, pos);
                            let stop = stmt(StmtKind::Assign(flag.clone(), Expr::typed(ExprKind::Bool(false), Type::Bool, pos)), pos);
                            body.push(stmt(StmtKind::If(not_done, again, vec![stop]), pos));
                        }
                        None => body.extend(again),
                    }
                    out.push(stmt(StmtKind::While(var(&flag, Type::Bool, pos), body), pos));
                }
            }
            StmtKind::Assert(c) => {
                let c = self.simple(ctx, c, &mut out);
                out.push(stmt(StmtKind::Assert(c), pos));
            }
            StmtKind::Print(e) => {
                let e = self.simple(ctx, e, &mut out);
                out.push(stmt(StmtKind::Print(e), pos));
            }
            StmtKind::Return(e) => match &ctx.ret {
                None => {
                    let e = e.as_ref().map(|e| self.simple(ctx, e, &mut out));
                    out.push(stmt(StmtKind::Return(e), pos));
                }
                Some((result, done)) => {
                    if let (Some(e), Some((r, ty))) = (e, result) {
                        let e = self.simple(ctx, e, &mut out);
                        out.push(stmt(StmtKind::Assign(r.clone(), e), pos));
                        if self.opts.narrow_at_calls {
                            self.force_narrow(r, *ty, pos, &mut out);
                        } else {
                            self.narrow(r, *ty, pos, &mut out);
                        }
                    }
                    out.push(stmt(StmtKind::Assign(done.clone(), Expr::typed(ExprKind::Bool(true), Type::Bool, pos)), pos));
                }
            },
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Call(f, args) if self.prog.function(f).is_some() => {
                    self.inline(ctx, f, args, e.pos, &mut out);
                }
                _ => {
                    let e = self.simple(ctx, e, &mut out);
                    out.push(stmt(StmtKind::Expr(e), pos));
                }
            },
            StmtKind::Skip => {}
        }
        out
    }

    /// An atomic expression (variable or literal) with the value of `e`.
    fn atom(&mut self, ctx: &Ctx, e: &Expr, out: &mut Vec<Stmt>) -> Expr {
        let s = self.simple(ctx, e, out);
        if is_atom(&s) {
            return s;
        }
        let ty = s.ty();
        let rounds = !matches!(&s.kind, ExprKind::Neg(_) | ExprKind::Index(..))
            && !matches!(&s.kind, ExprKind::Call(f, _) if f == "fabs");
        let t = self.fresh("t");
        out.push(decl(&t, ty, Some(s), e.pos));
        if rounds {
            self.narrow(&t, ty, e.pos, out);
        }
        var(&t, ty, e.pos)
    }

    /// An expression whose operands are atomic.
    fn simple(&mut self, ctx: &Ctx, e: &Expr, out: &mut Vec<Stmt>) -> Expr {
        let pos = e.pos;
        let ty = e.ty();
        let typed = |kind| Expr::typed(kind, ty, pos);
        match &e.kind {
            ExprKind::Float(_) | ExprKind::Int(_) | ExprKind::Bool(_) => e.clone(),
            ExprKind::Var(n) => {
                let name = ctx.name(n);
                if ty.is_float() && self.prog.global(n).is_none() {
                    self.narrow(&name, ty, pos, out);
                }
                var(&name, ty, pos)
            }
            ExprKind::Index(a, i) => {
                let i = self.atom(ctx, i, out);
                typed(ExprKind::Index(ctx.name(a), Box::new(i)))
            }
            ExprKind::Neg(x) => typed(ExprKind::Neg(Box::new(self.atom(ctx, x, out)))),
            ExprKind::Not(x) => typed(ExprKind::Not(Box::new(self.atom(ctx, x, out)))),
            ExprKind::Cast(t, x) => typed(ExprKind::Cast(*t, Box::new(self.atom(ctx, x, out)))),
            ExprKind::Binary(op, l, r) => {
                if self.opts.fma && ty.is_float() {
                    if let Some(fused) = fuse(*op, l, r, ty) {
                        return self.grouping(ctx, e, fused, out);
                    }
                }
                self.binary(ctx, e, out)
            }
            ExprKind::Compare(op, l, r) => {
                let l = self.atom(ctx, l, out);
                let r = self.atom(ctx, r, out);
                typed(ExprKind::Compare(*op, Box::new(l), Box::new(r)))
            }
            ExprKind::Logic(op, l, r) => {
                let l = self.atom(ctx, l, out);
                let t = self.fresh("b");
                out.push(decl(&t, Type::Bool, Some(l), pos));
                let mut rest = Vec::new();
                let r = self.simple(ctx, r, &mut rest);
                rest.push(stmt(StmtKind::Assign(t.clone(), r), pos));
                let tv = var(&t, Type::Bool, pos);
                let cond = match op {
                    LogicOp::And => tv.clone(),
                    LogicOp::Or => typed(ExprKind::Not(Box::new(tv.clone()))),
                };
                out.push(stmt(StmtKind::If(cond, rest, vec![]), pos));
                tv
            }
            ExprKind::Call(f, args) if self.prog.function(f).is_some() => {
                self.inline(ctx, f, args, pos, out).expect("non-void call in expression")
            }
            ExprKind::Call(f, args) if f == "ndt" => {
                let args = args.iter().map(|a| typed_rename(ctx, a)).collect();
                typed(ExprKind::Call(f.clone(), args))
            }
            ExprKind::Call(f, args) => {
                let args = args.iter().map(|a| self.atom(ctx, a, out)).collect();
                typed(ExprKind::Call(f.clone(), args))
            }
        }
    }

    fn binary(&mut self, ctx: &Ctx, e: &Expr, out: &mut Vec<Stmt>) -> Expr {
        let ExprKind::Binary(op, l, r) = &e.kind else { unreachable!() };
        let l = self.atom(ctx, l, out);
        let r = self.atom(ctx, r, out);
        Expr::typed(ExprKind::Binary(*op, Box::new(l), Box::new(r)), e.ty(), e.pos)
    }

    /// `if (ndt(k)) { t = separate } else { t = fused }`
    fn grouping(&mut self, ctx: &Ctx, e: &Expr, fused: Expr, out: &mut Vec<Stmt>) -> Expr {
        let (pos, ty) = (e.pos, e.ty());
        let k = self.point(pos, ChoiceKind::FmaGrouping);
        let t = self.fresh("t");
        out.push(decl(&t, ty, None, pos));
        let mut separate = Vec::new();
        let s = self.binary(ctx, e, &mut separate);
        separate.push(stmt(StmtKind::Assign(t.clone(), s), pos));
        let mut joint = Vec::new();
        let f = self.simple(ctx, &fused, &mut joint);
        joint.push(stmt(StmtKind::Assign(t.clone(), f), pos));
        let cond = Expr::typed(
            ExprKind::Call("ndt".into(), vec![Expr::typed(ExprKind::Int(k as i64), Type::Int, pos)]),
            Type::Bool,
            pos,
        );
        out.push(stmt(StmtKind::If(cond, separate, joint), pos));
        self.narrow(&t, ty, pos, out);
        var(&t, ty, pos)
    }

    /// Inlines a call; returns the variable holding the result.
    fn inline(&mut self, ctx: &Ctx, name: &str, args: &[Expr], pos: Pos, out: &mut Vec<Stmt>) -> Option<Expr> {
        let f = self.prog.function(name).expect("defined function");
        let atoms: Vec<Expr> = args.iter().map(|a| self.atom(ctx, a, out)).collect();
        let mut rename = HashMap::new();
        for (p, a) in f.params.iter().zip(atoms) {
            let n = self.fresh(&format!("{name}_{}_", p.name));
            out.push(decl(&n, p.ty, Some(a), pos));
            if self.opts.narrow_at_calls {
                self.force_narrow(&n, p.ty, pos, out);
            } else {
                self.narrow(&n, p.ty, pos, out);
            }
            rename.insert(p.name.clone(), n);
        }
        walk_stmts(&f.body, &mut |s| {
            if let StmtKind::Decl(d) = &s.kind {
                rename.entry(d.name.clone()).or_insert_with(|| d.name.clone());
            }
        });
        let locals: Vec<String> = rename.keys().filter(|k| !f.params.iter().any(|p| &&p.name == k)).cloned().collect();
        for l in locals {
            let n = self.fresh(&format!("{name}_{l}_"));
            rename.insert(l, n);
        }
        let result = (f.ret != Type::Void).then(|| (self.fresh(&format!("{name}_ret")), f.ret));
        if let Some((r, ty)) = &result {
            out.push(decl(r, *ty, None, pos));
        }
        let done = self.fresh(&format!("{name}_done"));
        out.push(decl(&done, Type::Bool, Some(Expr::typed(ExprKind::Bool(false), Type::Bool, pos)), pos));
        let inner = Ctx { rename, ret: Some((result.clone(), done)) };
        out.extend(self.block(&inner, &f.body));
        result.map(|(r, ty)| var(&r, ty, pos))
    }
}

fn typed_rename(ctx: &Ctx, e: &Expr) -> Expr {
    match &e.kind {
        ExprKind::Var(n) => Expr { kind: ExprKind::Var(ctx.name(n)), ..e.clone() },
        _ => e.clone(),
    }
}

#[derive(Clone, Debug)]
pub struct ExploreConfig {
    /// Maximum number of runs.
    pub budget: usize,
    /// Dynamic occurrences of one choice point that get a real choice per
    /// run; later occurrences skip.
    pub loop_cap: usize,
    pub seed: u64,
    pub run: RunConfig,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig { budget: 4096, loop_cap: 64, seed: 0x5eed, run: RunConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeEntry {
    pub outcome: Outcome,
    pub witness: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct OutcomeSet {
    /// Distinct outcomes, in discovery order.
    pub outcomes: Vec<OutcomeEntry>,
    pub choice_points: usize,
    pub explored: usize,
    pub exhaustive: bool,
}

impl OutcomeSet {
    pub fn fingerprints(&self) -> BTreeSet<String> {
        self.outcomes.iter().map(|o| o.outcome.fingerprint()).collect()
    }

    pub fn contains(&self, outcome: &Outcome) -> bool {
        let fp = outcome.fingerprint();
        self.outcomes.iter().any(|o| o.outcome.fingerprint() == fp)
    }
}

pub fn format_witness(w: &[bool]) -> String {
    if w.is_empty() {
        return "-".into();
    }
    w.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_witness(s: &str) -> Option<Vec<bool>> {
    if s == "-" {
        return Some(Vec::new());
    }
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// Where a run's choices come from.
enum Source<'a> {
    Prefix(&'a [bool]),
    All(bool),
    Random(&'a mut ChaCha8Rng),
}

struct Run {
    outcome: Outcome,
    vector: Vec<bool>,
    capped: bool,
}

fn run_once(inst: &Instrumented, inputs: &Inputs, cfg: &ExploreConfig, mut source: Source) -> Result<Run, EvalError> {
    let mut vector = Vec::new();
    let mut seen: HashMap<u32, usize> = HashMap::new();
    let mut capped = false;
    let model = inst.base_model();
    let r = run_with_choices(&model, &inst.program, inputs, &cfg.run, &mut |k| {
        let n = seen.entry(k).or_insert(0);
        *n += 1;
        if *n > cfg.loop_cap {
            capped = true;
            return false;
        }
        let c = match &mut source {
            Source::Prefix(p) => p.get(vector.len()).copied().unwrap_or(false),
            Source::All(b) => *b,
            Source::Random(rng) => rng.gen(),
        };
        vector.push(c);
        c
    })?;
    Ok(Run { outcome: r.outcome.restrict(&inst.observed), vector, capped })
}

/// Re-runs one choice vector.
pub fn replay_witness(inst: &Instrumented, inputs: &Inputs, witness: &[bool], cfg: &ExploreConfig) -> Result<Outcome, EvalError> {
    Ok(run_once(inst, inputs, cfg, Source::Prefix(witness))?.outcome)
}

/// Enumerates choice vectors in lexicographic order (`false` first). When
/// the budget is too small, explores all-skip, all-apply, a lexicographic
/// prefix over half the budget and seeded random vectors for the rest.
pub fn enumerate_outcomes(inst: &Instrumented, inputs: &Inputs, cfg: &ExploreConfig) -> Result<OutcomeSet, EvalError> {
    let budget = cfg.budget.max(2);
    let mut set = OutcomeSet { outcomes: Vec::new(), choice_points: inst.points.len(), explored: 0, exhaustive: true };
    let mut seen = HashSet::new();
    let mut add = |set: &mut OutcomeSet, run: Run| {
        set.explored += 1;
        if run.capped {
            set.exhaustive = false;
        }
        if seen.insert(run.outcome.fingerprint()) {
            set.outcomes.push(OutcomeEntry { outcome: run.outcome, witness: run.vector });
        }
    };

    let first = run_once(inst, inputs, cfg, Source::Prefix(&[]))?;
    let mut next = next_vector(&first.vector);
    add(&mut set, first);
    if next.is_none() {
        return Ok(set);
    }
    let all = run_once(inst, inputs, cfg, Source::All(true))?;
    add(&mut set, all);

    let dfs_budget = budget - budget / 2;
    while let Some(prefix) = next.take() {
        if set.explored >= dfs_budget {
            next = Some(prefix);
            break;
        }
        let run = run_once(inst, inputs, cfg, Source::Prefix(&prefix))?;
        next = next_vector(&run.vector);
        add(&mut set, run);
    }
    if next.is_none() {
        return Ok(set);
    }
    set.exhaustive = false;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while set.explored < budget {
        let run = run_once(inst, inputs, cfg, Source::Random(&mut rng))?;
        add(&mut set, run);
    }
    Ok(set)
}

/// Successor of a complete vector in lexicographic order: flip the last
/// `false` and drop what follows.
fn next_vector(v: &[bool]) -> Option<Vec<bool>> {
    let i = v.iter().rposition(|b| !b)?;
    let mut p = v[..i].to_vec();
    p.push(true);
    Some(p)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    HoldsInAllExplored { exhaustive: bool },
    FailsWithWitness(Vec<bool>),
}

pub fn check_assertion(inst: &Instrumented, inputs: &Inputs, cfg: &ExploreConfig) -> Result<Verdict, EvalError> {
    let set = enumerate_outcomes(inst, inputs, cfg)?;
    Ok(verdict(&set))
}

pub fn verdict(set: &OutcomeSet) -> Verdict {
    match set.outcomes.iter().find(|o| o.outcome.assertion_failed()) {
        Some(o) => Verdict::FailsWithWitness(o.witness.clone()),
        None => Verdict::HoldsInAllExplored { exhaustive: set.exhaustive },
    }
}

fn has_type(prog: &Program, ty: Type) -> bool {
    let mut found = prog.globals.iter().any(|d| d.ty == ty);
    for f in &prog.functions {
        found |= f.ret == ty || f.params.iter().any(|p| p.ty == ty);
        walk_stmts(&f.body, &mut |s| {
            if let StmtKind::Decl(d) = &s.kind {
                found |= d.ty == ty;
            }
            for e in stmt_exprs(s) {
                found |= expr_has_type(e, ty);
            }
        });
    }
    found
}

fn expr_has_type(e: &Expr, ty: Type) -> bool {
    e.ty == Some(ty) || e.children().into_iter().any(|c| expr_has_type(c, ty))
}

/// Catalog models whose every behavior on `prog` is some choice vector of
/// the instrumentation with compute format `compute` (and FMA grouping
/// choices when `fma` is set).
pub fn covered_models(prog: &Program, compute: FpFormat, fma: bool) -> Vec<(&'static str, PlatformModel)> {
    let plain = !has_type(prog, Type::Extended);
    builtin_models()
        .into_iter()
        .filter(|(_, m)| match m {
            PlatformModel::X87 { compute: c, .. } => *c == compute,
            PlatformModel::StrictIEEE(f) if compute == FpFormat::DOUBLE && plain => {
                *f == FpFormat::DOUBLE || !has_type(prog, Type::Single)
            }
            PlatformModel::FmaContract { base, .. } => {
                fma && compute == FpFormat::DOUBLE && plain && **base == PlatformModel::StrictIEEE(FpFormat::DOUBLE)
            }
            _ => false,
        })
        .collect()
}

/// Instruments for every compute format of the catalog and explores each.
pub fn explore_all(prog: &Program, inputs: &Inputs, cfg: &ExploreConfig) -> Result<Vec<(Instrumented, OutcomeSet)>, EvalError> {
    let mut out = Vec::new();
    for compute in [FpFormat::X87_EXTENDED, FpFormat::X87_PC53, FpFormat::DOUBLE] {
        let mut opts = InstrumentOptions::new(compute);
        opts.fma = compute == FpFormat::DOUBLE;
        if compute == FpFormat::DOUBLE && has_type(prog, Type::Extended) {
            continue;
        }
        let inst = instrument(prog, opts);
        let set = enumerate_outcomes(&inst, inputs, cfg)?;
        out.push((inst, set));
    }
    Ok(out)
}
