use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::LangError;

pub fn parse_program(text: &str) -> Result<Program, LangError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0 };
    let mut prog = Program { globals: Vec::new(), functions: Vec::new() };
    if p.peek() == &Tok::Eof {
        return Err(LangError::syntax(p.pos(), "empty program"));
    }
    while p.peek() != &Tok::Eof {
        let pos = p.pos();
        let ty = p.expect_type()?;
        let name = p.expect_ident()?;
        if p.peek() == &Tok::LParen {
            prog.functions.push(p.function_rest(ty, name, pos)?);
        } else {
            prog.globals.extend(p.decl_rest(ty, name, pos)?);
        }
    }
    Ok(prog)
}

/// Parses a standalone expression (used for post-conditions).
pub fn parse_expr(text: &str) -> Result<Expr, LangError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0 };
    let e = p.expr()?;
    p.expect(Tok::Eof, "end of expression")?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Float(s, _) => format!("literal `{s}`"),
        Tok::Int(v) => format!("literal `{v}`"),
        Tok::Type(t) => format!("type `{t}`"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.at + n).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, what: &str) -> Result<T, LangError> {
        Err(LangError::syntax(self.pos(), format!("expected {what}, found {}", describe(self.peek()))))
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), LangError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(what)
        }
    }

    fn expect_ident(&mut self) -> Result<String, LangError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("identifier"),
        }
    }

    fn expect_type(&mut self) -> Result<Type, LangError> {
        match self.peek().clone() {
            Tok::Type(t) => {
                self.bump();
                Ok(t)
            }
            _ => self.err("type"),
        }
    }

    fn function_rest(&mut self, ret: Type, name: String, pos: Pos) -> Result<Function, LangError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.peek() == &Tok::Type(Type::Void) && self.peek_at(1) == &Tok::RParen {
            self.bump();
        }
        if self.peek() != &Tok::RParen {
            loop {
                let ppos = self.pos();
                let ty = self.expect_type()?;
                let pname = self.expect_ident()?;
                params.push(Param { name: pname, ty, pos: ppos });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let body = self.block()?;
        Ok(Function { name, ret, params, body, pos })
    }

    /// Declarators after `type name`: `[N]`, `= init`, `, name2 ...`, `;`.
    fn decl_rest(&mut self, ty: Type, first: String, pos: Pos) -> Result<Vec<Decl>, LangError> {
        let mut out = Vec::new();
        let mut name = first;
        let mut dpos = pos;
        loop {
            let mut len = None;
            if self.eat(&Tok::LBracket) {
                match self.bump() {
                    Tok::Int(n) if n > 0 => len = Some(n as usize),
                    _ => return Err(LangError::syntax(dpos, "array length must be a positive integer literal")),
                }
                self.expect(Tok::RBracket, "`]`")?;
            }
            let mut init = None;
            if self.eat(&Tok::Assign) {
                if self.eat(&Tok::LBrace) {
                    let mut items = Vec::new();
                    if self.peek() != &Tok::RBrace {
                        loop {
                            items.push(self.expr()?);
                            if !self.eat(&Tok::Comma) || self.peek() == &Tok::RBrace {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RBrace, "`}`")?;
                    init = Some(Init::List(items));
                } else {
                    init = Some(Init::Expr(self.expr()?));
                }
            }
            out.push(Decl { name, ty, len, init, pos: dpos });
            if self.eat(&Tok::Comma) {
                dpos = self.pos();
                name = self.expect_ident()?;
                continue;
            }
            self.expect(Tok::Semi, "`;`")?;
            return Ok(out);
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, LangError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut body = Vec::new();
        while self.peek() != &Tok::RBrace {
            if self.peek() == &Tok::Eof {
                return self.err("`}`");
            }
            self.stmt_into(&mut body)?;
        }
        self.bump();
        Ok(body)
    }

    /// A braced block or a single statement.
    fn body(&mut self) -> Result<Vec<Stmt>, LangError> {
        if self.peek() == &Tok::LBrace {
            self.block()
        } else {
            let mut v = Vec::new();
            self.stmt_into(&mut v)?;
            Ok(v)
        }
    }

    fn stmt_into(&mut self, out: &mut Vec<Stmt>) -> Result<(), LangError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Type(ty) => {
                self.bump();
                let name = self.expect_ident()?;
                for d in self.decl_rest(ty, name, pos)? {
                    let p = d.pos;
                    out.push(Stmt::new(StmtKind::Decl(d), p));
                }
                return Ok(());
            }
            Tok::LBrace => {
                // nested blocks share the function's namespace
                out.extend(self.block()?);
                return Ok(());
            }
            Tok::Semi => {
                self.bump();
                StmtKind::Skip
            }
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let c = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let then = self.body()?;
                let els = if self.eat(&Tok::Else) { self.body()? } else { Vec::new() };
                StmtKind::If(c, then, els)
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let c = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                StmtKind::While(c, self.body()?)
            }
            Tok::Assert | Tok::Print => {
                let t = self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Semi, "`;`")?;
                if t == Tok::Assert {
                    StmtKind::Assert(e)
                } else {
                    StmtKind::Print(e)
                }
            }
            Tok::Return => {
                self.bump();
                let e = if self.peek() == &Tok::Semi { None } else { Some(self.expr()?) };
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Return(e)
            }
            Tok::Ident(name) if self.peek_at(1) == &Tok::Assign => {
                self.bump();
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Assign(name, e)
            }
            Tok::Ident(name) if self.peek_at(1) == &Tok::LBracket => {
                // either `a[i] = e;` or an expression statement starting with a[i]
                let save = self.at;
                self.bump();
                self.bump();
                let idx = self.expr()?;
                self.expect(Tok::RBracket, "`]`")?;
                if self.eat(&Tok::Assign) {
                    let e = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    StmtKind::AssignIndex(name, idx, e)
                } else {
                    self.at = save;
                    let e = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    StmtKind::Expr(e)
                }
            }
            _ => {
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Expr(e)
            }
        };
        out.push(Stmt::new(kind, pos));
        Ok(())
    }

    pub fn expr(&mut self) -> Result<Expr, LangError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, LangError> {
        let mut l = self.and_expr()?;
        while self.peek() == &Tok::OrOr {
            let pos = self.pos();
            self.bump();
            let r = self.and_expr()?;
            l = Expr::new(ExprKind::Logic(LogicOp::Or, Box::new(l), Box::new(r)), pos);
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Result<Expr, LangError> {
        let mut l = self.eq_expr()?;
        while self.peek() == &Tok::AndAnd {
            let pos = self.pos();
            self.bump();
            let r = self.eq_expr()?;
            l = Expr::new(ExprKind::Logic(LogicOp::And, Box::new(l), Box::new(r)), pos);
        }
        Ok(l)
    }

    fn eq_expr(&mut self) -> Result<Expr, LangError> {
        let mut l = self.rel_expr()?;
        loop {
            let op = match self.peek() {
                Tok::EqEq => CmpOp::Eq,
                Tok::Ne => CmpOp::Ne,
                _ => return Ok(l),
            };
            let pos = self.pos();
            self.bump();
            let r = self.rel_expr()?;
            l = Expr::new(ExprKind::Compare(op, Box::new(l), Box::new(r)), pos);
        }
    }

    fn rel_expr(&mut self) -> Result<Expr, LangError> {
        let mut l = self.add_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => CmpOp::Lt,
                Tok::Le => CmpOp::Le,
                Tok::Gt => CmpOp::Gt,
                Tok::Ge => CmpOp::Ge,
                _ => return Ok(l),
            };
            let pos = self.pos();
            self.bump();
            let r = self.add_expr()?;
            l = Expr::new(ExprKind::Compare(op, Box::new(l), Box::new(r)), pos);
        }
    }

    fn add_expr(&mut self) -> Result<Expr, LangError> {
        let mut l = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(l),
            };
            let pos = self.pos();
            self.bump();
            let r = self.mul_expr()?;
            l = Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), pos);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, LangError> {
        let mut l = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Rem,
                _ => return Ok(l),
            };
            let pos = self.pos();
            self.bump();
            let r = self.unary()?;
            l = Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), pos);
        }
    }

    fn unary(&mut self) -> Result<Expr, LangError> {
        let pos = self.pos();
        match self.peek() {
            Tok::Minus => {
                self.bump();
                let e = self.unary()?;
                Ok(Expr::new(ExprKind::Neg(Box::new(e)), pos))
            }
            Tok::Bang => {
                self.bump();
                let e = self.unary()?;
                Ok(Expr::new(ExprKind::Not(Box::new(e)), pos))
            }
            Tok::LParen if matches!(self.peek_at(1), Tok::Type(_)) && self.peek_at(2) == &Tok::RParen => {
                self.bump();
                let ty = self.expect_type()?;
                self.bump();
                let e = self.unary()?;
                Ok(Expr::new(ExprKind::Cast(ty, Box::new(e)), pos))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, LangError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Float(text, suffix) => {
                self.bump();
                Ok(Expr::new(ExprKind::Float(FloatLit { text, suffix, value: None }), pos))
            }
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(v), pos))
            }
            Tok::True | Tok::False => {
                let t = self.bump();
                Ok(Expr::new(ExprKind::Bool(t == Tok::True), pos))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if self.peek() != &Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::new(ExprKind::Call(name, args), pos))
                } else if self.eat(&Tok::LBracket) {
                    let i = self.expr()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    Ok(Expr::new(ExprKind::Index(name, Box::new(i)), pos))
                } else {
                    Ok(Expr::new(ExprKind::Var(name), pos))
                }
            }
            _ => self.err("expression"),
        }
    }
}
