//! The mini-language: a small C-like imperative language with `float`
//! (single), `double` and `extended` types, hexadecimal float literals,
//! read-only global tables and non-recursive functions.
//!
//! Pipeline: [`parse_program`] keeps literals as text; [`typecheck`] binds
//! every literal to an exact value and makes every format change an explicit
//! `Cast` node; [`pretty_print`] emits source that parses and type checks
//! back to the same typed tree.

pub mod ast;
pub mod lexer;
mod parser;
mod print;
mod typecheck;

pub use ast::*;
pub use parser::{parse_expr, parse_program};
pub use print::{pretty_print, print_expr};
pub use typecheck::typecheck;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LangError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: u32, col: u32, message: String },
    #[error("{line}:{col}: type error: {message}")]
    Type { line: u32, col: u32, message: String },
}

impl LangError {
    pub fn syntax(pos: Pos, message: impl Into<String>) -> LangError {
        LangError::Syntax { line: pos.line, col: pos.col, message: message.into() }
    }

    pub fn type_error(pos: Pos, message: impl Into<String>) -> LangError {
        LangError::Type { line: pos.line, col: pos.col, message: message.into() }
    }
}

/// Parses and type checks in one step.
pub fn compile(text: &str) -> Result<Program, LangError> {
    typecheck(parse_program(text)?)
}

/// Parses a post-condition. Chained comparisons such as `-180 <= r <= 180`
/// read as the conjunction of the adjacent comparisons.
pub fn parse_postcondition(text: &str) -> Result<Expr, LangError> {
    Ok(unchain(parse_expr(text)?))
}

fn unchain(e: Expr) -> Expr {
    let pos = e.pos;
    match e.kind {
        ExprKind::Compare(op, l, r) => match l.kind {
            ExprKind::Compare(..) => {
                let left = unchain(*l);
                let middle = rightmost_operand(&left).clone();
                let right = Expr::new(ExprKind::Compare(op, Box::new(middle), r), pos);
                Expr::new(ExprKind::Logic(LogicOp::And, Box::new(left), Box::new(right)), pos)
            }
            _ => Expr::new(ExprKind::Compare(op, l, r), pos),
        },
        ExprKind::Logic(op, l, r) => Expr::new(ExprKind::Logic(op, Box::new(unchain(*l)), Box::new(unchain(*r))), pos),
        ExprKind::Not(x) => Expr::new(ExprKind::Not(Box::new(unchain(*x))), pos),
        kind => Expr::new(kind, pos),
    }
}

fn rightmost_operand(e: &Expr) -> &Expr {
    match &e.kind {
        ExprKind::Compare(_, _, r) => r,
        ExprKind::Logic(_, _, r) => rightmost_operand(r),
        _ => e,
    }
}

/// Adds `assert(post)` to the entry function before every `return` and at
/// the end of its body, so every engine checks the post-condition.
pub fn with_postcondition(mut prog: Program, post: &Expr) -> Program {
    fn insert(body: &mut Vec<Stmt>, post: &Expr) {
        let mut out = Vec::with_capacity(body.len() + 1);
        for mut s in body.drain(..) {
            match &mut s.kind {
                StmtKind::If(_, a, b) => {
                    insert(a, post);
                    insert(b, post);
                }
                StmtKind::While(_, b) => insert(b, post),
                StmtKind::Return(_) => out.push(Stmt::new(StmtKind::Assert(post.clone()), s.pos)),
                _ => {}
            }
            out.push(s);
        }
        *body = out;
    }
    if let Some(f) = prog.functions.iter_mut().find(|f| f.name == ENTRY) {
        insert(&mut f.body, post);
        if !matches!(f.body.last().map(|s| &s.kind), Some(StmtKind::Return(_))) {
            f.body.push(Stmt::new(StmtKind::Assert(post.clone()), post.pos));
        }
    }
    prog
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chained_comparison_unfolds() {
        let e = parse_postcondition("-180 <= r <= 180").unwrap();
        let want = parse_expr("-180 <= r && r <= 180").unwrap();
        assert_eq!(e, want);
    }

    #[test]
    fn postcondition_goes_before_returns() {
        let p = parse_program("double main(double x) { if (x < 0) { return 1; } return 2; }").unwrap();
        let p = with_postcondition(p, &parse_postcondition("x == x").unwrap());
        let text = pretty_print(&p);
        assert_eq!(text.matches("assert").count(), 2, "{text}");
    }
}
