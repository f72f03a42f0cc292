//! Floating-point contraction of `a*b + c` patterns into fused multiply-adds.
//!
//! The rule is greedy, innermost first: operands are contracted before
//! their parent, and an addition or subtraction with a product on the left
//! fuses that product; otherwise a product on the right is fused:
//!
//! ```text
//! a*b + c  ->  fma(a, b, c)        c + a*b  ->  fma(a, b, c)
//! a*b - c  ->  fma(a, b, -c)       c - a*b  ->  fma(-a, b, c)
//! ```

use crate::lang::*;

pub fn contract_expressions(prog: &Program, on: bool) -> Program {
    let mut out = prog.clone();
    if !on {
        return out;
    }
    for f in &mut out.functions {
        for s in &mut f.body {
            contract_stmt(s);
        }
    }
    out
}

fn contract_stmt(s: &mut Stmt) {
    match &mut s.kind {
        StmtKind::Decl(d) => match &mut d.init {
            Some(Init::Expr(e)) => contract_expr(e),
            Some(Init::List(es)) => es.iter_mut().for_each(contract_expr),
            None => {}
        },
        StmtKind::Assign(_, e) | StmtKind::Assert(e) | StmtKind::Print(e) | StmtKind::Expr(e) => contract_expr(e),
        StmtKind::AssignIndex(_, i, e) => {
            contract_expr(i);
            contract_expr(e);
        }
        StmtKind::If(c, a, b) => {
            contract_expr(c);
            a.iter_mut().for_each(contract_stmt);
            b.iter_mut().for_each(contract_stmt);
        }
        StmtKind::While(c, b) => {
            contract_expr(c);
            b.iter_mut().for_each(contract_stmt);
        }
        StmtKind::Return(e) => e.iter_mut().for_each(contract_expr),
        StmtKind::Skip => {}
    }
}

pub(crate) fn is_float_product(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Binary(BinOp::Mul, ..)) && e.ty.is_some_and(Type::is_float)
}

/// The fused form of `l op r` (`op` is `+` or `-`) under the greedy rule,
/// or `None` when neither operand is a product.
pub(crate) fn fuse(op: BinOp, l: &Expr, r: &Expr, ty: Type) -> Option<Expr> {
    let neg = |e: &Expr| Expr::typed(ExprKind::Neg(Box::new(e.clone())), ty, e.pos);
    let call = |args: Vec<Expr>| Expr::typed(ExprKind::Call("fma".into(), args), ty, l.pos);
    if let ExprKind::Binary(BinOp::Mul, a, b) = &l.kind {
        if is_float_product(l) {
            let c = if op == BinOp::Sub { neg(r) } else { r.clone() };
            return Some(call(vec![(**a).clone(), (**b).clone(), c]));
        }
    }
    if let ExprKind::Binary(BinOp::Mul, a, b) = &r.kind {
        if is_float_product(r) {
            let a = if op == BinOp::Sub { neg(a) } else { (**a).clone() };
            return Some(call(vec![a, (**b).clone(), l.clone()]));
        }
    }
    None
}

fn contract_expr(e: &mut Expr) {
    match &mut e.kind {
        ExprKind::Index(_, x) | ExprKind::Neg(x) | ExprKind::Not(x) | ExprKind::Cast(_, x) => contract_expr(x),
        ExprKind::Binary(_, a, b) | ExprKind::Compare(_, a, b) | ExprKind::Logic(_, a, b) => {
            contract_expr(a);
            contract_expr(b);
        }
        ExprKind::Call(_, args) => args.iter_mut().for_each(contract_expr),
        ExprKind::Float(_) | ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) => {}
    }
    if let ExprKind::Binary(op @ (BinOp::Add | BinOp::Sub), l, r) = &e.kind {
        if e.ty.is_some_and(Type::is_float) {
            if let Some(fused) = fuse(*op, l, r, e.ty()) {
                *e = Expr { pos: e.pos, ..fused };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contracted(src: &str) -> String {
        pretty_print(&contract_expressions(&compile(src).unwrap(), true))
    }

    #[test]
    fn dot_product_fuses_the_left_product() {
        let out = contracted("double main(double a1, double b1, double a2, double b2) { return a1*b1 + a2*b2; }");
        assert!(out.contains("return fma(a1, b1, a2 * b2);"), "{out}");
    }

    #[test]
    fn subtraction_forms() {
        let out = contracted("double main(double a, double b, double c) { return c - a*b; }");
        assert!(out.contains("return fma(-a, b, c);"), "{out}");
        let out = contracted("double main(double a, double b, double c) { return a*b - c; }");
        assert!(out.contains("return fma(a, b, -c);"), "{out}");
    }

    #[test]
    fn off_or_no_products_is_identity() {
        let p = compile("double main(double a, double b) { return a + b * 0 + 1; }").unwrap();
        assert_eq!(contract_expressions(&p, false), p);
        let q = compile("double main(double a, double b) { return (a + b) / 3; }").unwrap();
        assert_eq!(contract_expressions(&q, true), q);
    }

    #[test]
    fn idempotent() {
        let p = compile("double main(double a, double b, double c) { return (a*b + c*a) + b*c - a*a; }").unwrap();
        let once = contract_expressions(&p, true);
        assert_eq!(contract_expressions(&once, true), once);
    }
}
