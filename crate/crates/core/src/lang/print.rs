use std::fmt::Write;

use fplab_softfloat::{format_hex, Kind};

use super::ast::*;

const INDENT: &str = "    ";

/// Source text for a program. Typed literals print in exact hex with an
/// `f`/`l` suffix for single/extended values, so the output parses and type
/// checks back to the same tree.
pub fn pretty_print(prog: &Program) -> String {
    let mut out = String::new();
    for d in &prog.globals {
        out.push_str(&decl(d));
        out.push('\n');
    }
    for (i, f) in prog.functions.iter().enumerate() {
        if i > 0 || !prog.globals.is_empty() {
            out.push('\n');
        }
        let params: Vec<String> = f.params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
        let _ = writeln!(out, "{} {}({}) {{", f.ret, f.name, params.join(", "));
        block(&mut out, &f.body, 1);
        out.push_str("}\n");
    }
    out
}

fn decl(d: &Decl) -> String {
    let mut s = format!("{} {}", d.ty, d.name);
    if let Some(n) = d.len {
        let _ = write!(s, "[{n}]");
    }
    match &d.init {
        Some(Init::Expr(e)) => {
            let _ = write!(s, " = {}", print_expr(e));
        }
        Some(Init::List(es)) => {
            let items: Vec<String> = es.iter().map(print_expr).collect();
            let _ = write!(s, " = {{{}}}", items.join(", "));
        }
        None => {}
    }
    s.push(';');
    s
}

fn block(out: &mut String, body: &[Stmt], depth: usize) {
    for s in body {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    match &s.kind {
        StmtKind::Decl(d) => {
            let _ = writeln!(out, "{pad}{}", decl(d));
        }
        StmtKind::Assign(v, e) => {
            let _ = writeln!(out, "{pad}{v} = {};", print_expr(e));
        }
        StmtKind::AssignIndex(v, i, e) => {
            let _ = writeln!(out, "{pad}{v}[{}] = {};", print_expr(i), print_expr(e));
        }
        StmtKind::If(c, a, b) => {
            let _ = writeln!(out, "{pad}if ({}) {{", print_expr(c));
            block(out, a, depth + 1);
            if b.is_empty() {
                let _ = writeln!(out, "{pad}}}");
            } else {
                let _ = writeln!(out, "{pad}}} else {{");
                block(out, b, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
        StmtKind::While(c, b) => {
            let _ = writeln!(out, "{pad}while ({}) {{", print_expr(c));
            block(out, b, depth + 1);
            let _ = writeln!(out, "{pad}}}");
        }
        StmtKind::Assert(e) => {
            let _ = writeln!(out, "{pad}assert({});", print_expr(e));
        }
        StmtKind::Print(e) => {
            let _ = writeln!(out, "{pad}print({});", print_expr(e));
        }
        StmtKind::Return(None) => {
            let _ = writeln!(out, "{pad}return;");
        }
        StmtKind::Return(Some(e)) => {
            let _ = writeln!(out, "{pad}return {};", print_expr(e));
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{pad}{};", print_expr(e));
        }
        StmtKind::Skip => {
            let _ = writeln!(out, "{pad};");
        }
    }
}

// binding strength, loosest first
const OR: u8 = 1;
const AND: u8 = 2;
const EQ: u8 = 3;
const REL: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const UNARY: u8 = 7;
const ATOM: u8 = 8;

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Logic(LogicOp::Or, ..) => OR,
        ExprKind::Logic(LogicOp::And, ..) => AND,
        ExprKind::Compare(CmpOp::Eq | CmpOp::Ne, ..) => EQ,
        ExprKind::Compare(..) => REL,
        ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => ADD,
        ExprKind::Binary(..) => MUL,
        ExprKind::Neg(_) | ExprKind::Not(_) | ExprKind::Cast(..) => UNARY,
        ExprKind::Float(lit) if lit.value.is_some_and(|v| v.is_sign_negative() && !v.is_nan()) => UNARY,
        ExprKind::Int(n) if *n < 0 => UNARY,
        _ => ATOM,
    }
}

pub fn print_expr(e: &Expr) -> String {
    at(e, 0)
}

/// Prints `e` in a position that needs at least binding strength `min`.
fn at(e: &Expr, min: u8) -> String {
    let s = bare(e);
    if level(e) < min {
        format!("({s})")
    } else {
        s
    }
}

fn bare(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Float(lit) => float_lit(lit),
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Var(v) => v.clone(),
        ExprKind::Index(v, i) => format!("{v}[{}]", at(i, 0)),
        ExprKind::Neg(x) => {
            let inner = at(x, UNARY);
            if inner.starts_with('-') {
                format!("-({inner})")
            } else {
                format!("-{inner}")
            }
        }
        ExprKind::Not(x) => format!("!{}", at(x, UNARY)),
        ExprKind::Cast(t, x) => format!("({t}) {}", at(x, UNARY)),
        ExprKind::Binary(op, l, r) => {
            let p = level(e);
            format!("{} {} {}", at(l, p), op.symbol(), at(r, p + 1))
        }
        ExprKind::Compare(op, l, r) => {
            let p = level(e);
            format!("{} {} {}", at(l, p), op.symbol(), at(r, p + 1))
        }
        ExprKind::Logic(op, l, r) => {
            let p = level(e);
            let sym = if *op == LogicOp::And { "&&" } else { "||" };
            format!("{} {sym} {}", at(l, p), at(r, p + 1))
        }
        ExprKind::Call(f, args) => {
            let args: Vec<String> = args.iter().map(|a| at(a, 0)).collect();
            format!("{f}({})", args.join(", "))
        }
    }
}

fn float_lit(lit: &FloatLit) -> String {
    let Some(v) = lit.value else {
        let suffix = match lit.suffix {
            Some(Type::Single) => "f",
            Some(Type::Extended) => "l",
            _ => "",
        };
        return match lit.text.as_str() {
            "inf" => "INFINITY".into(),
            "nan" => "NAN".into(),
            t => format!("{t}{suffix}"),
        };
    };
    match v.kind() {
        Kind::NaN => "NAN".into(),
        Kind::Infinity if v.is_sign_negative() => "-INFINITY".into(),
        Kind::Infinity => "INFINITY".into(),
        _ => {
            let suffix = match Type::from_format(v.format()) {
                Some(Type::Single) => "f",
                Some(Type::Extended) => "l",
                _ => "",
            };
            format!("{}{suffix}", format_hex(&v))
        }
    }
}
