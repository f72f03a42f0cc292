use std::fmt;

use fplab_softfloat::{FpFormat, FpValue};

/// Source position (1-based). Positions never take part in structural
/// equality, so a parsed, printed and re-parsed program compares equal to
/// the original.
#[derive(Clone, Copy, Debug, Default, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Single,
    Double,
    Extended,
    Int,
    Bool,
    Void,
}

impl Type {
    pub fn format(self) -> Option<FpFormat> {
        match self {
            Type::Single => Some(FpFormat::SINGLE),
            Type::Double => Some(FpFormat::DOUBLE),
            Type::Extended => Some(FpFormat::X87_EXTENDED),
            _ => None,
        }
    }

    /// The declared type whose storage format is `fmt`.
    pub fn from_format(fmt: FpFormat) -> Option<Type> {
        [Type::Single, Type::Double, Type::Extended].into_iter().find(|t| t.format() == Some(fmt))
    }

    pub fn is_float(self) -> bool {
        self.format().is_some()
    }

    pub fn is_numeric(self) -> bool {
        self.is_float() || self == Type::Int
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Type::Single => "float",
            Type::Double => "double",
            Type::Extended => "extended",
            Type::Int => "int",
            Type::Bool => "bool",
            Type::Void => "void",
        }
    }

    /// Common type of two float types (single < double < extended).
    pub fn wider(a: Type, b: Type) -> Type {
        a.max(b)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    /// The operator `op'` with `a op b == b op' a`.
    pub fn swap(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => CmpOp::Ne,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicOp {
    And,
    Or,
}

/// A floating-point literal. Before type checking only the text is known;
/// type checking binds the exact value in the literal's type.
#[derive(Clone, Debug)]
pub struct FloatLit {
    pub text: String,
    /// Type fixed by an `f`/`l` suffix.
    pub suffix: Option<Type>,
    pub value: Option<FpValue>,
}

impl PartialEq for FloatLit {
    fn eq(&self, other: &FloatLit) -> bool {
        match (&self.value, &other.value) {
            (Some(a), Some(b)) => a == b,
            _ => self.text == other.text && self.suffix == other.suffix,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Float(FloatLit),
    Int(i64),
    Bool(bool),
    Var(String),
    Index(String, Box<Expr>),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Logic(LogicOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    Cast(Type, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    /// Static type, set by the type checker.
    pub ty: Option<Type>,
    pub pos: Pos,
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Expr {
        Expr { kind, ty: None, pos }
    }

    pub fn typed(kind: ExprKind, ty: Type, pos: Pos) -> Expr {
        Expr { kind, ty: Some(ty), pos }
    }

    /// Static type; panics on an unchecked expression.
    pub fn ty(&self) -> Type {
        self.ty.expect("expression has not been type checked")
    }

    pub fn var(name: &str, ty: Type) -> Expr {
        Expr::typed(ExprKind::Var(name.to_string()), ty, Pos::default())
    }

    pub fn float(value: FpValue, ty: Type) -> Expr {
        let lit = FloatLit { text: fplab_softfloat::format_hex(&value), suffix: None, value: Some(value) };
        Expr::typed(ExprKind::Float(lit), ty, Pos::default())
    }

    pub fn cast(ty: Type, e: Expr) -> Expr {
        let pos = e.pos;
        Expr::typed(ExprKind::Cast(ty, Box::new(e)), ty, pos)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Float(_) | ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Var(_) => vec![],
            ExprKind::Index(_, i) => vec![i],
            ExprKind::Neg(e) | ExprKind::Not(e) | ExprKind::Cast(_, e) => vec![e],
            ExprKind::Binary(_, a, b) | ExprKind::Compare(_, a, b) | ExprKind::Logic(_, a, b) => vec![a, b],
            ExprKind::Call(_, args) => args.iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    Expr(Expr),
    List(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub ty: Type,
    /// Array length for array declarations.
    pub len: Option<usize>,
    pub init: Option<Init>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Decl(Decl),
    Assign(String, Expr),
    AssignIndex(String, Expr, Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    While(Expr, Vec<Stmt>),
    Assert(Expr),
    Print(Expr),
    Return(Option<Expr>),
    /// A call evaluated for its effects.
    Expr(Expr),
    Skip,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

impl Stmt {
    pub fn new(kind: StmtKind, pos: Pos) -> Stmt {
        Stmt { kind, pos }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function {
    pub name: String,
    pub ret: Type,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

/// A whole program: read-only global tables and constants, and functions.
/// Execution starts at `main`.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub globals: Vec<Decl>,
    pub functions: Vec<Function>,
}

pub const ENTRY: &str = "main";

/// Names reserved for builtin functions.
pub const BUILTINS: [&str; 6] = ["floor", "fabs", "sqrt", "nextafter", "fma", "ndt"];

impl Program {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn main(&self) -> Option<&Function> {
        self.function(ENTRY)
    }

    pub fn global(&self, name: &str) -> Option<&Decl> {
        self.globals.iter().find(|d| d.name == name)
    }
}

/// Visits every statement of a body, nested ones included, in source order.
pub fn walk_stmts<'a>(body: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in body {
        f(s);
        match &s.kind {
            StmtKind::If(_, a, b) => {
                walk_stmts(a, f);
                walk_stmts(b, f);
            }
            StmtKind::While(_, b) => walk_stmts(b, f),
            _ => {}
        }
    }
}

/// Every expression directly held by a statement (not nested statements).
pub fn stmt_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::Decl(d) => match &d.init {
            Some(Init::Expr(e)) => vec![e],
            Some(Init::List(es)) => es.iter().collect(),
            None => vec![],
        },
        StmtKind::Assign(_, e) | StmtKind::Assert(e) | StmtKind::Print(e) | StmtKind::Expr(e) => vec![e],
        StmtKind::AssignIndex(_, i, e) => vec![i, e],
        StmtKind::If(c, _, _) | StmtKind::While(c, _) => vec![c],
        StmtKind::Return(e) => e.iter().collect(),
        StmtKind::Skip => vec![],
    }
}
