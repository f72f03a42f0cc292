//! Interval abstract interpretation of typed programs, sound for every model
//! of an [`Envelope`] and every rounding mode.

use std::collections::BTreeMap;
use std::fmt;

use fplab_softfloat::{format_hex, from_integer, to_integer_trunc, FpFormat, FpValue, Op, RoundingMode};

use crate::contract::fuse;
use crate::eval::Value;
use crate::interval::{iarith, inextafter, is_le, is_lt, min_normal, refine_ge, refine_le, refine_strict_gt, refine_strict_lt, widen, Interval};
use crate::lang::*;
use crate::model::{builtin_models, model_by_name, PlatformModel};

/// The models an analysis must be sound for.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub name: String,
    pub models: Vec<(&'static str, PlatformModel)>,
}

pub const ENVELOPE_NAMES: [&str; 4] = ["strict", "x87", "sse-ftz", "all"];

pub fn envelope_by_name(name: &str) -> Option<Envelope> {
    let pick = |names: &[&str]| -> Vec<(&'static str, PlatformModel)> {
        builtin_models().into_iter().filter(|(n, _)| names.contains(n)).collect()
    };
    let models = match name {
        "strict" | "strict-double" => pick(&["strict-double"]),
        "x87" => builtin_models()
            .into_iter()
            .filter(|(n, m)| *n == "strict-double" || matches!(m, PlatformModel::X87 { .. }))
            .collect(),
        "sse-ftz" => pick(&["strict-double", "sse-ftz", "sse-daz"]),
        "all" => builtin_models(),
        other => {
            let (n, m) = builtin_models().into_iter().find(|(n, _)| *n == other)?;
            debug_assert!(model_by_name(n).is_some());
            vec![(n, m)]
        }
    };
    Some(Envelope { name: name.to_string(), models })
}

impl Envelope {
    /// Formats an operation of static format `stat` may round to, `stat`
    /// included since any model may later narrow the result to it.
    pub fn op_formats(&self, stat: FpFormat) -> Vec<FpFormat> {
        let mut out = vec![stat];
        for (_, m) in &self.models {
            let f = m.op_format(stat);
            if !out.contains(&f) {
                out.push(f);
            }
        }
        out
    }

    pub fn ftz(&self) -> bool {
        self.models.iter().any(|(_, m)| m.ftz())
    }

    pub fn daz(&self) -> bool {
        self.models.iter().any(|(_, m)| m.daz())
    }

    pub fn contracts(&self) -> bool {
        self.models.iter().any(|(_, m)| m.contracts())
    }

    /// Whether variables always hold values of their declared type.
    pub fn exact_vars(&self) -> bool {
        self.models.iter().all(|(_, m)| m.stores_at_assignments())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
    pub empty: bool,
}

impl IntRange {
    pub fn new(lo: i64, hi: i64) -> IntRange {
        IntRange { lo, hi, empty: lo > hi }
    }

    pub fn full() -> IntRange {
        IntRange::new(i64::MIN, i64::MAX)
    }

    pub fn bottom() -> IntRange {
        IntRange { lo: 0, hi: 0, empty: true }
    }

    pub fn contains(&self, n: i64) -> bool {
        !self.empty && self.lo <= n && n <= self.hi
    }

    fn join(&self, o: &IntRange) -> IntRange {
        match (self.empty, o.empty) {
            (true, _) => *o,
            (_, true) => *self,
            _ => IntRange::new(self.lo.min(o.lo), self.hi.max(o.hi)),
        }
    }

    fn meet(&self, o: &IntRange) -> IntRange {
        if self.empty || o.empty {
            return IntRange::bottom();
        }
        let r = IntRange::new(self.lo.max(o.lo), self.hi.min(o.hi));
        if r.empty {
            IntRange::bottom()
        } else {
            r
        }
    }

    fn widen(&self, next: &IntRange) -> IntRange {
        if self.empty {
            return *next;
        }
        if next.empty {
            return *self;
        }
        let steps = int_ladder();
        let lo = if next.lo < self.lo { *steps.iter().rev().find(|t| **t <= next.lo).expect("ladder") } else { self.lo };
        let hi = if next.hi > self.hi { *steps.iter().find(|t| **t >= next.hi).expect("ladder") } else { self.hi };
        IntRange::new(lo, hi)
    }

    /// Clamps an exact range to `i64`; the flag reports lost values.
    fn clamp(lo: i128, hi: i128) -> (IntRange, bool) {
        let overflow = lo < i64::MIN as i128 || hi > i64::MAX as i128;
        let c = |v: i128| v.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
        (IntRange::new(c(lo), c(hi)), overflow)
    }
}

fn int_ladder() -> Vec<i64> {
    let mut pos: Vec<i64> = (0..63).map(|k| 1i64 << k).collect();
    pos.push(i64::MAX);
    let mut all: Vec<i64> = pos.iter().rev().map(|v| if *v == i64::MAX { i64::MIN } else { -v }).collect();
    all.push(0);
    all.extend(pos);
    all
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoolSet {
    pub can_true: bool,
    pub can_false: bool,
}

impl BoolSet {
    const BOTH: BoolSet = BoolSet { can_true: true, can_false: true };

    fn of(b: bool) -> BoolSet {
        BoolSet { can_true: b, can_false: !b }
    }

    fn can(&self, truth: bool) -> bool {
        if truth {
            self.can_true
        } else {
            self.can_false
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbsValue {
    Float(Interval),
    Int(IntRange),
    Bool(BoolSet),
    /// Summary of every element, and the length.
    Array(Box<AbsValue>, usize),
    Void,
}

impl AbsValue {
    pub fn top(ty: Type) -> AbsValue {
        match ty {
            Type::Int => AbsValue::Int(IntRange::full()),
            Type::Bool => AbsValue::Bool(BoolSet::BOTH),
            Type::Void => AbsValue::Void,
            t => AbsValue::Float(Interval { exact_in: t.format(), ..Interval::top() }),
        }
    }

    pub fn of(v: &Value) -> AbsValue {
        match v {
            Value::Float(x) => AbsValue::Float(Interval::point(*x)),
            Value::Int(n) => AbsValue::Int(IntRange::new(*n, *n)),
            Value::Bool(b) => AbsValue::Bool(BoolSet::of(*b)),
            Value::Void => AbsValue::Void,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (AbsValue::Float(i), Value::Float(x)) => i.contains(x),
            (AbsValue::Int(r), Value::Int(n)) => r.contains(*n),
            (AbsValue::Bool(b), Value::Bool(x)) => b.can(*x),
            (AbsValue::Void, Value::Void) => true,
            _ => false,
        }
    }

    fn float(&self) -> Interval {
        match self {
            AbsValue::Float(i) => *i,
            _ => panic!("typed program: float value"),
        }
    }

    fn int(&self) -> IntRange {
        match self {
            AbsValue::Int(r) => *r,
            _ => panic!("typed program: int value"),
        }
    }

    fn bool(&self) -> BoolSet {
        match self {
            AbsValue::Bool(b) => *b,
            _ => panic!("typed program: bool value"),
        }
    }

    fn join(&self, o: &AbsValue) -> AbsValue {
        match (self, o) {
            (AbsValue::Float(a), AbsValue::Float(b)) => AbsValue::Float(a.join(b)),
            (AbsValue::Int(a), AbsValue::Int(b)) => AbsValue::Int(a.join(b)),
            (AbsValue::Bool(a), AbsValue::Bool(b)) => {
                AbsValue::Bool(BoolSet { can_true: a.can_true || b.can_true, can_false: a.can_false || b.can_false })
            }
            (AbsValue::Array(a, n), AbsValue::Array(b, _)) => AbsValue::Array(Box::new(a.join(b)), *n),
            _ => self.clone(),
        }
    }

    fn widen(&self, next: &AbsValue) -> AbsValue {
        match (self, next) {
            (AbsValue::Float(a), AbsValue::Float(b)) => AbsValue::Float(widen(a, b)),
            (AbsValue::Int(a), AbsValue::Int(b)) => AbsValue::Int(a.widen(b)),
            (AbsValue::Array(a, n), AbsValue::Array(b, _)) => AbsValue::Array(Box::new(a.widen(b)), *n),
            _ => self.join(next),
        }
    }

    fn leq(&self, o: &AbsValue) -> bool {
        match (self, o) {
            (AbsValue::Float(a), AbsValue::Float(b)) => b.contains_interval(a),
            (AbsValue::Int(a), AbsValue::Int(b)) => a.empty || (!b.empty && b.lo <= a.lo && a.hi <= b.hi),
            (AbsValue::Bool(a), AbsValue::Bool(b)) => (!a.can_true || b.can_true) && (!a.can_false || b.can_false),
            (AbsValue::Array(a, _), AbsValue::Array(b, _)) => a.leq(b),
            _ => true,
        }
    }
}

impl fmt::Display for AbsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbsValue::Float(i) => write!(f, "{i}"),
            AbsValue::Int(r) if r.empty => f.write_str("empty"),
            AbsValue::Int(r) => write!(f, "[{}, {}]", r.lo, r.hi),
            AbsValue::Bool(b) => match (b.can_true, b.can_false) {
                (true, true) => f.write_str("{false, true}"),
                (true, false) => f.write_str("{true}"),
                (false, true) => f.write_str("{false}"),
                (false, false) => f.write_str("empty"),
            },
            AbsValue::Array(e, n) => write!(f, "[{n}] of {e}"),
            AbsValue::Void => f.write_str("void"),
        }
    }
}

/// Variable name to declared type and abstract value.
pub type AbsState = BTreeMap<String, (Type, AbsValue)>;

fn join_states(a: Option<AbsState>, b: Option<AbsState>) -> Option<AbsState> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(mut a), Some(b)) => {
            for (k, (t, v)) in b {
                match a.get_mut(&k) {
                    Some((_, av)) => *av = av.join(&v),
                    None => {
                        a.insert(k, (t, v));
                    }
                }
            }
            Some(a)
        }
    }
}

fn widen_states(prev: &Option<AbsState>, next: Option<AbsState>) -> Option<AbsState> {
    match (prev, next) {
        (None, x) => x,
        (Some(p), None) => Some(p.clone()),
        (Some(p), Some(mut n)) => {
            for (k, (_, v)) in n.iter_mut() {
                if let Some((_, pv)) = p.get(k) {
                    *v = pv.widen(v);
                }
            }
            Some(n)
        }
    }
}

fn leq_states(a: &Option<AbsState>, b: &Option<AbsState>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(a), Some(b)) => a.iter().all(|(k, (_, v))| b.get(k).is_some_and(|(_, w)| v.leq(w))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlarmKind {
    Overflow,
    InvalidOperation,
    DivisionByZero,
    AssertionMayFail,
    IndexOutOfRange,
    IntOverflow,
    InvalidConversion,
}

impl AlarmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlarmKind::Overflow => "overflow",
            AlarmKind::InvalidOperation => "nan",
            AlarmKind::DivisionByZero => "div-by-zero",
            AlarmKind::AssertionMayFail => "assert",
            AlarmKind::IndexOutOfRange => "index",
            AlarmKind::IntOverflow => "int-overflow",
            AlarmKind::InvalidConversion => "conversion",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alarm {
    pub line: u32,
    pub col: u32,
    pub kind: AlarmKind,
    pub detail: String,
}

impl fmt::Display for Alarm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.col, self.kind.name(), self.detail)
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    /// State of `main` when it returns (with the result under `return`);
    /// `None` when no execution reaches the end.
    pub exit: Option<AbsState>,
    pub alarms: Vec<Alarm>,
    /// Joined state at the entry of each statement, by source position.
    pub points: BTreeMap<(u32, u32), AbsState>,
}

impl Analysis {
    pub fn value(&self, name: &str) -> Option<&AbsValue> {
        self.exit.as_ref()?.get(name).map(|(_, v)| v)
    }

    /// Value of `name` on entry to the first statement of source line `line`.
    pub fn value_before(&self, line: u32, name: &str) -> Option<&AbsValue> {
        let (_, st) = self.points.range((line, 0)..(line + 1, 0)).next()?;
        st.get(name).map(|(_, v)| v)
    }

    pub fn has_alarm(&self, kind: AlarmKind) -> bool {
        self.alarms.iter().any(|a| a.kind == kind)
    }
}

/// Input ranges for parameters of `main`; missing parameters range over
/// every non-NaN value of their type.
pub type InputRanges = BTreeMap<String, AbsValue>;

const WIDEN_DELAY: usize = 3;
const MAX_ITERATIONS: usize = 200;
const NARROWING_PASSES: usize = 2;

pub fn analyze(prog: &Program, inputs: &InputRanges, env: &Envelope) -> Analysis {
    let main = prog.main().expect("typed program has main");
    let mut a = Analyzer { prog, env, alarms: BTreeMap::new(), points: BTreeMap::new(), globals: AbsState::new() };
    a.globals = a.global_state();
    let mut st = a.frame(main);
    for p in &main.params {
        let v = match inputs.get(&p.name) {
            Some(AbsValue::Float(i)) => AbsValue::Float(Interval { exact_in: p.ty.format(), ..i.close(p.ty.format().expect("float")) }),
            Some(v) => v.clone(),
            None => AbsValue::top(p.ty),
        };
        st.insert(p.name.clone(), (p.ty, v));
    }
    let mut ret = None;
    let out = a.block(Some(st), &main.body, main.ret, &mut ret);
    let exit = join_states(out, ret);
    Analysis { exit, alarms: a.alarms.into_values().collect(), points: a.points }
}

struct Analyzer<'a> {
    prog: &'a Program,
    env: &'a Envelope,
    alarms: BTreeMap<(u32, u32, AlarmKind), Alarm>,
    points: BTreeMap<(u32, u32), AbsState>,
    globals: AbsState,
}

fn zero_value(ty: Type, len: Option<usize>) -> AbsValue {
    let v = match ty.format() {
        Some(f) => AbsValue::Float(Interval::point(FpValue::zero(f, fplab_softfloat::Sign::Positive))),
        None => match ty {
            Type::Int => AbsValue::Int(IntRange::new(0, 0)),
            Type::Bool => AbsValue::Bool(BoolSet::of(false)),
            _ => AbsValue::Void,
        },
    };
    match len {
        Some(n) => AbsValue::Array(Box::new(v), n),
        None => v,
    }
}

impl Analyzer<'_> {
    fn alarm(&mut self, pos: Pos, kind: AlarmKind, detail: String) {
        self.alarms.insert((pos.line, pos.col, kind), Alarm { line: pos.line, col: pos.col, kind, detail });
    }

    fn global_state(&mut self) -> AbsState {
        let mut g = AbsState::new();
        for d in &self.prog.globals {
            let st = AbsState::new();
            let v = match (&d.init, d.len) {
                (Some(Init::Expr(e)), None) => self.expr(&st, e),
                (None, len) => zero_value(d.ty, len),
                (Some(Init::List(es)), Some(n)) => {
                    let mut elem = if es.len() < n { Some(zero_value(d.ty, None)) } else { None };
                    for e in es {
                        let v = self.expr(&st, e);
                        elem = Some(elem.map_or(v.clone(), |x| x.join(&v)));
                    }
                    AbsValue::Array(Box::new(elem.unwrap_or_else(|| zero_value(d.ty, None))), n)
                }
                _ => unreachable!("typed program"),
            };
            g.insert(d.name.clone(), (d.ty, v));
        }
        g
    }

    /// Every parameter and local of `f`, zero-initialized.
    fn frame(&self, f: &Function) -> AbsState {
        let mut st = AbsState::new();
        for p in &f.params {
            st.insert(p.name.clone(), (p.ty, zero_value(p.ty, None)));
        }
        walk_stmts(&f.body, &mut |s| {
            if let StmtKind::Decl(d) = &s.kind {
                st.insert(d.name.clone(), (d.ty, zero_value(d.ty, d.len)));
            }
        });
        st
    }

    /// A value about to be stored in a variable of type `ty`.
    fn stored(&self, v: AbsValue, ty: Type) -> AbsValue {
        match (v, ty.format()) {
            (AbsValue::Float(i), Some(f)) => {
                let mut i = i.close(f);
                i.exact_in = if self.env.exact_vars() { Some(f) } else { None };
                AbsValue::Float(i)
            }
            (v, _) => v,
        }
    }

    fn block(&mut self, st: Option<AbsState>, body: &[Stmt], ret_ty: Type, ret: &mut Option<AbsState>) -> Option<AbsState> {
        let mut st = st;
        for s in body {
            st = self.stmt(st?, s, ret_ty, ret);
        }
        st
    }

    fn stmt(&mut self, mut st: AbsState, s: &Stmt, ret_ty: Type, ret: &mut Option<AbsState>) -> Option<AbsState> {
        let pos = s.pos;
        let key = (pos.line, pos.col);
        let joined = join_states(self.points.remove(&key), Some(st.clone())).expect("non-empty");
        self.points.insert(key, joined);
        match &s.kind {
            StmtKind::Decl(d) => {
                let v = match (&d.init, d.len) {
                    (Some(Init::Expr(e)), None) => {
                        let v = self.expr(&st, e);
                        self.stored(v, d.ty)
                    }
                    (None, len) => zero_value(d.ty, len),
                    (Some(Init::List(es)), Some(n)) => {
                        let mut elem = if es.len() < n { Some(zero_value(d.ty, None)) } else { None };
                        for e in es {
                            let v = self.expr(&st, e);
                            let v = self.array_elem(v, d.ty);
                            elem = Some(elem.map_or(v.clone(), |x| x.join(&v)));
                        }
                        AbsValue::Array(Box::new(elem.unwrap_or_else(|| zero_value(d.ty, None))), n)
                    }
                    _ => unreachable!("typed program"),
                };
                st.insert(d.name.clone(), (d.ty, v));
            }
            StmtKind::Assign(name, e) => {
                let v = self.expr(&st, e);
                let ty = st[name].0;
                let v = self.stored(v, ty);
                st.insert(name.clone(), (ty, v));
            }
            StmtKind::AssignIndex(name, i, e) => {
                let idx = self.expr(&st, i).int();
                let v = self.expr(&st, e);
                let (ty, AbsValue::Array(elem, n)) = st[name].clone() else { unreachable!("typed program") };
                self.check_index(pos, name, idx, n);
                let v = self.array_elem(v, ty);
                st.insert(name.clone(), (ty, AbsValue::Array(Box::new(elem.join(&v)), n)));
            }
            StmtKind::If(c, a, b) => {
                self.expr(&st, c);
                let t = self.assume(&st, c, true);
                let f = self.assume(&st, c, false);
                let t = self.block(t, a, ret_ty, ret);
                let f = self.block(f, b, ret_ty, ret);
                return join_states(t, f);
            }
            StmtKind::While(c, body) => return self.while_loop(st, c, body, ret_ty, ret),
            StmtKind::Assert(c) => {
                let b = self.expr(&st, c).bool();
                if b.can_false {
                    self.alarm(pos, AlarmKind::AssertionMayFail, format!("assertion `{}` may fail", print_expr(c)));
                }
                return self.assume(&st, c, true);
            }
            StmtKind::Print(e) | StmtKind::Expr(e) => {
                self.expr(&st, e);
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => {
                        let v = self.expr(&st, e);
                        match (v, ret_ty.format()) {
                            (AbsValue::Float(i), Some(f)) => AbsValue::Float(i.close(f)),
                            (v, _) => v,
                        }
                    }
                    None => AbsValue::Void,
                };
                let mut out = st;
                out.insert(crate::eval::RETURN_NAME.to_string(), (ret_ty, v));
                *ret = join_states(ret.take(), Some(out));
                return None;
            }
            StmtKind::Skip => {}
        }
        Some(st)
    }

    fn while_loop(&mut self, entry: AbsState, c: &Expr, body: &[Stmt], ret_ty: Type, ret: &mut Option<AbsState>) -> Option<AbsState> {
        let entry = Some(entry);
        let mut head = entry.clone();
        let step = |this: &mut Self, head: &Option<AbsState>, ret: &mut Option<AbsState>| {
            let inside = head.as_ref().and_then(|h| {
                this.expr(h, c);
                this.assume(h, c, true)
            });
            let out = this.block(inside, body, ret_ty, ret);
            join_states(entry.clone(), out)
        };
        let mut i = 0;
        loop {
            let next = step(self, &head, ret);
            let next = if i < WIDEN_DELAY { join_states(head.clone(), next) } else { widen_states(&head, next) };
            if leq_states(&next, &head) {
                break;
            }
            head = next;
            i += 1;
            if i > MAX_ITERATIONS {
                head = head.map(|h| h.into_iter().map(|(k, (t, v))| (k, (t, top_like(t, &v)))).collect());
                break;
            }
        }
        for _ in 0..NARROWING_PASSES {
            let next = step(self, &head, ret);
            if leq_states(&next, &head) {
                head = next;
            }
        }
        let h = head?;
        self.assume(&h, c, false)
    }

    fn check_index(&mut self, pos: Pos, name: &str, idx: IntRange, len: usize) {
        if !idx.empty && (idx.lo < 0 || idx.hi >= len as i64) {
            self.alarm(pos, AlarmKind::IndexOutOfRange, format!("index of `{name}[{len}]` in [{}, {}]", idx.lo, idx.hi));
        }
    }

    fn array_elem(&self, v: AbsValue, ty: Type) -> AbsValue {
        match (v, ty.format()) {
            (AbsValue::Float(i), Some(f)) => AbsValue::Float(self.narrowed(&i, f)),
            (v, _) => v,
        }
    }

    /// Result of converting to `f` under the envelope.
    fn narrowed(&self, i: &Interval, f: FpFormat) -> Interval {
        let i = if self.env.daz() { i.with_flushed_zero(FpFormat::SINGLE) } else { *i };
        let mut r = i.close(f);
        if self.env.ftz() {
            r = r.with_flushed_zero(f);
        }
        r.exact_in = Some(f);
        r
    }

    fn lookup<'s>(&'s self, st: &'s AbsState, name: &str) -> &'s AbsValue {
        st.get(name).or_else(|| self.globals.get(name)).map(|(_, v)| v).expect("typed program: declared")
    }

    fn expr(&mut self, st: &AbsState, e: &Expr) -> AbsValue {
        let pos = e.pos;
        match &e.kind {
            ExprKind::Float(lit) => AbsValue::Float(Interval::point(lit.value.expect("typed literal"))),
            ExprKind::Int(n) => AbsValue::Int(IntRange::new(*n, *n)),
            ExprKind::Bool(b) => AbsValue::Bool(BoolSet::of(*b)),
            ExprKind::Var(n) => self.lookup(st, n).clone(),
            ExprKind::Index(n, i) => {
                let idx = self.expr(st, i).int();
                let AbsValue::Array(elem, len) = self.lookup(st, n).clone() else { unreachable!("typed program") };
                self.check_index(pos, n, idx, len);
                *elem
            }
            ExprKind::Neg(x) => match self.expr(st, x) {
                AbsValue::Float(i) => AbsValue::Float(Interval { exact_in: None, ..i.neg() }),
                AbsValue::Int(r) => {
                    if r.empty {
                        return AbsValue::Int(r);
                    }
                    let (r, overflow) = IntRange::clamp(-(r.hi as i128), -(r.lo as i128));
                    if overflow {
                        self.alarm(pos, AlarmKind::IntOverflow, "negation may overflow".into());
                    }
                    AbsValue::Int(r)
                }
                _ => unreachable!("typed program"),
            },
            ExprKind::Not(x) => {
                let b = self.expr(st, x).bool();
                AbsValue::Bool(BoolSet { can_true: b.can_false, can_false: b.can_true })
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.expr(st, l);
                let b = self.expr(st, r);
                match (a, b) {
                    (AbsValue::Int(a), AbsValue::Int(b)) => AbsValue::Int(self.int_op(pos, *op, a, b)),
                    (AbsValue::Float(a), AbsValue::Float(b)) => {
                        let fop = match op {
                            BinOp::Add => Op::Add,
                            BinOp::Sub => Op::Sub,
                            BinOp::Mul => Op::Mul,
                            BinOp::Div => Op::Div,
                            BinOp::Rem => unreachable!("typed program"),
                        };
                        let mut r = self.float_op(pos, fop, e.ty(), &[a, b]);
                        if self.env.contracts() {
                            if let Some(fused) = fuse(*op, l, r_expr(e), e.ty()) {
                                r = r.join(&self.expr(st, &fused).float());
                            }
                        }
                        AbsValue::Float(r)
                    }
                    _ => unreachable!("typed program"),
                }
            }
            ExprKind::Compare(op, l, r) => {
                let a = self.expr(st, l);
                let b = self.expr(st, r);
                AbsValue::Bool(self.compare(*op, &a, &b))
            }
            ExprKind::Logic(op, l, r) => {
                let a = self.expr(st, l).bool();
                let short = *op == LogicOp::Or;
                let rest = if a.can(!short) {
                    match self.assume(st, l, !short) {
                        Some(s) => self.expr(&s, r).bool(),
                        None => BoolSet { can_true: false, can_false: false },
                    }
                } else {
                    BoolSet { can_true: false, can_false: false }
                };
                AbsValue::Bool(match op {
                    LogicOp::And => BoolSet { can_true: rest.can_true, can_false: a.can_false || rest.can_false },
                    LogicOp::Or => BoolSet { can_true: a.can_true || rest.can_true, can_false: rest.can_false },
                })
            }
            ExprKind::Cast(t, x) => {
                let v = self.expr(st, x);
                self.cast(pos, *t, v)
            }
            ExprKind::Call(f, args) => self.call(st, e, f, args),
        }
    }

    fn float_op(&mut self, pos: Pos, op: Op, ty: Type, args: &[Interval]) -> Interval {
        let stat = ty.format().expect("float operation");
        let args: Vec<Interval> =
            if self.env.daz() { args.iter().map(|a| a.with_flushed_zero(FpFormat::SINGLE)).collect() } else { args.to_vec() };
        let formats = self.env.op_formats(stat);
        let (mut r, div_zero) = iarith(op, &args, &formats);
        if self.env.ftz() {
            for f in &formats {
                r = r.with_flushed_zero(*f);
            }
        }
        if div_zero {
            self.alarm(pos, AlarmKind::DivisionByZero, "divisor may be zero".into());
        }
        if args.iter().all(|a| !a.may_be_nan) && r.may_be_nan {
            self.alarm(pos, AlarmKind::InvalidOperation, format!("{} may produce NaN", op.name()));
        }
        if args.iter().all(|a| a.empty || !a.has_infinite_bound()) && r.has_infinite_bound() {
            self.alarm(pos, AlarmKind::Overflow, format!("{} may overflow: {}", op.name(), r.hex()));
        }
        r
    }

    fn int_op(&mut self, pos: Pos, op: BinOp, a: IntRange, b: IntRange) -> IntRange {
        if a.empty || b.empty {
            return IntRange::bottom();
        }
        let corners = |f: &dyn Fn(i128, i128) -> i128, a: IntRange, b: IntRange| {
            let vals = [f(a.lo as i128, b.lo as i128), f(a.lo as i128, b.hi as i128), f(a.hi as i128, b.lo as i128), f(a.hi as i128, b.hi as i128)];
            (*vals.iter().min().expect("four"), *vals.iter().max().expect("four"))
        };
        let (lo, hi) = match op {
            BinOp::Add => corners(&|x, y| x + y, a, b),
            BinOp::Sub => corners(&|x, y| x - y, a, b),
            BinOp::Mul => corners(&|x, y| x * y, a, b),
            BinOp::Div | BinOp::Rem => {
                if b.contains(0) {
                    self.alarm(pos, AlarmKind::DivisionByZero, "integer divisor may be zero".into());
                }
                let parts = [IntRange::new(b.lo, b.hi.min(-1)), IntRange::new(b.lo.max(1), b.hi)];
                let mut out: Option<(i128, i128)> = None;
                for p in parts.iter().filter(|p| !p.empty) {
                    let (lo, hi) = if op == BinOp::Div {
                        corners(&|x, y| x / y, a, *p)
                    } else {
                        let m = (p.lo as i128).abs().max((p.hi as i128).abs()) - 1;
                        let lo = if a.lo >= 0 { 0 } else { (a.lo as i128).max(-m) };
                        let hi = if a.hi <= 0 { 0 } else { (a.hi as i128).min(m) };
                        (lo, hi)
                    };
                    out = Some(out.map_or((lo, hi), |(l, h)| (l.min(lo), h.max(hi))));
                }
                match out {
                    Some(r) => r,
                    None => return IntRange::bottom(),
                }
            }
        };
        let (r, overflow) = IntRange::clamp(lo, hi);
        if overflow {
            self.alarm(pos, AlarmKind::IntOverflow, format!("integer {} may overflow", op.symbol()));
        }
        r
    }

    fn cast(&mut self, pos: Pos, t: Type, v: AbsValue) -> AbsValue {
        match (v, t.format()) {
            (AbsValue::Float(i), Some(f)) => AbsValue::Float(self.narrowed(&i, f)),
            (AbsValue::Int(r), Some(f)) => {
                if r.empty {
                    return AbsValue::Float(Interval::bottom());
                }
                let lo = from_integer(f, RoundingMode::TowardNegative, r.lo).value;
                let hi = from_integer(f, RoundingMode::TowardPositive, r.hi).value;
                let mut i = Interval::new(lo, hi);
                if self.env.ftz() {
                    i = i.with_flushed_zero(f);
                }
                i.exact_in = Some(f);
                AbsValue::Float(i)
            }
            (AbsValue::Float(i), None) => {
                if i.empty {
                    if i.may_be_nan {
                        self.alarm(pos, AlarmKind::InvalidConversion, "NaN converted to int".into());
                    }
                    return AbsValue::Int(IntRange::bottom());
                }
                let lo = to_integer_trunc(&i.lo);
                let hi = to_integer_trunc(&i.hi);
                if i.may_be_nan || lo.is_none() || hi.is_none() {
                    self.alarm(pos, AlarmKind::InvalidConversion, format!("{} may not convert to int", i.hex()));
                }
                // runs that convert an out-of-range value stop with an error
                let sat = |v: &FpValue, t: Option<i64>| t.unwrap_or(if v.is_sign_negative() { i64::MIN } else { i64::MAX });
                let (l, h) = (sat(&i.lo, lo), sat(&i.hi, hi));
                let all_out = (lo.is_none() && hi.is_none() && i.lo.is_sign_negative() == i.hi.is_sign_negative()) || i.is_bottom();
                AbsValue::Int(if all_out { IntRange::bottom() } else { IntRange::new(l, h) })
            }
            (v, None) => v,
            _ => unreachable!("typed program"),
        }
    }

    fn call(&mut self, st: &AbsState, e: &Expr, f: &str, args: &[Expr]) -> AbsValue {
        let pos = e.pos;
        let ty = e.ty();
        match f {
            "fabs" => AbsValue::Float(Interval { exact_in: None, ..self.expr(st, &args[0]).float().abs() }),
            "sqrt" | "fma" => {
                let vals: Vec<Interval> = args.iter().map(|a| self.expr(st, a).float()).collect();
                let op = if f == "sqrt" { Op::Sqrt } else { Op::Fma };
                AbsValue::Float(self.float_op(pos, op, ty, &vals))
            }
            "floor" => {
                let mut x = self.expr(st, &args[0]).float();
                if self.env.daz() {
                    x = x.with_flushed_zero(FpFormat::SINGLE);
                }
                AbsValue::Float(x.floor())
            }
            "nextafter" => {
                let d = FpFormat::DOUBLE;
                let x = self.expr(st, &args[0]).float();
                let y = self.expr(st, &args[1]).float();
                let (x, y) = (self.narrowed(&x, d), self.narrowed(&y, d));
                let mut r = inextafter(&x, &y);
                if self.env.ftz() {
                    r = r.with_flushed_zero(d);
                }
                AbsValue::Float(r)
            }
            "ndt" => AbsValue::Bool(BoolSet::BOTH),
            _ => self.user_call(st, f, args),
        }
    }

    fn user_call(&mut self, st: &AbsState, name: &str, args: &[Expr]) -> AbsValue {
        let prog = self.prog;
        let f = prog.function(name).expect("typed program: defined function");
        let vals: Vec<AbsValue> = args.iter().map(|a| self.expr(st, a)).collect();
        let mut frame = self.frame(f);
        for (p, v) in f.params.iter().zip(vals) {
            let v = self.stored(v, p.ty);
            frame.insert(p.name.clone(), (p.ty, v));
        }
        let mut ret = None;
        self.block(Some(frame), &f.body, f.ret, &mut ret);
        match ret.and_then(|mut r| r.remove(crate::eval::RETURN_NAME)) {
            Some((_, v)) => v,
            None if f.ret == Type::Void => AbsValue::Void,
            None => match zero_value(f.ret, None) {
                AbsValue::Float(_) => AbsValue::Float(Interval::bottom()),
                AbsValue::Int(_) => AbsValue::Int(IntRange::bottom()),
                _ => AbsValue::Bool(BoolSet { can_true: false, can_false: false }),
            },
        }
    }

    fn float_cmp_operands(&self, a: &Interval, b: &Interval) -> (Interval, Interval) {
        if self.env.daz() {
            let f = |i: &Interval| i.with_flushed_zero(FpFormat::SINGLE);
            (f(a), f(b))
        } else {
            (*a, *b)
        }
    }

    fn compare(&self, op: CmpOp, a: &AbsValue, b: &AbsValue) -> BoolSet {
        match (a, b) {
            (AbsValue::Float(a), AbsValue::Float(b)) => {
                let (a, b) = self.float_cmp_operands(a, b);
                float_compare(op, &a, &b)
            }
            (AbsValue::Int(a), AbsValue::Int(b)) => int_compare(op, a, b),
            (AbsValue::Bool(a), AbsValue::Bool(b)) => {
                let same = (a.can_true && b.can_true) || (a.can_false && b.can_false);
                let differ = (a.can_true && b.can_false) || (a.can_false && b.can_true);
                match op {
                    CmpOp::Eq => BoolSet { can_true: same, can_false: differ },
                    _ => BoolSet { can_true: differ, can_false: same },
                }
            }
            _ => unreachable!("typed program"),
        }
    }

    /// `st` restricted to executions where `c` evaluates to `truth`.
    fn assume(&mut self, st: &AbsState, c: &Expr, truth: bool) -> Option<AbsState> {
        match &c.kind {
            ExprKind::Bool(b) => (*b == truth).then(|| st.clone()),
            ExprKind::Var(n) => {
                let b = self.lookup(st, n).bool();
                if !b.can(truth) {
                    return None;
                }
                let mut s = st.clone();
                if let Some(slot) = s.get_mut(n) {
                    slot.1 = AbsValue::Bool(BoolSet::of(truth));
                }
                Some(s)
            }
            ExprKind::Not(x) => self.assume(st, x, !truth),
            ExprKind::Logic(op, l, r) => {
                let both = (*op == LogicOp::And) == truth;
                if both {
                    let s = self.assume(st, l, truth)?;
                    self.assume(&s, r, truth)
                } else {
                    let first = self.assume(st, l, truth);
                    let second = self.assume(st, l, !truth).and_then(|s| self.assume(&s, r, truth));
                    join_states(first, second)
                }
            }
            ExprKind::Compare(op, l, r) => {
                let a = self.expr(st, l);
                let b = self.expr(st, r);
                if !self.compare(*op, &a, &b).can(truth) {
                    return None;
                }
                let mut s = st.clone();
                if let ExprKind::Var(n) = &l.kind {
                    self.refine_var(&mut s, n, *op, &a, &b, truth);
                }
                if let ExprKind::Var(n) = &r.kind {
                    self.refine_var(&mut s, n, op.swap(), &b, &a, truth);
                }
                if s.values().any(|(_, v)| is_empty(v)) {
                    return None;
                }
                Some(s)
            }
            _ => {
                let b = self.expr(st, c).bool();
                b.can(truth).then(|| st.clone())
            }
        }
    }

    /// Narrows variable `n` (value `x`) knowing `x op y` is `truth`.
    fn refine_var(&self, st: &mut AbsState, n: &str, op: CmpOp, x: &AbsValue, y: &AbsValue, truth: bool) {
        let Some((ty, _)) = st.get(n).cloned() else { return };
        let refined = match (x, y) {
            (AbsValue::Float(x), AbsValue::Float(y)) => {
                if self.env.daz() && (reaches_subnormal(x) || reaches_subnormal(y)) {
                    return;
                }
                let r = refine_float(x, op, y, truth);
                AbsValue::Float(match ty.format() {
                    Some(f) => Interval { exact_in: x.exact_in, ..r.close(f) },
                    None => r,
                })
            }
            (AbsValue::Int(x), AbsValue::Int(y)) => AbsValue::Int(refine_int(x, op, y, truth)),
            _ => return,
        };
        st.insert(n.to_string(), (ty, refined));
    }
}

/// The right operand of a binary expression.
fn r_expr(e: &Expr) -> &Expr {
    match &e.kind {
        ExprKind::Binary(_, _, r) => r,
        _ => unreachable!("binary expression"),
    }
}

fn is_empty(v: &AbsValue) -> bool {
    match v {
        AbsValue::Float(i) => i.is_bottom(),
        AbsValue::Int(r) => r.empty,
        AbsValue::Bool(b) => !b.can_true && !b.can_false,
        _ => false,
    }
}

fn top_like(ty: Type, v: &AbsValue) -> AbsValue {
    match v {
        AbsValue::Array(_, n) => AbsValue::Array(Box::new(top_like(ty, &zero_value(ty, None))), *n),
        AbsValue::Float(_) => AbsValue::Float(Interval::top().with_nan(true)),
        _ => AbsValue::top(ty),
    }
}

fn reaches_subnormal(i: &Interval) -> bool {
    let m = min_normal(FpFormat::SINGLE);
    !i.empty && is_lt(&i.lo, &m) && is_lt(&m.negate(), &i.hi)
}

fn float_compare(op: CmpOp, a: &Interval, b: &Interval) -> BoolSet {
    let nan = a.may_be_nan || b.may_be_nan;
    if a.empty || b.empty {
        return BoolSet { can_true: nan && op == CmpOp::Ne, can_false: nan && op != CmpOp::Ne };
    }
    let equal_points = is_le(&a.hi, &a.lo) && is_le(&b.hi, &b.lo) && is_le(&a.lo, &b.lo) && is_le(&b.lo, &a.lo);
    let overlap = is_le(&a.lo, &b.hi) && is_le(&b.lo, &a.hi);
    match op {
        CmpOp::Lt => BoolSet { can_true: is_lt(&a.lo, &b.hi), can_false: nan || is_le(&b.lo, &a.hi) },
        CmpOp::Le => BoolSet { can_true: is_le(&a.lo, &b.hi), can_false: nan || is_lt(&b.lo, &a.hi) },
        CmpOp::Gt => BoolSet { can_true: is_lt(&b.lo, &a.hi), can_false: nan || is_le(&a.lo, &b.hi) },
        CmpOp::Ge => BoolSet { can_true: is_le(&b.lo, &a.hi), can_false: nan || is_lt(&a.lo, &b.hi) },
        CmpOp::Eq => BoolSet { can_true: overlap, can_false: nan || !equal_points },
        CmpOp::Ne => BoolSet { can_true: nan || !equal_points, can_false: overlap },
    }
}

fn int_compare(op: CmpOp, a: &IntRange, b: &IntRange) -> BoolSet {
    if a.empty || b.empty {
        return BoolSet { can_true: false, can_false: false };
    }
    let overlap = a.lo <= b.hi && b.lo <= a.hi;
    let equal_points = a.lo == a.hi && b.lo == b.hi && a.lo == b.lo;
    match op {
        CmpOp::Lt => BoolSet { can_true: a.lo < b.hi, can_false: a.hi >= b.lo },
        CmpOp::Le => BoolSet { can_true: a.lo <= b.hi, can_false: a.hi > b.lo },
        CmpOp::Gt => BoolSet { can_true: a.hi > b.lo, can_false: a.lo <= b.hi },
        CmpOp::Ge => BoolSet { can_true: a.hi >= b.lo, can_false: a.lo < b.hi },
        CmpOp::Eq => BoolSet { can_true: overlap, can_false: !equal_points },
        CmpOp::Ne => BoolSet { can_true: !equal_points, can_false: overlap },
    }
}

fn negate(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Ge,
        CmpOp::Le => CmpOp::Gt,
        CmpOp::Gt => CmpOp::Le,
        CmpOp::Ge => CmpOp::Lt,
        CmpOp::Eq => CmpOp::Ne,
        CmpOp::Ne => CmpOp::Eq,
    }
}

fn refine_float(x: &Interval, op: CmpOp, y: &Interval, truth: bool) -> Interval {
    let holds = |op: CmpOp| match op {
        CmpOp::Lt => refine_strict_lt(x, y),
        CmpOp::Le => refine_le(x, y),
        CmpOp::Gt => refine_strict_gt(x, y),
        CmpOp::Ge => refine_ge(x, y),
        CmpOp::Eq => Interval { may_be_nan: false, ..x.meet(y) },
        CmpOp::Ne => *x,
    };
    if truth {
        return holds(op);
    }
    if op == CmpOp::Ne {
        return holds(CmpOp::Eq);
    }
    // a false ordered comparison also covers unordered operands
    if y.may_be_nan || op == CmpOp::Eq {
        return *x;
    }
    let r = holds(negate(op));
    if x.may_be_nan {
        r.with_nan(true)
    } else {
        r
    }
}

fn refine_int(x: &IntRange, op: CmpOp, y: &IntRange, truth: bool) -> IntRange {
    if x.empty || y.empty {
        return IntRange::bottom();
    }
    let op = if truth { op } else { negate(op) };
    let r = match op {
        CmpOp::Lt => IntRange::new(x.lo, x.hi.min(y.hi.saturating_sub(1))),
        CmpOp::Le => IntRange::new(x.lo, x.hi.min(y.hi)),
        CmpOp::Gt => IntRange::new(x.lo.max(y.lo.saturating_add(1)), x.hi),
        CmpOp::Ge => IntRange::new(x.lo.max(y.lo), x.hi),
        CmpOp::Eq => x.meet(y),
        CmpOp::Ne if y.lo == y.hi && x.lo == y.lo => IntRange::new(x.lo.saturating_add(1), x.hi),
        CmpOp::Ne if y.lo == y.hi && x.hi == y.lo => IntRange::new(x.lo, x.hi.saturating_sub(1)),
        CmpOp::Ne => *x,
    };
    if r.empty {
        IntRange::bottom()
    } else {
        r
    }
}

/// Parses `lo,hi` / `[lo, hi]` / a single value into the range of a
/// parameter of type `ty` (bounds rounded outward).
pub fn parse_range(text: &str, ty: Type) -> Result<AbsValue, String> {
    let t = text.trim();
    let inner = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')).unwrap_or(t);
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    let (lo, hi) = match parts.as_slice() {
        [v] => (*v, *v),
        [lo, hi] => (*lo, *hi),
        _ => return Err(format!("expected a value or `[lo, hi]`, got `{text}`")),
    };
    match ty {
        Type::Int => {
            let p = |s: &str| s.parse::<i64>().map_err(|e| e.to_string());
            Ok(AbsValue::Int(IntRange::new(p(lo)?, p(hi)?)))
        }
        Type::Bool => {
            let p = |s: &str| s.parse::<bool>().map_err(|e| e.to_string());
            let (a, b) = (p(lo)?, p(hi)?);
            Ok(AbsValue::Bool(BoolSet { can_true: a || b, can_false: !a || !b }))
        }
        t => {
            let f = t.format().ok_or("not a numeric parameter")?;
            let p = |s: &str, mode| fplab_softfloat::parse_literal(s, f, mode).map_err(|e| e.to_string());
            let lo = p(lo, RoundingMode::TowardNegative)?;
            let hi = p(hi, RoundingMode::TowardPositive)?;
            if lo.is_nan() || hi.is_nan() {
                return Err("NaN is not a range bound".into());
            }
            let i = Interval::new(lo, hi);
            if i.empty {
                return Err(format!("empty range {} > {}", format_hex(&lo), format_hex(&hi)));
            }
            Ok(AbsValue::Float(Interval { exact_in: Some(f), ..i }))
        }
    }
}
