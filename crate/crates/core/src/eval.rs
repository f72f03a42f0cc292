//! Deterministic evaluation of typed programs under a [`PlatformModel`].

use std::collections::BTreeMap;
use std::fmt;

use fplab_softfloat::{
    arith, compare, convert, floor_int, format_hex, from_integer, next_after, parse_literal, to_integer_trunc,
    CompareResult, Flags, FpFormat, FpValue, Op, Rounded, RoundingMode, Sign,
};
use serde_json::json;

use crate::contract::contract_expressions;
use crate::lang::*;
use crate::model::{PlatformModel, SpillPolicy};

pub const DEFAULT_LOOP_BUDGET: u64 = 1_000_000;

/// Name under which the entry function's return value is observed.
pub const RETURN_NAME: &str = "return";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Float(FpValue),
    Int(i64),
    Bool(bool),
    Void,
}

impl Value {
    pub fn zero(ty: Type) -> Value {
        match ty.format() {
            Some(f) => Value::Float(FpValue::zero(f, Sign::Positive)),
            None => match ty {
                Type::Int => Value::Int(0),
                Type::Bool => Value::Bool(false),
                _ => Value::Void,
            },
        }
    }

    pub fn as_float(&self) -> Option<FpValue> {
        match self {
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }

    fn float(self) -> FpValue {
        self.as_float().expect("typed program: float value")
    }

    fn int(self) -> i64 {
        match self {
            Value::Int(n) => n,
            _ => panic!("typed program: int value"),
        }
    }

    fn bool(self) -> bool {
        match self {
            Value::Bool(b) => b,
            _ => panic!("typed program: bool value"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(v) => f.write_str(&format_hex(v)),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Void => f.write_str("void"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("{pos}: loop iteration budget of {budget} exhausted")]
    LoopBudget { pos: Pos, budget: u64 },
    #[error("{pos}: index {index} out of bounds for `{array}[{len}]`")]
    IndexOutOfBounds { pos: Pos, array: String, index: i64, len: usize },
    #[error("{pos}: integer overflow")]
    IntOverflow { pos: Pos },
    #[error("{pos}: integer division by zero")]
    DivByZero { pos: Pos },
    #[error("{pos}: {value} does not convert to int")]
    InvalidConversion { pos: Pos, value: String },
}

impl RuntimeError {
    /// Short stable name used in reports and corpus expectations.
    pub fn kind(&self) -> &'static str {
        match self {
            RuntimeError::LoopBudget { .. } => "loop-budget",
            RuntimeError::IndexOutOfBounds { .. } => "index",
            RuntimeError::IntOverflow { .. } => "int-overflow",
            RuntimeError::DivByZero { .. } => "div-by-zero",
            RuntimeError::InvalidConversion { .. } => "conversion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("missing input for parameter `{0}`")]
    MissingInput(String),
    #[error("`{0}` is not a parameter of main")]
    UnknownInput(String),
    #[error("input `{name}`: {message}")]
    BadInput { name: String, message: String },
}

pub type Inputs = BTreeMap<String, Value>;

/// Parses `name = text` bindings for the parameters of `main`, rounding
/// float texts to nearest in the parameter's type.
pub fn parse_inputs(prog: &Program, pairs: &[(String, String)]) -> Result<Inputs, EvalError> {
    let main = prog.main().expect("typed program has main");
    let mut out = Inputs::new();
    for (name, text) in pairs {
        let p = main.params.iter().find(|p| &p.name == name).ok_or_else(|| EvalError::UnknownInput(name.clone()))?;
        let bad = |message: String| EvalError::BadInput { name: name.clone(), message };
        let text = text.trim();
        let v = match p.ty {
            Type::Int => Value::Int(text.parse().map_err(|e| bad(format!("{e}")))?),
            Type::Bool => Value::Bool(text.parse().map_err(|e| bad(format!("{e}")))?),
            t => Value::Float(
                parse_literal(text, t.format().expect("float"), RoundingMode::NearestEven)
                    .map_err(|e| bad(e.to_string()))?,
            ),
        };
        out.insert(name.clone(), v);
    }
    for p in &main.params {
        if !out.contains_key(&p.name) {
            return Err(EvalError::MissingInput(p.name.clone()));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: RoundingMode,
    pub loop_budget: u64,
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { mode: RoundingMode::NearestEven, loop_budget: DEFAULT_LOOP_BUDGET, trace: false }
    }
}

impl RunConfig {
    pub fn with_mode(mode: RoundingMode) -> Self {
        RunConfig { mode, ..RunConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssertRecord {
    pub pos: Pos,
    pub passed: bool,
}

/// What a run exposes: the scalars of `main` (parameters, then locals in
/// declaration order, then the return value), each in its declared type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub values: Vec<(String, Value)>,
    pub asserts: Vec<AssertRecord>,
    pub error: Option<RuntimeError>,
    pub output: Vec<String>,
}

impl Outcome {
    pub fn get(&self, name: &str) -> Option<Value> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn assertion_failed(&self) -> bool {
        self.asserts.iter().any(|a| !a.passed)
    }

    pub fn failed_assert(&self) -> Option<Pos> {
        self.asserts.iter().find(|a| !a.passed).map(|a| a.pos)
    }

    /// Keeps only the named values (in the given order).
    pub fn restrict(&self, names: &[String]) -> Outcome {
        let values = names.iter().filter_map(|n| self.get(n).map(|v| (n.clone(), v))).collect();
        Outcome { values, ..self.clone() }
    }

    /// Bit-exact identity of the outcome: values, failed assertion, error.
    pub fn fingerprint(&self) -> String {
        let mut s: Vec<String> = self.values.iter().map(|(n, v)| format!("{n} = {v}")).collect();
        if let Some(p) = self.failed_assert() {
            s.push(format!("assert failed at {p}"));
        }
        if let Some(e) = &self.error {
            s.push(format!("error {}", e.kind()));
        }
        s.join("\n")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOp {
    Arith(Op),
    Convert,
    FromInt,
    Floor,
    NextAfter,
    FlushToZero,
    DenormalsAreZero,
    Observe,
}

impl TraceOp {
    pub fn name(self) -> &'static str {
        match self {
            TraceOp::Arith(op) => op.name(),
            TraceOp::Convert => "convert",
            TraceOp::FromInt => "from_int",
            TraceOp::Floor => "floor",
            TraceOp::NextAfter => "nextafter",
            TraceOp::FlushToZero => "ftz",
            TraceOp::DenormalsAreZero => "daz",
            TraceOp::Observe => "observe",
        }
    }
}

/// One rounding-relevant step of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub point: Pos,
    pub op: TraceOp,
    pub inputs: Vec<FpValue>,
    pub int_input: Option<i64>,
    pub format: FpFormat,
    pub output: FpValue,
    pub flags: Flags,
    /// Observed variable, for `Observe` records.
    pub var: Option<String>,
}

impl TraceRecord {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "point": self.point.to_string(),
            "op": self.op.name(),
            "format": self.format.name(),
            "inputs": self.inputs.iter().map(format_hex).collect::<Vec<_>>(),
            "output": format_hex(&self.output),
            "flags": self.flags.names(),
        });
        if let Some(n) = self.int_input {
            v["int_input"] = json!(n);
        }
        if let Some(var) = &self.var {
            v["var"] = json!(var);
        }
        v
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub mode: Option<RoundingMode>,
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace record {index} ({op} at {point}) replays to {got}, recorded {want}")]
pub struct ReplayMismatch {
    pub index: usize,
    pub op: &'static str,
    pub point: Pos,
    pub got: String,
    pub want: String,
}

impl Trace {
    /// Recomputes every record from its inputs and returns the observed
    /// final values.
    pub fn replay(&self) -> Result<Vec<(String, FpValue)>, ReplayMismatch> {
        let mode = self.mode.unwrap_or(RoundingMode::NearestEven);
        let mut observed = Vec::new();
        for (index, r) in self.records.iter().enumerate() {
            let got = match r.op {
                TraceOp::Arith(op) => arith(op, r.format, mode, &r.inputs).expect("recorded arity").value,
                TraceOp::Convert | TraceOp::Observe => convert(&r.inputs[0], r.format, mode).value,
                TraceOp::FromInt => from_integer(r.format, mode, r.int_input.unwrap_or(0)).value,
                TraceOp::Floor => floor_int(r.format, &r.inputs[0]),
                TraceOp::NextAfter => next_after(r.format, &r.inputs[0], &r.inputs[1]),
                TraceOp::FlushToZero | TraceOp::DenormalsAreZero => flush(&r.inputs[0]),
            };
            if got != r.output {
                return Err(ReplayMismatch {
                    index,
                    op: r.op.name(),
                    point: r.point,
                    got: format_hex(&got),
                    want: format_hex(&r.output),
                });
            }
            if let (TraceOp::Observe, Some(var)) = (r.op, &r.var) {
                observed.push((var.clone(), got));
            }
        }
        Ok(observed)
    }
}

pub struct RunResult {
    pub outcome: Outcome,
    pub trace: Trace,
}

/// Runs `main` of a typed program under `model`. `ndt(...)` calls answer
/// `false`.
pub fn run_program(model: &PlatformModel, prog: &Program, inputs: &Inputs, cfg: &RunConfig) -> Result<RunResult, EvalError> {
    run_with_choices(model, prog, inputs, cfg, &mut |_| false)
}

/// [`run_program`] resolving each `ndt(k, ...)` call that needs a decision
/// through `choose(k)`. Calls `ndt(k, v)` whose variable already holds a
/// value of its declared type answer `false` without consulting `choose`.
pub fn run_with_choices(
    model: &PlatformModel,
    prog: &Program,
    inputs: &Inputs,
    cfg: &RunConfig,
    choose: &mut dyn FnMut(u32) -> bool,
) -> Result<RunResult, EvalError> {
    let contracted;
    let prog = if model.contracts() {
        contracted = contract_expressions(prog, true);
        &contracted
    } else {
        prog
    };
    let main = prog.main().expect("typed program has main");
    let mut frame = Frame::for_function(main);
    for p in &main.params {
        let v = inputs.get(&p.name).ok_or_else(|| EvalError::MissingInput(p.name.clone()))?;
        let ok = match (v, p.ty.format()) {
            (Value::Float(x), Some(f)) => x.format() == f,
            (Value::Int(_), None) => p.ty == Type::Int,
            (Value::Bool(_), None) => p.ty == Type::Bool,
            _ => false,
        };
        if !ok {
            return Err(EvalError::BadInput { name: p.name.clone(), message: format!("expected a {} value", p.ty) });
        }
        frame.set(&p.name, *v);
    }
    for name in inputs.keys() {
        if !main.params.iter().any(|p| &p.name == name) {
            return Err(EvalError::UnknownInput(name.clone()));
        }
    }

    let mut m = Machine {
        model: model.evaluation_base(),
        prog,
        mode: cfg.mode,
        budget: cfg.loop_budget,
        steps: 0,
        globals: global_frame(prog),
        frames: vec![frame],
        trace: cfg.trace.then(Vec::new),
        choose,
        asserts: Vec::new(),
        output: Vec::new(),
    };
    let (ret, error) = match m.block(&main.body) {
        Ok(Flow::Return(v)) => (Some(v), None),
        Ok(Flow::Next) => (None, None),
        Err(Stop::AssertFailed) => (None, None),
        Err(Stop::Error(e)) => (None, Some(e)),
    };
    m.frames.truncate(1);
    let mut values = Vec::new();
    for (name, ty) in main_scalars(main) {
        let v = m.frames[0].get(&name);
        let v = m.observe(main.pos, &name, v, ty);
        values.push((name, v));
    }
    if main.ret != Type::Void {
        let v = ret.unwrap_or(Value::zero(main.ret));
        let v = m.observe(main.pos, RETURN_NAME, v, main.ret);
        values.push((RETURN_NAME.to_string(), v));
    }
    let outcome = Outcome { values, asserts: m.asserts, error, output: m.output };
    let trace = Trace { mode: Some(cfg.mode), records: m.trace.unwrap_or_default() };
    Ok(RunResult { outcome, trace })
}

/// Scalar parameters and locals of a function, in declaration order.
pub fn main_scalars(f: &Function) -> Vec<(String, Type)> {
    let mut out: Vec<(String, Type)> = f.params.iter().map(|p| (p.name.clone(), p.ty)).collect();
    walk_stmts(&f.body, &mut |s| {
        if let StmtKind::Decl(d) = &s.kind {
            if d.len.is_none() {
                out.push((d.name.clone(), d.ty));
            }
        }
    });
    out
}

/// Value of a global initializer, rounded at translation time.
fn constant(e: &Expr) -> Value {
    match &e.kind {
        ExprKind::Float(lit) => Value::Float(lit.value.expect("typed literal")),
        ExprKind::Int(n) => Value::Int(*n),
        ExprKind::Neg(x) => match constant(x) {
            Value::Float(v) => Value::Float(v.negate()),
            Value::Int(n) => Value::Int(n.wrapping_neg()),
            v => v,
        },
        ExprKind::Cast(t, x) => match (constant(x), t.format()) {
            (Value::Float(v), Some(f)) => Value::Float(convert(&v, f, RoundingMode::NearestEven).value),
            (Value::Int(n), Some(f)) => Value::Float(from_integer(f, RoundingMode::NearestEven, n).value),
            (Value::Float(v), None) => Value::Int(to_integer_trunc(&v).unwrap_or(0)),
            (v, None) => v,
            (v, _) => v,
        },
        _ => panic!("typed program: global initializers are literals"),
    }
}

fn global_frame(prog: &Program) -> Frame {
    let mut f = Frame::default();
    for d in &prog.globals {
        let slot = match (d.len, &d.init) {
            (Some(n), init) => {
                let mut items = vec![Value::zero(d.ty); n];
                if let Some(Init::List(es)) = init {
                    for (i, e) in es.iter().enumerate() {
                        items[i] = constant(e);
                    }
                }
                Slot { ty: d.ty, val: SlotVal::Array(items) }
            }
            (None, Some(Init::Expr(e))) => Slot { ty: d.ty, val: SlotVal::Scalar(constant(e)) },
            (None, _) => Slot { ty: d.ty, val: SlotVal::Scalar(Value::zero(d.ty)) },
        };
        f.slots.insert(d.name.clone(), slot);
    }
    f
}

fn flush(v: &FpValue) -> FpValue {
    if v.is_subnormal() {
        FpValue::zero(v.format(), v.sign())
    } else {
        *v
    }
}

#[derive(Clone, Debug)]
enum SlotVal {
    Scalar(Value),
    Array(Vec<Value>),
}

#[derive(Clone, Debug)]
struct Slot {
    ty: Type,
    val: SlotVal,
}

#[derive(Clone, Debug, Default)]
struct Frame {
    slots: BTreeMap<String, Slot>,
}

impl Frame {
    /// Every parameter and local starts out as zero of its type.
    fn for_function(f: &Function) -> Frame {
        let mut frame = Frame::default();
        for p in &f.params {
            frame.slots.insert(p.name.clone(), Slot { ty: p.ty, val: SlotVal::Scalar(Value::zero(p.ty)) });
        }
        walk_stmts(&f.body, &mut |s| {
            if let StmtKind::Decl(d) = &s.kind {
                let val = match d.len {
                    Some(n) => SlotVal::Array(vec![Value::zero(d.ty); n]),
                    None => SlotVal::Scalar(Value::zero(d.ty)),
                };
                frame.slots.insert(d.name.clone(), Slot { ty: d.ty, val });
            }
        });
        frame
    }

    fn get(&self, name: &str) -> Value {
        match &self.slots[name].val {
            SlotVal::Scalar(v) => *v,
            SlotVal::Array(_) => panic!("typed program: `{name}` is an array"),
        }
    }

    fn set(&mut self, name: &str, v: Value) {
        self.slots.get_mut(name).expect("declared variable").val = SlotVal::Scalar(v);
    }
}

enum Flow {
    Next,
    Return(Value),
}

enum Stop {
    AssertFailed,
    Error(RuntimeError),
}

impl From<RuntimeError> for Stop {
    fn from(e: RuntimeError) -> Stop {
        Stop::Error(e)
    }
}

struct Machine<'a> {
    model: &'a PlatformModel,
    prog: &'a Program,
    mode: RoundingMode,
    budget: u64,
    steps: u64,
    globals: Frame,
    frames: Vec<Frame>,
    trace: Option<Vec<TraceRecord>>,
    choose: &'a mut dyn FnMut(u32) -> bool,
    asserts: Vec<AssertRecord>,
    output: Vec<String>,
}

impl Machine<'_> {
    fn frame(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("active frame")
    }

    fn record(&mut self, point: Pos, op: TraceOp, inputs: &[FpValue], format: FpFormat, r: &Rounded) {
        if let Some(t) = &mut self.trace {
            t.push(TraceRecord {
                point,
                op,
                inputs: inputs.to_vec(),
                int_input: None,
                format,
                output: r.value,
                flags: r.flags,
                var: None,
            });
        }
    }

    fn daz(&mut self, pos: Pos, v: FpValue) -> FpValue {
        if !self.model.daz() || !v.is_subnormal() {
            return v;
        }
        let out = flush(&v);
        self.record(pos, TraceOp::DenormalsAreZero, &[v], v.format(), &Rounded { value: out, flags: Flags::empty() });
        out
    }

    fn ftz(&mut self, pos: Pos, v: FpValue) -> FpValue {
        if !self.model.ftz() || !v.is_subnormal() {
            return v;
        }
        let out = flush(&v);
        let flags = Flags::UNDERFLOW | Flags::INEXACT;
        self.record(pos, TraceOp::FlushToZero, &[v], v.format(), &Rounded { value: out, flags });
        out
    }

    /// One elementary operation of static type `ty`.
    fn round_op(&mut self, pos: Pos, op: Op, ty: Type, args: &[FpValue]) -> FpValue {
        let args: Vec<FpValue> = args.iter().map(|a| self.daz(pos, *a)).collect();
        let stat = ty.format().expect("float operation");
        let fmt = self.model.op_format(stat);
        let r = arith(op, fmt, self.mode, &args).expect("arity fixed by the language");
        self.record(pos, TraceOp::Arith(op), &args, fmt, &r);
        let v = self.ftz(pos, r.value);
        if self.model.spill() == Some(SpillPolicy::SpillEverywhere) {
            return self.convert_to(pos, v, stat);
        }
        v
    }

    /// Narrows (or widens) `v` to `fmt` with the current rounding mode.
    fn convert_to(&mut self, pos: Pos, v: FpValue, fmt: FpFormat) -> FpValue {
        if v.format() == fmt {
            return v;
        }
        let v = self.daz(pos, v);
        let r = convert(&v, fmt, self.mode);
        self.record(pos, TraceOp::Convert, &[v], fmt, &r);
        self.ftz(pos, r.value)
    }

    fn to_type(&mut self, pos: Pos, v: Value, ty: Type) -> Value {
        match (v, ty.format()) {
            (Value::Float(x), Some(f)) => Value::Float(self.convert_to(pos, x, f)),
            _ => v,
        }
    }

    /// A store to a named variable.
    fn assign_value(&mut self, pos: Pos, v: Value, ty: Type) -> Value {
        if self.model.stores_at_assignments() {
            self.to_type(pos, v, ty)
        } else {
            v
        }
    }

    /// Under call spilling, every register variable of the current frame
    /// goes to memory.
    fn spill_frame(&mut self, pos: Pos) {
        if !self.model.spill().is_some_and(SpillPolicy::at_calls) {
            return;
        }
        let names: Vec<(String, Type)> = self
            .frame()
            .slots
            .iter()
            .filter(|(_, s)| s.ty.is_float() && matches!(s.val, SlotVal::Scalar(_)))
            .map(|(n, s)| (n.clone(), s.ty))
            .collect();
        for (name, ty) in names {
            let v = self.frame().get(&name);
            let v = self.to_type(pos, v, ty);
            self.frame().set(&name, v);
        }
    }

    fn at_calls(&self) -> bool {
        self.model.spill().is_none_or(SpillPolicy::at_calls)
    }

    fn observe(&mut self, pos: Pos, name: &str, v: Value, ty: Type) -> Value {
        match (v, ty.format()) {
            (Value::Float(x), Some(f)) => {
                let r = convert(&x, f, self.mode);
                if let Some(t) = &mut self.trace {
                    t.push(TraceRecord {
                        point: pos,
                        op: TraceOp::Observe,
                        inputs: vec![x],
                        int_input: None,
                        format: f,
                        output: r.value,
                        flags: r.flags,
                        var: Some(name.to_string()),
                    });
                }
                Value::Float(r.value)
            }
            _ => v,
        }
    }

    fn block(&mut self, body: &[Stmt]) -> Result<Flow, Stop> {
        for s in body {
            if let Flow::Return(v) = self.stmt(s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn stmt(&mut self, s: &Stmt) -> Result<Flow, Stop> {
        let pos = s.pos;
        match &s.kind {
            StmtKind::Decl(d) => {
                let val = match (&d.init, d.len) {
                    (Some(Init::Expr(e)), _) => {
                        let v = self.expr(e)?;
                        SlotVal::Scalar(self.assign_value(pos, v, d.ty))
                    }
                    (None, None) => SlotVal::Scalar(Value::zero(d.ty)),
                    (init, Some(n)) => {
                        let mut items = vec![Value::zero(d.ty); n];
                        if let Some(Init::List(es)) = init {
                            for (i, e) in es.iter().enumerate() {
                                let v = self.expr(e)?;
                                items[i] = self.to_type(pos, v, d.ty);
                            }
                        }
                        SlotVal::Array(items)
                    }
                    (Some(Init::List(_)), None) => unreachable!("typed program"),
                };
                self.frame().slots.insert(d.name.clone(), Slot { ty: d.ty, val });
            }
            StmtKind::Assign(name, e) => {
                let v = self.expr(e)?;
                let ty = self.frame().slots[name].ty;
                let v = self.assign_value(pos, v, ty);
                self.frame().set(name, v);
            }
            StmtKind::AssignIndex(name, i, e) => {
                let i = self.expr(i)?.int();
                let v = self.expr(e)?;
                let (ty, len) = match &self.frame().slots[name] {
                    Slot { ty, val: SlotVal::Array(items) } => (*ty, items.len()),
                    _ => unreachable!("typed program"),
                };
                let idx = check_index(pos, name, i, len)?;
                let v = self.to_type(pos, v, ty);
                if let SlotVal::Array(items) = &mut self.frame().slots.get_mut(name).expect("declared").val {
                    items[idx] = v;
                }
            }
            StmtKind::If(c, a, b) => {
                let branch = if self.expr(c)?.bool() { a } else { b };
                return self.block(branch);
            }
            StmtKind::While(c, body) => {
                while self.expr(c)?.bool() {
                    self.steps += 1;
                    if self.steps > self.budget {
                        return Err(RuntimeError::LoopBudget { pos, budget: self.budget }.into());
                    }
                    if let Flow::Return(v) = self.block(body)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Assert(c) => {
                let passed = self.expr(c)?.bool();
                self.asserts.push(AssertRecord { pos, passed });
                if !passed {
                    return Err(Stop::AssertFailed);
                }
            }
            StmtKind::Print(e) => {
                let v = self.expr(e)?;
                self.spill_frame(pos);
                // the callee receives the value in its static type
                let v = self.to_type(pos, v, e.ty());
                self.output.push(v.to_string());
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.expr(e)?,
                    None => Value::Void,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                self.expr(e)?;
            }
            StmtKind::Skip => {}
        }
        Ok(Flow::Next)
    }

    fn lookup(&mut self, name: &str) -> &Slot {
        let frame = self.frames.last().expect("active frame");
        frame.slots.get(name).or_else(|| self.globals.slots.get(name)).expect("typed program: declared")
    }

    fn expr(&mut self, e: &Expr) -> Result<Value, Stop> {
        let pos = e.pos;
        Ok(match &e.kind {
            ExprKind::Float(lit) => Value::Float(lit.value.expect("typed literal")),
            ExprKind::Int(n) => Value::Int(*n),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Var(name) => match &self.lookup(name).val {
                SlotVal::Scalar(v) => *v,
                SlotVal::Array(_) => unreachable!("typed program"),
            },
            ExprKind::Index(name, i) => {
                let i = self.expr(i)?.int();
                let SlotVal::Array(items) = &self.lookup(name).val else { unreachable!("typed program") };
                let idx = check_index(pos, name, i, items.len())?;
                items[idx]
            }
            ExprKind::Neg(x) => match self.expr(x)? {
                Value::Float(v) => Value::Float(v.negate()),
                Value::Int(n) => Value::Int(n.checked_neg().ok_or(RuntimeError::IntOverflow { pos })?),
                _ => unreachable!("typed program"),
            },
            ExprKind::Not(x) => Value::Bool(!self.expr(x)?.bool()),
            ExprKind::Binary(op, l, r) => {
                let a = self.expr(l)?;
                let b = self.expr(r)?;
                match (a, b) {
                    (Value::Int(a), Value::Int(b)) => Value::Int(int_op(pos, *op, a, b)?),
                    (Value::Float(a), Value::Float(b)) => {
                        let op = match op {
                            BinOp::Add => Op::Add,
                            BinOp::Sub => Op::Sub,
                            BinOp::Mul => Op::Mul,
                            BinOp::Div => Op::Div,
                            BinOp::Rem => unreachable!("typed program: % on ints"),
                        };
                        Value::Float(self.round_op(pos, op, e.ty(), &[a, b]))
                    }
                    _ => unreachable!("typed program"),
                }
            }
            ExprKind::Compare(op, l, r) => {
                let a = self.expr(l)?;
                let b = self.expr(r)?;
                let ord = match (a, b) {
                    (Value::Float(a), Value::Float(b)) => {
                        let a = self.daz(pos, a);
                        let b = self.daz(pos, b);
                        compare(&a, &b)
                    }
                    (Value::Int(a), Value::Int(b)) => ordering(a.cmp(&b)),
                    (Value::Bool(a), Value::Bool(b)) => ordering(a.cmp(&b)),
                    _ => unreachable!("typed program"),
                };
                Value::Bool(holds(*op, ord))
            }
            ExprKind::Logic(op, l, r) => {
                let a = self.expr(l)?.bool();
                let v = match op {
                    LogicOp::And => a && self.expr(r)?.bool(),
                    LogicOp::Or => a || self.expr(r)?.bool(),
                };
                Value::Bool(v)
            }
            ExprKind::Cast(t, x) => {
                let v = self.expr(x)?;
                match (v, t.format()) {
                    (Value::Float(v), Some(f)) => Value::Float(self.convert_to(pos, v, f)),
                    (Value::Int(n), Some(f)) => {
                        let r = from_integer(f, self.mode, n);
                        if let Some(t) = &mut self.trace {
                            t.push(TraceRecord {
                                point: pos,
                                op: TraceOp::FromInt,
                                inputs: vec![],
                                int_input: Some(n),
                                format: f,
                                output: r.value,
                                flags: r.flags,
                                var: None,
                            });
                        }
                        Value::Float(self.ftz(pos, r.value))
                    }
                    (Value::Float(v), None) => match to_integer_trunc(&v) {
                        Some(n) => Value::Int(n),
                        None => return Err(RuntimeError::InvalidConversion { pos, value: format_hex(&v) }.into()),
                    },
                    (v, None) => v,
                    _ => unreachable!("typed program"),
                }
            }
            ExprKind::Call(name, args) => self.call(e, name, args)?,
        })
    }

    fn call(&mut self, e: &Expr, name: &str, args: &[Expr]) -> Result<Value, Stop> {
        let pos = e.pos;
        match name {
            "fabs" => {
                let v = self.expr(&args[0])?.float();
                Ok(Value::Float(v.abs()))
            }
            "sqrt" => {
                let v = self.expr(&args[0])?.float();
                Ok(Value::Float(self.round_op(pos, Op::Sqrt, e.ty(), &[v])))
            }
            "fma" => {
                let mut vs = Vec::with_capacity(3);
                for a in args {
                    vs.push(self.expr(a)?.float());
                }
                Ok(Value::Float(self.round_op(pos, Op::Fma, e.ty(), &vs)))
            }
            "floor" => {
                let mut v = self.expr(&args[0])?.float();
                self.spill_frame(pos);
                if self.at_calls() {
                    v = self.convert_to(pos, v, e.ty().format().expect("float"));
                }
                let v = self.daz(pos, v);
                let out = floor_int(v.format(), &v);
                self.record(pos, TraceOp::Floor, &[v], v.format(), &Rounded { value: out, flags: Flags::empty() });
                Ok(Value::Float(out))
            }
            "nextafter" => {
                let a = self.expr(&args[0])?.float();
                let b = self.expr(&args[1])?.float();
                self.spill_frame(pos);
                let d = FpFormat::DOUBLE;
                let a = self.convert_to(pos, a, d);
                let b = self.convert_to(pos, b, d);
                let a = self.daz(pos, a);
                let b = self.daz(pos, b);
                let out = next_after(d, &a, &b);
                self.record(pos, TraceOp::NextAfter, &[a, b], d, &Rounded { value: out, flags: Flags::empty() });
                Ok(Value::Float(self.ftz(pos, out)))
            }
            "ndt" => {
                let k = match args[0].kind {
                    ExprKind::Int(k) => k as u32,
                    _ => unreachable!("typed program"),
                };
                if let Some(ExprKind::Var(v)) = args.get(1).map(|a| &a.kind) {
                    let slot = self.lookup(v);
                    let (ty, val) = (slot.ty, slot.val.clone());
                    if let (SlotVal::Scalar(Value::Float(x)), Some(f)) = (val, ty.format()) {
                        if x.format() == f || convert(&x, f, RoundingMode::NearestEven).flags.is_empty() {
                            return Ok(Value::Bool(false));
                        }
                    }
                }
                Ok(Value::Bool((self.choose)(k)))
            }
            _ => self.user_call(pos, name, args),
        }
    }

    fn user_call(&mut self, pos: Pos, name: &str, args: &[Expr]) -> Result<Value, Stop> {
        let prog = self.prog;
        let f = prog.function(name).expect("typed program: defined function");
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.expr(a)?);
        }
        self.spill_frame(pos);
        let mut frame = Frame::for_function(f);
        let convert_params = self.model.spill().is_none_or(|s| s != SpillPolicy::NeverSpill);
        for (p, v) in f.params.iter().zip(vals) {
            let v = if convert_params { self.to_type(pos, v, p.ty) } else { v };
            frame.set(&p.name, v);
        }
        self.frames.push(frame);
        let flow = self.block(&f.body);
        self.frames.pop();
        let v = match flow? {
            Flow::Return(v) => v,
            Flow::Next => Value::Void,
        };
        Ok(if self.at_calls() { self.to_type(pos, v, f.ret) } else { v })
    }
}

fn check_index(pos: Pos, array: &str, i: i64, len: usize) -> Result<usize, RuntimeError> {
    if i < 0 || i as u64 >= len as u64 {
        return Err(RuntimeError::IndexOutOfBounds { pos, array: array.to_string(), index: i, len });
    }
    Ok(i as usize)
}

fn int_op(pos: Pos, op: BinOp, a: i64, b: i64) -> Result<i64, RuntimeError> {
    let r = match op {
        BinOp::Add => a.checked_add(b),
        BinOp::Sub => a.checked_sub(b),
        BinOp::Mul => a.checked_mul(b),
        BinOp::Div | BinOp::Rem if b == 0 => return Err(RuntimeError::DivByZero { pos }),
        BinOp::Div => a.checked_div(b),
        BinOp::Rem => a.checked_rem(b),
    };
    r.ok_or(RuntimeError::IntOverflow { pos })
}

fn ordering(o: std::cmp::Ordering) -> CompareResult {
    match o {
        std::cmp::Ordering::Less => CompareResult::Less,
        std::cmp::Ordering::Equal => CompareResult::Equal,
        std::cmp::Ordering::Greater => CompareResult::Greater,
    }
}

/// Truth of `a op b` given how `a` compares to `b`; unordered operands
/// satisfy only `!=`.
pub fn holds(op: CmpOp, ord: CompareResult) -> bool {
    use CompareResult::*;
    match op {
        CmpOp::Lt => ord == Less,
        CmpOp::Le => matches!(ord, Less | Equal),
        CmpOp::Gt => ord == Greater,
        CmpOp::Ge => matches!(ord, Greater | Equal),
        CmpOp::Eq => ord == Equal,
        CmpOp::Ne => ord != Equal,
    }
}
