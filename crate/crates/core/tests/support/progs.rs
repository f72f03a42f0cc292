//! Random small programs shaped like the corpus, and the soundness check of
//! the interval analysis against concrete runs and explored outcomes.

#![allow(dead_code)]

use fplab_core::analyze::{analyze, envelope_by_name, parse_range, AlarmKind, Analysis, InputRanges};
use fplab_core::eval::{parse_inputs, run_program, Outcome, RunConfig};
use fplab_core::lang::{compile, Program};
use fplab_core::ndt::{explore_all, ExploreConfig};
use fplab_softfloat::RoundingMode;
use rand::seq::SliceRandom;
use rand::Rng;

const LITERALS: [&str; 10] = ["0.1", "3", "-2.5", "0.5", "1e308", "0x1p-1022", "1e-300", "180", "0x1.8p-1070", "1e16"];
const INPUTS: [&str; 10] = ["1", "-0.5", "1e308", "0x1p-1070", "3.14159", "-1e-310", "0", "1e16", "0x1.fffffffffffffp+1023", "-7"];
const ARITH: [&str; 4] = ["+", "-", "*", "/"];
const CMP: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];

pub struct RandomProgram {
    pub source: String,
    /// Concrete inputs.
    pub inputs: Vec<(String, String)>,
    /// Analysis ranges, each containing the concrete input.
    pub ranges: Vec<(String, String)>,
    pub mode: RoundingMode,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    vars: Vec<String>,
    helper: bool,
}

impl<R: Rng> Gen<'_, R> {
    fn expr(&mut self, depth: u32) -> String {
        let leaf = depth == 0 || self.rng.gen_bool(0.3);
        if leaf {
            return if self.rng.gen_bool(0.65) {
                self.vars.choose(self.rng).expect("vars").clone()
            } else {
                LITERALS.choose(self.rng).expect("literals").to_string()
            };
        }
        match self.rng.gen_range(0..10) {
            0 => format!("sqrt(fabs({}))", self.expr(depth - 1)),
            1 => format!("fma({}, {}, {})", self.expr(depth - 1), self.expr(depth - 1), self.expr(depth - 1)),
            2 => format!("floor({})", self.expr(depth - 1)),
            3 => format!("(double) (float) ({})", self.expr(depth - 1)),
            4 => format!("nextafter({}, 0.)", self.expr(depth - 1)),
            5 if self.helper => format!("helper({}, {})", self.expr(depth - 1), self.expr(depth - 1)),
            _ => {
                let op = ARITH.choose(self.rng).expect("ops");
                format!("({} {op} {})", self.expr(depth - 1), self.expr(depth - 1))
            }
        }
    }

    fn cond(&mut self) -> String {
        let op = CMP.choose(self.rng).expect("cmp");
        format!("{} {op} {}", self.expr(1), self.expr(1))
    }

    fn target(&mut self) -> String {
        let locals: Vec<String> = self.vars.iter().filter(|v| v.starts_with('v')).cloned().collect();
        locals.choose(self.rng).expect("locals").clone()
    }

    fn stmt(&mut self, out: &mut String, counter: &mut u32) {
        match self.rng.gen_range(0..8) {
            0 | 1 => {
                let t = self.target();
                out.push_str(&format!("  {t} = {};\n", self.expr(2)));
            }
            2 | 3 => {
                let (t, f) = (self.target(), self.target());
                out.push_str(&format!(
                    "  if ({}) {{ {t} = {}; }} else {{ {f} = {}; }}\n",
                    self.cond(),
                    self.expr(2),
                    self.expr(1)
                ));
            }
            4 => {
                let i = format!("i{counter}");
                *counter += 1;
                let k = self.rng.gen_range(1..4);
                let t = self.target();
                out.push_str(&format!("  int {i} = 0;\n  while ({i} < {k}) {{ {t} = {}; {i} = {i} + 1; }}\n", self.expr(2)));
            }
            5 => out.push_str(&format!("  assert({});\n", self.cond())),
            6 => {
                let t = self.target();
                out.push_str(&format!("  {t} = (double) (int) ({}) + {};\n", self.expr(0), self.expr(1)));
            }
            _ => {
                let t = self.target();
                let e = self.expr(1);
                out.push_str(&format!("  float s{counter} = (float) {e};\n  {t} = s{counter} * {};\n", self.expr(0)));
                *counter += 1;
            }
        }
    }
}

pub fn random_program<R: Rng>(rng: &mut R) -> RandomProgram {
    let helper = rng.gen_bool(0.4);
    let mut g = Gen { rng, vars: vec!["a".into(), "b".into()], helper: false };
    let mut src = String::new();
    if helper {
        let saved = std::mem::replace(&mut g.vars, vec!["p".into(), "q".into()]);
        let body = g.expr(2);
        src.push_str(&format!("double helper(double p, double q) {{\n  double t = {body};\n  return t * q;\n}}\n\n"));
        g.vars = saved;
    }
    g.helper = helper;
    src.push_str("double main(double a, double b) {\n");
    let n_locals = g.rng.gen_range(1..4);
    for k in 0..n_locals {
        let init = g.expr(2);
        src.push_str(&format!("  double v{k} = {init};\n"));
        g.vars.push(format!("v{k}"));
    }
    let mut counter = 0;
    for _ in 0..g.rng.gen_range(1..5) {
        g.stmt(&mut src, &mut counter);
    }
    src.push_str(&format!("  return {};\n}}\n", g.expr(2)));

    let mut inputs = Vec::new();
    let mut ranges = Vec::new();
    for name in ["a", "b"] {
        let v = INPUTS.choose(g.rng).expect("inputs").to_string();
        let range = match g.rng.gen_range(0..3) {
            0 => v.clone(),
            1 => {
                let other = INPUTS.choose(g.rng).expect("inputs");
                let (x, y): (f64, f64) = (v.parse().unwrap_or(0.0), other.parse().unwrap_or(0.0));
                if x <= y {
                    format!("[{v}, {other}]")
                } else {
                    format!("[{other}, {v}]")
                }
            }
            _ => "[-1e308, 1e308]".to_string(),
        };
        let range = if range_contains(&range, &v) { range } else { v.clone() };
        inputs.push((name.to_string(), v));
        ranges.push((name.to_string(), range));
    }
    let mode = *[RoundingMode::NearestEven, RoundingMode::TowardPositive, RoundingMode::TowardNegative, RoundingMode::TowardZero]
        .choose(g.rng)
        .expect("modes");
    RandomProgram { source: src, inputs, ranges, mode }
}

fn range_contains(range: &str, v: &str) -> bool {
    let ty = fplab_core::lang::Type::Double;
    match (parse_range(range, ty), parse_range(v, ty)) {
        (Ok(r), Ok(fplab_core::analyze::AbsValue::Float(p))) => match r {
            fplab_core::analyze::AbsValue::Float(i) => i.contains(&p.lo),
            _ => false,
        },
        _ => false,
    }
}

pub fn input_ranges(prog: &Program, ranges: &[(String, String)]) -> InputRanges {
    let main = prog.main().expect("main");
    ranges
        .iter()
        .map(|(n, r)| {
            let p = main.params.iter().find(|p| &p.name == n).expect("param");
            (n.clone(), parse_range(r, p.ty).expect("range"))
        })
        .collect()
}

/// Checks that an outcome is inside the analysis: values when the run
/// completed, and a matching alarm when it did not.
fn outcome_inside(a: &Analysis, o: &Outcome, check_pos: bool) -> Result<(), String> {
    if let Some(pos) = o.failed_assert() {
        let hit = a.alarms.iter().any(|al| al.kind == AlarmKind::AssertionMayFail && (!check_pos || (al.line, al.col) == (pos.line, pos.col)));
        return if hit { Ok(()) } else { Err(format!("assertion failure at {pos} without alarm")) };
    }
    if let Some(e) = &o.error {
        let kind = match e.kind() {
            "index" => AlarmKind::IndexOutOfRange,
            "int-overflow" => AlarmKind::IntOverflow,
            "div-by-zero" => AlarmKind::DivisionByZero,
            "conversion" => AlarmKind::InvalidConversion,
            other => return Err(format!("unexpected runtime error {other}")),
        };
        return if a.has_alarm(kind) { Ok(()) } else { Err(format!("runtime error {} without alarm", e.kind())) };
    }
    let Some(exit) = &a.exit else { return Err("analysis says unreachable exit".into()) };
    for (name, v) in &o.values {
        match exit.get(name) {
            Some((_, av)) if av.contains(v) => {}
            Some((_, av)) => return Err(format!("{name} = {v} outside {av}")),
            None => return Err(format!("{name} missing from analysis")),
        }
    }
    Ok(())
}

/// Soundness of the analysis under envelope `env` for one program: every
/// model of the envelope and every explored outcome (budget per compute
/// format) is covered. Returns the number of concrete outcomes checked.
pub fn check_soundness(p: &RandomProgram, env: &str, budget: usize) -> Result<usize, String> {
    let prog = compile(&p.source).map_err(|e| format!("{e}\n{}", p.source))?;
    let env = envelope_by_name(env).expect("envelope");
    let analysis = analyze(&prog, &input_ranges(&prog, &p.ranges), &env);
    let inputs = parse_inputs(&prog, &p.inputs).map_err(|e| e.to_string())?;
    let run = RunConfig::with_mode(p.mode);
    let mut checked = 0;
    for (name, model) in &env.models {
        let r = run_program(model, &prog, &inputs, &run).map_err(|e| e.to_string())?;
        outcome_inside(&analysis, &r.outcome, true).map_err(|e| format!("{name}: {e}"))?;
        checked += 1;
    }
    if budget > 0 {
        let cfg = ExploreConfig { budget, run, ..ExploreConfig::default() };
        for (inst, set) in explore_all(&prog, &inputs, &cfg).map_err(|e| e.to_string())? {
            for entry in &set.outcomes {
                outcome_inside(&analysis, &entry.outcome, false).map_err(|e| format!("ndt {:?}: {e}", inst.compute))?;
                checked += 1;
            }
        }
    }
    Ok(checked)
}
