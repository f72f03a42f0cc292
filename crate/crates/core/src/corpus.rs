//! Executable corpus cases.
//!
//! A case file is line oriented. `#` lines before the first directive form
//! the description; after `source:` the rest of the file is the program.
//!
//! ```text
//! id <name>
//! input <param> = <literal>          concrete input (rounded to nearest)
//! range <param> = [<lo>, <hi>]       analysis input (default: the input)
//! rounding rne|rtp|rtn|rtz           mode of every run (default rne)
//! post <condition>                   asserted before main returns
//! oracle: <text>                     how oracle-derived values are computed
//! expect <model> <var> = <hex>       final value under a model
//! expect <model> assert holds|fails
//! expect <model> error <kind>        runtime error (index, conversion, ...)
//! explore contains <var> = <hex>     some explored outcome has this value
//! explore verdict holds|fails
//! analyze <envelope> alarm <kind>    interval analysis raises this alarm
//! analyze <envelope> no-alarm
//! diff <model> <model> <var> differs|agrees
//! source:
//! ```
//!
//! Every check ends with `from=published`, `from=oracle` or `from=trivial`
//! telling where its expected value comes from; a case with oracle checks
//! must carry an `oracle:` line.

use std::fmt;

use fplab_softfloat::RoundingMode;
use thiserror::Error;

use crate::analyze::{analyze, envelope_by_name, parse_range, AlarmKind, InputRanges};
use crate::eval::{parse_inputs, run_program, Inputs, Outcome, RunConfig};
use crate::lang::{parse_postcondition, parse_program, typecheck, with_postcondition, Program};
use crate::model::model_by_name;
use crate::ndt::{explore_all, verdict, ExploreConfig, Verdict};

const BUILTIN: [(&str, &str); 13] = [
    ("square", include_str!("../corpus/square.case")),
    ("zero_nonzero", include_str!("../corpus/zero_nonzero.case")),
    ("double_rounding", include_str!("../corpus/double_rounding.case")),
    ("recip_b", include_str!("../corpus/recip_b.case")),
    ("underflow_dr", include_str!("../corpus/underflow_dr.case")),
    ("near_inf_dr", include_str!("../corpus/near_inf_dr.case")),
    ("ftz_compare", include_str!("../corpus/ftz_compare.case")),
    ("min_table", include_str!("../corpus/min_table.case")),
    ("dot_fma", include_str!("../corpus/dot_fma.case")),
    ("modulo", include_str!("../corpus/modulo.case")),
    ("table_lookup", include_str!("../corpus/table_lookup.case")),
    ("sum_reassoc", include_str!("../corpus/sum_reassoc.case")),
    ("recip_directed", include_str!("../corpus/recip_directed.case")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Published,
    Oracle,
    Trivial,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Published => "published",
            Provenance::Oracle => "oracle",
            Provenance::Trivial => "trivial",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CheckKind {
    Value { model: String, var: String, hex: String },
    Assert { model: String, fails: bool },
    Error { model: String, kind: String },
    ExploreContains { var: String, hex: String },
    ExploreVerdict { fails: bool },
    Alarm { envelope: String, kind: AlarmKind },
    NoAlarm { envelope: String },
    Diff { a: String, b: String, var: String, differs: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub line: usize,
    pub text: String,
    pub kind: CheckKind,
    pub from: Provenance,
}

#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub id: String,
    pub description: String,
    pub source: String,
    pub inputs: Vec<(String, String)>,
    pub ranges: Vec<(String, String)>,
    pub mode: RoundingMode,
    pub post: Option<String>,
    pub oracle: Vec<String>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("case {id}: {msg}")]
    Program { id: String, msg: String },
}

fn syntax(line: usize, msg: impl Into<String>) -> CorpusError {
    CorpusError::Syntax { line, msg: msg.into() }
}

pub fn parse_mode(s: &str) -> Option<RoundingMode> {
    match s {
        "rne" => Some(RoundingMode::NearestEven),
        "rtp" => Some(RoundingMode::TowardPositive),
        "rtn" => Some(RoundingMode::TowardNegative),
        "rtz" => Some(RoundingMode::TowardZero),
        _ => None,
    }
}

fn alarm_kind(s: &str) -> Option<AlarmKind> {
    [
        AlarmKind::Overflow,
        AlarmKind::InvalidOperation,
        AlarmKind::DivisionByZero,
        AlarmKind::AssertionMayFail,
        AlarmKind::IndexOutOfRange,
        AlarmKind::IntOverflow,
        AlarmKind::InvalidConversion,
    ]
    .into_iter()
    .find(|k| k.name() == s)
}

fn assignment(rest: &str, line: usize) -> Result<(String, String), CorpusError> {
    let (a, b) = rest.split_once('=').ok_or_else(|| syntax(line, "expected `name = value`"))?;
    Ok((a.trim().to_string(), b.trim().to_string()))
}

fn holds_or_fails(s: &str, line: usize) -> Result<bool, CorpusError> {
    match s {
        "fails" => Ok(true),
        "holds" => Ok(false),
        other => Err(syntax(line, format!("expected holds or fails, got `{other}`"))),
    }
}

pub fn parse_case(text: &str) -> Result<CorpusCase, CorpusError> {
    let mut case = CorpusCase {
        id: String::new(),
        description: String::new(),
        source: String::new(),
        inputs: Vec::new(),
        ranges: Vec::new(),
        mode: RoundingMode::NearestEven,
        post: None,
        oracle: Vec::new(),
        checks: Vec::new(),
    };
    let mut lines = text.lines().enumerate();
    let mut saw_source = false;
    for (i, raw) in lines.by_ref() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(c) = l.strip_prefix('#') {
            if case.id.is_empty() {
                if !case.description.is_empty() {
                    case.description.push(' ');
                }
                case.description.push_str(c.trim());
            }
            continue;
        }
        if l == "source:" {
            saw_source = true;
            break;
        }
        if let Some(o) = l.strip_prefix("oracle:") {
            case.oracle.push(o.trim().to_string());
            continue;
        }
        let (word, rest) = l.split_once(char::is_whitespace).ok_or_else(|| syntax(line, format!("incomplete directive `{l}`")))?;
        let rest = rest.trim();
        match word {
            "id" => case.id = rest.to_string(),
            "input" => case.inputs.push(assignment(rest, line)?),
            "range" => case.ranges.push(assignment(rest, line)?),
            "rounding" => case.mode = parse_mode(rest).ok_or_else(|| syntax(line, format!("unknown rounding mode `{rest}`")))?,
            "post" => case.post = Some(rest.to_string()),
            "expect" | "explore" | "analyze" | "diff" => {
                let (body, from) = rest.rsplit_once("from=").ok_or_else(|| syntax(line, "check without `from=`"))?;
                let from = match from.trim() {
                    "published" => Provenance::Published,
                    "oracle" => Provenance::Oracle,
                    "trivial" => Provenance::Trivial,
                    other => return Err(syntax(line, format!("unknown provenance `{other}`"))),
                };
                let kind = parse_check(word, body.trim(), line)?;
                case.checks.push(Check { line, text: l.to_string(), kind, from });
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }
    if !saw_source {
        return Err(syntax(text.lines().count(), "missing `source:`"));
    }
    case.source = lines.map(|(_, l)| l).collect::<Vec<_>>().join("\n");
    case.source.push('\n');
    if case.id.is_empty() {
        return Err(syntax(1, "missing `id`"));
    }
    if case.oracle.is_empty() && case.checks.iter().any(|c| c.from == Provenance::Oracle) {
        return Err(syntax(1, format!("case {} has oracle checks but no `oracle:` recipe", case.id)));
    }
    Ok(case)
}

fn parse_check(word: &str, body: &str, line: usize) -> Result<CheckKind, CorpusError> {
    let toks: Vec<&str> = body.split_whitespace().collect();
    let bad = || syntax(line, format!("malformed check `{word} {body}`"));
    Ok(match (word, toks.as_slice()) {
        ("expect", [model, "assert", v]) => CheckKind::Assert { model: model.to_string(), fails: holds_or_fails(v, line)? },
        ("expect", [model, "error", kind]) => CheckKind::Error { model: model.to_string(), kind: kind.to_string() },
        ("expect", [model, var, "=", hex]) => CheckKind::Value { model: model.to_string(), var: var.to_string(), hex: hex.to_string() },
        ("explore", ["contains", var, "=", hex]) => CheckKind::ExploreContains { var: var.to_string(), hex: hex.to_string() },
        ("explore", ["verdict", v]) => CheckKind::ExploreVerdict { fails: holds_or_fails(v, line)? },
        ("analyze", [env, "alarm", kind]) => {
            CheckKind::Alarm { envelope: env.to_string(), kind: alarm_kind(kind).ok_or_else(|| syntax(line, format!("unknown alarm `{kind}`")))? }
        }
        ("analyze", [env, "no-alarm"]) => CheckKind::NoAlarm { envelope: env.to_string() },
        ("diff", [a, b, var, v]) => {
            let differs = match *v {
                "differs" => true,
                "agrees" => false,
                _ => return Err(bad()),
            };
            CheckKind::Diff { a: a.to_string(), b: b.to_string(), var: var.to_string(), differs }
        }
        _ => return Err(bad()),
    })
}

pub fn builtin_cases() -> Vec<CorpusCase> {
    BUILTIN.iter().map(|(id, text)| parse_case(text).unwrap_or_else(|e| panic!("corpus case {id}: {e}"))).collect()
}

pub fn builtin_ids() -> Vec<&'static str> {
    BUILTIN.iter().map(|(id, _)| *id).collect()
}

impl CorpusCase {
    /// The program with the post-condition, if any, asserted.
    pub fn program(&self) -> Result<Program, CorpusError> {
        let err = |e: crate::lang::LangError| CorpusError::Program { id: self.id.clone(), msg: e.to_string() };
        let mut prog = parse_program(&self.source).map_err(err)?;
        if let Some(post) = &self.post {
            prog = with_postcondition(prog, &parse_postcondition(post).map_err(err)?);
        }
        typecheck(prog).map_err(err)
    }

    pub fn concrete_inputs(&self, prog: &Program) -> Result<Inputs, CorpusError> {
        parse_inputs(prog, &self.inputs).map_err(|e| CorpusError::Program { id: self.id.clone(), msg: e.to_string() })
    }

    pub fn input_ranges(&self, prog: &Program) -> Result<InputRanges, CorpusError> {
        let main = prog.main().ok_or_else(|| CorpusError::Program { id: self.id.clone(), msg: "no main".into() })?;
        let mut out = InputRanges::new();
        let ranged = self.ranges.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>();
        for (name, text) in self.ranges.iter().chain(self.inputs.iter().filter(|(n, _)| !ranged.contains(&n.as_str()))) {
            let p = main.params.iter().find(|p| &p.name == name).ok_or_else(|| CorpusError::Program {
                id: self.id.clone(),
                msg: format!("`{name}` is not a parameter of main"),
            })?;
            let v = parse_range(text, p.ty).map_err(|msg| CorpusError::Program { id: self.id.clone(), msg })?;
            out.insert(name.clone(), v);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub check: Check,
    /// `None` when the check passed, else what was observed.
    pub failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CaseReport {
    pub id: String,
    pub results: Vec<CheckResult>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.failure.is_none())
    }
}

impl fmt::Display for CaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ok = self.results.iter().filter(|r| r.failure.is_none()).count();
        writeln!(f, "{} {} ({ok}/{} checks)", if self.passed() { "PASS" } else { "FAIL" }, self.id, self.results.len())?;
        for r in &self.results {
            if let Some(why) = &r.failure {
                writeln!(f, "  line {}: {}\n    got: {why}", r.check.line, r.check.text)?;
            }
        }
        Ok(())
    }
}

pub fn run_case(case: &CorpusCase) -> Result<CaseReport, CorpusError> {
    let prog = case.program()?;
    let inputs = case.concrete_inputs(&prog)?;
    let run_cfg = RunConfig::with_mode(case.mode);
    let perr = |msg: String| CorpusError::Program { id: case.id.clone(), msg };
    let run = |model: &str| -> Result<Outcome, CorpusError> {
        let m = model_by_name(model).ok_or_else(|| perr(format!("unknown model `{model}`")))?;
        run_program(&m, &prog, &inputs, &run_cfg).map(|r| r.outcome).map_err(|e| perr(e.to_string()))
    };
    let mut explored = None;
    let mut results = Vec::new();
    for check in &case.checks {
        let failure = match &check.kind {
            CheckKind::Value { model, var, hex } => {
                let got = run(model)?.get(var).map(|v| v.to_string()).unwrap_or_else(|| "no such variable".into());
                (got != *hex).then_some(got)
            }
            CheckKind::Assert { model, fails } => {
                let o = run(model)?;
                (o.assertion_failed() != *fails).then(|| if o.assertion_failed() { "assertion failed".into() } else { "assertion held".into() })
            }
            CheckKind::Error { model, kind } => {
                let o = run(model)?;
                let got = o.error.as_ref().map(|e| e.kind().to_string()).unwrap_or_else(|| "no error".into());
                (got != *kind).then_some(got)
            }
            CheckKind::ExploreContains { .. } | CheckKind::ExploreVerdict { .. } => {
                if explored.is_none() {
                    let cfg = ExploreConfig { run: run_cfg.clone(), ..ExploreConfig::default() };
                    explored = Some(explore_all(&prog, &inputs, &cfg).map_err(|e| perr(e.to_string()))?);
                }
                let sets = explored.as_ref().expect("explored");
                match &check.kind {
                    CheckKind::ExploreContains { var, hex } => {
                        let found = sets.iter().flat_map(|(_, s)| &s.outcomes).any(|e| e.outcome.get(var).is_some_and(|v| v.to_string() == *hex));
                        (!found).then(|| {
                            let mut seen: Vec<String> =
                                sets.iter().flat_map(|(_, s)| &s.outcomes).filter_map(|e| e.outcome.get(var)).map(|v| v.to_string()).collect();
                            seen.sort();
                            seen.dedup();
                            format!("outcomes {seen:?}")
                        })
                    }
                    CheckKind::ExploreVerdict { fails } => {
                        let failing = sets.iter().any(|(_, s)| matches!(verdict(s), Verdict::FailsWithWitness(_)));
                        (failing != *fails).then(|| if failing { "fails with witness".into() } else { "holds in all explored".into() })
                    }
                    _ => unreachable!(),
                }
            }
            CheckKind::Alarm { envelope, kind } => {
                let a = analyze_case(case, &prog, envelope)?;
                (!a.has_alarm(*kind)).then(|| format!("alarms {:?}", a.alarms.iter().map(|al| al.to_string()).collect::<Vec<_>>()))
            }
            CheckKind::NoAlarm { envelope } => {
                let a = analyze_case(case, &prog, envelope)?;
                (!a.alarms.is_empty()).then(|| format!("alarms {:?}", a.alarms.iter().map(|al| al.to_string()).collect::<Vec<_>>()))
            }
            CheckKind::Diff { a, b, var, differs } => {
                let (x, y) = (run(a)?.get(var), run(b)?.get(var));
                let got = x.as_ref().map(|v| v.to_string()) != y.as_ref().map(|v| v.to_string());
                (got != *differs).then(|| format!("{a}: {x:?}, {b}: {y:?}"))
            }
        };
        results.push(CheckResult { check: check.clone(), failure });
    }
    Ok(CaseReport { id: case.id.clone(), results })
}

fn analyze_case(case: &CorpusCase, prog: &Program, envelope: &str) -> Result<crate::analyze::Analysis, CorpusError> {
    let env = envelope_by_name(envelope).ok_or_else(|| CorpusError::Program { id: case.id.clone(), msg: format!("unknown envelope `{envelope}`") })?;
    Ok(analyze(prog, &case.input_ranges(prog)?, &env))
}
