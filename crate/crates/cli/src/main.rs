use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fplab_core::analyze::{analyze, envelope_by_name, parse_range, InputRanges, ENVELOPE_NAMES};
use fplab_core::corpus::{builtin_cases, parse_case, parse_mode, run_case, CorpusCase};
use fplab_core::eval::{parse_inputs, run_program, Inputs, Outcome, RunConfig, Value};
use fplab_core::lang::{compile, parse_postcondition, parse_program, typecheck, with_postcondition, Program};
use fplab_core::model::{model_by_name, model_names};
use fplab_core::ndt::{explore_all, format_witness, verdict, ExploreConfig, Verdict};
use fplab_softfloat::RoundingMode;
use serde_json::json;

const EXIT_USAGE: u8 = 1;
const EXIT_FOUND: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "fplab", version, about = "Floating-point semantics workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a program under one platform model.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "strict-double")]
        model: String,
        /// Print every rounding operation.
        #[arg(long)]
        trace: bool,
    },
    /// Enumerate the outcomes of every admissible rounding placement.
    Explore {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4096)]
        budget: usize,
    },
    /// Interval analysis under a platform envelope.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "strict")]
        envelope: String,
        /// Input interval, `name=lo,hi` or `name=v`.
        #[arg(long = "range", value_name = "NAME=RANGE", allow_hyphen_values = true)]
        ranges: Vec<String>,
    },
    /// Run one program under several models and compare the results.
    Diff {
        #[command(flatten)]
        common: Common,
        /// Models to compare (also accepted as `--models a,b`).
        models: Vec<String>,
        #[arg(id = "models_flag", long = "models", value_delimiter = ',')]
        models_flag: Vec<String>,
    },
    /// The built-in corpus of test programs.
    Corpus {
        #[command(subcommand)]
        cmd: CorpusCmd,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Print the ids of the built-in cases.
    List,
    /// Check every case against its expectations.
    Run {
        /// Run these fixture files instead of the built-in corpus.
        #[arg(long = "file")]
        files: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct Common {
    file: String,
    #[arg(long, default_value = "rne")]
    rounding: String,
    /// Input binding, `name=value`.
    #[arg(long = "input", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    inputs: Vec<String>,
    /// Post-condition asserted before `main` returns.
    #[arg(long, allow_hyphen_values = true)]
    post: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

/// A failure with its exit code.
struct Fail(u8, String);

fn usage(msg: impl Into<String>) -> Fail {
    Fail(EXIT_USAGE, msg.into())
}

fn main() -> ExitCode {
    // clap's own usage errors exit with 2, which is taken here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("fplab: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(cmd: Cmd) -> Result<u8, Fail> {
    match cmd {
        Cmd::Eval { common, model, trace } => eval(&common, &model, trace),
        Cmd::Explore { common, budget } => explore(&common, budget),
        Cmd::Analyze { common, envelope, ranges } => analyze_cmd(&common, &envelope, &ranges),
        Cmd::Diff { common, mut models, models_flag } => {
            models.extend(models_flag);
            diff(&common, &models)
        }
        Cmd::Corpus { cmd: CorpusCmd::List } => {
            for c in builtin_cases() {
                println!("{}", c.id);
            }
            Ok(0)
        }
        Cmd::Corpus { cmd: CorpusCmd::Run { files, format } } => corpus_run(&files, format),
    }
}

struct Loaded {
    prog: Program,
    inputs: Vec<(String, String)>,
    mode: RoundingMode,
}

fn load(c: &Common) -> Result<Loaded, Fail> {
    let text = fs::read_to_string(&c.file).map_err(|e| usage(format!("{}: {e}", c.file)))?;
    let parse_err = |e: fplab_core::lang::LangError| usage(format!("{}:{e}", c.file));
    let prog = match &c.post {
        None => compile(&text).map_err(parse_err)?,
        Some(p) => {
            let post = parse_postcondition(p).map_err(|e| usage(format!("--post: {e}")))?;
            typecheck(with_postcondition(parse_program(&text).map_err(parse_err)?, &post)).map_err(parse_err)?
        }
    };
    let mode = parse_mode(&c.rounding).ok_or_else(|| usage(format!("unknown rounding mode `{}` (rne, rtp, rtn, rtz)", c.rounding)))?;
    let inputs = c.inputs.iter().map(|s| split_binding(s)).collect::<Result<_, _>>()?;
    Ok(Loaded { prog, inputs, mode })
}

fn split_binding(s: &str) -> Result<(String, String), Fail> {
    let (n, v) = s.split_once('=').ok_or_else(|| usage(format!("expected name=value, got `{s}`")))?;
    Ok((n.trim().to_string(), v.trim().to_string()))
}

fn concrete(l: &Loaded) -> Result<Inputs, Fail> {
    parse_inputs(&l.prog, &l.inputs).map_err(|e| usage(e.to_string()))
}

fn model(name: &str) -> Result<fplab_core::model::PlatformModel, Fail> {
    model_by_name(name).ok_or_else(|| usage(format!("unknown model `{name}`; known: {}", model_names().join(", "))))
}

fn outcome_records(o: &Outcome) -> Vec<serde_json::Value> {
    let mut out: Vec<_> = o.values.iter().map(|(n, v)| json!({"kind": "value", "name": n, "value": v.to_string()})).collect();
    for line in &o.output {
        out.push(json!({"kind": "print", "text": line}));
    }
    if let Some(p) = o.failed_assert() {
        out.push(json!({"kind": "assert-failed", "at": p.to_string()}));
    }
    if let Some(e) = &o.error {
        out.push(json!({"kind": "error", "error": e.kind(), "message": e.to_string()}));
    }
    out
}

fn print_outcome(o: &Outcome, indent: &str) {
    for line in &o.output {
        println!("{indent}print: {line}");
    }
    for (n, v) in &o.values {
        if *v != Value::Void {
            println!("{indent}{n} = {v}");
        }
    }
    if let Some(p) = o.failed_assert() {
        println!("{indent}assertion failed at {p}");
    }
    if let Some(e) = &o.error {
        println!("{indent}error: {e}");
    }
}

fn status(o: &Outcome) -> u8 {
    if o.assertion_failed() || o.error.is_some() {
        EXIT_FOUND
    } else {
        0
    }
}

fn eval(c: &Common, model_name: &str, trace: bool) -> Result<u8, Fail> {
    let l = load(c)?;
    let m = model(model_name)?;
    let inputs = concrete(&l)?;
    let cfg = RunConfig { trace, ..RunConfig::with_mode(l.mode) };
    let r = run_program(&m, &l.prog, &inputs, &cfg).map_err(|e| usage(e.to_string()))?;
    match c.format {
        Format::Text => {
            if trace {
                for t in &r.trace.records {
                    println!("trace {}", t.to_json());
                }
            }
            print_outcome(&r.outcome, "");
        }
        Format::Records => {
            for t in &r.trace.records {
                println!("{}", json!({"kind": "op", "op": t.to_json()}));
            }
            for rec in outcome_records(&r.outcome) {
                println!("{rec}");
            }
        }
    }
    Ok(status(&r.outcome))
}

fn explore(c: &Common, budget: usize) -> Result<u8, Fail> {
    let l = load(c)?;
    let inputs = concrete(&l)?;
    let cfg = ExploreConfig { budget, run: RunConfig::with_mode(l.mode), ..ExploreConfig::default() };
    let sets = explore_all(&l.prog, &inputs, &cfg).map_err(|e| usage(e.to_string()))?;
    let mut code = 0;
    for (inst, set) in &sets {
        let v = verdict(set);
        if matches!(v, Verdict::FailsWithWitness(_)) {
            code = EXIT_FOUND;
        }
        let v_text = match &v {
            Verdict::FailsWithWitness(w) => format!("fails, witness {}", format_witness(w)),
            Verdict::HoldsInAllExplored { exhaustive: true } => "holds in every placement".into(),
            Verdict::HoldsInAllExplored { exhaustive: false } => "holds in all explored placements".into(),
        };
        let compute = inst.compute.name();
        match c.format {
            Format::Text => {
                println!(
                    "compute {compute}: {} choice points, {} runs{}, {} outcomes; assertions: {v_text}",
                    set.choice_points,
                    set.explored,
                    if set.exhaustive { " (exhaustive)" } else { "" },
                    set.outcomes.len()
                );
                for (i, e) in set.outcomes.iter().enumerate() {
                    println!("  outcome {} witness {}", i + 1, format_witness(&e.witness));
                    print_outcome(&e.outcome, "    ");
                }
            }
            Format::Records => {
                println!(
                    "{}",
                    json!({"kind": "exploration", "compute": compute, "choice_points": set.choice_points,
                        "runs": set.explored, "exhaustive": set.exhaustive, "verdict": v_text})
                );
                for e in &set.outcomes {
                    println!(
                        "{}",
                        json!({"kind": "outcome", "compute": compute, "witness": format_witness(&e.witness),
                            "records": outcome_records(&e.outcome)})
                    );
                }
            }
        }
    }
    Ok(code)
}

fn analyze_cmd(c: &Common, envelope: &str, ranges: &[String]) -> Result<u8, Fail> {
    let l = load(c)?;
    let env = envelope_by_name(envelope)
        .ok_or_else(|| usage(format!("unknown envelope `{envelope}`; known: {}", ENVELOPE_NAMES.join(", "))))?;
    let main = l.prog.main().expect("typed program has main");
    let mut input_ranges = InputRanges::new();
    let bindings = ranges.iter().map(|s| split_binding(s)).chain(l.inputs.iter().cloned().map(Ok));
    for b in bindings {
        let (name, text) = b?;
        let p = main.params.iter().find(|p| p.name == name).ok_or_else(|| usage(format!("`{name}` is not a parameter of main")))?;
        let v = parse_range(&text, p.ty).map_err(|e| usage(format!("range for `{name}`: {e}")))?;
        input_ranges.insert(name, v);
    }
    let a = analyze(&l.prog, &input_ranges, &env);
    match c.format {
        Format::Text => {
            println!("envelope {envelope}");
            match &a.exit {
                Some(st) => {
                    for (n, (_, v)) in st {
                        println!("{n} in {v}");
                    }
                }
                None => println!("end of main unreachable"),
            }
            if a.alarms.is_empty() {
                println!("no alarms");
            }
            for al in &a.alarms {
                println!("alarm {al}");
            }
        }
        Format::Records => {
            if let Some(st) = &a.exit {
                for (n, (_, v)) in st {
                    println!("{}", json!({"kind": "range", "name": n, "value": v.to_string()}));
                }
            }
            for al in &a.alarms {
                println!(
                    "{}",
                    json!({"kind": "alarm", "line": al.line, "col": al.col, "alarm": al.kind.name(), "detail": al.detail})
                );
            }
        }
    }
    Ok(if a.alarms.is_empty() { 0 } else { EXIT_FOUND })
}

fn diff(c: &Common, names: &[String]) -> Result<u8, Fail> {
    if names.len() < 2 {
        return Err(usage("diff needs at least two models"));
    }
    let l = load(c)?;
    let inputs = concrete(&l)?;
    let cfg = RunConfig::with_mode(l.mode);
    let mut outcomes = Vec::new();
    for n in names {
        let m = model(n)?;
        outcomes.push(run_program(&m, &l.prog, &inputs, &cfg).map_err(|e| usage(e.to_string()))?.outcome);
    }
    let mut rows: Vec<(String, Vec<String>)> = outcomes[0]
        .values
        .iter()
        .filter(|(_, v)| *v != Value::Void)
        .map(|(n, _)| (n.clone(), outcomes.iter().map(|o| o.get(n).map(|v| v.to_string()).unwrap_or_default()).collect()))
        .collect();
    let describe = |o: &Outcome| match (o.failed_assert(), &o.error) {
        (_, Some(e)) => format!("error {}", e.kind()),
        (Some(p), None) => format!("assert failed at {p}"),
        (None, None) => "ok".to_string(),
    };
    rows.push(("status".into(), outcomes.iter().map(describe).collect()));
    let mut differs = false;
    for (name, vals) in &rows {
        let same = vals.iter().all(|v| v == &vals[0]);
        differs |= !same;
        let marker = if same { "agrees" } else { "differs" };
        match c.format {
            Format::Text => {
                let cells: Vec<String> = names.iter().zip(vals).map(|(m, v)| format!("{m}: {v}")).collect();
                println!("{name} {marker}: {}", cells.join(" | "));
            }
            Format::Records => {
                let per: serde_json::Map<String, serde_json::Value> =
                    names.iter().zip(vals).map(|(m, v)| (m.clone(), json!(v))).collect();
                println!("{}", json!({"kind": "diff", "name": name, "agrees": same, "values": per}));
            }
        }
    }
    Ok(if differs { EXIT_FOUND } else { 0 })
}

fn corpus_run(files: &[String], format: Format) -> Result<u8, Fail> {
    let cases: Vec<CorpusCase> = if files.is_empty() {
        builtin_cases()
    } else {
        let mut v = Vec::new();
        for f in files {
            let text = fs::read_to_string(f).map_err(|e| usage(format!("{f}: {e}")))?;
            v.push(parse_case(&text).map_err(|e| usage(format!("{f}: {e}")))?);
        }
        v
    };
    let mut failed = Vec::new();
    for case in &cases {
        let report = run_case(case).map_err(|e| Fail(EXIT_INTERNAL, e.to_string()))?;
        if !report.passed() {
            failed.push(report.id.clone());
        }
        match format {
            Format::Text => print!("{report}"),
            Format::Records => {
                for r in &report.results {
                    println!(
                        "{}",
                        json!({"kind": "check", "case": report.id, "line": r.check.line, "check": r.check.text,
                            "from": r.check.from.name(), "passed": r.failure.is_none(), "got": r.failure})
                    );
                }
            }
        }
    }
    if format == Format::Text {
        println!("{} of {} cases passed", cases.len() - failed.len(), cases.len());
    }
    if failed.is_empty() {
        Ok(0)
    } else {
        Err(Fail(EXIT_FOUND, format!("failing cases: {}", failed.join(", "))))
    }
}
