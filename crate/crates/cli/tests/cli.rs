use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

const SQUARE: &str = "double main(double v) {\n  double y = v * v;\n  return y / v;\n}\n";

const MODULO: &str = r#"
double modulo(double x, double mini, double maxi) {
  double delta = maxi-mini;
  double decl = x-mini;
  double q = decl/delta;
  return x - floor(q)*delta;
}

int main() {
  double m = 180.;
  double r = modulo(nextafter(m, 0.), -m, m);
  return 0;
}
"#;

const DOUBLE_ROUNDING: &str = "double main(double x0, double y) { double z = x0 + y; return z; }";

fn file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn fplab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fplab")).args(args).output().unwrap()
}

fn with_file(cmd: &str, text: &str, rest: &[&str]) -> (i32, String, String) {
    let f = file(text);
    let path = f.path().to_str().unwrap();
    let mut args = vec![cmd, path];
    args.extend_from_slice(rest);
    let out = fplab(&args);
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn eval_square_per_model() {
    let (code, out, _) = with_file("eval", SQUARE, &["--model", "x87-nospill", "--input", "v=1e308"]);
    assert_eq!(code, 0);
    assert!(out.contains("return = 0x1.1ccf385ebc8ap+1023"), "{out}");
    let (code, out, _) = with_file("eval", SQUARE, &["--model", "strict-double", "--input", "v=1e308"]);
    assert_eq!(code, 0);
    assert!(out.contains("return = +inf"), "{out}");
}

#[test]
fn eval_trace_records_are_json_lines() {
    let (code, out, _) = with_file("eval", SQUARE, &["--input", "v=1e308", "--trace", "--format", "records"]);
    assert_eq!(code, 0);
    let recs: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let mul = recs.iter().find(|r| r["kind"] == "op" && r["op"]["op"] == "mul").expect("mul record");
    assert_eq!(mul["op"]["output"], "+inf");
    assert!(recs.iter().any(|r| r["kind"] == "value" && r["name"] == "return" && r["value"] == "+inf"));
}

#[test]
fn empty_program_exits_zero() {
    let (code, out, _) = with_file("eval", "void main() { }", &[]);
    assert_eq!(code, 0);
    assert!(out.trim().is_empty(), "{out}");
}

#[test]
fn exit_codes() {
    let (code, _, err) = with_file("eval", "double main( {", &[]);
    assert_eq!(code, 1);
    assert!(err.contains("syntax error"), "{err}");
    let (code, _, err) = with_file("eval", SQUARE, &["--model", "vax", "--input", "v=1"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown model"), "{err}");
    let (code, _, _) = with_file("eval", SQUARE, &["--rounding", "up", "--input", "v=1"]);
    assert_eq!(code, 1);
    assert_eq!(fplab(&["frobnicate"]).status.code(), Some(1));
    let (code, out, _) = with_file("eval", "int main() { assert(1 < 0); return 0; }", &[]);
    assert_eq!(code, 2);
    assert!(out.contains("assertion failed at 1:14"), "{out}");
}

#[test]
fn rounding_flag_reaches_the_model() {
    let src = "double main(double b) { double z = 1 / b; return z; }";
    let (_, near, _) = with_file("eval", src, &["--input", "b=3"]);
    let (_, up, _) = with_file("eval", src, &["--input", "b=3", "--rounding", "rtp"]);
    assert!(near.contains("z = 0x1.5555555555555p-2"), "{near}");
    assert!(up.contains("z = 0x1.5555555555556p-2"), "{up}");
}

#[test]
fn explore_modulo_finds_both_outcomes() {
    let (code, out, _) = with_file("explore", MODULO, &[]);
    assert_eq!(code, 0);
    assert!(out.contains("r = 0x1.67fffffffffffp+7"), "{out}");
    assert!(out.contains("r = -0x1.6800000000001p+7"), "{out}");
    let (code, out, _) = with_file("explore", MODULO, &["--post", "-180 <= r <= 180"]);
    assert_eq!(code, 2);
    assert!(out.contains("fails, witness"), "{out}");
}

#[test]
fn explore_constant_program_has_one_outcome() {
    let (code, out, _) = with_file("explore", "int main() { double x = 0.5; return 1; }", &["--format", "records"]);
    assert_eq!(code, 0);
    let recs: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    for r in recs.iter().filter(|r| r["kind"] == "exploration") {
        assert_eq!(r["exhaustive"], true);
    }
    let outcomes: Vec<_> = recs.iter().filter(|r| r["kind"] == "outcome").collect();
    assert!(outcomes.iter().all(|o| o["records"] == outcomes[0]["records"]));
}

#[test]
fn analyze_modulo_under_x87_alarms() {
    let src = MODULO.replace("int main() {", "double main(double x) {").replace("modulo(nextafter(m, 0.), -m, m)", "modulo(x, -m, m)");
    let (code, out, _) = with_file("analyze", &src, &["--envelope", "x87", "--range", "x=-180,180", "--post", "-180 <= r <= 180"]);
    assert_eq!(code, 2);
    assert!(out.contains("alarm ") && out.contains("assert"), "{out}");
    let (code, out, _) = with_file("analyze", "double main() { double a = 0.5 + 0.25; return a; }", &[]);
    assert_eq!(code, 0);
    assert!(out.contains("a in [0x1.8p-1, 0x1.8p-1]"), "{out}");
    assert!(out.contains("no alarms"), "{out}");
    let (code, _, err) = with_file("analyze", SQUARE, &["--envelope", "vax"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown envelope"), "{err}");
}

#[test]
fn diff_reports_divergence() {
    let inputs = ["--input", "x0=0x1.0000000000001p0", "--input", "y=0x1.ffcp-54"];
    let mut args = vec!["strict-double", "x87-spill-assign"];
    args.extend_from_slice(&inputs);
    let (code, out, _) = with_file("diff", DOUBLE_ROUNDING, &args);
    assert_eq!(code, 2);
    let z = out.lines().find(|l| l.starts_with("z ")).unwrap();
    assert!(z.starts_with("z differs"), "{z}");
    assert!(z.contains("0x1.0000000000001p+0") && z.contains("0x1.0000000000002p+0"), "{z}");
    let mut args = vec!["--models", "strict-double,x87-spill-assign"];
    args.extend_from_slice(&inputs);
    let (code, again, _) = with_file("diff", DOUBLE_ROUNDING, &args);
    assert_eq!((code, again), (2, out));
}

#[test]
fn diff_on_integers_agrees() {
    let src = "int main(int n) { int s = 0; int i = 0; while (i < n) { s = s + i; i = i + 1; } return s; }";
    let (code, out, _) = with_file("diff", src, &["strict-double", "x87-spill-assign", "sse-ftz", "ppc-fma", "--input", "n=10"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().all(|l| l.contains(" agrees: ")), "{out}");
    let (code, _, _) = with_file("diff", src, &["strict-double", "--input", "n=1"]);
    assert_eq!(code, 1);
}

#[test]
fn corpus_list_and_run() {
    let out = fplab(&["corpus", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let ids: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect();
    for id in ["square", "zero_nonzero", "double_rounding", "min_table", "modulo", "table_lookup", "sum_reassoc"] {
        assert!(ids.iter().any(|i| i == id), "{id}");
    }
    let out = fplab(&["corpus", "run"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains(&format!("{n} of {n} cases passed", n = ids.len())), "{text}");
}

#[test]
fn sabotaged_fixture_fails_naming_the_case() {
    let good = include_str!("../../core/corpus/recip_b.case");
    let bad = good.replace("z = 0x1p+0", "z = 0x1.0000000000001p+0");
    assert_ne!(good, bad);
    let f = file(&bad);
    let out = fplab(&["corpus", "run", "--file", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL recip_b"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("recip_b"));
    let ok = file(good);
    assert_eq!(fplab(&["corpus", "run", "--file", ok.path().to_str().unwrap()]).status.code(), Some(0));
}
