use fplab_core::eval::*;
use fplab_core::lang::{compile, pretty_print, Program};
use fplab_core::model::{PlatformModel, SpillPolicy};
use fplab_core::ndt::*;
use fplab_softfloat::FpFormat;

const EXT: FpFormat = FpFormat::X87_EXTENDED;

const ZERO_NONZERO: &str = r#"
void do_nothing(double x) { }

int main() {
  double x = 0x1p-1022, y = 0x1p100, z;
  do_nothing(y);
  z = x / y;
  if (z != 0) {
    do_nothing(z);
    assert(z != 0);
  }
  return 0;
}
"#;

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
  assert(-180 <= r && r <= 180);
  return 0;
}
"#;

const EARLY_RETURN: &str = r#"
double clamp(double x, double hi) {
  if (x > hi) {
    return hi;
  }
  double y = x * 3;
  while (y > 1) {
    y = y / 2;
    if (y < 1.5) {
      return y + 0.1;
    }
  }
  return y - 0.1;
}

double main(double a, float b) {
  float s = b * b + 0.1f;
  double c = clamp(a / 3, 7.5) + clamp(s, 2);
  return c * a + s;
}
"#;

fn inputs(prog: &Program, pairs: &[(&str, &str)]) -> Inputs {
    let pairs: Vec<(String, String)> = pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    parse_inputs(prog, &pairs).unwrap()
}

fn explore(src: &str, pairs: &[(&str, &str)], opts: InstrumentOptions) -> (Program, Inputs, Instrumented, OutcomeSet) {
    let prog = compile(src).unwrap();
    let inputs = inputs(&prog, pairs);
    let inst = instrument(&prog, opts);
    let set = enumerate_outcomes(&inst, &inputs, &ExploreConfig::default()).unwrap();
    (prog, inputs, inst, set)
}

#[test]
fn square_reaches_both_results() {
    let (_, _, _, set) = explore(
        "double main(double v) { double y = v * v; return y / v; }",
        &[("v", "1e308")],
        InstrumentOptions::new(EXT),
    );
    let fps = set.fingerprints();
    assert!(set.exhaustive);
    assert!(fps.iter().any(|f| f.contains("return = +inf")), "{fps:?}");
    assert!(fps.iter().any(|f| f.contains("return = 0x1.1ccf385ebc8ap+1023")), "{fps:?}");
}

#[test]
fn zero_nonzero_fails_with_a_replayable_witness() {
    let (_, inputs, inst, set) = explore(ZERO_NONZERO, &[], InstrumentOptions::new(EXT));
    let Verdict::FailsWithWitness(w) = verdict(&set) else { panic!("expected a failure") };
    let again = replay_witness(&inst, &inputs, &w, &ExploreConfig::default()).unwrap();
    assert!(again.assertion_failed());
}

#[test]
fn modulo_escapes_its_range() {
    let (_, _, _, set) = explore(MODULO, &[], InstrumentOptions::new(EXT));
    let fps = set.fingerprints();
    assert!(fps.iter().any(|f| f.contains("r = 0x1.67fffffffffffp+7")), "{fps:?}");
    assert!(fps.iter().any(|f| f.contains("r = -0x1.6800000000001p+7")), "{fps:?}");
    assert!(matches!(verdict(&set), Verdict::FailsWithWitness(_)));
}

#[test]
fn trivial_cases() {
    let (_, _, _, set) = explore("int main() { int i = 3; return i * 2; }", &[], InstrumentOptions::new(EXT));
    assert_eq!(set.outcomes.len(), 1);
    assert!(set.exhaustive);
    let (_, _, inst, set) = explore("void main() { double x = 0.1; assert(true); }", &[], InstrumentOptions::new(EXT));
    assert_eq!(inst.points.len(), 1);
    assert!(matches!(verdict(&set), Verdict::HoldsInAllExplored { exhaustive: true }));
}

#[test]
fn every_covered_model_is_an_outcome() {
    let cases: &[(&str, &[(&str, &str)])] = &[
        (ZERO_NONZERO, &[]),
        (MODULO, &[]),
        (EARLY_RETURN, &[("a", "2.2"), ("b", "1.3")]),
        (EARLY_RETURN, &[("a", "30.1"), ("b", "0.7")]),
        ("double main(double v) { double y = v * v; return y / v; }", &[("v", "1e308")]),
        (
            "double main(double a1, double b1, double a2, double b2) { return a1*b1 + a2*b2 - a1*a2; }",
            &[("a1", "0x1.0000002p0"), ("b1", "0x1.0000002p0"), ("a2", "-0x1.0000002p0"), ("b2", "0x1.0000002p0")],
        ),
    ];
    for (src, pairs) in cases {
        let prog = compile(src).unwrap();
        let inputs = inputs(&prog, pairs);
        for (inst, set) in explore_all(&prog, &inputs, &ExploreConfig::default()).unwrap() {
            assert!(set.exhaustive, "{src}");
            for (name, model) in covered_models(&prog, inst.compute, true) {
                let o = run_program(&model, &prog, &inputs, &RunConfig::default()).unwrap().outcome;
                assert!(set.contains(&o), "{name} on {src}:\n{}\nnot in {:#?}", o.fingerprint(), set.fingerprints());
            }
        }
    }
}

#[test]
fn extremes_are_never_and_always_spill() {
    let prog = compile(EARLY_RETURN).unwrap();
    let inputs = inputs(&prog, &[("a", "2.2"), ("b", "1.3")]);
    let inst = instrument(&prog, InstrumentOptions::new(EXT));
    let cfg = ExploreConfig::default();
    let skip = replay_witness(&inst, &inputs, &[], &cfg).unwrap();
    let all = replay_witness(&inst, &inputs, &vec![true; 10_000], &cfg).unwrap();
    let x87 = |spill| PlatformModel::X87 { compute: EXT, spill };
    let never = run_program(&x87(SpillPolicy::NeverSpill), &prog, &inputs, &RunConfig::default()).unwrap();
    let every = run_program(&x87(SpillPolicy::SpillEverywhere), &prog, &inputs, &RunConfig::default()).unwrap();
    assert_eq!(skip.fingerprint(), never.outcome.fingerprint());
    assert_eq!(all.fingerprint(), every.outcome.fingerprint());
}

#[test]
fn witnesses_replay_and_budget_is_monotone() {
    let (_, inputs, inst, full) = explore(EARLY_RETURN, &[("a", "2.2"), ("b", "1.3")], InstrumentOptions::new(EXT));
    let cfg = ExploreConfig::default();
    for o in &full.outcomes {
        assert_eq!(replay_witness(&inst, &inputs, &o.witness, &cfg).unwrap(), o.outcome);
    }
    let mut previous = Default::default();
    for budget in [2, 3, 5, 8, 20, 64, 4096] {
        let set = enumerate_outcomes(&inst, &inputs, &ExploreConfig { budget, ..cfg.clone() }).unwrap();
        let fps = set.fingerprints();
        assert!(fps.is_superset(&previous), "budget {budget}");
        assert!(full.fingerprints().is_superset(&fps));
        previous = fps;
    }
}

#[test]
fn instrumented_programs_print_as_source() {
    for src in [ZERO_NONZERO, MODULO, EARLY_RETURN] {
        let prog = compile(src).unwrap();
        let mut opts = InstrumentOptions::new(FpFormat::DOUBLE);
        opts.fma = true;
        let inst = instrument(&prog, opts);
        let text = pretty_print(&inst.program);
        let again = compile(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(again, inst.program, "{text}");
    }
}

#[test]
fn fma_grouping_offers_both_forms() {
    let mut opts = InstrumentOptions::new(FpFormat::DOUBLE);
    opts.fma = true;
    let (_, _, inst, set) = explore(
        "double main(double a1, double b1, double a2, double b2) { return a1*b1 + a2*b2; }",
        &[("a1", "0x1.0000002p0"), ("b1", "0x1.0000002p0"), ("a2", "-0x1.0000002p0"), ("b2", "0x1.0000002p0")],
        opts,
    );
    assert!(inst.points.iter().any(|p| p.kind == ChoiceKind::FmaGrouping));
    assert_eq!(set.outcomes.len(), 2, "{:?}", set.fingerprints());
}
