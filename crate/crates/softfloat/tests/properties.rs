mod support;

use fplab_softfloat::{
    convert, format_hex, parse_literal, round_exact, ExactValue, FpFormat, FpValue, RoundingMode, Sign,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::props;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn idempotence() {
    props::idempotence(&mut rng(20), 20000).unwrap();
}

#[test]
fn monotonicity() {
    props::monotonicity(&mut rng(21), 20000).unwrap();
}

#[test]
fn bracketing() {
    props::bracketing(&mut rng(22), 20000).unwrap();
}

#[test]
fn error_bounds() {
    props::error_bounds(&mut rng(23), 20000).unwrap();
}

#[test]
fn directed_double_rounding_is_exact() {
    props::directed_double_rounding(&mut rng(24), 20000).unwrap();
}

#[test]
fn hex_round_trip() {
    props::hex_round_trip(&mut rng(25), 20000).unwrap();
}

#[test]
fn nearest_double_rounding_can_differ() {
    // the counterpart of the directed property: a tie created by the first rounding
    let x0 = BigRational::from_integer(BigInt::from((1u64 << 52) + 1)) * fplab_softfloat::pow2(-52);
    let y = fplab_softfloat::pow2(-53) * (BigRational::from_integer(1.into()) - fplab_softfloat::pow2(-11));
    let s = x0 + y;
    let rne = RoundingMode::NearestEven;
    let once = round_exact(FpFormat::DOUBLE, rne, &ExactValue::rational(s.clone())).value;
    let wide = round_exact(FpFormat::X87_EXTENDED, rne, &ExactValue::rational(s)).value;
    let twice = convert(&wide, FpFormat::DOUBLE, rne).value;
    assert_eq!(format_hex(&once), "0x1.0000000000001p+0");
    assert_eq!(format_hex(&twice), "0x1.0000000000002p+0");
}

fn double_bits() -> impl Strategy<Value = FpValue> {
    any::<u64>().prop_map(|b| FpValue::from_f64(f64::from_bits(b)))
}

fn extended_value() -> impl Strategy<Value = FpValue> {
    let f = FpFormat::X87_EXTENDED;
    (any::<bool>(), any::<u64>(), f.e_min()..=f.e_max()).prop_map(move |(neg, frac, e)| {
        let sig = (frac as u128) | (1u128 << 63);
        FpValue::from_parts(f, Sign::from_negative(neg), sig, e).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn hex_round_trip_double_bits(v in double_bits()) {
        let back = parse_literal(&format_hex(&v), FpFormat::DOUBLE, RoundingMode::NearestEven).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn hex_round_trip_extended(v in extended_value()) {
        let back = parse_literal(&format_hex(&v), FpFormat::X87_EXTENDED, RoundingMode::NearestEven).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn decimal_parse_matches_host(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        // Rust's float formatting is shortest round-trip; parsing it must land on x
        let text = format!("{x:e}");
        let v = parse_literal(&text, FpFormat::DOUBLE, RoundingMode::NearestEven).unwrap();
        prop_assert_eq!(v.to_f64().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn narrowing_matches_host_cast(x in any::<f64>()) {
        let v = convert(&FpValue::from_f64(x), FpFormat::SINGLE, RoundingMode::NearestEven).value;
        let want = x as f32;
        prop_assert!(v.to_f32().unwrap().to_bits() == want.to_bits() || want.is_nan());
    }
}
