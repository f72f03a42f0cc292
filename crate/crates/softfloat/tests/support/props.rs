//! Algebraic properties of rounding, runnable at any case count. Each check
//! returns the first violation as an error.

#![allow(dead_code)]

use fplab_softfloat::{
    compare, convert, format_hex, parse_literal, pred, round_exact, succ, CompareResult, ErrorModel, ExactValue,
    FpFormat, FpValue, RoundingMode,
};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

use super::gen;

/// A random exact real with magnitude near `2^e` for `e` drawn from
/// `exps`: dyadic with more bits than any format, or a non-dyadic quotient.
pub fn random_rational<R: Rng>(rng: &mut R, exps: std::ops::RangeInclusive<i64>) -> BigRational {
    let e = rng.gen_range(exps);
    let bits = rng.gen_range(1..=140u64);
    let digits: Vec<u32> = (0..5).map(|_| rng.gen()).collect();
    let mut m = BigUint::new(digits) >> (160 - bits as usize);
    if m.is_zero() {
        m = 1u32.into();
    }
    let mut x = BigRational::from_integer(BigInt::from(m)) * fplab_softfloat::pow2(e - bits as i64);
    if rng.gen_bool(0.3) {
        let d: u64 = rng.gen_range(1..1_000_000) | 1;
        x = x / BigRational::from_integer(d.into()) * BigRational::from_integer(rng.gen_range(1..1_000_000u64).into());
    }
    if rng.gen() {
        -x
    } else {
        x
    }
}

fn exponents(fmt: FpFormat) -> std::ops::RangeInclusive<i64> {
    (fmt.e_min() as i64 - fmt.precision() as i64 - 4)..=(fmt.e_max() as i64 + 2)
}

fn round(fmt: FpFormat, mode: RoundingMode, x: &BigRational) -> FpValue {
    round_exact(fmt, mode, &ExactValue::rational(x.clone())).value
}

fn le(a: &FpValue, b: &FpValue) -> bool {
    matches!(compare(a, b), CompareResult::Less | CompareResult::Equal)
}

const CANONICAL: [FpFormat; 5] =
    [FpFormat::SINGLE, FpFormat::DOUBLE, FpFormat::X87_EXTENDED, FpFormat::X87_PC53, FpFormat::X87_PC24];

/// Rounding a representable value returns it unchanged, sign of zero
/// included, and widening conversions are exact and invertible.
pub fn idempotence<R: Rng>(rng: &mut R, cases: usize) -> Result<(), String> {
    for i in 0..cases {
        let fmt = CANONICAL[i % CANONICAL.len()];
        let mode = RoundingMode::ALL[(i / CANONICAL.len()) % 4];
        let v = gen::any_value(rng, fmt);
        let r = round_exact(fmt, mode, &v.to_exact());
        if r.value != v || !r.flags.is_empty() {
            return Err(format!("round({v}) = {} in {fmt} {mode}", r.value));
        }
        let wide = FpFormat::X87_EXTENDED;
        let w = convert(&v, wide, mode);
        let back = convert(&w.value, fmt, RoundingMode::NearestEven);
        if !w.flags.is_empty() || back.value != v {
            return Err(format!("widen/narrow of {v} in {fmt}"));
        }
    }
    Ok(())
}

/// `x <= y` implies `round(x) <= round(y)` in every mode.
pub fn monotonicity<R: Rng>(rng: &mut R, cases: usize) -> Result<(), String> {
    for i in 0..cases {
        let fmt = CANONICAL[i % 3];
        let mode = RoundingMode::ALL[(i / 3) % 4];
        let x = random_rational(rng, exponents(fmt));
        // a close second point: within a few ulps, or anywhere
        let y = if rng.gen_bool(0.7) {
            let ulp = fplab_softfloat::pow2(rng.gen_range(exponents(fmt)) - fmt.precision() as i64);
            &x + ulp * BigRational::from_integer(rng.gen_range(0..4).into())
        } else {
            random_rational(rng, exponents(fmt))
        };
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let (a, b) = (round(fmt, mode, &lo), round(fmt, mode, &hi));
        if !le(&a, &b) {
            return Err(format!("{fmt} {mode}: round({lo}) = {a} > round({hi}) = {b}"));
        }
    }
    Ok(())
}

/// `RTN(x) <= x <= RTP(x)`, the two are equal or adjacent, RNE is one of
/// them and RTZ picks the one of smaller magnitude.
pub fn bracketing<R: Rng>(rng: &mut R, cases: usize) -> Result<(), String> {
    for i in 0..cases {
        let fmt = CANONICAL[i % CANONICAL.len()];
        let x = random_rational(rng, exponents(fmt));
        let down = round(fmt, RoundingMode::TowardNegative, &x);
        let up = round(fmt, RoundingMode::TowardPositive, &x);
        let near = round(fmt, RoundingMode::NearestEven, &x);
        let zero = round(fmt, RoundingMode::TowardZero, &x);
        let below = |v: &FpValue| v.to_rational().is_none_or(|r| r <= x) && !(v.is_infinite() && !v.is_sign_negative());
        let above = |v: &FpValue| v.to_rational().is_none_or(|r| r >= x) && !(v.is_infinite() && v.is_sign_negative());
        if !below(&down) || !above(&up) {
            return Err(format!("{fmt}: {x} not within [{down}, {up}]"));
        }
        let same = down.to_rational() == up.to_rational() && down.is_finite();
        if !same && succ(fmt, &down) != up && pred(fmt, &up) != down {
            return Err(format!("{fmt}: {down} and {up} not adjacent around {x}"));
        }
        if near != down && near != up {
            return Err(format!("{fmt}: nearest {near} outside [{down}, {up}]"));
        }
        let want_zero = if x.is_negative() { up } else { down };
        if zero != want_zero {
            return Err(format!("{fmt}: toward-zero {zero}, want {want_zero}"));
        }
    }
    Ok(())
}

/// Finite, non-overflowing roundings obey the relative/absolute error model.
pub fn error_bounds<R: Rng>(rng: &mut R, cases: usize) -> Result<(), String> {
    for i in 0..cases {
        let fmt = CANONICAL[i % CANONICAL.len()];
        let mode = RoundingMode::ALL[(i / CANONICAL.len()) % 4];
        let x = random_rational(rng, exponents(fmt));
        let r = round(fmt, mode, &x);
        let Some(v) = r.to_rational() else { continue };
        if x.abs() > fmt.max_finite() {
            continue;
        }
        let model = ErrorModel::for_rounding(fmt, mode);
        if (&x - &v).abs() > model.bound(&x) {
            return Err(format!("{fmt} {mode}: |{x} - {r}| exceeds bound"));
        }
    }
    Ok(())
}

/// Pairs `(wide, narrow)` where every value of `narrow` is representable in
/// `wide`.
pub const NESTED: [(FpFormat, FpFormat); 5] = [
    (FpFormat::X87_EXTENDED, FpFormat::DOUBLE),
    (FpFormat::X87_EXTENDED, FpFormat::SINGLE),
    (FpFormat::DOUBLE, FpFormat::SINGLE),
    (FpFormat::X87_PC53, FpFormat::DOUBLE),
    (FpFormat::X87_PC24, FpFormat::SINGLE),
];

/// Under a directed mode, rounding to a wider format first never changes
/// the final result.
pub fn directed_double_rounding<R: Rng>(rng: &mut R, cases: usize) -> Result<(), String> {
    let directed = [RoundingMode::TowardPositive, RoundingMode::TowardNegative, RoundingMode::TowardZero];
    for i in 0..cases {
        let (wide, narrow) = NESTED[i % NESTED.len()];
        let mode = directed[(i / NESTED.len()) % 3];
        if !wide.contains(&narrow) {
            return Err(format!("{wide} does not contain {narrow}"));
        }
        let x = random_rational(rng, exponents(narrow));
        let once = round(narrow, mode, &x);
        let twice = convert(&round(wide, mode, &x), narrow, mode).value;
        if once != twice {
            return Err(format!("{wide}->{narrow} {mode}: {x}: direct {once}, via wide {twice}"));
        }
    }
    Ok(())
}

/// `parse(format_hex(v)) == v` for values of every canonical format.
pub fn hex_round_trip<R: Rng>(rng: &mut R, cases: usize) -> Result<(), String> {
    for i in 0..cases {
        let fmt = CANONICAL[i % CANONICAL.len()];
        let v = gen::any_value(rng, fmt);
        let text = format_hex(&v);
        match parse_literal(&text, fmt, RoundingMode::NearestEven) {
            Ok(back) if back == v => {}
            other => return Err(format!("{fmt}: {v:?} -> {text} -> {other:?}")),
        }
    }
    Ok(())
}
