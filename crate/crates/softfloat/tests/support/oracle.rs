//! Test-only exact-rational oracle.
//!
//! Nothing here calls into the library's rounding, neighbor or arithmetic
//! code: values are decoded from their public fields, exact results come
//! from `BigRational` arithmetic with an independently written table of IEEE
//! special cases, and a candidate result is accepted only if it satisfies
//! the definition of its rounding mode against neighbors computed by ordinal
//! arithmetic.

#![allow(dead_code)]

use std::cmp::Ordering;

use fplab_softfloat::{Flags, FpFormat, FpValue, Kind, Op, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn two_pow(e: i64) -> BigRational {
    dyadic(BigInt::one(), e)
}

/// `m * 2^e` in lowest terms, reduced by stripping trailing zero bits
/// instead of a gcd on (possibly 16k-bit) operands.
pub fn dyadic(m: BigInt, e: i64) -> BigRational {
    if m.is_zero() {
        return BigRational::zero();
    }
    let tz = m.trailing_zeros().unwrap() as i64;
    let e = e + tz;
    let m = m >> tz as usize;
    if e >= 0 {
        BigRational::new_raw(m << e as usize, BigInt::one())
    } else {
        BigRational::new_raw(m, BigInt::one() << (-e) as usize)
    }
}

fn as_dyadic(x: &BigRational) -> Option<(BigInt, i64)> {
    let d = x.denom();
    let tz = d.trailing_zeros().unwrap_or(0);
    (d.bits() == tz + 1).then(|| (x.numer().clone(), -(tz as i64)))
}

/// Sum, exact; dyadic operands avoid the gcd.
pub fn add(x: &BigRational, y: &BigRational) -> BigRational {
    match (as_dyadic(x), as_dyadic(y)) {
        (Some((a, ea)), Some((b, eb))) => {
            let e = ea.min(eb);
            dyadic((a << (ea - e) as usize) + (b << (eb - e) as usize), e)
        }
        _ => x + y,
    }
}

pub fn mul(x: &BigRational, y: &BigRational) -> BigRational {
    match (as_dyadic(x), as_dyadic(y)) {
        (Some((a, ea)), Some((b, eb))) => dyadic(a * b, ea + eb),
        _ => x * y,
    }
}

fn half(x: &BigRational) -> BigRational {
    match as_dyadic(x) {
        Some((a, e)) => dyadic(a, e - 1),
        None => x / BigRational::from_integer(2.into()),
    }
}

/// Exact value of an operation result, before rounding.
#[derive(Clone, Debug)]
pub enum Target {
    NaN { invalid: bool },
    Inf { negative: bool, divide_by_zero: bool },
    /// Exact rational; `negative_zero` only matters when the rational is zero.
    Value { x: BigRational, negative_zero: bool },
    /// `sqrt(radicand)` for a positive rational radicand.
    Sqrt { radicand: BigRational },
}

#[derive(Clone, Debug)]
pub enum Decoded {
    NaN,
    Inf(bool),
    Finite(BigRational, bool),
}

pub fn decode(v: &FpValue) -> Decoded {
    let neg = v.sign() == fplab_softfloat::Sign::Negative;
    match v.kind() {
        Kind::NaN => Decoded::NaN,
        Kind::Infinity => Decoded::Inf(neg),
        Kind::Zero => Decoded::Finite(BigRational::zero(), neg),
        _ => {
            let p = v.format().precision() as i64;
            let mag = dyadic(BigInt::from(v.significand()), v.exponent() as i64 - (p - 1));
            Decoded::Finite(if neg { -mag } else { mag }, neg)
        }
    }
}

/// Exact result per IEEE-754 semantics over the extended reals.
pub fn exact_result(op: Op, mode: RoundingMode, args: &[FpValue]) -> Target {
    let d: Vec<Decoded> = args.iter().map(decode).collect();
    if d.iter().any(|x| matches!(x, Decoded::NaN)) {
        return Target::NaN { invalid: false };
    }
    let rtn = mode == RoundingMode::TowardNegative;
    let sum = |a: &Decoded, b: &Decoded| -> Target {
        match (a, b) {
            (Decoded::Inf(x), Decoded::Inf(y)) if x != y => Target::NaN { invalid: true },
            (Decoded::Inf(x), _) | (_, Decoded::Inf(x)) => Target::Inf { negative: *x, divide_by_zero: false },
            (Decoded::Finite(x, nx), Decoded::Finite(y, ny)) => {
                let s = add(x, y);
                let negative_zero = if x.is_zero() && y.is_zero() && nx == ny { *nx } else { rtn };
                Target::Value { x: s, negative_zero }
            }
            _ => unreachable!(),
        }
    };
    let product = |a: &Decoded, b: &Decoded| -> Result<Decoded, Target> {
        match (a, b) {
            (Decoded::Inf(x), Decoded::Finite(v, n)) | (Decoded::Finite(v, n), Decoded::Inf(x)) => {
                if v.is_zero() {
                    Err(Target::NaN { invalid: true })
                } else {
                    Ok(Decoded::Inf(x != n))
                }
            }
            (Decoded::Inf(x), Decoded::Inf(y)) => Ok(Decoded::Inf(x != y)),
            (Decoded::Finite(x, nx), Decoded::Finite(y, ny)) => Ok(Decoded::Finite(mul(x, y), nx != ny)),
            _ => unreachable!(),
        }
    };
    let negate = |a: &Decoded| match a {
        Decoded::Inf(n) => Decoded::Inf(!n),
        Decoded::Finite(x, n) => Decoded::Finite(-x, !n),
        Decoded::NaN => Decoded::NaN,
    };
    match op {
        Op::Add => sum(&d[0], &d[1]),
        Op::Sub => sum(&d[0], &negate(&d[1])),
        Op::Mul => match product(&d[0], &d[1]) {
            Err(t) => t,
            Ok(Decoded::Inf(n)) => Target::Inf { negative: n, divide_by_zero: false },
            Ok(Decoded::Finite(x, n)) => Target::Value { x, negative_zero: n },
            Ok(Decoded::NaN) => unreachable!(),
        },
        Op::Div => match (&d[0], &d[1]) {
            (Decoded::Inf(_), Decoded::Inf(_)) => Target::NaN { invalid: true },
            (Decoded::Inf(x), Decoded::Finite(_, n)) => Target::Inf { negative: x != n, divide_by_zero: false },
            (Decoded::Finite(_, n), Decoded::Inf(y)) => Target::Value { x: BigRational::zero(), negative_zero: n != y },
            (Decoded::Finite(x, nx), Decoded::Finite(y, ny)) => {
                if y.is_zero() {
                    if x.is_zero() {
                        Target::NaN { invalid: true }
                    } else {
                        Target::Inf { negative: nx != ny, divide_by_zero: true }
                    }
                } else {
                    Target::Value { x: x / y, negative_zero: nx != ny }
                }
            }
            _ => unreachable!(),
        },
        Op::Sqrt => match &d[0] {
            Decoded::Inf(true) => Target::NaN { invalid: true },
            Decoded::Inf(false) => Target::Inf { negative: false, divide_by_zero: false },
            Decoded::Finite(x, n) if x.is_zero() => Target::Value { x: x.clone(), negative_zero: *n },
            Decoded::Finite(x, _) if x.is_negative() => Target::NaN { invalid: true },
            Decoded::Finite(x, _) => Target::Sqrt { radicand: x.clone() },
            Decoded::NaN => unreachable!(),
        },
        Op::Fma => match product(&d[0], &d[1]) {
            Err(t) => t,
            Ok(p) => sum(&p, &d[2]),
        },
    }
}

impl Target {
    /// Ordering of the exact target against a rational.
    fn cmp_rational(&self, v: &BigRational) -> Ordering {
        match self {
            Target::Value { x, .. } => x.cmp(v),
            Target::Sqrt { radicand } => {
                if v.is_negative() {
                    Ordering::Greater
                } else {
                    radicand.cmp(&mul(v, v))
                }
            }
            _ => unreachable!(),
        }
    }

    fn is_negative(&self) -> bool {
        match self {
            Target::Value { x, .. } => x.is_negative(),
            _ => false,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Target::Value { x, .. } if x.is_zero())
    }

    /// `|t| <op> v` for non-negative `v`.
    fn cmp_abs(&self, v: &BigRational) -> Ordering {
        match self {
            Target::Value { x, .. } if x.is_negative() => (-x).cmp(v),
            _ => self.cmp_rational(v),
        }
    }
}

/// Signed ordinal of a finite value: consecutive values of `fmt` have
/// consecutive ordinals, both zeros map to 0.
pub fn ordinal(v: &FpValue) -> i128 {
    let f = v.format();
    let p = f.precision();
    let mag: i128 = match v.kind() {
        Kind::Zero => 0,
        Kind::Subnormal => v.significand() as i128,
        Kind::Normal => ((v.exponent() - f.e_min()) as i128) * (1i128 << (p - 1)) + v.significand() as i128,
        _ => panic!("ordinal of non-finite"),
    };
    if v.sign() == fplab_softfloat::Sign::Negative {
        -mag
    } else {
        mag
    }
}

pub fn max_ordinal(f: FpFormat) -> i128 {
    let p = f.precision();
    ((f.e_max() - f.e_min()) as i128) * (1i128 << (p - 1)) + (1i128 << p) - 1
}

/// Exact value of the finite value with ordinal `k`.
pub fn ordinal_value(f: FpFormat, k: i128) -> BigRational {
    let p = f.precision() as i64;
    let mag = k.unsigned_abs();
    let half = 1u128 << (p - 1);
    let block = mag / half;
    let (sig, exp) = if block == 0 {
        (mag, f.e_min() as i64)
    } else {
        (mag - (block - 1) * half, f.e_min() as i64 + block as i64 - 1)
    };
    let v = dyadic(BigInt::from(sig), exp - (p - 1));
    if k < 0 {
        -v
    } else {
        v
    }
}

/// Checks that `got` is the correctly rounded result of `target` in `fmt`
/// under `mode`, with correct exception flags.
pub fn check(fmt: FpFormat, mode: RoundingMode, target: &Target, got: &FpValue, flags: Flags) -> Result<(), String> {
    if got.format() != fmt {
        return Err(format!("result in wrong format {}", got.format()));
    }
    match target {
        Target::NaN { invalid } => {
            if !got.is_nan() {
                return Err("expected NaN".into());
            }
            if flags.contains(Flags::INVALID) != *invalid {
                return Err(format!("invalid flag mismatch: {flags:?}"));
            }
            return Ok(());
        }
        Target::Inf { negative, divide_by_zero } => {
            if !got.is_infinite() || got.is_sign_negative() != *negative {
                return Err("expected exact infinity".into());
            }
            if flags.contains(Flags::DIVIDE_BY_ZERO) != *divide_by_zero {
                return Err(format!("divide-by-zero flag mismatch: {flags:?}"));
            }
            return Ok(());
        }
        _ => {}
    }
    if got.is_nan() {
        return Err("unexpected NaN".into());
    }
    let max = ordinal_value(fmt, max_ordinal(fmt));
    let p = fmt.precision() as i64;
    let threshold = mul(&two_pow(fmt.e_max() as i64), &(BigRational::from_integer(2.into()) - two_pow(-p)));
    let negative = target.is_negative();
    let exact_zero = target.is_zero();

    // Would the rounded result exceed the finite range?
    let away = match mode {
        RoundingMode::NearestEven => true,
        RoundingMode::TowardPositive => !negative,
        RoundingMode::TowardNegative => negative,
        RoundingMode::TowardZero => false,
    };
    // rounding with an unbounded exponent range would exceed the largest finite value
    let overflows = match mode {
        RoundingMode::NearestEven => target.cmp_abs(&threshold) != Ordering::Less,
        _ if away => target.cmp_abs(&max) == Ordering::Greater,
        _ => target.cmp_abs(&two_pow(fmt.e_max() as i64 + 1)) != Ordering::Less,
    };
    if overflows {
        let to_inf = away;
        let ok = if to_inf {
            got.is_infinite() && got.is_sign_negative() == negative
        } else {
            got.is_finite() && ordinal(got) == if negative { -max_ordinal(fmt) } else { max_ordinal(fmt) }
        };
        if !ok {
            return Err(format!("overflow handling wrong (to_inf={to_inf})"));
        }
        if !flags.contains(Flags::OVERFLOW | Flags::INEXACT) {
            return Err(format!("missing overflow flags: {flags:?}"));
        }
        return Ok(());
    }
    if got.is_infinite() {
        return Err("unexpected infinity".into());
    }
    if flags.contains(Flags::OVERFLOW) {
        return Err("spurious overflow flag".into());
    }

    let k = ordinal(got);
    let value = ordinal_value(fmt, k);
    let at = target.cmp_rational(&value);
    let lower = |k: i128| ordinal_value(fmt, k - 1);
    let upper = |k: i128| {
        if k == max_ordinal(fmt) {
            two_pow(fmt.e_max() as i64 + 1)
        } else {
            ordinal_value(fmt, k + 1)
        }
    };
    let lower_of = |k: i128| {
        if k == -max_ordinal(fmt) {
            -two_pow(fmt.e_max() as i64 + 1)
        } else {
            lower(k)
        }
    };
    let ok = match mode {
        RoundingMode::TowardPositive => at != Ordering::Greater && target.cmp_rational(&lower_of(k)) == Ordering::Greater,
        RoundingMode::TowardNegative => at != Ordering::Less && target.cmp_rational(&upper(k)) == Ordering::Less,
        RoundingMode::TowardZero => {
            if negative {
                at != Ordering::Greater && target.cmp_rational(&lower_of(k)) == Ordering::Greater
            } else {
                at != Ordering::Less && target.cmp_rational(&upper(k)) == Ordering::Less
            }
        }
        RoundingMode::NearestEven => {
            // target lies within [mid(k-1,k), mid(k,k+1)], ties resolved to even ordinals
            let lo_mid = half(&add(&lower_of(k), &value));
            let hi_mid = half(&add(&value, &upper(k)));
            let c_lo = target.cmp_rational(&lo_mid);
            let c_hi = target.cmp_rational(&hi_mid);
            let even = k % 2 == 0;
            (c_lo == Ordering::Greater || (c_lo == Ordering::Equal && even))
                && (c_hi == Ordering::Less || (c_hi == Ordering::Equal && even))
        }
    };
    if !ok {
        return Err(format!("not correctly rounded (ordinal {k})"));
    }
    // sign of zero results
    if got.is_zero() {
        let want_negative = match target {
            Target::Value { negative_zero, .. } if exact_zero => *negative_zero,
            _ => negative,
        };
        if got.is_sign_negative() != want_negative {
            return Err("wrong sign of zero".into());
        }
    }
    let inexact = at != Ordering::Equal;
    if flags.contains(Flags::INEXACT) != inexact {
        return Err(format!("inexact flag mismatch: {flags:?}"));
    }
    let tiny = target.cmp_abs(&two_pow(fmt.e_min() as i64)) == Ordering::Less && !exact_zero;
    if flags.contains(Flags::UNDERFLOW) != (tiny && inexact) {
        return Err(format!("underflow flag mismatch: {flags:?}"));
    }
    Ok(())
}

/// Every value of a (small) format, in increasing order, plus infinities.
pub fn all_values(f: FpFormat) -> Vec<FpValue> {
    use fplab_softfloat::Sign;
    let mut out = vec![FpValue::infinity(f, Sign::Negative)];
    let hidden = 1u128 << (f.precision() - 1);
    let mut positives = Vec::new();
    for sig in 1..hidden {
        positives.push(FpValue::from_parts(f, Sign::Positive, sig, f.e_min()).unwrap());
    }
    for e in f.e_min()..=f.e_max() {
        for sig in hidden..hidden * 2 {
            positives.push(FpValue::from_parts(f, Sign::Positive, sig, e).unwrap());
        }
    }
    out.extend(positives.iter().rev().map(|v| v.negate()));
    out.push(FpValue::zero(f, Sign::Negative));
    out.push(FpValue::zero(f, Sign::Positive));
    out.extend(positives);
    out.push(FpValue::infinity(f, Sign::Positive));
    out
}

/// Finite values of a small format as (value, even significand), sorted,
/// with the two zeros merged.
pub fn finite_table(values: &[FpValue]) -> Vec<(BigRational, bool)> {
    let mut out: Vec<(BigRational, bool)> = values
        .iter()
        .filter(|v| v.is_finite())
        .map(|v| match decode(v) {
            Decoded::Finite(r, _) => (r, v.significand() % 2 == 0),
            _ => unreachable!(),
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.dedup_by(|a, b| a.0 == b.0);
    out
}

/// Rounding by exhaustive search over a `finite_table` (results within
/// range only); the straight reading of the mode definitions.
pub fn brute_force_round(table: &[(BigRational, bool)], mode: RoundingMode, x: &BigRational) -> BigRational {
    let ge = table.iter().filter(|v| &v.0 >= x).min_by(|a, b| a.0.cmp(&b.0));
    let le = table.iter().filter(|v| &v.0 <= x).max_by(|a, b| a.0.cmp(&b.0));
    let pick = match mode {
        RoundingMode::TowardPositive => ge,
        RoundingMode::TowardNegative => le,
        RoundingMode::TowardZero if x.is_negative() => ge,
        RoundingMode::TowardZero => le,
        RoundingMode::NearestEven => {
            let (lo, hi) = (le.unwrap(), ge.unwrap());
            match (x - &lo.0).cmp(&(&hi.0 - x)) {
                Ordering::Less => Some(lo),
                Ordering::Greater => Some(hi),
                Ordering::Equal if lo.1 => Some(lo),
                Ordering::Equal => Some(hi),
            }
        }
    };
    pick.expect("value within range").0.clone()
}
