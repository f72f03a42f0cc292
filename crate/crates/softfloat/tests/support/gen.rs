//! Random operand generation biased toward the interesting parts of a
//! format: near ties, near the subnormal boundary, near overflow, specials.

#![allow(dead_code)]

use fplab_softfloat::{FpFormat, FpValue, Op, Sign};
use rand::Rng;

pub fn random_sign<R: Rng>(rng: &mut R) -> Sign {
    Sign::from_negative(rng.gen())
}

fn random_significand<R: Rng>(rng: &mut R, p: u32) -> u128 {
    let hidden = 1u128 << (p - 1);
    let frac_mask = hidden - 1;
    let frac = match rng.gen_range(0..6) {
        // few set bits: exact results and ties
        0 => (1u128 << rng.gen_range(0..p - 1)) & frac_mask,
        1 => frac_mask,
        2 => 0,
        3 => frac_mask ^ (1u128 << rng.gen_range(0..p - 1)),
        _ => rng.gen::<u128>() & frac_mask,
    };
    hidden | frac
}

/// A value of `fmt` whose unbiased exponent is near `center` when given.
pub fn value_near<R: Rng>(rng: &mut R, fmt: FpFormat, center: Option<i32>) -> FpValue {
    let p = fmt.precision();
    let sign = random_sign(rng);
    let roll = rng.gen_range(0..100);
    if roll < 3 {
        return match rng.gen_range(0..3) {
            0 => FpValue::zero(fmt, sign),
            1 => FpValue::infinity(fmt, sign),
            _ => FpValue::nan(fmt),
        };
    }
    if roll < 10 {
        let hidden = 1u128 << (p - 1);
        let sig = match rng.gen_range(0..3) {
            0 => 1,
            1 => hidden - 1,
            _ => rng.gen_range(1..hidden),
        };
        return FpValue::from_parts(fmt, sign, sig, fmt.e_min()).unwrap();
    }
    let e = match center {
        Some(c) if roll < 80 => {
            let spread = p as i32 + 4;
            (c + rng.gen_range(-spread..=spread)).clamp(fmt.e_min(), fmt.e_max())
        }
        _ => match rng.gen_range(0..4) {
            0 => fmt.e_max() - rng.gen_range(0..4),
            1 => fmt.e_min() + rng.gen_range(0..4),
            2 => rng.gen_range(-8..=8),
            _ => rng.gen_range(fmt.e_min()..=fmt.e_max()),
        },
    };
    FpValue::from_parts(fmt, sign, random_significand(rng, p), e).unwrap()
}

pub fn any_value<R: Rng>(rng: &mut R, fmt: FpFormat) -> FpValue {
    value_near(rng, fmt, None)
}

fn exponent_of(v: &FpValue) -> Option<i32> {
    if v.is_finite() && !v.is_zero() {
        Some(v.exponent())
    } else {
        None
    }
}

/// Operands for `op`, correlated so that cancellation, ties and range
/// boundaries come up often.
pub fn operands<R: Rng>(rng: &mut R, op: Op, fmt: FpFormat) -> Vec<FpValue> {
    let a = any_value(rng, fmt);
    match op {
        Op::Sqrt => vec![if rng.gen_bool(0.9) { a.abs() } else { a }],
        Op::Add | Op::Sub => {
            let b = value_near(rng, fmt, exponent_of(&a));
            vec![a, b]
        }
        Op::Mul | Op::Div => {
            // keep the result in range most of the time, push it to the edges sometimes
            let target = match rng.gen_range(0..4) {
                0 => fmt.e_max(),
                1 => fmt.e_min(),
                _ => rng.gen_range(-16..=16),
            };
            let ea = exponent_of(&a).unwrap_or(0);
            let eb = if op == Op::Mul { target - ea } else { ea - target };
            vec![a, value_near(rng, fmt, Some(eb))]
        }
        Op::Fma => {
            let eb = rng.gen_range(-20..=20);
            let b = value_near(rng, fmt, Some(eb));
            let ep = exponent_of(&a).unwrap_or(0) + exponent_of(&b).unwrap_or(0);
            let c = value_near(rng, fmt, Some(ep.clamp(fmt.e_min(), fmt.e_max())));
            vec![a, b, c]
        }
    }
}
