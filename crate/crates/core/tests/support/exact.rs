//! Rounding of exact rationals written from the definition of each mode,
//! used to derive expected values without the library's arithmetic.

#![allow(dead_code)]

use fplab_softfloat::{parse_literal, FpFormat, FpValue, Kind, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug)]
pub struct Fmt {
    pub p: i64,
    pub emin: i64,
    pub emax: i64,
}

pub const DOUBLE: Fmt = Fmt { p: 53, emin: -1022, emax: 1023 };
pub const EXTENDED: Fmt = Fmt { p: 64, emin: -16382, emax: 16383 };
pub const PC53: Fmt = Fmt { p: 53, emin: -16382, emax: 16383 };

/// A rounded value: finite, or an infinity (`true` when negative).
#[derive(Clone, Debug, PartialEq)]
pub enum R {
    Finite(BigRational),
    Inf(bool),
}

impl R {
    pub fn val(&self) -> BigRational {
        match self {
            R::Finite(x) => x.clone(),
            R::Inf(_) => panic!("infinite"),
        }
    }
}

pub fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn floor_log2(a: &BigRational) -> i64 {
    let mut e = a.numer().bits() as i64 - a.denom().bits() as i64;
    while pow2(e) > *a {
        e -= 1;
    }
    while pow2(e + 1) <= *a {
        e += 1;
    }
    e
}

pub fn round(x: &BigRational, f: Fmt, mode: RoundingMode) -> R {
    if x.is_zero() {
        return R::Finite(BigRational::zero());
    }
    let neg = x.is_negative();
    let a = x.abs();
    let e = floor_log2(&a).max(f.emin);
    let q = pow2(e - f.p + 1);
    let n = &a / &q;
    let lo = n.floor();
    let frac = &n - &lo;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let up = match mode {
        RoundingMode::NearestEven => frac > half || (frac == half && (lo.to_integer() % 2u32) != BigInt::zero()),
        RoundingMode::TowardZero => false,
        RoundingMode::TowardPositive => !neg && !frac.is_zero(),
        RoundingMode::TowardNegative => neg && !frac.is_zero(),
    };
    let k = if up { lo + BigRational::one() } else { lo };
    let mag = k * q;
    if mag >= pow2(f.emax + 1) {
        let max = (pow2(f.p) - BigRational::one()) * pow2(f.emax - f.p + 1);
        let to_inf = match mode {
            RoundingMode::NearestEven => true,
            RoundingMode::TowardZero => false,
            RoundingMode::TowardPositive => !neg,
            _ => neg,
        };
        return if to_inf { R::Inf(neg) } else { R::Finite(if neg { -max } else { max }) };
    }
    R::Finite(if neg { -mag } else { mag })
}

/// Exact value of a finite float, from its public fields.
pub fn exact(v: &FpValue) -> BigRational {
    match v.kind() {
        Kind::Zero => BigRational::zero(),
        Kind::Normal | Kind::Subnormal => {
            let p = v.format().precision() as i64;
            let mag = BigRational::from_integer(BigInt::from(v.significand())) * pow2(v.exponent() as i64 - (p - 1));
            if v.sign() == Sign::Negative {
                -mag
            } else {
                mag
            }
        }
        _ => panic!("not finite"),
    }
}

/// Exact value of a hex or decimal literal that is a double.
pub fn lit(s: &str) -> BigRational {
    let v = parse_literal(s, FpFormat::DOUBLE, RoundingMode::NearestEven).unwrap();
    let back = parse_literal(s, FpFormat::DOUBLE, RoundingMode::TowardZero).unwrap();
    assert_eq!(v, back, "{s} is not exact in double");
    exact(&v)
}

pub fn rd(x: &BigRational, mode: RoundingMode) -> BigRational {
    round(x, DOUBLE, mode).val()
}

/// Whether a printed value (as in reports) denotes `r`.
pub fn denotes(printed: &str, r: &R) -> bool {
    match r {
        R::Inf(neg) => printed == if *neg { "-inf" } else { "+inf" },
        R::Finite(x) => match parse_literal(printed, FpFormat::X87_EXTENDED, RoundingMode::NearestEven) {
            Ok(v) if v.is_infinite() || v.is_nan() => false,
            Ok(v) => exact(&v) == *x,
            Err(_) => false,
        },
    }
}
