use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::value::Sign;

/// `2^e` as an exact rational.
pub fn pow2(e: i64) -> BigRational {
    let one = BigInt::one();
    if e >= 0 {
        BigRational::from_integer(one << (e as u64))
    } else {
        BigRational::new_raw(one.clone(), one << ((-e) as u64))
    }
}

/// The infinitely precise value of a computation, before any rounding.
///
/// A zero rational carries the sign the IEEE zero rules assign to it; for
/// non-zero rationals `zero_sign` is always `Positive` and ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactValue {
    Finite { value: BigRational, zero_sign: Sign },
    PositiveInfinity,
    NegativeInfinity,
    NaN,
}

impl ExactValue {
    pub fn rational(value: BigRational) -> Self {
        ExactValue::Finite { value, zero_sign: Sign::Positive }
    }

    pub fn zero(sign: Sign) -> Self {
        ExactValue::Finite { value: BigRational::zero(), zero_sign: sign }
    }

    pub fn integer(v: impl Into<BigInt>) -> Self {
        Self::rational(BigRational::from_integer(v.into()))
    }

    /// `mantissa * 2^exp2`.
    pub fn dyadic(mantissa: BigInt, exp2: i64) -> Self {
        Self::rational(BigRational::from_integer(mantissa) * pow2(exp2))
    }

    pub fn infinity(sign: Sign) -> Self {
        match sign {
            Sign::Positive => ExactValue::PositiveInfinity,
            Sign::Negative => ExactValue::NegativeInfinity,
        }
    }

    pub fn is_nan(&self) -> bool {
        matches!(self, ExactValue::NaN)
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExactValue::Finite { value, .. } => Some(value),
            _ => None,
        }
    }

    /// Sign of the value, including the sign of zero; `None` for NaN.
    pub fn sign(&self) -> Option<Sign> {
        match self {
            ExactValue::Finite { value, zero_sign } => Some(if value.is_zero() {
                *zero_sign
            } else if value.is_negative() {
                Sign::Negative
            } else {
                Sign::Positive
            }),
            ExactValue::PositiveInfinity => Some(Sign::Positive),
            ExactValue::NegativeInfinity => Some(Sign::Negative),
            ExactValue::NaN => None,
        }
    }
}

impl From<BigRational> for ExactValue {
    fn from(r: BigRational) -> Self {
        ExactValue::rational(r)
    }
}

/// Non-zero `±num/den * 2^exp2`, the working form of the rounding kernel.
#[derive(Clone, Debug)]
pub(crate) struct Scaled {
    pub negative: bool,
    pub num: BigUint,
    pub den: BigUint,
    pub exp2: i64,
}

impl Scaled {
    /// Strips powers of two out of the numerator and denominator.
    pub fn new(negative: bool, mut num: BigUint, mut den: BigUint, mut exp2: i64) -> Scaled {
        debug_assert!(!num.is_zero() && !den.is_zero());
        let tz = num.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            num >>= tz;
            exp2 += tz as i64;
        }
        let tz = den.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            den >>= tz;
            exp2 -= tz as i64;
        }
        Scaled { negative, num, den, exp2 }
    }

    pub fn from_rational(r: &BigRational) -> Option<Scaled> {
        if r.is_zero() {
            return None;
        }
        let negative = r.numer().sign() == BigSign::Minus;
        Some(Scaled::new(negative, r.numer().magnitude().clone(), r.denom().magnitude().clone(), 0))
    }

    /// `floor(log2(|value|))`.
    pub fn floor_log2(&self) -> i64 {
        let nb = self.num.bits() as i64;
        let db = self.den.bits() as i64;
        let mut e = nb - db;
        // num/den in [2^(e-1), 2^(e+1)); check whether it reaches 2^e.
        let below = if e >= 0 {
            self.num < (&self.den << (e as u64))
        } else {
            (&self.num << ((-e) as u64)) < self.den
        };
        if below {
            e -= 1;
        }
        e + self.exp2
    }
}
