use std::fmt;
use std::ops::{Mul, Neg};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use crate::exact::{pow2, ExactValue, Scaled};
use crate::format::FpFormat;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn is_negative(self) -> bool {
        self == Sign::Negative
    }

    pub fn from_negative(negative: bool) -> Sign {
        if negative {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_negative(self.is_negative() != rhs.is_negative())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Zero,
    Subnormal,
    Normal,
    Infinity,
    NaN,
}

/// One floating-point datum of some [`FpFormat`].
///
/// Finite values denote `±significand * 2^(exponent - (p - 1))`. Zeros,
/// infinities and NaN keep `significand == 0` and `exponent == 0`; there is a
/// single NaN, always stored with a positive sign, so the derived equality is
/// bit-exact identity (`+0 != -0`, `NaN == NaN`). Use [`crate::compare`] for
/// IEEE ordering.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpValue {
    format: FpFormat,
    sign: Sign,
    kind: Kind,
    significand: u128,
    exponent: i32,
}

impl FpValue {
    pub fn zero(format: FpFormat, sign: Sign) -> FpValue {
        FpValue { format, sign, kind: Kind::Zero, significand: 0, exponent: 0 }
    }

    pub fn infinity(format: FpFormat, sign: Sign) -> FpValue {
        FpValue { format, sign, kind: Kind::Infinity, significand: 0, exponent: 0 }
    }

    pub fn nan(format: FpFormat) -> FpValue {
        FpValue { format, sign: Sign::Positive, kind: Kind::NaN, significand: 0, exponent: 0 }
    }

    /// Builds a finite value from its fields, checking the representation
    /// invariants. A zero significand yields a zero of the given sign.
    pub fn from_parts(format: FpFormat, sign: Sign, significand: u128, exponent: i32) -> Option<FpValue> {
        let hidden = format.hidden_bit();
        if significand == 0 {
            return Some(FpValue::zero(format, sign));
        }
        if significand < hidden {
            if exponent != format.e_min() {
                return None;
            }
            return Some(FpValue { format, sign, kind: Kind::Subnormal, significand, exponent });
        }
        if significand >= hidden << 1 || exponent < format.e_min() || exponent > format.e_max() {
            return None;
        }
        Some(FpValue { format, sign, kind: Kind::Normal, significand, exponent })
    }

    /// Largest finite value of the format with the given sign.
    pub fn max_finite(format: FpFormat, sign: Sign) -> FpValue {
        let sig = (format.hidden_bit() << 1) - 1;
        FpValue { format, sign, kind: Kind::Normal, significand: sig, exponent: format.e_max() }
    }

    /// Smallest positive (or negative, per `sign`) subnormal.
    pub fn min_subnormal(format: FpFormat, sign: Sign) -> FpValue {
        FpValue { format, sign, kind: Kind::Subnormal, significand: 1, exponent: format.e_min() }
    }

    pub fn from_f64(x: f64) -> FpValue {
        let fmt = FpFormat::DOUBLE;
        let bits = x.to_bits();
        let sign = Sign::from_negative(bits >> 63 != 0);
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as u128;
        match biased {
            0x7ff if frac != 0 => FpValue::nan(fmt),
            0x7ff => FpValue::infinity(fmt, sign),
            0 => FpValue::from_parts(fmt, sign, frac, fmt.e_min()).expect("subnormal f64"),
            _ => FpValue::from_parts(fmt, sign, frac | (1u128 << 52), biased - 1023).expect("normal f64"),
        }
    }

    pub fn from_f32(x: f32) -> FpValue {
        let fmt = FpFormat::SINGLE;
        let bits = x.to_bits();
        let sign = Sign::from_negative(bits >> 31 != 0);
        let biased = ((bits >> 23) & 0xff) as i32;
        let frac = (bits & ((1u32 << 23) - 1)) as u128;
        match biased {
            0xff if frac != 0 => FpValue::nan(fmt),
            0xff => FpValue::infinity(fmt, sign),
            0 => FpValue::from_parts(fmt, sign, frac, fmt.e_min()).expect("subnormal f32"),
            _ => FpValue::from_parts(fmt, sign, frac | (1u128 << 23), biased - 127).expect("normal f32"),
        }
    }

    /// The host `f64` with the same value, when the value is a double.
    pub fn to_f64(&self) -> Option<f64> {
        if self.format != FpFormat::DOUBLE {
            return None;
        }
        let sign_bit = (self.sign.is_negative() as u64) << 63;
        let bits = match self.kind {
            Kind::NaN => return Some(f64::NAN),
            Kind::Infinity => sign_bit | (0x7ffu64 << 52),
            Kind::Zero => sign_bit,
            Kind::Subnormal => sign_bit | self.significand as u64,
            Kind::Normal => {
                let biased = (self.exponent + 1023) as u64;
                sign_bit | (biased << 52) | (self.significand as u64 & ((1u64 << 52) - 1))
            }
        };
        Some(f64::from_bits(bits))
    }

    pub fn to_f32(&self) -> Option<f32> {
        if self.format != FpFormat::SINGLE {
            return None;
        }
        let sign_bit = (self.sign.is_negative() as u32) << 31;
        let bits = match self.kind {
            Kind::NaN => return Some(f32::NAN),
            Kind::Infinity => sign_bit | (0xffu32 << 23),
            Kind::Zero => sign_bit,
            Kind::Subnormal => sign_bit | self.significand as u32,
            Kind::Normal => {
                let biased = (self.exponent + 127) as u32;
                sign_bit | (biased << 23) | (self.significand as u32 & ((1u32 << 23) - 1))
            }
        };
        Some(f32::from_bits(bits))
    }

    pub fn format(&self) -> FpFormat {
        self.format
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn significand(&self) -> u128 {
        self.significand
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn is_nan(&self) -> bool {
        self.kind == Kind::NaN
    }

    pub fn is_infinite(&self) -> bool {
        self.kind == Kind::Infinity
    }

    pub fn is_zero(&self) -> bool {
        self.kind == Kind::Zero
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, Kind::Zero | Kind::Subnormal | Kind::Normal)
    }

    pub fn is_subnormal(&self) -> bool {
        self.kind == Kind::Subnormal
    }

    pub fn is_sign_negative(&self) -> bool {
        self.kind != Kind::NaN && self.sign.is_negative()
    }

    pub fn negate(&self) -> FpValue {
        if self.is_nan() {
            return *self;
        }
        FpValue { sign: -self.sign, ..*self }
    }

    pub fn abs(&self) -> FpValue {
        if self.is_nan() {
            return *self;
        }
        FpValue { sign: Sign::Positive, ..*self }
    }

    /// Exponent of the significand's least significant bit.
    pub(crate) fn quantum_exponent(&self) -> i64 {
        self.exponent as i64 - (self.format.precision() as i64 - 1)
    }

    /// Non-zero finite values in kernel form.
    pub(crate) fn scaled(&self) -> Option<Scaled> {
        match self.kind {
            Kind::Subnormal | Kind::Normal => Some(Scaled::new(
                self.sign.is_negative(),
                BigUint::from(self.significand),
                BigUint::from(1u32),
                self.quantum_exponent(),
            )),
            _ => None,
        }
    }

    /// The exact rational (or special) this value denotes.
    pub fn to_exact(&self) -> ExactValue {
        match self.kind {
            Kind::NaN => ExactValue::NaN,
            Kind::Infinity => ExactValue::infinity(self.sign),
            Kind::Zero => ExactValue::zero(self.sign),
            Kind::Subnormal | Kind::Normal => {
                let mut m = BigInt::from(self.significand);
                if self.sign.is_negative() {
                    m = -m;
                }
                ExactValue::rational(BigRational::from_integer(m) * pow2(self.quantum_exponent()))
            }
        }
    }

    /// Exact rational value for finite inputs.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self.to_exact() {
            ExactValue::Finite { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl fmt::Display for FpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::literal::format_hex(self))
    }
}
