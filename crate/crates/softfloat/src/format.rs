use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::exact::pow2;

/// A binary floating-point format: `precision` significand bits (leading bit
/// included) and the exponent range `[e_min, e_max]` of normal numbers.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpFormat {
    precision: u32,
    e_min: i32,
    e_max: i32,
}

impl FpFormat {
    /// IEEE-754 single precision.
    pub const SINGLE: FpFormat = FpFormat { precision: 24, e_min: -126, e_max: 127 };
    /// IEEE-754 double precision.
    pub const DOUBLE: FpFormat = FpFormat { precision: 53, e_min: -1022, e_max: 1023 };
    /// x87 80-bit extended precision (64-bit significand, 15-bit exponent).
    pub const X87_EXTENDED: FpFormat = FpFormat { precision: 64, e_min: -16382, e_max: 16383 };
    /// x87 with precision control set to 53 bits. The exponent range stays extended.
    pub const X87_PC53: FpFormat = FpFormat { precision: 53, e_min: -16382, e_max: 16383 };
    /// x87 with precision control set to 24 bits.
    pub const X87_PC24: FpFormat = FpFormat { precision: 24, e_min: -16382, e_max: 16383 };

    /// Largest precision supported by the packed `u128` significand.
    pub const MAX_PRECISION: u32 = 120;
    /// Bound on `|e_min|` and `e_max`.
    pub const EXPONENT_LIMIT: i32 = 1 << 16;

    /// Builds a format, or `None` when the parameters violate
    /// `2 <= precision <= MAX_PRECISION` and `-EXPONENT_LIMIT <= e_min < 0 < e_max <= EXPONENT_LIMIT`.
    pub const fn new(precision: u32, e_min: i32, e_max: i32) -> Option<FpFormat> {
        if precision < 2
            || precision > Self::MAX_PRECISION
            || e_min >= 0
            || e_max <= 0
            || e_min < -Self::EXPONENT_LIMIT
            || e_max > Self::EXPONENT_LIMIT
        {
            return None;
        }
        Some(FpFormat { precision, e_min, e_max })
    }

    pub const fn precision(&self) -> u32 {
        self.precision
    }

    pub const fn e_min(&self) -> i32 {
        self.e_min
    }

    pub const fn e_max(&self) -> i32 {
        self.e_max
    }

    /// Exponent of the unit in the last place for subnormals and the smallest binade.
    pub(crate) fn quantum_exponent_min(&self) -> i64 {
        self.e_min as i64 - (self.precision as i64 - 1)
    }

    /// `2^-(p-1)`, the gap between 1 and the next larger value.
    pub fn ulp_of_one(&self) -> BigRational {
        pow2(-(self.precision as i64 - 1))
    }

    /// `2^e_max * (2 - 2^-(p-1))`.
    pub fn max_finite(&self) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        (two - self.ulp_of_one()) * pow2(self.e_max as i64)
    }

    /// `2^(e_min - (p-1))`.
    pub fn min_subnormal(&self) -> BigRational {
        pow2(self.quantum_exponent_min())
    }

    /// `2^e_min`.
    pub fn min_normal(&self) -> BigRational {
        pow2(self.e_min as i64)
    }

    /// Exact results of at least this magnitude round to infinity under
    /// round-to-nearest: `2^e_max * (2 - 2^-p)`.
    pub fn overflow_threshold(&self) -> BigRational {
        let two = BigRational::from_integer(BigInt::from(2));
        (two - pow2(-(self.precision as i64))) * pow2(self.e_max as i64)
    }

    /// True when every finite value of `other` is representable in `self`.
    pub fn contains(&self, other: &FpFormat) -> bool {
        self.precision >= other.precision
            && self.e_max >= other.e_max
            && self.quantum_exponent_min() <= other.quantum_exponent_min()
    }

    /// Short name of the canonical instances; other formats print their parameters.
    pub fn name(&self) -> String {
        match *self {
            Self::SINGLE => "single".into(),
            Self::DOUBLE => "double".into(),
            Self::X87_EXTENDED => "extended".into(),
            Self::X87_PC53 => "x87-pc53".into(),
            Self::X87_PC24 => "x87-pc24".into(),
            f => format!("fp(p={},emin={},emax={})", f.precision, f.e_min, f.e_max),
        }
    }

    pub(crate) fn hidden_bit(&self) -> u128 {
        1u128 << (self.precision - 1)
    }
}

impl fmt::Display for FpFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
