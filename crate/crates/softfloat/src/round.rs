use std::fmt;
use std::str::FromStr;

use bitflags::bitflags;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::exact::{ExactValue, Scaled};
use crate::format::FpFormat;
use crate::value::{FpValue, Sign};

/// The four IEEE-754 rounding directions.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum RoundingMode {
    NearestEven,
    TowardPositive,
    TowardNegative,
    TowardZero,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 4] = [
        RoundingMode::NearestEven,
        RoundingMode::TowardPositive,
        RoundingMode::TowardNegative,
        RoundingMode::TowardZero,
    ];

    pub fn is_directed(self) -> bool {
        self != RoundingMode::NearestEven
    }

    /// Short CLI spelling: `rne`, `rtp`, `rtn`, `rtz`.
    pub fn short_name(self) -> &'static str {
        match self {
            RoundingMode::NearestEven => "rne",
            RoundingMode::TowardPositive => "rtp",
            RoundingMode::TowardNegative => "rtn",
            RoundingMode::TowardZero => "rtz",
        }
    }

    /// Whether a value of the given sign that needs rounding in magnitude is
    /// pushed away from zero, ignoring ties.
    fn rounds_away(self, negative: bool) -> bool {
        match self {
            RoundingMode::TowardPositive => !negative,
            RoundingMode::TowardNegative => negative,
            RoundingMode::TowardZero | RoundingMode::NearestEven => false,
        }
    }
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for RoundingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rne" | "nearest" | "nearest-even" => Ok(RoundingMode::NearestEven),
            "rtp" | "up" | "toward-positive" => Ok(RoundingMode::TowardPositive),
            "rtn" | "down" | "toward-negative" => Ok(RoundingMode::TowardNegative),
            "rtz" | "zero" | "toward-zero" => Ok(RoundingMode::TowardZero),
            _ => Err(format!("unknown rounding mode `{s}` (expected rne, rtp, rtn or rtz)")),
        }
    }
}

bitflags! {
    /// IEEE-754 exception flags. They are recorded, never trapped.
    #[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
    pub struct Flags: u8 {
        const INVALID = 1 << 0;
        const DIVIDE_BY_ZERO = 1 << 1;
        const OVERFLOW = 1 << 2;
        const UNDERFLOW = 1 << 3;
        const INEXACT = 1 << 4;
    }
}

impl Flags {
    /// Comma-separated lower-case flag names, e.g. `overflow,inexact`.
    pub fn names(&self) -> String {
        let mut out = Vec::new();
        for (flag, name) in [
            (Flags::INVALID, "invalid"),
            (Flags::DIVIDE_BY_ZERO, "divide-by-zero"),
            (Flags::OVERFLOW, "overflow"),
            (Flags::UNDERFLOW, "underflow"),
            (Flags::INEXACT, "inexact"),
        ] {
            if self.contains(flag) {
                out.push(name);
            }
        }
        out.join(",")
    }
}

/// A rounded result together with the exceptions it raised.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Rounded {
    pub value: FpValue,
    pub flags: Flags,
}

impl Rounded {
    pub(crate) fn exact(value: FpValue) -> Rounded {
        Rounded { value, flags: Flags::empty() }
    }
}

/// Position of the discarded part relative to half a unit in the last place.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub(crate) enum Rest {
    Zero,
    BelowHalf,
    Half,
    AboveHalf,
}

/// Correctly rounds an exact value into `fmt`.
pub fn round_from_exact(fmt: FpFormat, mode: RoundingMode, x: &ExactValue) -> FpValue {
    round_exact(fmt, mode, x).value
}

/// [`round_from_exact`] with the exception flags it raises.
pub fn round_exact(fmt: FpFormat, mode: RoundingMode, x: &ExactValue) -> Rounded {
    match x {
        ExactValue::NaN => Rounded::exact(FpValue::nan(fmt)),
        ExactValue::PositiveInfinity => Rounded::exact(FpValue::infinity(fmt, Sign::Positive)),
        ExactValue::NegativeInfinity => Rounded::exact(FpValue::infinity(fmt, Sign::Negative)),
        ExactValue::Finite { value, zero_sign } => match Scaled::from_rational(value) {
            None => Rounded::exact(FpValue::zero(fmt, *zero_sign)),
            Some(s) => round_scaled(fmt, mode, &s),
        },
    }
}

pub(crate) fn round_scaled(fmt: FpFormat, mode: RoundingMode, s: &Scaled) -> Rounded {
    let p = fmt.precision() as i64;
    let e = s.floor_log2();
    let tiny = e < fmt.e_min() as i64;
    let qexp = e.max(fmt.e_min() as i64) - (p - 1);
    let shift = s.exp2 - qexp;
    let (n, d) = if shift >= 0 {
        (&s.num << (shift as u64), s.den.clone())
    } else {
        (s.num.clone(), &s.den << ((-shift) as u64))
    };
    let (m, r) = n.div_rem(&d);
    let rest = if r.is_zero() {
        Rest::Zero
    } else {
        match (&r << 1u32).cmp(&d) {
            std::cmp::Ordering::Less => Rest::BelowHalf,
            std::cmp::Ordering::Equal => Rest::Half,
            std::cmp::Ordering::Greater => Rest::AboveHalf,
        }
    };
    finish(fmt, mode, s.negative, m, qexp, rest, tiny)
}

/// Correctly rounded square root of a positive `s`.
pub(crate) fn round_sqrt_scaled(fmt: FpFormat, mode: RoundingMode, s: &Scaled) -> Rounded {
    debug_assert!(!s.negative);
    let p = fmt.precision() as i64;
    let e = s.floor_log2().div_euclid(2);
    let tiny = e < fmt.e_min() as i64;
    let qexp = e.max(fmt.e_min() as i64) - (p - 1);
    let t = s.exp2 - 2 * qexp;
    let (n, d) = if t >= 0 {
        (&s.num << (t as u64), s.den.clone())
    } else {
        (s.num.clone(), &s.den << ((-t) as u64))
    };
    let (q, r) = n.div_rem(&d);
    let m = q.sqrt();
    let rest = if r.is_zero() && &m * &m == q {
        Rest::Zero
    } else {
        // Compare n/d with (m + 1/2)^2; equality is possible across formats.
        let four_n: BigUint = &n << 2u32;
        let rhs = &d * ((&m * &m << 2u32) + (&m << 2u32) + BigUint::one());
        match four_n.cmp(&rhs) {
            std::cmp::Ordering::Less => Rest::BelowHalf,
            std::cmp::Ordering::Equal => Rest::Half,
            std::cmp::Ordering::Greater => Rest::AboveHalf,
        }
    };
    finish(fmt, mode, false, m, qexp, rest, tiny)
}

/// Applies the rounding decision to a truncated significand `m` (with
/// `m < 2^p`) whose least significant bit has weight `2^qexp`.
pub(crate) fn finish(
    fmt: FpFormat,
    mode: RoundingMode,
    negative: bool,
    m: BigUint,
    qexp: i64,
    rest: Rest,
    tiny: bool,
) -> Rounded {
    let p = fmt.precision();
    let sign = Sign::from_negative(negative);
    let mut sig = m.to_u128().expect("significand fits the format");
    let round_up = match rest {
        Rest::Zero => false,
        _ if mode == RoundingMode::NearestEven => match rest {
            Rest::AboveHalf => true,
            Rest::Half => sig & 1 == 1,
            _ => false,
        },
        _ => mode.rounds_away(negative),
    };
    let mut qexp = qexp;
    if round_up {
        sig += 1;
        if sig == 1u128 << p {
            sig = 1u128 << (p - 1);
            qexp += 1;
        }
    }
    let mut flags = Flags::empty();
    if rest != Rest::Zero {
        flags |= Flags::INEXACT;
        if tiny {
            flags |= Flags::UNDERFLOW;
        }
    }
    let exponent = qexp + p as i64 - 1;
    if exponent > fmt.e_max() as i64 {
        flags |= Flags::OVERFLOW | Flags::INEXACT;
        let value = if mode == RoundingMode::NearestEven || mode.rounds_away(negative) {
            FpValue::infinity(fmt, sign)
        } else {
            FpValue::max_finite(fmt, sign)
        };
        return Rounded { value, flags };
    }
    let exponent = if sig < fmt.hidden_bit() { fmt.e_min() } else { exponent as i32 };
    let value = FpValue::from_parts(fmt, sign, sig, exponent).expect("rounded value is canonical");
    Rounded { value, flags }
}
