use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_traits::{One, ToPrimitive, Zero};

use crate::exact::{ExactValue, Scaled};
use crate::format::FpFormat;
use crate::round::{round_exact, round_scaled, round_sqrt_scaled, Flags, Rounded, RoundingMode};
use crate::value::{FpValue, Kind, Sign};

/// The correctly rounded operations.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    Fma,
}

impl Op {
    pub const ALL: [Op; 6] = [Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sqrt, Op::Fma];

    pub fn arity(self) -> usize {
        match self {
            Op::Sqrt => 1,
            Op::Fma => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Div => "div",
            Op::Sqrt => "sqrt",
            Op::Fma => "fma",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{op} takes {expected} operand(s), got {got}")]
pub struct ArityError {
    pub op: Op,
    pub expected: usize,
    pub got: usize,
}

/// Applies `op` to operands of any formats and rounds the exact result into `fmt`.
pub fn arith(op: Op, fmt: FpFormat, mode: RoundingMode, operands: &[FpValue]) -> Result<Rounded, ArityError> {
    if operands.len() != op.arity() {
        return Err(ArityError { op, expected: op.arity(), got: operands.len() });
    }
    let o = operands;
    Ok(match op {
        Op::Add => add(fmt, mode, &o[0], &o[1]),
        Op::Sub => sub(fmt, mode, &o[0], &o[1]),
        Op::Mul => mul(fmt, mode, &o[0], &o[1]),
        Op::Div => div(fmt, mode, &o[0], &o[1]),
        Op::Sqrt => sqrt(fmt, mode, &o[0]),
        Op::Fma => fma(fmt, mode, &o[0], &o[1], &o[2]),
    })
}

fn nan(fmt: FpFormat, flags: Flags) -> Rounded {
    Rounded { value: FpValue::nan(fmt), flags }
}

/// Signed dyadic `±mag * 2^exp`; `mag` may be zero, in which case `negative`
/// is the sign of the zero.
struct Dyadic {
    negative: bool,
    mag: BigUint,
    exp: i64,
}

impl Dyadic {
    fn of(v: &FpValue) -> Dyadic {
        debug_assert!(v.is_finite());
        let exp = if v.is_zero() { 0 } else { v.exponent() as i64 - (v.format().precision() as i64 - 1) };
        Dyadic { negative: v.is_sign_negative(), mag: BigUint::from(v.significand()), exp }
    }

    fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }

    fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic { negative: self.negative != other.negative, mag: &self.mag * &other.mag, exp: self.exp + other.exp }
    }

    /// Exact sum. A zero sum of non-zero terms, or of zeros with opposite
    /// signs, is `+0` except under round-toward-negative.
    fn add(&self, other: &Dyadic, mode: RoundingMode) -> Dyadic {
        if self.is_zero() && other.is_zero() {
            let negative = if self.negative == other.negative {
                self.negative
            } else {
                mode == RoundingMode::TowardNegative
            };
            return Dyadic { negative, mag: BigUint::zero(), exp: 0 };
        }
        if other.is_zero() {
            return Dyadic { negative: self.negative, mag: self.mag.clone(), exp: self.exp };
        }
        if self.is_zero() {
            return Dyadic { negative: other.negative, mag: other.mag.clone(), exp: other.exp };
        }
        let exp = self.exp.min(other.exp);
        let signed = |d: &Dyadic| {
            let m = BigInt::from_biguint(BigSign::Plus, &d.mag << ((d.exp - exp) as u64));
            if d.negative {
                -m
            } else {
                m
            }
        };
        let sum = signed(self) + signed(other);
        if sum.is_zero() {
            return Dyadic { negative: mode == RoundingMode::TowardNegative, mag: BigUint::zero(), exp: 0 };
        }
        let (sign, mag) = sum.into_parts();
        Dyadic { negative: sign == BigSign::Minus, mag, exp }
    }

    fn round(&self, fmt: FpFormat, mode: RoundingMode) -> Rounded {
        if self.is_zero() {
            return Rounded::exact(FpValue::zero(fmt, Sign::from_negative(self.negative)));
        }
        round_scaled(fmt, mode, &Scaled::new(self.negative, self.mag.clone(), BigUint::one(), self.exp))
    }
}

pub fn add(fmt: FpFormat, mode: RoundingMode, a: &FpValue, b: &FpValue) -> Rounded {
    if a.is_nan() || b.is_nan() {
        return nan(fmt, Flags::empty());
    }
    match (a.is_infinite(), b.is_infinite()) {
        (true, true) if a.sign() != b.sign() => return nan(fmt, Flags::INVALID),
        (true, _) => return Rounded::exact(FpValue::infinity(fmt, a.sign())),
        (_, true) => return Rounded::exact(FpValue::infinity(fmt, b.sign())),
        _ => {}
    }
    Dyadic::of(a).add(&Dyadic::of(b), mode).round(fmt, mode)
}

pub fn sub(fmt: FpFormat, mode: RoundingMode, a: &FpValue, b: &FpValue) -> Rounded {
    add(fmt, mode, a, &b.negate())
}

pub fn mul(fmt: FpFormat, mode: RoundingMode, a: &FpValue, b: &FpValue) -> Rounded {
    if a.is_nan() || b.is_nan() {
        return nan(fmt, Flags::empty());
    }
    let sign = a.sign() * b.sign();
    if a.is_infinite() || b.is_infinite() {
        if a.is_zero() || b.is_zero() {
            return nan(fmt, Flags::INVALID);
        }
        return Rounded::exact(FpValue::infinity(fmt, sign));
    }
    Dyadic::of(a).mul(&Dyadic::of(b)).round(fmt, mode)
}

pub fn div(fmt: FpFormat, mode: RoundingMode, a: &FpValue, b: &FpValue) -> Rounded {
    if a.is_nan() || b.is_nan() {
        return nan(fmt, Flags::empty());
    }
    let sign = a.sign() * b.sign();
    match (a.kind(), b.kind()) {
        (Kind::Infinity, Kind::Infinity) | (Kind::Zero, Kind::Zero) => nan(fmt, Flags::INVALID),
        (Kind::Infinity, _) => Rounded::exact(FpValue::infinity(fmt, sign)),
        (_, Kind::Infinity) | (Kind::Zero, _) => Rounded::exact(FpValue::zero(fmt, sign)),
        (_, Kind::Zero) => Rounded { value: FpValue::infinity(fmt, sign), flags: Flags::DIVIDE_BY_ZERO },
        _ => {
            let (x, y) = (Dyadic::of(a), Dyadic::of(b));
            round_scaled(fmt, mode, &Scaled::new(sign.is_negative(), x.mag, y.mag, x.exp - y.exp))
        }
    }
}

pub fn sqrt(fmt: FpFormat, mode: RoundingMode, a: &FpValue) -> Rounded {
    match a.kind() {
        Kind::NaN => nan(fmt, Flags::empty()),
        Kind::Zero => Rounded::exact(FpValue::zero(fmt, a.sign())),
        _ if a.is_sign_negative() => nan(fmt, Flags::INVALID),
        Kind::Infinity => Rounded::exact(FpValue::infinity(fmt, Sign::Positive)),
        _ => round_sqrt_scaled(fmt, mode, &a.scaled().expect("finite non-zero")),
    }
}

/// `a * b + c` with a single rounding.
pub fn fma(fmt: FpFormat, mode: RoundingMode, a: &FpValue, b: &FpValue, c: &FpValue) -> Rounded {
    if a.is_nan() || b.is_nan() || c.is_nan() {
        return nan(fmt, Flags::empty());
    }
    let product_sign = a.sign() * b.sign();
    if a.is_infinite() || b.is_infinite() {
        if a.is_zero() || b.is_zero() {
            return nan(fmt, Flags::INVALID);
        }
        if c.is_infinite() && c.sign() != product_sign {
            return nan(fmt, Flags::INVALID);
        }
        return Rounded::exact(FpValue::infinity(fmt, product_sign));
    }
    if c.is_infinite() {
        return Rounded::exact(FpValue::infinity(fmt, c.sign()));
    }
    Dyadic::of(a).mul(&Dyadic::of(b)).add(&Dyadic::of(c), mode).round(fmt, mode)
}

/// Rounds `x` into `dst`; values already representable come back unchanged.
pub fn convert(x: &FpValue, dst: FpFormat, mode: RoundingMode) -> Rounded {
    match x.kind() {
        Kind::NaN => Rounded::exact(FpValue::nan(dst)),
        Kind::Infinity => Rounded::exact(FpValue::infinity(dst, x.sign())),
        Kind::Zero => Rounded::exact(FpValue::zero(dst, x.sign())),
        _ if x.format() == dst => Rounded::exact(*x),
        _ => round_scaled(dst, mode, &x.scaled().expect("finite non-zero")),
    }
}

/// Rounds an integer into `fmt`.
pub fn from_integer(fmt: FpFormat, mode: RoundingMode, n: i64) -> Rounded {
    round_exact(fmt, mode, &ExactValue::integer(n))
}

/// C-style conversion to an integer, truncating toward zero. `None` for NaN,
/// infinities and values outside the `i64` range.
pub fn to_integer_trunc(x: &FpValue) -> Option<i64> {
    match x.kind() {
        Kind::Zero => Some(0),
        Kind::NaN | Kind::Infinity => None,
        _ => {
            let q = x.exponent() as i64 - (x.format().precision() as i64 - 1);
            let m = BigUint::from(x.significand());
            let mag = if q >= 0 {
                if q > 64 {
                    return None;
                }
                m << (q as u64)
            } else {
                m >> ((-q) as u64)
            };
            let mag = BigInt::from_biguint(BigSign::Plus, mag);
            let n = if x.is_sign_negative() { -mag } else { mag };
            n.to_i64()
        }
    }
}

/// Outcome of an IEEE comparison.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum CompareResult {
    Less,
    Equal,
    Greater,
    Unordered,
}

impl CompareResult {
    pub fn as_ordering(self) -> Option<Ordering> {
        match self {
            CompareResult::Less => Some(Ordering::Less),
            CompareResult::Equal => Some(Ordering::Equal),
            CompareResult::Greater => Some(Ordering::Greater),
            CompareResult::Unordered => None,
        }
    }
}

/// IEEE ordering of the exact values: zeros compare equal, NaN is unordered.
pub fn compare(a: &FpValue, b: &FpValue) -> CompareResult {
    if a.is_nan() || b.is_nan() {
        return CompareResult::Unordered;
    }
    let ord = total_order_of_values(a, b);
    match ord {
        Ordering::Less => CompareResult::Less,
        Ordering::Equal => CompareResult::Equal,
        Ordering::Greater => CompareResult::Greater,
    }
}

/// Ordering of non-NaN values by the numbers they denote.
fn total_order_of_values(a: &FpValue, b: &FpValue) -> Ordering {
    // -inf < negatives < zeros < positives < +inf
    fn class(v: &FpValue) -> i8 {
        match v.kind() {
            Kind::Infinity if v.is_sign_negative() => -2,
            Kind::Infinity => 2,
            Kind::Zero => 0,
            _ if v.is_sign_negative() => -1,
            _ => 1,
        }
    }
    let (ca, cb) = (class(a), class(b));
    if ca != cb || ca.abs() != 1 {
        return ca.cmp(&cb);
    }
    let mag = compare_magnitudes(a, b);
    if ca < 0 {
        mag.reverse()
    } else {
        mag
    }
}

fn compare_magnitudes(a: &FpValue, b: &FpValue) -> Ordering {
    let (x, y) = (Dyadic::of(a), Dyadic::of(b));
    let top_x = x.mag.bits() as i64 + x.exp;
    let top_y = y.mag.bits() as i64 + y.exp;
    if top_x != top_y {
        return top_x.cmp(&top_y);
    }
    let e = x.exp.min(y.exp);
    (&x.mag << ((x.exp - e) as u64)).cmp(&(&y.mag << ((y.exp - e) as u64)))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Neighbor {
    Pred,
    Succ,
    NextAfter,
}

/// Adjacent representable value of `fmt`: `Pred`/`Succ` ignore `toward`;
/// `NextAfter` steps from `x` in the direction of `toward` (required).
pub fn neighbors(kind: Neighbor, fmt: FpFormat, x: &FpValue, toward: Option<&FpValue>) -> FpValue {
    match kind {
        Neighbor::Pred => pred(fmt, x),
        Neighbor::Succ => succ(fmt, x),
        Neighbor::NextAfter => next_after(fmt, x, toward.expect("nextafter needs a direction")),
    }
}

/// Smallest value of `fmt` strictly greater than `x`.
pub fn succ(fmt: FpFormat, x: &FpValue) -> FpValue {
    if x.is_nan() {
        return FpValue::nan(fmt);
    }
    if x.format() != fmt {
        let up = convert(x, fmt, RoundingMode::TowardPositive).value;
        if compare(&up, x) == CompareResult::Greater {
            return up;
        }
        return succ_same(&up);
    }
    succ_same(x)
}

/// Largest value of `fmt` strictly less than `x`.
pub fn pred(fmt: FpFormat, x: &FpValue) -> FpValue {
    let r = succ(fmt, &x.negate()).negate();
    // succ(-min_subnormal) is -0; the predecessor of +min_subnormal is +0.
    if r.is_zero() {
        FpValue::zero(fmt, Sign::Positive)
    } else {
        r
    }
}

/// C `nextafter`: `toward` itself when the two compare equal.
pub fn next_after(fmt: FpFormat, x: &FpValue, toward: &FpValue) -> FpValue {
    match compare(x, toward) {
        CompareResult::Unordered => FpValue::nan(fmt),
        CompareResult::Equal => convert(toward, fmt, RoundingMode::NearestEven).value,
        CompareResult::Less => succ(fmt, x),
        CompareResult::Greater => pred(fmt, x),
    }
}

fn succ_same(x: &FpValue) -> FpValue {
    let fmt = x.format();
    match x.kind() {
        Kind::NaN => *x,
        Kind::Infinity if x.is_sign_negative() => FpValue::max_finite(fmt, Sign::Negative),
        Kind::Infinity => *x,
        Kind::Zero => FpValue::min_subnormal(fmt, Sign::Positive),
        _ if x.is_sign_negative() => magnitude_down(x),
        _ => magnitude_up(x),
    }
}

fn magnitude_up(x: &FpValue) -> FpValue {
    let fmt = x.format();
    let mut sig = x.significand() + 1;
    let mut exp = x.exponent();
    if sig == fmt.hidden_bit() << 1 {
        sig = fmt.hidden_bit();
        exp += 1;
        if exp > fmt.e_max() {
            return FpValue::infinity(fmt, x.sign());
        }
    }
    FpValue::from_parts(fmt, x.sign(), sig, exp).expect("successor is canonical")
}

fn magnitude_down(x: &FpValue) -> FpValue {
    let fmt = x.format();
    if x.significand() == fmt.hidden_bit() && x.exponent() > fmt.e_min() {
        return FpValue::from_parts(fmt, x.sign(), (fmt.hidden_bit() << 1) - 1, x.exponent() - 1)
            .expect("predecessor is canonical");
    }
    let sig = x.significand() - 1;
    let exp = if sig < fmt.hidden_bit() { fmt.e_min() } else { x.exponent() };
    FpValue::from_parts(fmt, x.sign(), sig, exp).expect("predecessor is canonical")
}

/// Greatest integer not above `x`, as a value of `fmt` (exact whenever `fmt`
/// contains the format of `x`). Zeros, infinities and NaN pass through.
pub fn floor_int(fmt: FpFormat, x: &FpValue) -> FpValue {
    match x.kind() {
        Kind::NaN | Kind::Infinity | Kind::Zero => return convert(x, fmt, RoundingMode::NearestEven).value,
        _ => {}
    }
    let d = Dyadic::of(x);
    if d.exp >= 0 {
        return convert(x, fmt, RoundingMode::NearestEven).value;
    }
    let shift = (-d.exp) as u64;
    let truncated = &d.mag >> shift;
    let mag = if d.negative && (&truncated << shift) != d.mag { truncated + 1u32 } else { truncated };
    if mag.is_zero() {
        return FpValue::zero(fmt, Sign::Positive);
    }
    let mut n = BigInt::from_biguint(BigSign::Plus, mag);
    if d.negative {
        n = -n;
    }
    round_exact(fmt, RoundingMode::NearestEven, &ExactValue::integer(n)).value
}
