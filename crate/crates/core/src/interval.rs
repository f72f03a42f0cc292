//! Floating-point intervals with outward (directed) rounding.
//!
//! Bounds are held in the x87 extended format, which contains every format
//! a model can compute in, so a bound never has to be rounded to be stored.

use std::fmt;
use std::sync::OnceLock;

use fplab_softfloat::{
    arith, compare, convert, floor_int, format_hex, parse_literal, pred, succ, CompareResult, FpFormat, FpValue, Op,
    RoundingMode, Sign,
};

pub const BOUND: FpFormat = FpFormat::X87_EXTENDED;

const DOWN: RoundingMode = RoundingMode::TowardNegative;
const UP: RoundingMode = RoundingMode::TowardPositive;

/// The non-NaN values lie in `[lo, hi]` (none when `empty`); NaN is tracked
/// on the side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: FpValue,
    pub hi: FpValue,
    pub empty: bool,
    pub may_be_nan: bool,
    /// Every non-NaN value is known to be representable in this format.
    pub exact_in: Option<FpFormat>,
}

fn lit(text: &str) -> FpValue {
    parse_literal(text, BOUND, RoundingMode::NearestEven).expect("valid literal")
}

fn le(a: &FpValue, b: &FpValue) -> bool {
    matches!(compare(a, b), CompareResult::Less | CompareResult::Equal)
}

fn lt(a: &FpValue, b: &FpValue) -> bool {
    compare(a, b) == CompareResult::Less
}

fn min(a: FpValue, b: FpValue) -> FpValue {
    if le(&a, &b) {
        a
    } else {
        b
    }
}

fn max(a: FpValue, b: FpValue) -> FpValue {
    if le(&a, &b) {
        b
    } else {
        a
    }
}

pub fn to_bound(v: &FpValue) -> FpValue {
    convert(v, BOUND, RoundingMode::NearestEven).value
}

fn zero() -> FpValue {
    FpValue::zero(BOUND, Sign::Positive)
}

fn inf(sign: Sign) -> FpValue {
    FpValue::infinity(BOUND, sign)
}

/// Smallest positive normal of `fmt`, as a bound.
pub fn min_normal(fmt: FpFormat) -> FpValue {
    lit(&format!("0x1p{}", fmt.e_min()))
}

/// Largest value of `fmt` that is `<= x`.
pub fn down_to(fmt: FpFormat, x: &FpValue) -> FpValue {
    to_bound(&convert(x, fmt, DOWN).value)
}

/// Smallest value of `fmt` that is `>= x`.
pub fn up_to(fmt: FpFormat, x: &FpValue) -> FpValue {
    to_bound(&convert(x, fmt, UP).value)
}

/// Largest value of `fmt` strictly below `x`.
pub fn below(fmt: FpFormat, x: &FpValue) -> FpValue {
    let d = convert(x, fmt, DOWN).value;
    if compare(&d, x) == CompareResult::Equal {
        to_bound(&pred(fmt, &d))
    } else {
        to_bound(&d)
    }
}

/// Smallest value of `fmt` strictly above `x`.
pub fn above(fmt: FpFormat, x: &FpValue) -> FpValue {
    let u = convert(x, fmt, UP).value;
    if compare(&u, x) == CompareResult::Equal {
        to_bound(&succ(fmt, &u))
    } else {
        to_bound(&u)
    }
}

impl Interval {
    pub fn bottom() -> Interval {
        Interval { lo: zero(), hi: zero(), empty: true, may_be_nan: false, exact_in: None }
    }

    pub fn nan_only() -> Interval {
        Interval { may_be_nan: true, ..Interval::bottom() }
    }

    pub fn new(lo: FpValue, hi: FpValue) -> Interval {
        let (lo, hi) = (to_bound(&lo), to_bound(&hi));
        if lt(&hi, &lo) {
            return Interval::bottom();
        }
        Interval { lo, hi, empty: false, may_be_nan: false, exact_in: None }
    }

    pub fn point(v: FpValue) -> Interval {
        if v.is_nan() {
            return Interval { exact_in: Some(v.format()), ..Interval::nan_only() };
        }
        Interval { exact_in: Some(v.format()), ..Interval::new(v, v) }
    }

    /// All non-NaN values.
    pub fn top() -> Interval {
        Interval::new(inf(Sign::Negative), inf(Sign::Positive))
    }

    pub fn with_nan(self, nan: bool) -> Interval {
        Interval { may_be_nan: self.may_be_nan || nan, ..self }
    }

    pub fn is_bottom(&self) -> bool {
        self.empty && !self.may_be_nan
    }

    pub fn contains(&self, v: &FpValue) -> bool {
        if v.is_nan() {
            return self.may_be_nan;
        }
        !self.empty && le(&self.lo, v) && le(v, &self.hi)
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        (!other.may_be_nan || self.may_be_nan)
            && (other.empty || (!self.empty && le(&self.lo, &other.lo) && le(&other.hi, &self.hi)))
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&zero())
    }

    pub fn has_infinite_bound(&self) -> bool {
        !self.empty && (self.lo.is_infinite() || self.hi.is_infinite())
    }

    pub fn is_finite(&self) -> bool {
        !self.empty && !self.has_infinite_bound()
    }

    pub fn join(&self, other: &Interval) -> Interval {
        if self.empty {
            return Interval { may_be_nan: self.may_be_nan || other.may_be_nan, ..*other };
        }
        if other.empty {
            return self.with_nan(other.may_be_nan);
        }
        Interval {
            lo: min(self.lo, other.lo),
            hi: max(self.hi, other.hi),
            empty: false,
            may_be_nan: self.may_be_nan || other.may_be_nan,
            exact_in: if self.exact_in == other.exact_in { self.exact_in } else { None },
        }
    }

    pub fn meet(&self, other: &Interval) -> Interval {
        let nan = self.may_be_nan && other.may_be_nan;
        if self.empty || other.empty {
            return Interval { may_be_nan: nan, ..Interval::bottom() };
        }
        let lo = max(self.lo, other.lo);
        let hi = min(self.hi, other.hi);
        if lt(&hi, &lo) {
            return Interval { may_be_nan: nan, ..Interval::bottom() };
        }
        Interval { lo, hi, empty: false, may_be_nan: nan, exact_in: self.exact_in.or(other.exact_in) }
    }

    /// Outward rounding to `fmt`: every value of the interval and every
    /// value it can be narrowed to in `fmt`, under any rounding mode.
    pub fn close(&self, fmt: FpFormat) -> Interval {
        if self.empty {
            return *self;
        }
        Interval { lo: down_to(fmt, &self.lo), hi: up_to(fmt, &self.hi), ..*self }
    }

    /// Adds zero when the interval reaches into the subnormal range of `fmt`.
    pub fn with_flushed_zero(&self, fmt: FpFormat) -> Interval {
        if self.empty {
            return *self;
        }
        let m = min_normal(fmt);
        let reaches = lt(&self.lo, &m) && lt(&m.negate(), &self.hi) && !(self.lo.is_zero() && self.hi.is_zero());
        if !reaches {
            return *self;
        }
        Interval { lo: min(self.lo, zero()), hi: max(self.hi, zero()), ..*self }
    }

    pub fn neg(&self) -> Interval {
        if self.empty {
            return *self;
        }
        Interval { lo: self.hi.negate(), hi: self.lo.negate(), ..*self }
    }

    pub fn abs(&self) -> Interval {
        if self.empty {
            return *self;
        }
        if !self.lo.is_sign_negative() || self.lo.is_zero() {
            return *self;
        }
        if le(&self.hi, &zero()) {
            return self.neg();
        }
        Interval { lo: zero(), hi: max(self.lo.negate(), self.hi), ..*self }
    }

    pub fn floor(&self) -> Interval {
        if self.empty {
            return *self;
        }
        Interval { lo: floor_int(BOUND, &self.lo), hi: floor_int(BOUND, &self.hi), exact_in: None, ..*self }
    }

    /// Bounds in exact hex, or `empty`.
    pub fn hex(&self) -> String {
        if self.empty {
            return "empty".into();
        }
        format!("[{}, {}]", format_hex(&self.lo), format_hex(&self.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hex())?;
        if self.may_be_nan {
            f.write_str(" nan")?;
        }
        if let Some(e) = self.exact_in {
            write!(f, " exact={}", e.name())?;
        }
        Ok(())
    }
}

/// `op` over intervals when the exact result may be rounded to any of
/// `formats`, in any rounding mode. Returns the result and whether a
/// division by an interval containing zero happened.
pub fn iarith(op: Op, args: &[Interval], formats: &[FpFormat]) -> (Interval, bool) {
    let nan_in = args.iter().any(|a| a.may_be_nan);
    if args.iter().any(|a| a.empty) {
        return (if nan_in { Interval::nan_only() } else { Interval::bottom() }, false);
    }
    if op == Op::Div && args[1].contains_zero() {
        return (Interval::top().with_nan(true), true);
    }
    let mut args: Vec<Interval> = args.to_vec();
    let mut nan = nan_in;
    match op {
        Op::Sqrt => {
            let a = &mut args[0];
            if lt(&a.lo, &zero()) {
                nan = true;
                if lt(&a.hi, &zero()) {
                    return (Interval::nan_only(), false);
                }
                a.lo = zero();
            }
        }
        Op::Mul | Op::Fma => {
            let (a, b) = (&args[0], &args[1]);
            nan |= (a.contains_zero() && b.has_infinite_bound()) || (b.contains_zero() && a.has_infinite_bound());
        }
        _ => {}
    }
    let corners = corners(&args);
    let mut lo: Option<FpValue> = None;
    let mut hi: Option<FpValue> = None;
    let mut push = |d: FpValue, u: FpValue| {
        let (d, u) = (to_bound(&d), to_bound(&u));
        lo = Some(lo.map_or(d, |l| min(l, d)));
        hi = Some(hi.map_or(u, |h| max(h, u)));
    };
    for c in &corners {
        // 0 * inf stands in for products of nearby finite values, which are zero
        if matches!(op, Op::Mul | Op::Fma) && zero_times_inf(&c[0], &c[1]) {
            match op {
                Op::Mul => push(zero().negate(), zero()),
                _ if c[2].is_nan() => {}
                _ => push(c[2], c[2]),
            }
            continue;
        }
        // likewise inf / inf for finite numerators
        if op == Op::Div && c[0].is_infinite() && c[1].is_infinite() {
            push(zero().negate(), zero());
            nan = true;
            continue;
        }
        for f in formats {
            let d = arith(op, *f, DOWN, c).expect("arity").value;
            if d.is_nan() {
                nan = true;
                continue;
            }
            let u = arith(op, *f, UP, c).expect("arity").value;
            push(d, u);
        }
    }
    let r = match (lo, hi) {
        (Some(lo), Some(hi)) => Interval { lo, hi, empty: false, may_be_nan: nan, exact_in: None },
        _ => Interval { may_be_nan: nan, ..Interval::bottom() },
    };
    (r, false)
}

fn zero_times_inf(a: &FpValue, b: &FpValue) -> bool {
    (a.is_zero() && b.is_infinite()) || (a.is_infinite() && b.is_zero())
}

fn corners(args: &[Interval]) -> Vec<Vec<FpValue>> {
    let mut out = vec![Vec::new()];
    for a in args {
        let ends = if compare(&a.lo, &a.hi) == CompareResult::Equal { vec![a.lo] } else { vec![a.lo, a.hi] };
        out = out
            .into_iter()
            .flat_map(|c| {
                ends.iter().map(move |e| {
                    let mut c = c.clone();
                    c.push(*e);
                    c
                })
            })
            .collect();
    }
    out
}

/// Values `nextafter(x, y)` can take in double for `x`, `y` already in
/// double.
pub fn inextafter(x: &Interval, y: &Interval) -> Interval {
    let d = FpFormat::DOUBLE;
    let nan = x.may_be_nan || y.may_be_nan;
    if x.empty || y.empty {
        return if nan { Interval::nan_only() } else { Interval::bottom() };
    }
    let step = |f: fn(FpFormat, &FpValue) -> FpValue, v: &FpValue| to_bound(&f(d, &convert(v, d, DOWN).value));
    let (lo, hi) = if lt(&y.hi, &x.lo) {
        (step(pred, &x.lo), step(pred, &x.hi))
    } else if lt(&x.hi, &y.lo) {
        (step(succ, &x.lo), step(succ, &x.hi))
    } else {
        (step(pred, &x.lo), step(succ, &x.hi))
    };
    Interval { lo, hi, empty: false, may_be_nan: nan, exact_in: Some(d) }
}

/// Widening thresholds: 0, ±1, ±2^k, ±max double, ±infinity.
pub fn ladder() -> &'static [FpValue] {
    static LADDER: OnceLock<Vec<FpValue>> = OnceLock::new();
    LADDER.get_or_init(|| {
        let mut pos = vec![lit("1")];
        for k in [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1023] {
            pos.push(lit(&format!("0x1p{k}")));
        }
        pos.push(to_bound(&FpValue::max_finite(FpFormat::DOUBLE, Sign::Positive)));
        pos.push(inf(Sign::Positive));
        let mut all: Vec<FpValue> = pos.iter().rev().map(|v| v.negate()).collect();
        all.push(zero());
        all.extend(pos);
        all
    })
}

/// Moves each bound of `next` that grew past `prev` to the next threshold.
pub fn widen(prev: &Interval, next: &Interval) -> Interval {
    if prev.empty {
        return *next;
    }
    if next.empty {
        return prev.with_nan(next.may_be_nan);
    }
    let mut r = prev.join(next);
    if lt(&next.lo, &prev.lo) {
        r.lo = *ladder().iter().rev().find(|t| le(t, &next.lo)).expect("ladder starts at -inf");
    }
    if lt(&prev.hi, &next.hi) {
        r.hi = *ladder().iter().find(|t| le(&next.hi, t)).expect("ladder ends at +inf");
    }
    r
}

/// `x` assuming `x < y` holds. With `exact = Some(fmt)` the values of `x`
/// are representable in `fmt`, so `x` is at most the largest `fmt` value
/// below the upper bound of `y`; otherwise the bound is `y`'s.
pub fn refine_strict_lt(x: &Interval, y: &Interval) -> Interval {
    if x.empty || y.empty {
        return Interval::bottom();
    }
    if y.hi.is_infinite() && y.hi.is_sign_negative() {
        return Interval::bottom();
    }
    let bound = match x.exact_in {
        Some(f) => below(f, &y.hi),
        None => y.hi,
    };
    let hi = min(x.hi, bound);
    if lt(&hi, &x.lo) || (x.exact_in.is_none() && le(&y.hi, &x.lo)) {
        return Interval::bottom();
    }
    Interval { hi, may_be_nan: false, ..*x }
}

/// `x` assuming `x <= y`.
pub fn refine_le(x: &Interval, y: &Interval) -> Interval {
    if x.empty || y.empty {
        return Interval::bottom();
    }
    let hi = min(x.hi, y.hi);
    if lt(&hi, &x.lo) {
        return Interval::bottom();
    }
    Interval { hi, may_be_nan: false, ..*x }
}

/// `x` assuming `x > y`.
pub fn refine_strict_gt(x: &Interval, y: &Interval) -> Interval {
    refine_strict_lt(&x.neg(), &y.neg()).neg()
}

/// `x` assuming `x >= y`.
pub fn refine_ge(x: &Interval, y: &Interval) -> Interval {
    refine_le(&x.neg(), &y.neg()).neg()
}

pub fn is_le(a: &FpValue, b: &FpValue) -> bool {
    le(a, b)
}

pub fn is_lt(a: &FpValue, b: &FpValue) -> bool {
    lt(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: &str, hi: &str) -> Interval {
        Interval::new(lit(lo), lit(hi))
    }

    fn d(text: &str) -> FpValue {
        parse_literal(text, FpFormat::DOUBLE, RoundingMode::NearestEven).unwrap()
    }

    #[test]
    fn exact_endpoints() {
        let (r, _) = iarith(Op::Add, &[iv("1", "2"), iv("3", "4")], &[FpFormat::DOUBLE]);
        assert_eq!(r, iv("4", "6"));
        let (r, _) = iarith(Op::Add, &[iv("0", "0"), iv("0", "0")], &[FpFormat::DOUBLE]);
        assert_eq!(r, iv("0", "0"));
    }

    #[test]
    fn overflowing_product() {
        let big = Interval::point(d("1e308"));
        let (r, _) = iarith(Op::Mul, &[big, big], &[FpFormat::DOUBLE]);
        // rounding toward -inf saturates at the largest finite double
        assert_eq!(r.lo, to_bound(&FpValue::max_finite(FpFormat::DOUBLE, Sign::Positive)));
        assert!(r.hi.is_infinite() && !r.hi.is_sign_negative());
    }

    #[test]
    fn division_by_a_straddling_interval() {
        let (r, alarm) = iarith(Op::Div, &[iv("1", "1"), iv("-1", "1")], &[FpFormat::DOUBLE]);
        assert!(alarm && r.may_be_nan && r.lo.is_infinite() && r.hi.is_infinite());
    }

    #[test]
    fn sqrt_of_a_partly_negative_interval() {
        let (r, _) = iarith(Op::Sqrt, &[iv("-1", "4")], &[FpFormat::DOUBLE]);
        assert!(r.may_be_nan);
        assert_eq!((r.lo, r.hi), (lit("0"), lit("2")));
    }

    #[test]
    fn strict_refinement_uses_pred_only_when_exact() {
        let x = Interval { exact_in: Some(FpFormat::DOUBLE), ..Interval::top() };
        let y = Interval::point(d("180"));
        assert_eq!(format_hex(&refine_strict_lt(&x, &y).hi), "0x1.67fffffffffffp+7");
        let loose = refine_strict_lt(&Interval::top(), &y);
        assert_eq!(format_hex(&loose.hi), "0x1.68p+7");
        assert!(refine_strict_lt(&iv("200", "300"), &y).is_bottom());
    }

    #[test]
    fn ladder_widening() {
        let a = iv("0", "1");
        assert_eq!(widen(&a, &iv("0", "2")), iv("0", "2"));
        assert_eq!(widen(&a, &iv("0", "1")), a);
        let w = widen(&a, &iv("0", "1e308"));
        assert_eq!(w.hi, to_bound(&FpValue::max_finite(FpFormat::DOUBLE, Sign::Positive)));
        assert_eq!(widen(&a, &iv("0", "3")).hi, lit("4"));
    }

    #[test]
    fn flush_adds_zero() {
        let tiny = iv("0x1p-1070", "0x1p-1060");
        assert!(tiny.with_flushed_zero(FpFormat::DOUBLE).contains_zero());
        assert!(!iv("1", "2").with_flushed_zero(FpFormat::DOUBLE).contains_zero());
    }

    #[test]
    fn nextafter_toward_a_smaller_value() {
        let r = inextafter(&Interval::point(d("180")), &Interval::point(d("0")));
        assert_eq!(r.hex(), "[0x1.67fffffffffffp+7, 0x1.67fffffffffffp+7]");
    }
}
