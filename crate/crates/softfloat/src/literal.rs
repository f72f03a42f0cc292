//! Exact textual I/O.
//!
//! Accepted forms (an optional leading `+`/`-` applies to all of them):
//!
//! ```text
//! hex      0x HEXDIGITS [ . [HEXDIGITS] ] p [+|-] DECDIGITS
//! decimal  DECDIGITS [ . [DECDIGITS] ] [ (e|E) [+|-] DECDIGITS ]
//! special  inf | nan
//! ```
//!
//! Hex literals denote `[mantissa]_16 * 2^exp`; both forms are rounded once,
//! from the exact rational, into the target format.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Num, Zero};

use crate::exact::{pow2, ExactValue};
use crate::format::FpFormat;
use crate::round::{round_exact, Rounded, RoundingMode};
use crate::value::{FpValue, Kind, Sign};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed floating-point literal `{text}` at offset {position}: {message}")]
pub struct LiteralError {
    pub text: String,
    pub position: usize,
    pub message: String,
}

pub fn parse_literal(text: &str, fmt: FpFormat, mode: RoundingMode) -> Result<FpValue, LiteralError> {
    parse_literal_with_flags(text, fmt, mode).map(|r| r.value)
}

/// [`parse_literal`] also reporting whether the conversion was inexact.
pub fn parse_literal_with_flags(text: &str, fmt: FpFormat, mode: RoundingMode) -> Result<Rounded, LiteralError> {
    let exact = parse_exact(text)?;
    Ok(round_exact(fmt, mode, &exact))
}

/// The exact value a literal denotes.
pub fn parse_exact(text: &str) -> Result<ExactValue, LiteralError> {
    let err = |position: usize, message: &str| LiteralError {
        text: text.to_string(),
        position,
        message: message.to_string(),
    };
    let bytes = text.as_bytes();
    let mut pos = 0;
    let mut sign = Sign::Positive;
    if let Some(&c) = bytes.first() {
        if c == b'+' || c == b'-' {
            sign = Sign::from_negative(c == b'-');
            pos = 1;
        }
    }
    let body = &text[pos..];
    if body.is_empty() {
        return Err(err(pos, "empty literal"));
    }
    match body {
        "inf" | "infinity" => return Ok(ExactValue::infinity(sign)),
        "nan" => return Ok(ExactValue::NaN),
        _ => {}
    }
    let lower = body.to_ascii_lowercase();
    let (magnitude, zero) = if lower.starts_with("0x") {
        parse_hex(&body[2..], pos + 2, &err)?
    } else {
        parse_decimal(body, pos, &err)?
    };
    if zero {
        return Ok(ExactValue::zero(sign));
    }
    Ok(ExactValue::rational(if sign.is_negative() { -magnitude } else { magnitude }))
}

type ErrFn<'a> = dyn Fn(usize, &str) -> LiteralError + 'a;

/// Splits `digits[.digits]` and returns (all digits, number of fraction
/// digits, bytes consumed).
fn scan_mantissa(s: &str, base: u32, offset: usize, err: &ErrFn) -> Result<(String, usize, usize), LiteralError> {
    let mut digits = String::new();
    let mut frac_digits = 0;
    let mut seen_dot = false;
    let mut consumed = 0;
    for c in s.chars() {
        if c == '.' {
            if seen_dot {
                return Err(err(offset + consumed, "second decimal point"));
            }
            seen_dot = true;
        } else if c.is_digit(base) {
            digits.push(c);
            if seen_dot {
                frac_digits += 1;
            }
        } else {
            break;
        }
        consumed += c.len_utf8();
    }
    if digits.is_empty() {
        return Err(err(offset, "expected digits"));
    }
    Ok((digits, frac_digits, consumed))
}

fn parse_exponent(s: &str, offset: usize, err: &ErrFn) -> Result<i64, LiteralError> {
    let (neg, digits) = match s.as_bytes().first() {
        Some(b'+') => (false, &s[1..]),
        Some(b'-') => (true, &s[1..]),
        _ => (false, s),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(offset, "expected a decimal exponent"));
    }
    // Saturate: anything this large already overflows or underflows every format.
    let value = digits.parse::<i64>().unwrap_or(i64::MAX / 4).min(i64::MAX / 4);
    Ok(if neg { -value } else { value })
}

/// Saturation bound for binary exponents: beyond it every supported format
/// overflows or underflows, so the rounded result no longer changes.
fn binary_clamp(digits: usize) -> i64 {
    2 * FpFormat::EXPONENT_LIMIT as i64 + 4 * digits as i64 + 256
}

fn parse_hex(s: &str, offset: usize, err: &ErrFn) -> Result<(BigRational, bool), LiteralError> {
    let (digits, frac, used) = scan_mantissa(s, 16, offset, err)?;
    let rest = &s[used..];
    if !rest.starts_with(['p', 'P']) {
        return Err(err(offset + used, "hex literal needs a `p` exponent"));
    }
    let exp = parse_exponent(&rest[1..], offset + used + 1, err)?;
    let mantissa = BigUint::from_str_radix(&digits, 16).expect("validated hex digits");
    if mantissa.is_zero() {
        return Ok((BigRational::zero(), true));
    }
    let clamp = binary_clamp(digits.len());
    let exp2 = exp.clamp(-clamp, clamp) - 4 * frac as i64;
    Ok((BigRational::from_integer(BigInt::from(mantissa)) * pow2(exp2), false))
}

fn parse_decimal(s: &str, offset: usize, err: &ErrFn) -> Result<(BigRational, bool), LiteralError> {
    let (digits, frac, used) = scan_mantissa(s, 10, offset, err)?;
    let rest = &s[used..];
    let exp = if rest.is_empty() {
        0
    } else if rest.starts_with(['e', 'E']) {
        parse_exponent(&rest[1..], offset + used + 1, err)?
    } else {
        return Err(err(offset + used, "unexpected character"));
    };
    let mantissa = BigUint::from_str_radix(&digits, 10).expect("validated decimal digits");
    if mantissa.is_zero() {
        return Ok((BigRational::zero(), true));
    }
    // 10^k > 2^(3k), so a third of the binary bound is enough.
    let clamp = binary_clamp(digits.len()) / 3 + digits.len() as i64;
    let exp10 = exp.clamp(-clamp, clamp) - frac as i64;
    let ten = BigInt::from(10);
    let scale = num_traits::pow(ten, exp10.unsigned_abs() as usize);
    let m = BigRational::from_integer(BigInt::from(mantissa));
    Ok((if exp10 >= 0 { m * scale } else { m / scale }, false))
}

/// Exact, canonical hexadecimal rendering; `parse_literal` inverts it for the
/// value's own format.
pub fn format_hex(x: &FpValue) -> String {
    let sign = if x.is_sign_negative() { "-" } else { "" };
    match x.kind() {
        Kind::NaN => "nan".into(),
        Kind::Infinity => format!("{}inf", if x.is_sign_negative() { "-" } else { "+" }),
        Kind::Zero => format!("{sign}0x0p+0"),
        Kind::Normal | Kind::Subnormal => {
            let p = x.format().precision();
            let frac_bits = p - 1;
            let lead = if x.kind() == Kind::Normal { 1 } else { 0 };
            let frac = x.significand() & ((1u128 << frac_bits) - 1);
            let ndigits = frac_bits.div_ceil(4) as usize;
            let pad = ndigits as u32 * 4 - frac_bits;
            let mut hex = format!("{:0width$x}", frac << pad, width = ndigits);
            while hex.ends_with('0') {
                hex.pop();
            }
            let exp = x.exponent();
            let exp_sign = if exp >= 0 { "+" } else { "" };
            if hex.is_empty() {
                format!("{sign}0x{lead}p{exp_sign}{exp}")
            } else {
                format!("{sign}0x{lead}.{hex}p{exp_sign}{exp}")
            }
        }
    }
}
