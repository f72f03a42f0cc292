//! Bit-exact software binary floating point, parameterized by format.
//!
//! Every operation computes its exact result (a rational, or a special
//! value) and rounds it once, so results match IEEE-754 semantics for any
//! [`FpFormat`]: single, double, x87 extended, or the x87 precision-control
//! variants that keep the extended exponent range. The rounding mode is
//! always an explicit argument; there is no ambient floating-point state.

mod error_model;
mod exact;
mod format;
mod literal;
mod ops;
mod round;
mod value;

pub use error_model::ErrorModel;
pub use exact::{pow2, ExactValue};
pub use format::FpFormat;
pub use literal::{format_hex, parse_exact, parse_literal, parse_literal_with_flags, LiteralError};
pub use ops::{
    add, arith, compare, convert, div, floor_int, fma, from_integer, mul, neighbors, next_after, pred, sqrt, sub,
    succ, to_integer_trunc, ArityError, CompareResult, Neighbor, Op,
};
pub use round::{round_exact, round_from_exact, Flags, Rounded, RoundingMode};
pub use value::{FpValue, Kind, Sign};
