use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::exact::pow2;
use crate::format::FpFormat;
use crate::round::RoundingMode;

/// Coefficients of the rounding-error bound
/// `|x - round(x)| <= max(eps_rel * |x|, eps_abs)` for finite results.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorModel {
    pub eps_rel: BigRational,
    pub eps_abs: BigRational,
}

impl ErrorModel {
    /// Bound for a single rounding into `fmt`: half an ulp under
    /// round-to-nearest, a full ulp under the directed modes.
    pub fn for_rounding(fmt: FpFormat, mode: RoundingMode) -> ErrorModel {
        let p = fmt.precision() as i64;
        let q_min = fmt.e_min() as i64 - (p - 1);
        match mode {
            RoundingMode::NearestEven => ErrorModel { eps_rel: pow2(-p), eps_abs: pow2(q_min - 1) },
            _ => ErrorModel { eps_rel: pow2(-(p - 1)), eps_abs: pow2(q_min) },
        }
    }

    /// The bound widened to absorb a second rounding (register value spilled
    /// to memory): both coefficients doubled.
    pub fn double_rounding(&self) -> ErrorModel {
        let two = BigRational::from_integer(BigInt::from(2));
        ErrorModel { eps_rel: &self.eps_rel * &two, eps_abs: &self.eps_abs * &two }
    }

    /// `max(eps_rel * |x|, eps_abs)`.
    pub fn bound(&self, x: &BigRational) -> BigRational {
        let rel = &self.eps_rel * x.abs();
        if rel > self.eps_abs {
            rel
        } else {
            self.eps_abs.clone()
        }
    }

    /// The coarser additive bound `eps_rel * |x| + eps_abs`.
    pub fn additive_bound(&self, x: &BigRational) -> BigRational {
        &self.eps_rel * x.abs() + &self.eps_abs
    }
}
