//! Platform semantics, nondeterministic rounding exploration and interval
//! analysis for a small floating-point language.

pub mod lang;
pub mod contract;
pub mod eval;
pub mod model;
pub mod ndt;
pub mod interval;
pub mod analyze;
pub mod corpus;
