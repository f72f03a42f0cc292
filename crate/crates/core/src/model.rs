//! Platform/compilation models: where rounding happens, to which format.

use std::fmt;

use fplab_softfloat::FpFormat;

/// When an x87-style model narrows register values to their declared type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpillPolicy {
    /// Variables and temporaries stay in registers.
    NeverSpill,
    /// Every assignment to a named variable (declaration initializers and
    /// parameter binding included) stores to memory.
    SpillAtAssignments,
    /// Calls pass arguments and return values through memory, and the caller
    /// spills every register variable around the call.
    SpillAtCalls,
    /// Every operation result is stored, plus everything above.
    SpillEverywhere,
}

impl SpillPolicy {
    pub fn at_assignments(self) -> bool {
        matches!(self, SpillPolicy::SpillAtAssignments | SpillPolicy::SpillEverywhere)
    }

    pub fn at_calls(self) -> bool {
        matches!(self, SpillPolicy::SpillAtCalls | SpillPolicy::SpillEverywhere)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PlatformModel {
    /// Each operation rounds once, to the wider of its static type and
    /// `fmt`; stores round to the declared type.
    StrictIEEE(FpFormat),
    /// Operations round to `compute`; values reach their declared type
    /// only at the policy's spill points and at explicit casts.
    X87 { compute: FpFormat, spill: SpillPolicy },
    /// Strict evaluation with optional flush-to-zero of subnormal results
    /// and denormals-are-zero on operands.
    Sse { fmt: FpFormat, ftz: bool, daz: bool },
    /// `base` after contracting products in sums into fused multiply-adds.
    FmaContract { base: Box<PlatformModel>, contract: bool },
}

impl PlatformModel {
    /// The model operations are evaluated under once contraction is done.
    pub fn evaluation_base(&self) -> &PlatformModel {
        match self {
            PlatformModel::FmaContract { base, .. } => base.evaluation_base(),
            m => m,
        }
    }

    pub fn contracts(&self) -> bool {
        match self {
            PlatformModel::FmaContract { base, contract } => *contract || base.contracts(),
            _ => false,
        }
    }

    /// Format an operation of static format `stat` rounds to.
    pub fn op_format(&self, stat: FpFormat) -> FpFormat {
        match self.evaluation_base() {
            PlatformModel::StrictIEEE(f) | PlatformModel::Sse { fmt: f, .. } => wider(stat, *f),
            PlatformModel::X87 { compute, .. } => *compute,
            PlatformModel::FmaContract { .. } => unreachable!("base is never a contraction"),
        }
    }

    pub fn spill(&self) -> Option<SpillPolicy> {
        match self.evaluation_base() {
            PlatformModel::X87 { spill, .. } => Some(*spill),
            _ => None,
        }
    }

    /// Whether plain assignments store to the declared type.
    pub fn stores_at_assignments(&self) -> bool {
        self.spill().is_none_or(|s| s.at_assignments())
    }

    pub fn ftz(&self) -> bool {
        matches!(self.evaluation_base(), PlatformModel::Sse { ftz: true, .. })
    }

    pub fn daz(&self) -> bool {
        matches!(self.evaluation_base(), PlatformModel::Sse { daz: true, .. })
    }

    /// Whether values can live in a format other than their declared one
    /// (extended range or precision) between spill points.
    pub fn has_registers(&self) -> bool {
        self.spill().is_some_and(|s| s != SpillPolicy::SpillEverywhere)
    }
}

/// The wider of two formats: the one containing the other, else the one with
/// more precision.
pub fn wider(a: FpFormat, b: FpFormat) -> FpFormat {
    if a.contains(&b) {
        a
    } else if b.contains(&a) {
        b
    } else if a.precision() >= b.precision() {
        a
    } else {
        b
    }
}

impl fmt::Display for PlatformModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlatformModel::StrictIEEE(x) => write!(f, "StrictIEEE({x})"),
            PlatformModel::X87 { compute, spill } => write!(f, "X87({compute}, {spill:?})"),
            PlatformModel::Sse { fmt, ftz, daz } => write!(f, "SSE({fmt}, ftz={ftz}, daz={daz})"),
            PlatformModel::FmaContract { base, contract } => write!(f, "FmaContract({base}, {contract})"),
        }
    }
}

/// The named model catalog, in a stable order.
pub fn builtin_models() -> Vec<(&'static str, PlatformModel)> {
    use PlatformModel::*;
    use SpillPolicy::*;
    let ext = FpFormat::X87_EXTENDED;
    vec![
        ("strict-single", StrictIEEE(FpFormat::SINGLE)),
        ("strict-double", StrictIEEE(FpFormat::DOUBLE)),
        ("x87-nospill", X87 { compute: ext, spill: NeverSpill }),
        ("x87-spill-assign", X87 { compute: ext, spill: SpillAtAssignments }),
        ("x87-spill-calls", X87 { compute: ext, spill: SpillAtCalls }),
        ("x87-spill-everywhere", X87 { compute: ext, spill: SpillEverywhere }),
        ("x87-pc53-spill-assign", X87 { compute: FpFormat::X87_PC53, spill: SpillAtAssignments }),
        ("sse-ftz", Sse { fmt: FpFormat::DOUBLE, ftz: true, daz: false }),
        ("sse-daz", Sse { fmt: FpFormat::DOUBLE, ftz: false, daz: true }),
        ("ppc-fma", FmaContract { base: Box::new(StrictIEEE(FpFormat::DOUBLE)), contract: true }),
    ]
}

pub fn model_by_name(name: &str) -> Option<PlatformModel> {
    builtin_models().into_iter().find(|(n, _)| *n == name).map(|(_, m)| m)
}

pub fn model_names() -> Vec<&'static str> {
    builtin_models().into_iter().map(|(n, _)| n).collect()
}
