use thiserror::Error;

/// Errors raised by the estimation layer, the benchmark models and the oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate timing block: f_tt = {f_tt:e} is below the singular threshold; use regularized profiling")]
    DegenerateTimingBlock { f_tt: f64 },

    #[error("degenerate information block: f_gg = {f_gg:e}, f_tt = {f_tt:e}")]
    DegenerateBlock { f_gg: f64, f_tt: f64 },

    #[error("information must be positive, got {0:e}")]
    NonpositiveInformation(f64),

    #[error("degenerate timing sector: c2 = {c2:e} (sensing observable has no variance)")]
    DegenerateTimingSector { c2: f64 },

    #[error("degenerate axis: g_*^2 = {g_star_sq:e} is not positive")]
    DegenerateAxis { g_star_sq: f64 },

    #[error("degenerate baseline: f_gg = {f_gg:e}")]
    DegenerateBaseline { f_gg: f64 },

    #[error("retention kernel value {value} lies outside [0, 1]; coefficients violate the PSD bound")]
    KernelOutOfRange { value: f64 },

    #[error("internal-only geometry is singular without timing prior (g = {g}, prior = {prior:e})")]
    SingularWithoutPrior { g: f64, prior: f64 },

    #[error("retention is indeterminate when both sigma_v and g*T vanish")]
    Indeterminate,

    #[error("target retention {0} must lie strictly inside (0, 1)")]
    InvalidTarget(f64),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("matrix is not positive semidefinite: det = {det:e}")]
    NotPositiveSemidefinite { det: f64 },

    #[error("propagation did not converge: halving dt changed the state by {defect:e}")]
    ConvergenceFailure { defect: f64 },

    #[error("finite-difference step too large: Richardson refinement changed entries by {change:e}")]
    StepTooLarge { change: f64 },

    #[error("finite-difference step too small: differences stopped shrinking ({coarse:e} -> {fine:e})")]
    StepTooSmall { coarse: f64, fine: f64 },

    #[error("quadrature not converged: doubling nodes changed entries by {change:e}")]
    QuadratureNotConverged { change: f64 },

    #[error("grid under-resolved: {0}")]
    GridUnderResolved(String),

    #[error("truncated basis too small: discarded weight {weight:e} exceeds {limit:e}")]
    TruncationTooLarge { weight: f64, limit: f64 },
}

impl Error {
    /// True for errors caused by invalid inputs, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::InvalidTarget(_)
                | Error::Indeterminate
                | Error::SingularWithoutPrior { .. }
                | Error::NotPositiveSemidefinite { .. }
                | Error::DegenerateTimingBlock { .. }
                | Error::DegenerateBlock { .. }
                | Error::DegenerateTimingSector { .. }
                | Error::DegenerateAxis { .. }
                | Error::DegenerateBaseline { .. }
                | Error::NonpositiveInformation(_)
        )
    }

    /// Name of the variant, used by the command line front end.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateTimingBlock { .. } => "DegenerateTimingBlock",
            Error::DegenerateBlock { .. } => "DegenerateBlock",
            Error::NonpositiveInformation(_) => "NonpositiveInformation",
            Error::DegenerateTimingSector { .. } => "DegenerateTimingSector",
            Error::DegenerateAxis { .. } => "DegenerateAxis",
            Error::DegenerateBaseline { .. } => "DegenerateBaseline",
            Error::KernelOutOfRange { .. } => "KernelOutOfRange",
            Error::SingularWithoutPrior { .. } => "SingularWithoutPrior",
            Error::Indeterminate => "Indeterminate",
            Error::InvalidTarget(_) => "InvalidTarget",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::NotPositiveSemidefinite { .. } => "NotPositiveSemidefinite",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::StepTooSmall { .. } => "StepTooSmall",
            Error::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            Error::GridUnderResolved(_) => "GridUnderResolved",
            Error::TruncationTooLarge { .. } => "TruncationTooLarge",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
