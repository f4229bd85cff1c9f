//! Two-parameter (gravity, interrogation time) quantum Fisher geometry.
//!
//! The crate provides the 2×2 information container and its Schur-complement
//! profiling, the structural retention kernel, closed forms for three
//! benchmark gravimeters (Gaussian free fall, Kasevich–Chu interferometer,
//! cavity optomechanics), a literature-anchored experiments pipeline, and a
//! brute-force numerical oracle used to cross-check every closed form.

// Negated comparisons are used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod experiments;
pub mod freefall;
pub mod kasevich_chu;
pub mod kernel;
pub mod optomech;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};
pub use estimation::{
    correlation, crlb_variance, regularized_effective, retention, schur_effective, FisherMatrix2,
    PriorInfo, UnitSystem,
};
pub use experiments::{PhysicalConstants, PlatformSpec};
pub use freefall::GaussianProbe;
pub use kasevich_chu::KCConfig;
pub use kernel::{AxisParams, KernelParams, NormalizedCoeffs};
pub use optomech::{MechTime, OptoConfig};
