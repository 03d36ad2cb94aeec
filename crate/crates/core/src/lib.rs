//! Support-function solver for the entropy flow of locally convex closed
//! plane curves, with runtime monitors and a graph-parametrization
//! cross-check.
//!
//! The state is the support function `h(θ)` on `[0, 2ωπ)`, where `ω` is the
//! winding number. The flow is `h_t = k_θθ + k` with `k = 1/(h_θθ + h)`.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geom;
pub mod graph;
pub mod spectral;
pub mod support;

pub use diagnostics::{run_monitors, CheckStatus, DiagnosticsRecord, MonitorReport, MonitorTolerances};
pub use error::{Error, Result};
pub use flow::{evolve, rescale_trajectory, step, FlowState, FlowVariant, Scheme, StepperConfig, Trajectory};
pub use geom::Vec2;
pub use spectral::{GridFunction, PeriodicGrid};
pub use support::{CurveSample, IngestMode, SupportGrid};
