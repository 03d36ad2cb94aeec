use std::path::PathBuf;

use crate::flow::FlowState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid function has {got} values, grid expects {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("derivative order {0} is not supported (max 8)")]
    UnsupportedOrder(u32),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("support function is not positive at node {node} (h = {value:e})")]
    NonPositiveSupport { node: usize, value: f64 },

    #[error("curve is not locally convex at node {node} (theta = {theta:.6}, h_tt + h = {margin:e})")]
    NotLocallyConvex { node: usize, theta: f64, margin: f64 },

    #[error("curve ingestion failed: {0}")]
    Ingestion(String),

    #[error("step rejected: convexity margin {margin:e} after step (was {before:e})")]
    StepRejected { margin: f64, before: f64 },

    #[error("flow breakdown at t = {:e}: step size underflow after {halvings} halvings", .state.time)]
    FlowBreakdown { state: Box<FlowState>, halvings: u32 },

    #[error("degenerate graph at sample {sample}: |gamma_u| = {speed:e}")]
    DegenerateGraph { sample: usize, speed: f64 },

    #[error("{0} is only defined for winding number 1")]
    NotApplicable(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
