// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown sequence id `{0}`")]
    UnknownSequence(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ramp {ramp:.6e} s leaves no hold time in segment {segment} (duration {duration:.6e} s)")]
    RampTooLarge { segment: usize, ramp: f64, duration: f64 },

    #[error("operation requires square pulses; discretize shaped sequences first")]
    ShapedSequence,

    #[error("segment product misses the target rotation by {distance:.3e} (operator norm)")]
    TargetMismatch { distance: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("dc fit residual {residual:.3e} exceeds tolerance at assumed order m = {order}")]
    WrongOrder { order: u32, residual: f64 },

    #[error("quadrature did not converge: estimate {estimate:.6e}, error {error:.3e} after {intervals} intervals")]
    NoConvergence {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("sequence does not suppress noise below the primitive at low frequency")]
    NoSuppression,

    #[error("noise grid does not match control steps: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
