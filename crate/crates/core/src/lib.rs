// SPDX-License-Identifier: Apache-2.0

//! Robustness analysis of single-qubit composite pulses and dynamically
//! corrected gates under time-dependent amplitude and detuning noise.
//!
//! The crate provides three independent routes to the fidelity loss of a
//! control sequence:
//!
//! * generalized filter functions and their spectral overlap with a noise
//!   power spectral density ([`filterfn`], [`analytic`]),
//! * dc-limit estimates from the leading surviving Magnus term for
//!   quasi-static noise ([`analytic`]),
//! * an exact Monte Carlo propagator over synthesized Gaussian noise
//!   ([`noisegen`], [`mcsim`]).
//!
//! ```
//! use cpfilter::pulses::{build_sequence, SequenceId};
//! use cpfilter::filterfn::FilterFunction;
//!
//! let omega = 1.5e6;
//! let pi = std::f64::consts::PI;
//! let sk1 = FilterFunction::new(&build_sequence(SequenceId::Sk1, pi, omega).unwrap()).unwrap();
//! let bare = FilterFunction::new(&build_sequence(SequenceId::Primitive, pi, omega).unwrap()).unwrap();
//! // slow amplitude noise is suppressed below the bare pulse
//! assert!(sk1.amplitude(0.01 * omega) < 0.1 * bare.amplitude(0.01 * omega));
//! ```

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod filterfn;
pub mod geometry;
pub mod linalg;
pub mod mcsim;
pub mod noisegen;
pub mod pulses;
pub mod quad;
pub mod spectra;
pub mod toggling;

use serde::{Deserialize, Serialize};
use std::fmt;

pub use analytic::{combined_estimate, DcCoefficient, DcModel, FidelityEstimate};
pub use error::{Error, Result};
pub use filterfn::{FilterFunction, FilterFunctionCurve};
pub use mcsim::{ensemble, EnsembleConfig, EnsembleResult};
pub use noisegen::NoiseTrajectory;
pub use pulses::{build_sequence, PiecewiseConstantControl, PulseSequence, SequenceId};
pub use spectra::{Convention, NoiseSpectrum};

/// Noise quadrature: fluctuations of the drive amplitude or of the qubit
/// frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Amplitude,
    Detuning,
}

impl Quadrature {
    pub const BOTH: [Quadrature; 2] = [Quadrature::Amplitude, Quadrature::Detuning];

    pub fn as_str(&self) -> &'static str {
        match self {
            Quadrature::Amplitude => "a",
            Quadrature::Detuning => "d",
        }
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
