// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use cpfilter::spectra::BENCHMARK_RABI;
use cpfilter::{build_sequence, NoiseSpectrum, PulseSequence, SequenceId};

pub const OMEGA: f64 = BENCHMARK_RABI;

/// Every library sequence at θ = π.
pub fn sequences() -> Vec<PulseSequence> {
    SequenceId::ALL
        .iter()
        .map(|&id| build_sequence(id, PI, OMEGA).unwrap())
        .collect()
}

pub fn sequence(id: SequenceId) -> PulseSequence {
    build_sequence(id, PI, OMEGA).unwrap()
}

/// Constant-power roll-off spectrum with its knee at `r·Ω`.
pub fn spectrum(r: f64) -> NoiseSpectrum {
    NoiseSpectrum::benchmark(r * OMEGA).unwrap()
}
