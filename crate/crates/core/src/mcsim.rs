// SPDX-License-Identifier: Apache-2.0

//! Exact propagation of `H = [(Ω(t) + β_a)/2](cos φ σx + sin φ σy) + (β_d/2)σz`
//! under sampled noise, and ensemble averages of the fidelity loss.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{rotation_angle_axis, Mat2};
use crate::noisegen::{default_dt, realization_seed, NoiseTrajectory, SpectralRealization, Synthesizer};
use crate::pulses::{PiecewiseConstantControl, PulseSequence, SequenceId, Step};
use crate::spectra::NoiseSpectrum;
use crate::toggling::AmplitudeNoise;

/// Default ensemble size.
pub const DEFAULT_REALIZATIONS: usize = 2000;

const STREAM_AMPLITUDE: u64 = 0;
const STREAM_DETUNING: u64 = 1;

/// `exp(−i H dt)` for one step with noise values held constant.
pub fn step_propagator(step: &Step, beta_a: f64, beta_d: f64) -> Mat2 {
    let r = 0.5 * (step.amplitude + beta_a);
    let h = [r * step.phase.cos(), r * step.phase.sin(), 0.5 * beta_d];
    Mat2::exp_su2(&h, step.dt)
}

fn amplitude_weights(steps: &[Step], noise: AmplitudeNoise) -> Vec<f64> {
    let max_amp = steps.iter().map(|s| s.amplitude).fold(0.0, f64::max);
    steps
        .iter()
        .map(|s| match noise {
            AmplitudeNoise::Additive => 1.0,
            AmplitudeNoise::Multiplicative if max_amp > 0.0 => s.amplitude / max_amp,
            AmplitudeNoise::Multiplicative => 0.0,
        })
        .collect()
}

/// Propagator under constant noise `(β_a, β_d)`.
pub fn propagate_constant(steps: &[Step], beta_a: f64, beta_d: f64, noise: AmplitudeNoise) -> Mat2 {
    let w = amplitude_weights(steps, noise);
    steps
        .iter()
        .zip(&w)
        .fold(Mat2::identity(), |u, (s, w)| step_propagator(s, w * beta_a, beta_d) * u)
}

/// Propagator of `control` with noise held per trajectory cell. The noise
/// cell width must divide every control step.
pub fn propagate(
    control: &PiecewiseConstantControl,
    beta_a: &NoiseTrajectory,
    beta_d: &NoiseTrajectory,
) -> Result<Mat2> {
    propagate_with(control, beta_a, beta_d, AmplitudeNoise::Additive)
}

pub fn propagate_with(
    control: &PiecewiseConstantControl,
    beta_a: &NoiseTrajectory,
    beta_d: &NoiseTrajectory,
    noise: AmplitudeNoise,
) -> Result<Mat2> {
    if beta_a.dt != beta_d.dt {
        return Err(Error::GridMismatch(format!(
            "amplitude dt {:e} differs from detuning dt {:e}",
            beta_a.dt, beta_d.dt
        )));
    }
    let dt = beta_a.dt;
    let w = amplitude_weights(&control.steps, noise);
    let mut u = Mat2::identity();
    let mut cell = 0usize;
    for (i, (s, w)) in control.steps.iter().zip(&w).enumerate() {
        let ratio = s.dt / dt;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio {
            return Err(Error::GridMismatch(format!(
                "step {i} of {:e} s is not a multiple of dt = {dt:e} s",
                s.dt
            )));
        }
        let k = k as usize;
        if cell + k > beta_a.samples.len() || cell + k > beta_d.samples.len() {
            return Err(Error::GridMismatch(format!(
                "noise covers {} cells, control needs more than {}",
                beta_a.samples.len().min(beta_d.samples.len()),
                cell + k - 1
            )));
        }
        let sub = Step {
            dt: s.dt / k as f64,
            ..*s
        };
        for j in cell..cell + k {
            u = step_propagator(&sub, w * beta_a.samples[j], beta_d.samples[j]) * u;
        }
        cell += k;
    }
    Ok(u)
}

/// `|Tr(U₀†U)|²/4`.
pub fn fidelity(u: &Mat2, u0: &Mat2) -> f64 {
    (u0.dagger() * *u).trace().norm_sqr() / 4.0
}

/// `1 − fidelity`, computed as `sin²λ` of `U₀†U` so that tiny losses keep
/// their relative precision.
pub fn infidelity(u: &Mat2, u0: &Mat2) -> f64 {
    let (lambda, _) = rotation_angle_axis(&(u0.dagger() * *u));
    lambda.sin().powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub seed: u64,
    /// Largest integration step; defaults to `2π/(20Ω_max)`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Noise band limit in rad/s; defaults to the Nyquist frequency of the
    /// default step, independent of `dt` so that refining `dt` keeps the
    /// realizations fixed.
    #[serde(default)]
    pub bandwidth: Option<f64>,
    /// Hold every realization at its `t = 0` value.
    #[serde(default)]
    pub frozen: bool,
    /// Scale amplitude noise with the instantaneous drive.
    #[serde(default)]
    pub multiplicative: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n: DEFAULT_REALIZATIONS,
            seed: 0,
            dt: None,
            bandwidth: None,
            frozen: false,
            multiplicative: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub sequence: SequenceId,
    pub mean_loss: f64,
    pub std_error: f64,
    pub n: usize,
    pub seed: u64,
    /// SHA-256 prefix of the sequence, spectra and configuration.
    pub digest: String,
    pub clipped_power_a: f64,
    pub clipped_power_d: f64,
}

fn digest(
    seq: &PulseSequence,
    spec_a: &NoiseSpectrum,
    spec_d: &NoiseSpectrum,
    config: &EnsembleConfig,
) -> Result<String> {
    let payload = serde_json::to_vec(&(seq, spec_a, spec_d, config))?;
    let hash = Sha256::digest(&payload);
    Ok(hash.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

/// Integration grid: each control step split into equal sub-steps no
/// longer than `dt`, with the sub-step midpoints.
fn fine_grid(steps: &[Step], weights: &[f64], dt: f64) -> (Vec<(Step, f64)>, Vec<f64>) {
    let mut grid = Vec::new();
    let mut mids = Vec::new();
    let mut t = 0.0;
    for (s, &w) in steps.iter().zip(weights) {
        let k = ((s.dt / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = s.dt / k as f64;
        for j in 0..k {
            grid.push((Step { dt: h, ..*s }, w));
            mids.push(t + (j as f64 + 0.5) * h);
        }
        t += s.dt;
    }
    (grid, mids)
}

fn noise_values(real: &Option<SpectralRealization>, times: &[f64], frozen: bool) -> Vec<f64> {
    match real {
        None => vec![0.0; times.len()],
        Some(r) if frozen => vec![r.value(0.0); times.len()],
        Some(r) => times.iter().map(|&t| r.value(t)).collect(),
    }
}

/// Mean and standard error of the fidelity loss over `config.n`
/// realizations of independent amplitude and detuning noise.
pub fn ensemble(
    seq: &PulseSequence,
    spec_a: &NoiseSpectrum,
    spec_d: &NoiseSpectrum,
    config: &EnsembleConfig,
) -> Result<EnsembleResult> {
    if config.n < 2 {
        return Err(Error::InvalidParameter(format!(
            "ensemble needs N ≥ 2, got {}",
            config.n
        )));
    }
    let steps = seq.steps();
    let peak = steps.iter().map(|s| s.amplitude).fold(0.0, f64::max);
    let dt = config.dt.unwrap_or_else(|| default_dt(peak));
    let bandwidth = config.bandwidth.unwrap_or_else(|| PI / default_dt(peak));
    if !(dt > 0.0 && bandwidth > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt:e}, bandwidth = {bandwidth:e}"
        )));
    }
    // Frozen noise never sees the time grid, so nothing needs clipping.
    let limit = if config.frozen { f64::INFINITY } else { bandwidth };
    let synth_a = Synthesizer::new(spec_a, limit);
    let synth_d = Synthesizer::new(spec_d, limit);
    for (name, s, spec) in [("amplitude", &synth_a, spec_a), ("detuning", &synth_d, spec_d)] {
        if s.clipped_power > 0.0 {
            log::warn!(
                "{name} spectrum clipped at {bandwidth:.3e} rad/s: {:.3e} of {:.3e} variance dropped",
                s.clipped_power,
                spec.total_power()
            );
        }
    }

    let noise = if config.multiplicative {
        AmplitudeNoise::Multiplicative
    } else {
        AmplitudeNoise::Additive
    };
    let weights = amplitude_weights(&steps, noise);
    let (grid, mids) = fine_grid(&steps, &weights, dt);
    let u0 = seq.ideal_propagator();

    let losses: Vec<f64> = (0..config.n as u64)
        .into_par_iter()
        .map(|i| {
            let ra =
                (synth_a.components() > 0).then(|| synth_a.realize(realization_seed(config.seed, i, STREAM_AMPLITUDE)));
            let rd =
                (synth_d.components() > 0).then(|| synth_d.realize(realization_seed(config.seed, i, STREAM_DETUNING)));
            let ba = noise_values(&ra, &mids, config.frozen);
            let bd = noise_values(&rd, &mids, config.frozen);
            let u = grid
                .iter()
                .zip(ba.iter().zip(&bd))
                .fold(Mat2::identity(), |u, ((s, w), (a, d))| {
                    step_propagator(s, w * a, *d) * u
                });
            infidelity(&u, &u0)
        })
        .collect();

    // shifted sums: identical losses give exactly zero variance
    let n = losses.len() as f64;
    let shift = losses[0];
    let (s1, s2) = losses
        .iter()
        .fold((0.0, 0.0), |(s1, s2), l| (s1 + (l - shift), s2 + (l - shift).powi(2)));
    let mean = shift + s1 / n;
    let var = ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0);
    Ok(EnsembleResult {
        sequence: seq.name,
        mean_loss: mean,
        std_error: (var / n).sqrt(),
        n: losses.len(),
        seed: config.seed,
        digest: digest(seq, spec_a, spec_d, config)?,
        clipped_power_a: synth_a.clipped_power,
        clipped_power_d: synth_d.clipped_power,
    })
}
