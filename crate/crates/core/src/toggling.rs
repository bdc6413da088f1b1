// SPDX-License-Identifier: Apache-2.0

//! Toggling-frame algebra: the Λ matrices of the cumulative ideal
//! propagator and the amplitude/detuning control vectors `ρ_a(t)`, `ρ_d(t)`.
//!
//! With `R'_l = R_l ⋯ R_1`, the conjugated Pauli vector is
//! `R'† (v·σ) R' = (v Λ)·σ` with `Λ_ij = Tr[R'† σ_i R' σ_j]/2`, so control
//! vectors are row vectors multiplied on the right by `Λ`.

use crate::error::Result;
use crate::linalg::{add, equatorial_axis, mat_mul3, rotation_matrix, scale, vec_mat, Mat3, Vec3, IDENTITY3, ZERO3};
use crate::pulses::{PiecewiseConstantControl, PulseSequence, Step};

#[derive(Debug, Clone, PartialEq)]
pub struct TogglingFrame {
    /// `Λ^{(l−1)}` in effect during segment `l` (so `lambdas[0]` is the identity).
    pub lambdas: Vec<Mat3>,
    /// Λ of the full sequence, `Λ^{(n)}`.
    pub final_lambda: Mat3,
    /// `t_0 = 0, …, t_n = τ`.
    pub boundary_times: Vec<f64>,
}

/// Λ matrices for a list of piecewise-constant steps.
pub fn toggling_matrices_steps(steps: &[Step]) -> TogglingFrame {
    let mut lambdas = Vec::with_capacity(steps.len());
    let mut boundary_times = Vec::with_capacity(steps.len() + 1);
    let mut lambda = IDENTITY3;
    let mut t = 0.0;
    boundary_times.push(t);
    for s in steps {
        lambdas.push(lambda);
        lambda = mat_mul3(&rotation_matrix(s.amplitude * s.dt, &equatorial_axis(s.phase)), &lambda);
        t += s.dt;
        boundary_times.push(t);
    }
    TogglingFrame {
        lambdas,
        final_lambda: lambda,
        boundary_times,
    }
}

/// Λ matrices per segment. Shaped segments rotate about a fixed axis, so
/// only their integrated angle enters.
pub fn toggling_matrices(seq: &PulseSequence) -> TogglingFrame {
    let steps: Vec<Step> = seq
        .segments
        .iter()
        .map(|s| Step {
            dt: s.duration,
            amplitude: s.angle() / s.duration,
            phase: s.phase,
        })
        .collect();
    toggling_matrices_steps(&steps)
}

/// One constant-control piece of the toggling-frame trajectory.
///
/// On `[start, start + duration]`, with `Δ = t − start`:
/// `ρ_a(t) = ½ w ñ` and `2ρ_d(t) = cos(rate Δ) z̃ + sin(rate Δ) p̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPiece {
    pub start: f64,
    pub duration: f64,
    pub rate: f64,
    /// `ñ = ρ_a^{(l)} Λ^{(l−1)}`, unit length.
    pub amp_dir: Vec3,
    /// Amplitude-noise weight (1 for additive noise, `Ω_l/Ω_max` for
    /// multiplicative noise).
    pub amp_weight: f64,
    /// `ẑ Λ^{(l−1)}`.
    pub det_z: Vec3,
    /// `(−sin φ_l, cos φ_l, 0) Λ^{(l−1)}`.
    pub det_perp: Vec3,
}

impl ControlPiece {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// `ρ_a` on this piece.
    pub fn amplitude_vector(&self) -> Vec3 {
        scale(&self.amp_dir, 0.5 * self.amp_weight)
    }

    /// `ρ_d(start + delta)`.
    pub fn detuning_vector(&self, delta: f64) -> Vec3 {
        let (s, c) = (self.rate * delta).sin_cos();
        scale(&add(&scale(&self.det_z, c), &scale(&self.det_perp, s)), 0.5)
    }

    /// `∫ρ_d dt` over the piece, from exact antiderivatives.
    pub fn detuning_integral(&self) -> Vec3 {
        let x = self.rate * self.duration;
        // sin(x)/rate and (1 − cos x)/rate written through sinc to stay
        // finite as rate → 0.
        let int_cos = self.duration * sinc(x);
        let int_sin = self.duration * (x / 2.0).sin() * sinc(x / 2.0);
        scale(&add(&scale(&self.det_z, int_cos), &scale(&self.det_perp, int_sin)), 0.5)
    }
}

/// `sin(x)/x`, with its Taylor series near the removable singularity.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Below this `|x|` the series branch of [`sinc`] is used; the truncation
/// error there is below `x⁶/5040 ≈ 2e−28`.
pub const SINC_SERIES_THRESHOLD: f64 = 1e-4;

/// Amplitude-noise weighting of the control vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeNoise {
    /// `β_a` adds to the Rabi rate independently of the control amplitude.
    Additive,
    /// `β_a` scales with the control: replaced by `(Ω_l/Ω_max) β_a`.
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlVectorTrajectory {
    pub pieces: Vec<ControlPiece>,
    pub duration: f64,
}

impl ControlVectorTrajectory {
    pub fn from_steps(steps: &[Step], amplitude_noise: AmplitudeNoise) -> Self {
        let frame = toggling_matrices_steps(steps);
        let max_amp = steps.iter().map(|s| s.amplitude).fold(0.0, f64::max);
        let pieces = steps
            .iter()
            .zip(&frame.lambdas)
            .zip(&frame.boundary_times)
            .map(|((s, lambda), &start)| {
                let axis = equatorial_axis(s.phase);
                let perp = [-axis[1], axis[0], 0.0];
                let amp_weight = match amplitude_noise {
                    AmplitudeNoise::Additive => 1.0,
                    AmplitudeNoise::Multiplicative if max_amp > 0.0 => s.amplitude / max_amp,
                    AmplitudeNoise::Multiplicative => 0.0,
                };
                ControlPiece {
                    start,
                    duration: s.dt,
                    rate: s.amplitude,
                    amp_dir: vec_mat(&axis, lambda),
                    amp_weight,
                    det_z: vec_mat(&[0.0, 0.0, 1.0], lambda),
                    det_perp: vec_mat(&perp, lambda),
                }
            })
            .collect();
        ControlVectorTrajectory {
            pieces,
            duration: *frame.boundary_times.last().unwrap_or(&0.0),
        }
    }

    pub fn from_control(control: &PiecewiseConstantControl, amplitude_noise: AmplitudeNoise) -> Self {
        Self::from_steps(&control.steps, amplitude_noise)
    }

    fn piece_at(&self, t: f64) -> Option<&ControlPiece> {
        if t < 0.0 || t > self.duration {
            return None;
        }
        let idx = self.pieces.partition_point(|p| p.end() <= t);
        self.pieces.get(idx.min(self.pieces.len().saturating_sub(1)))
    }

    /// `ρ_a(t)`; zero outside `[0, τ]`.
    pub fn amplitude_at(&self, t: f64) -> Vec3 {
        self.piece_at(t).map(|p| p.amplitude_vector()).unwrap_or(ZERO3)
    }

    /// `ρ_d(t)`; zero outside `[0, τ]`.
    pub fn detuning_at(&self, t: f64) -> Vec3 {
        self.piece_at(t)
            .map(|p| p.detuning_vector(t - p.start))
            .unwrap_or(ZERO3)
    }

    /// `(∫ρ_a dt, ∫ρ_d dt)` over the whole sequence.
    pub fn first_order_integrals(&self) -> (Vec3, Vec3) {
        self.pieces.iter().fold((ZERO3, ZERO3), |(a, d), p| {
            (
                add(&a, &scale(&p.amplitude_vector(), p.duration)),
                add(&d, &p.detuning_integral()),
            )
        })
    }
}

/// Control-vector trajectory of a square sequence.
pub fn control_trajectories(seq: &PulseSequence) -> Result<ControlVectorTrajectory> {
    Ok(ControlVectorTrajectory::from_steps(
        &seq.square_steps()?,
        AmplitudeNoise::Additive,
    ))
}

/// `(∫₀^τ ρ_a dt, ∫₀^τ ρ_d dt)`. Shaped sequences are discretized first and
/// summed step by step.
pub fn first_order_integrals(seq: &PulseSequence) -> (Vec3, Vec3) {
    ControlVectorTrajectory::from_steps(&seq.steps(), AmplitudeNoise::Additive).first_order_integrals()
}
