// SPDX-License-Identifier: Apache-2.0

//! Generalized filter functions `F_μ(ω) = ρ*_μ(ω)·ρ_μ(ω)` with
//! `ρ_μ(ω) = −iω ∫₀^τ ρ_μ(t) e^{iωt} dt`, low-frequency scaling fits and
//! crossover frequencies against the primitive pulse.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add, dot, scale, Vec3, ZERO3};
use crate::pulses::{build_sequence, PiecewiseConstantControl, PulseSequence, SequenceId};
use crate::toggling::{sinc, AmplitudeNoise, ControlVectorTrajectory};
use crate::Quadrature;

type CVec3 = [Complex64; 3];

const CZERO3: CVec3 = [Complex64::new(0.0, 0.0); 3];

fn cadd_scaled(acc: &mut CVec3, v: &Vec3, c: Complex64) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += c * x;
    }
}

fn cnorm_sqr(v: &CVec3) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// `∫₀^T e^{iνs} ds = T sinc(νT/2) e^{iνT/2}`, finite through `ν = 0`.
fn phase_integral(nu: f64, duration: f64) -> Complex64 {
    let half = 0.5 * nu * duration;
    Complex64::from_polar(duration * sinc(half), half)
}

/// Filter functions of a piecewise-constant control.
#[derive(Debug, Clone)]
pub struct FilterFunction {
    trajectory: ControlVectorTrajectory,
    sequence: SequenceId,
}

impl FilterFunction {
    /// Closed-form filter functions of a square-pulse sequence.
    pub fn new(seq: &PulseSequence) -> Result<Self> {
        Ok(FilterFunction {
            trajectory: ControlVectorTrajectory::from_steps(&seq.square_steps()?, AmplitudeNoise::Additive),
            sequence: seq.name,
        })
    }

    /// Like [`FilterFunction::new`], but shaped sequences are discretized
    /// with the default resolution instead of rejected.
    pub fn for_sequence(seq: &PulseSequence) -> Self {
        FilterFunction {
            trajectory: ControlVectorTrajectory::from_steps(&seq.steps(), AmplitudeNoise::Additive),
            sequence: seq.name,
        }
    }

    pub fn from_control(control: &PiecewiseConstantControl, amplitude_noise: AmplitudeNoise) -> Self {
        FilterFunction {
            trajectory: ControlVectorTrajectory::from_control(control, amplitude_noise),
            sequence: control.source,
        }
    }

    pub fn sequence(&self) -> SequenceId {
        self.sequence
    }

    pub fn trajectory(&self) -> &ControlVectorTrajectory {
        &self.trajectory
    }

    /// `(∫ρ_a e^{iωt} dt, ∫ρ_d e^{iωt} dt)`.
    pub fn transfer(&self, omega: f64) -> (CVec3, CVec3) {
        let mut amp = CZERO3;
        let mut det = CZERO3;
        for p in &self.trajectory.pieces {
            let shift = Complex64::from_polar(0.5, omega * p.start);
            let e0 = phase_integral(omega, p.duration);
            cadd_scaled(&mut amp, &p.amp_dir, shift * e0 * p.amp_weight);
            let plus = phase_integral(omega + p.rate, p.duration);
            let minus = phase_integral(omega - p.rate, p.duration);
            let int_cos = (plus + minus) * 0.5;
            let int_sin = (plus - minus) * Complex64::new(0.0, -0.5);
            cadd_scaled(&mut det, &p.det_z, shift * int_cos);
            cadd_scaled(&mut det, &p.det_perp, shift * int_sin);
        }
        (amp, det)
    }

    /// `F_μ(ω)/ω²`, finite as `ω → 0`.
    pub fn over_omega_sq(&self, quadrature: Quadrature, omega: f64) -> f64 {
        let (amp, det) = self.transfer(omega);
        match quadrature {
            Quadrature::Amplitude => cnorm_sqr(&amp),
            Quadrature::Detuning => cnorm_sqr(&det),
        }
    }

    pub fn eval(&self, quadrature: Quadrature, omega: f64) -> f64 {
        omega * omega * self.over_omega_sq(quadrature, omega)
    }

    pub fn amplitude(&self, omega: f64) -> f64 {
        self.eval(Quadrature::Amplitude, omega)
    }

    pub fn detuning(&self, omega: f64) -> f64 {
        self.eval(Quadrature::Detuning, omega)
    }
}

/// `F_a(ω) = ¼{|Σ_l A_l ñ_l|² + |Σ_l B_l ñ_l|²}` with
/// `A_l = cos ωt_l − cos ωt_{l−1}`, `B_l = sin ωt_l − sin ωt_{l−1}`.
pub fn ff_amplitude(seq: &PulseSequence, omega: f64) -> Result<f64> {
    let traj = crate::toggling::control_trajectories(seq)?;
    let (mut a, mut b) = (ZERO3, ZERO3);
    for p in &traj.pieces {
        let (s1, c1) = (omega * p.end()).sin_cos();
        let (s0, c0) = (omega * p.start).sin_cos();
        a = add(&a, &scale(&p.amp_dir, c1 - c0));
        b = add(&b, &scale(&p.amp_dir, s1 - s0));
    }
    Ok(0.25 * (dot(&a, &a) + dot(&b, &b)))
}

pub fn ff_detuning(seq: &PulseSequence, omega: f64) -> Result<f64> {
    Ok(FilterFunction::new(seq)?.detuning(omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    AdditiveAmp,
    MultiplicativeAmp,
    Detuning,
}

/// Filter function of a discretized control under the given noise model.
pub fn ff_discretized(control: &PiecewiseConstantControl, omega: f64, noise_model: NoiseModel) -> f64 {
    match noise_model {
        NoiseModel::AdditiveAmp => FilterFunction::from_control(control, AmplitudeNoise::Additive).amplitude(omega),
        NoiseModel::MultiplicativeAmp => {
            FilterFunction::from_control(control, AmplitudeNoise::Multiplicative).amplitude(omega)
        }
        NoiseModel::Detuning => FilterFunction::from_control(control, AmplitudeNoise::Additive).detuning(omega),
    }
}

/// `n` points per decade on `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && per_decade > 0);
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    (0..=n).map(|i| lo * (hi / lo).powf(i as f64 / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterFunctionCurve {
    /// rad/s.
    pub omegas: Vec<f64>,
    pub f_a: Vec<f64>,
    pub f_d: Vec<f64>,
    pub sequence: SequenceId,
}

impl FilterFunctionCurve {
    pub fn compute(ff: &FilterFunction, omegas: &[f64]) -> Self {
        let (f_a, f_d) = omegas.par_iter().map(|&w| (ff.amplitude(w), ff.detuning(w))).unzip();
        FilterFunctionCurve {
            omegas: omegas.to_vec(),
            f_a,
            f_d,
            sequence: ff.sequence(),
        }
    }

    pub fn values(&self, quadrature: Quadrature) -> &[f64] {
        match quadrature {
            Quadrature::Amplitude => &self.f_a,
            Quadrature::Detuning => &self.f_d,
        }
    }
}

/// Least-squares slope of `ln F` against `ln ω` over `band`.
pub fn lowfreq_slope(curve: &FilterFunctionCurve, quadrature: Quadrature, band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = band;
    let first = curve.omegas.first().copied().unwrap_or(f64::NAN);
    let last = curve.omegas.last().copied().unwrap_or(f64::NAN);
    let slack = 1e-9;
    if !(lo < hi) || lo < first * (1.0 - slack) || hi > last * (1.0 + slack) {
        return Err(Error::InvalidParameter(format!(
            "fit band [{lo:e}, {hi:e}] outside curve grid [{first:e}, {last:e}]"
        )));
    }
    let values = curve.values(quadrature);
    let mut pts = Vec::new();
    for (&w, &f) in curve.omegas.iter().zip(values) {
        if w >= lo * (1.0 - slack) && w <= hi * (1.0 + slack) {
            if !(f > 0.0) {
                return Err(Error::DegenerateFit(format!("F = {f} at ω = {w:e}")));
            }
            pts.push((w.ln(), f.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::DegenerateFit("fewer than two points in band".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Grid resolution of the crossover bracketing scan.
const CROSSOVER_SCAN_PER_DECADE: usize = 400;

/// Smallest `ω* ∈ (0, Ω]` where the sequence's filter function reaches the
/// primitive pulse's (same θ and Ω). `Ok(None)` when no crossing occurs
/// below `Ω`; [`Error::NoSuppression`] when the sequence is not below the
/// primitive at the bottom of the scan.
pub fn crossover(seq: &PulseSequence, quadrature: Quadrature) -> Result<Option<f64>> {
    let ff = FilterFunction::new(seq)?;
    let prim = FilterFunction::new(&build_sequence(SequenceId::Primitive, seq.target_theta, seq.omega)?)?;
    let diff = |w: f64| ff.eval(quadrature, w) - prim.eval(quadrature, w);
    let grid = log_grid(1e-4 * seq.omega, seq.omega, CROSSOVER_SCAN_PER_DECADE);
    if diff(grid[0]) >= 0.0 {
        return Err(Error::NoSuppression);
    }
    for w in grid.windows(2) {
        if diff(w[1]) >= 0.0 {
            let (mut lo, mut hi) = (w[0], w[1]);
            while hi - lo > 1e-14 * hi {
                let mid = 0.5 * (lo + hi);
                if diff(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
    }
    Ok(None)
}
