// SPDX-License-Identifier: Apache-2.0

//! Fidelity-loss estimates: the first-order spectral overlap
//! `∫ S_μ F_μ/ω² dω`, the dc limit from the leading surviving Magnus term
//! under quasi-static Gaussian noise, and their maximum.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::filterfn::FilterFunction;
use crate::linalg::rotation_angle_axis;
use crate::mcsim::propagate_constant;
use crate::pulses::{PulseSequence, SequenceId, Step};
use crate::quad::integrate;
use crate::spectra::{double_factorial, NoiseSpectrum};
use crate::toggling::AmplitudeNoise;
use crate::Quadrature;

/// Relative tolerance of the spectral-overlap quadrature.
pub const FF_REL_TOL: f64 = 1e-7;
/// Interval budget of the spectral-overlap quadrature.
pub const FF_MAX_INTERVALS: usize = 200_000;
/// Upper integration limit in units of the peak Rabi rate; the remainder
/// is estimated and reported as `tail`.
pub const FF_CUTOFF_FACTOR: f64 = 1e3;

/// Noise amplitudes (units of `Ω`) used for the dc fits.
pub const DC_FIT_AMPLITUDES: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
/// Largest relative spread of the per-point coefficients accepted by a fit.
pub const DC_FIT_TOLERANCE: f64 = 0.01;

/// Overlap of one quadrature with its spectrum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub value: f64,
    /// Quadrature error estimate.
    pub error: f64,
    /// Estimated contribution above the integration cutoff (not included in
    /// `value`).
    pub tail: f64,
    pub intervals: usize,
}

/// `∫ S F/ω² dω` over both signs of `ω`, scaled by the spectrum's variance
/// convention so that at low frequency it reduces to `|∫ρ dt|²⟨β²⟩`.
pub fn spectral_overlap(ff: &FilterFunction, quadrature: Quadrature, spec: &NoiseSpectrum) -> Result<Overlap> {
    let Some((lo, hi)) = spec.support() else {
        return Ok(Overlap::default());
    };
    let peak = ff
        .trajectory()
        .pieces
        .iter()
        .map(|p| p.rate)
        .fold(0.0, f64::max)
        .max(1.0 / ff.trajectory().duration.max(f64::MIN_POSITIVE));
    let cap = FF_CUTOFF_FACTOR * peak;
    let top = hi.min(cap);
    let lo = lo.max(f64::MIN_POSITIVE);
    let scale = 2.0 * spec.convention.variance_scale();

    let mut knots: Vec<f64> = spec.breakpoints().into_iter().filter(|&w| w > lo && w < top).collect();
    let mut decade = 10f64.powf(lo.log10().floor() + 1.0);
    while decade < top {
        knots.push(decade);
        decade *= 10.0;
    }
    // Resonances of the control sit where the integrand varies fastest.
    for p in &ff.trajectory().pieces {
        if p.rate > lo && p.rate < top {
            knots.push(p.rate);
        }
    }
    knots.push(lo);
    knots.push(top);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let knots: Vec<f64> = knots.iter().map(|w| w.ln()).collect();

    let integrand = |x: f64| {
        let w = x.exp();
        spec.psd(w) * ff.over_omega_sq(quadrature, w) * w
    };
    let r = if top > lo {
        integrate(integrand, &knots, FF_REL_TOL, 0.0, FF_MAX_INTERVALS)?
    } else {
        crate::quad::Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        }
    };

    let tail = if hi > cap {
        let n = 64;
        let mean_g = (0..n)
            .map(|i| ff.over_omega_sq(quadrature, cap * (1.0 + i as f64 / n as f64)))
            .sum::<f64>()
            / n as f64;
        scale * mean_g * spec.one_sided_integral(cap, hi)
    } else {
        0.0
    };
    Ok(Overlap {
        value: scale * r.value,
        error: scale * r.error,
        tail,
        intervals: r.intervals,
    })
}

/// First-order loss split by quadrature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FfLoss {
    pub amplitude: Overlap,
    pub detuning: Overlap,
}

impl FfLoss {
    pub fn total(&self) -> f64 {
        self.amplitude.value + self.detuning.value
    }
}

pub fn ff_loss_breakdown(ff: &FilterFunction, spec_a: &NoiseSpectrum, spec_d: &NoiseSpectrum) -> Result<FfLoss> {
    Ok(FfLoss {
        amplitude: spectral_overlap(ff, Quadrature::Amplitude, spec_a)?,
        detuning: spectral_overlap(ff, Quadrature::Detuning, spec_d)?,
    })
}

/// First-order filter-function estimate of `1 − F`.
pub fn ff_fidelity_loss(seq: &PulseSequence, spec_a: &NoiseSpectrum, spec_d: &NoiseSpectrum) -> Result<f64> {
    let ff = FilterFunction::for_sequence(seq);
    Ok(ff_loss_breakdown(&ff, spec_a, spec_d)?.total())
}

/// Which dc term a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DcTerm {
    Amplitude,
    Detuning,
    Cross,
}

impl fmt::Display for DcTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DcTerm::Amplitude => "a",
            DcTerm::Detuning => "d",
            DcTerm::Cross => "cross",
        })
    }
}

impl From<Quadrature> for DcTerm {
    fn from(q: Quadrature) -> Self {
        match q {
            Quadrature::Amplitude => DcTerm::Amplitude,
            Quadrature::Detuning => DcTerm::Detuning,
        }
    }
}

/// Leading dc coefficient: `λ² = c (β/Ω)^{2(m+1)}` for a single quadrature,
/// `λ² ⊃ c (β_a/Ω)²(β_d/Ω)²` for the cross term. `c` is dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcCoefficient {
    pub sequence: SequenceId,
    pub term: DcTerm,
    pub order: u32,
    pub c: f64,
    /// Largest relative deviation of a single fit point from `c`.
    pub residual: f64,
    /// Rabi rate `Ω` the coefficient is normalized to.
    pub omega: f64,
}

impl DcCoefficient {
    /// Power of `β` multiplying `c` (per quadrature for the cross term).
    pub fn exponent(&self) -> i32 {
        match self.term {
            DcTerm::Cross => 4,
            _ => 2 * (self.order as i32 + 1),
        }
    }

    /// `c` in units of `(rad/s)^{−exponent}`.
    pub fn physical(&self) -> f64 {
        self.c / self.omega.powi(self.exponent())
    }
}

fn noise_pair(quadrature: Quadrature, beta: f64) -> (f64, f64) {
    match quadrature {
        Quadrature::Amplitude => (beta, 0.0),
        Quadrature::Detuning => (0.0, beta),
    }
}

/// `λ²` of `U₀†U(β_a, β_d)` for constant noise.
fn lambda_sq(steps: &[Step], u0: &crate::linalg::Mat2, beta_a: f64, beta_d: f64) -> f64 {
    let u = propagate_constant(steps, beta_a, beta_d, AmplitudeNoise::Additive);
    let (lambda, _) = rotation_angle_axis(&(u0.dagger() * u));
    lambda * lambda
}

/// `½[λ²(β) + λ²(−β)]`, which cancels odd-order mixing between Magnus terms.
fn lambda_sq_even(steps: &[Step], u0: &crate::linalg::Mat2, quadrature: Quadrature, beta: f64) -> f64 {
    let (a, d) = noise_pair(quadrature, beta);
    0.5 * (lambda_sq(steps, u0, a, d) + lambda_sq(steps, u0, -a, -d))
}

fn fit_fixed_exponent(samples: &[(f64, f64)], exponent: i32) -> Result<(f64, f64)> {
    let ratios: Vec<f64> = samples.iter().map(|&(f, l2)| l2 / f.powi(exponent)).collect();
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::DegenerateFit(format!("non-positive λ² in {samples:?}")));
    }
    let c = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let residual = ratios.iter().map(|r| (r / c - 1.0).abs()).fold(0.0, f64::max);
    Ok((c, residual))
}

/// Suppression order `m` of one quadrature, read off the dc scaling of `λ²`.
pub fn suppression_order(seq: &PulseSequence, quadrature: Quadrature) -> Result<u32> {
    let steps = seq.steps();
    let u0 = seq.ideal_propagator();
    let f = DC_FIT_AMPLITUDES;
    let l1 = lambda_sq_even(&steps, &u0, quadrature, f[0] * seq.omega);
    let l2 = lambda_sq_even(&steps, &u0, quadrature, f[1] * seq.omega);
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::DegenerateFit(format!(
            "{} shows no dc error in quadrature {quadrature}",
            seq.name
        )));
    }
    let slope = (l1 / l2).ln() / (f[0] / f[1]).ln();
    let m = (slope / 2.0 - 1.0).round();
    if m < 0.0 || (slope - 2.0 * (m + 1.0)).abs() > 0.2 {
        return Err(Error::DegenerateFit(format!("non-integer dc slope {slope:.3}")));
    }
    Ok(m as u32)
}

/// Fits `c` at fixed order `m`. A residual above [`DC_FIT_TOLERANCE`]
/// means the assumed order is wrong.
pub fn dc_coefficient(seq: &PulseSequence, quadrature: Quadrature, m: u32) -> Result<DcCoefficient> {
    let steps = seq.steps();
    let u0 = seq.ideal_propagator();
    let samples: Vec<(f64, f64)> = DC_FIT_AMPLITUDES
        .iter()
        .map(|&f| (f, lambda_sq_even(&steps, &u0, quadrature, f * seq.omega)))
        .collect();
    let exponent = 2 * (m as i32 + 1);
    let (c, residual) = fit_fixed_exponent(&samples, exponent)?;
    if residual > DC_FIT_TOLERANCE {
        return Err(Error::WrongOrder { order: m, residual });
    }
    Ok(DcCoefficient {
        sequence: seq.name,
        term: quadrature.into(),
        order: m,
        c,
        residual,
        omega: seq.omega,
    })
}

/// Coefficient of `β_a²β_d²` in `λ²`, from the even-even part of `λ²`
/// over `(±β_a, ±β_d)` with the single-quadrature parts removed. Only
/// meaningful when both quadratures are suppressed to at least first
/// order.
pub fn cross_coefficient(seq: &PulseSequence) -> Result<DcCoefficient> {
    let steps = seq.steps();
    let u0 = seq.ideal_propagator();
    let samples: Vec<(f64, f64)> = DC_FIT_AMPLITUDES
        .iter()
        .map(|&f| {
            let b = f * seq.omega;
            let mixed = 0.25
                * (lambda_sq(&steps, &u0, b, b)
                    + lambda_sq(&steps, &u0, b, -b)
                    + lambda_sq(&steps, &u0, -b, b)
                    + lambda_sq(&steps, &u0, -b, -b));
            let pure_a = lambda_sq_even(&steps, &u0, Quadrature::Amplitude, b);
            let pure_d = lambda_sq_even(&steps, &u0, Quadrature::Detuning, b);
            (f, mixed - pure_a - pure_d)
        })
        .collect();
    let (c, residual) = fit_fixed_exponent(&samples, 4)?;
    if residual > DC_FIT_TOLERANCE {
        return Err(Error::WrongOrder { order: 1, residual });
    }
    Ok(DcCoefficient {
        sequence: seq.name,
        term: DcTerm::Cross,
        order: 1,
        c,
        residual,
        omega: seq.omega,
    })
}

/// Dc coefficients of a sequence at its detected suppression orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcModel {
    pub sequence: SequenceId,
    pub amplitude: DcCoefficient,
    pub detuning: DcCoefficient,
    pub cross: Option<DcCoefficient>,
}

impl DcModel {
    pub fn fit(seq: &PulseSequence) -> Result<Self> {
        let amplitude = dc_coefficient(
            seq,
            Quadrature::Amplitude,
            suppression_order(seq, Quadrature::Amplitude)?,
        )?;
        let detuning = dc_coefficient(seq, Quadrature::Detuning, suppression_order(seq, Quadrature::Detuning)?)?;
        let cross = if amplitude.order >= 1 && detuning.order >= 1 {
            Some(cross_coefficient(seq)?)
        } else {
            None
        };
        Ok(DcModel {
            sequence: seq.name,
            amplitude,
            detuning,
            cross,
        })
    }

    pub fn coefficient(&self, quadrature: Quadrature) -> &DcCoefficient {
        match quadrature {
            Quadrature::Amplitude => &self.amplitude,
            Quadrature::Detuning => &self.detuning,
        }
    }

    /// `(a, d, cross)` contributions to the dc loss.
    pub fn loss_terms(&self, spec_a: &NoiseSpectrum, spec_d: &NoiseSpectrum) -> (f64, f64, f64) {
        let single = |c: &DcCoefficient, spec: &NoiseSpectrum| {
            c.physical() * double_factorial(2 * c.order + 1) * spec.total_power().powi(c.order as i32 + 1)
        };
        let cross = self
            .cross
            .map(|c| c.physical() * spec_a.total_power() * spec_d.total_power())
            .unwrap_or(0.0);
        (single(&self.amplitude, spec_a), single(&self.detuning, spec_d), cross)
    }

    pub fn loss(&self, spec_a: &NoiseSpectrum, spec_d: &NoiseSpectrum) -> f64 {
        let (a, d, x) = self.loss_terms(spec_a, spec_d);
        a + d + x
    }
}

/// Dc-limit estimate of `1 − F`.
pub fn dc_fidelity_loss(seq: &PulseSequence, spec_a: &NoiseSpectrum, spec_d: &NoiseSpectrum) -> Result<f64> {
    Ok(DcModel::fit(seq)?.loss(spec_a, spec_d))
}

/// Per-term breakdown of an estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub a: f64,
    pub d: f64,
    pub cross: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub ff_loss: f64,
    pub dc_loss: f64,
    pub combined: f64,
    pub ff: Breakdown,
    pub dc: Breakdown,
}

/// Filter function and dc model of one sequence, reusable across spectra.
#[derive(Debug, Clone)]
pub struct Estimator {
    pub ff: FilterFunction,
    pub dc: DcModel,
}

impl Estimator {
    pub fn new(seq: &PulseSequence) -> Result<Self> {
        Ok(Estimator {
            ff: FilterFunction::for_sequence(seq),
            dc: DcModel::fit(seq)?,
        })
    }

    pub fn estimate(&self, spec_a: &NoiseSpectrum, spec_d: &NoiseSpectrum) -> Result<FidelityEstimate> {
        let ff = ff_loss_breakdown(&self.ff, spec_a, spec_d)?;
        let (a, d, cross) = self.dc.loss_terms(spec_a, spec_d);
        let ff_loss = ff.total();
        let dc_loss = a + d + cross;
        Ok(FidelityEstimate {
            ff_loss,
            dc_loss,
            combined: ff_loss.max(dc_loss),
            ff: Breakdown {
                a: ff.amplitude.value,
                d: ff.detuning.value,
                cross: 0.0,
            },
            dc: Breakdown { a, d, cross },
        })
    }
}

/// `max(ff_loss, dc_loss)` with both parts retained.
pub fn combined_estimate(
    seq: &PulseSequence,
    spec_a: &NoiseSpectrum,
    spec_d: &NoiseSpectrum,
) -> Result<FidelityEstimate> {
    Estimator::new(seq)?.estimate(spec_a, spec_d)
}
