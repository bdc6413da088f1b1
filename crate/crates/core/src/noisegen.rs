// SPDX-License-Identifier: Apache-2.0

//! Stationary zero-mean Gaussian noise with a prescribed spectrum.
//!
//! A realization is a harmonic sum `β(t) = Σ_k √v_k (a_k cos ω_k t + b_k sin ω_k t)`
//! with `a_k, b_k ~ N(0, 1)`. The positive band is cut into log-spaced bins;
//! `v_k` is the variance the spectrum carries in bin `k` and `ω_k` is drawn
//! inside the bin with density `∝ S`, which makes the ensemble
//! autocorrelation equal to that of `S` exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::spectra::{Convention, NoiseSpectrum, Piece};

/// Synthesis bins per decade of frequency.
pub const BINS_PER_DECADE: f64 = 24.0;
/// Integration steps per Rabi cycle at the default time step.
pub const DEFAULT_STEPS_PER_CYCLE: f64 = 20.0;

/// `2π/(20Ω)`.
pub fn default_dt(omega: f64) -> f64 {
    2.0 * PI / (DEFAULT_STEPS_PER_CYCLE * omega)
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of realization `index` in stream `stream` of an ensemble.
pub fn realization_seed(base: u64, index: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ index) ^ stream.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

#[derive(Debug, Clone, Copy)]
struct Bin {
    piece: Piece,
    lo: f64,
    hi: f64,
    variance: f64,
}

/// Bin layout of a spectrum up to a band limit.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    bins: Vec<Bin>,
    /// Variance above the band limit that is left out.
    pub clipped_power: f64,
    pub band_limit: f64,
}

impl Synthesizer {
    pub fn new(spec: &NoiseSpectrum, band_limit: f64) -> Self {
        let scale = 2.0 * spec.convention.variance_scale();
        let mut bins = Vec::new();
        for piece in spec.pieces() {
            let (lo, hi) = piece.bounds();
            let hi = hi.min(band_limit);
            if hi <= lo {
                continue;
            }
            let mut edges = Vec::new();
            let log_lo = if lo > 0.0 {
                edges.push(lo);
                lo
            } else {
                edges.push(0.0);
                hi * 1e-6
            };
            let n = ((BINS_PER_DECADE * (hi / log_lo).log10()).ceil() as usize).max(1);
            for i in 0..=n {
                let e = log_lo * (hi / log_lo).powf(i as f64 / n as f64);
                if e > *edges.last().unwrap() {
                    edges.push(e);
                }
            }
            *edges.last_mut().unwrap() = hi;
            for w in edges.windows(2) {
                let variance = scale * piece.integral(w[0], w[1]);
                if variance > 0.0 {
                    bins.push(Bin {
                        piece,
                        lo: w[0],
                        hi: w[1],
                        variance,
                    });
                }
            }
        }
        let clipped_power = if band_limit.is_finite() {
            spec.band_power(band_limit, f64::INFINITY)
        } else {
            0.0
        };
        Synthesizer {
            bins,
            clipped_power,
            band_limit,
        }
    }

    pub fn components(&self) -> usize {
        self.bins.len()
    }

    /// Retained variance.
    pub fn variance(&self) -> f64 {
        self.bins.iter().map(|b| b.variance).sum()
    }

    pub fn realize(&self, seed: u64) -> SpectralRealization {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.bins.len();
        let mut freqs = Vec::with_capacity(n);
        let mut cos_amp = Vec::with_capacity(n);
        let mut sin_amp = Vec::with_capacity(n);
        for b in &self.bins {
            let u: f64 = rng.random();
            let a: f64 = rng.sample(StandardNormal);
            let s: f64 = rng.sample(StandardNormal);
            let sd = b.variance.sqrt();
            freqs.push(b.piece.inverse_cdf(b.lo, b.hi, u));
            cos_amp.push(sd * a);
            sin_amp.push(sd * s);
        }
        SpectralRealization {
            freqs,
            cos_amp,
            sin_amp,
        }
    }
}

/// One noise realization as a continuous function of time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRealization {
    pub freqs: Vec<f64>,
    pub cos_amp: Vec<f64>,
    pub sin_amp: Vec<f64>,
}

impl SpectralRealization {
    pub fn value(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.freqs.len() {
            let (s, c) = (self.freqs[k] * t).sin_cos();
            acc += self.cos_amp[k] * c + self.sin_amp[k] * s;
        }
        acc
    }

    /// `β(t0 + j dt)` for `j < n`, by a per-component phasor recurrence
    /// re-anchored every 1024 samples.
    pub fn sample_uniform(&self, t0: f64, dt: f64, n: usize) -> Vec<f64> {
        const ANCHOR: usize = 1024;
        let mut out = vec![0.0; n];
        for k in 0..self.freqs.len() {
            let w = self.freqs[k];
            let amp = Complex64::new(self.cos_amp[k], -self.sin_amp[k]);
            let step = Complex64::from_polar(1.0, w * dt);
            let mut z = Complex64::new(0.0, 0.0);
            for (j, o) in out.iter_mut().enumerate() {
                if j % ANCHOR == 0 {
                    z = Complex64::from_polar(1.0, w * (t0 + j as f64 * dt));
                } else {
                    z *= step;
                }
                // Re[(c − i s) e^{iωt}] = c cos ωt + s sin ωt
                *o += (amp * z).re;
            }
        }
        out
    }
}

/// Noise sampled on a uniform grid. Sample `j` is the value at the centre
/// of cell `[j dt, (j+1) dt)` and is held over that cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseTrajectory {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub seed: u64,
    pub spectrum: NoiseSpectrum,
    /// Variance above the Nyquist frequency that was not synthesized.
    pub clipped_power: f64,
}

impl NoiseTrajectory {
    pub fn zeros(dt: f64, n: usize) -> Self {
        NoiseTrajectory {
            dt,
            samples: vec![0.0; n],
            seed: 0,
            spectrum: NoiseSpectrum::zero(),
            clipped_power: 0.0,
        }
    }

    pub fn constant(dt: f64, n: usize, value: f64) -> Self {
        NoiseTrajectory {
            samples: vec![value; n],
            ..Self::zeros(dt, n)
        }
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// `t, beta` rows with a header; `t` at the cell centres.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "beta"])?;
        for (j, b) in self.samples.iter().enumerate() {
            out.serialize(((j as f64 + 0.5) * self.dt, b))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Noise on `ceil(duration/dt)` cells of width `dt`, band-limited at the
/// grid Nyquist frequency `π/dt`.
pub fn synthesize(spec: &NoiseSpectrum, dt: f64, duration: f64, seed: u64) -> Result<NoiseTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) || !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt = {dt:e}, duration = {duration:e}")));
    }
    let n = ((duration / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let synth = Synthesizer::new(spec, PI / dt);
    if synth.clipped_power > 0.0 {
        log::warn!(
            "spectrum extends past Nyquist {:.3e} rad/s; clipped variance {:.3e} of {:.3e}",
            PI / dt,
            synth.clipped_power,
            spec.total_power()
        );
    }
    let samples = synth.realize(seed).sample_uniform(0.5 * dt, dt, n);
    Ok(NoiseTrajectory {
        dt,
        samples,
        seed,
        spectrum: spec.clone(),
        clipped_power: synth.clipped_power,
    })
}

/// Two-sided periodogram on the non-negative FFT frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    /// `2πj/(n dt)`, `j = 0..=n/2`.
    pub omegas: Vec<f64>,
    /// PSD estimate at `±omegas[j]` under `convention`.
    pub values: Vec<f64>,
    pub d_omega: f64,
    pub n: usize,
    pub convention: Convention,
}

impl Periodogram {
    /// Variance in the `±omegas[j]` bins.
    pub fn bin_power(&self, j: usize) -> f64 {
        let mirrored = j != 0 && !(self.n.is_multiple_of(2) && j == self.n / 2);
        let both = if mirrored { 2.0 } else { 1.0 };
        both * self.convention.variance_scale() * self.values[j] * self.d_omega
    }

    /// Sum of all bin powers; equals the mean square of the input.
    pub fn integral(&self) -> f64 {
        (0..self.values.len()).map(|j| self.bin_power(j)).sum()
    }
}

/// Unwindowed periodogram `P_j = dt |X_j|² / (2π c n)` with `c` the
/// convention's variance scale.
pub fn periodogram(traj: &NoiseTrajectory) -> Result<Periodogram> {
    let n = traj.samples.len();
    if n < 256 {
        return Err(Error::InvalidParameter(format!(
            "periodogram needs ≥ 256 samples, got {n}"
        )));
    }
    let mut buf: Vec<Complex64> = traj.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let convention = traj.spectrum.convention;
    let norm = traj.dt / (2.0 * PI * convention.variance_scale() * n as f64);
    let d_omega = 2.0 * PI / (n as f64 * traj.dt);
    let half = n / 2;
    Ok(Periodogram {
        omegas: (0..=half).map(|j| j as f64 * d_omega).collect(),
        values: buf[..=half].iter().map(|x| norm * x.norm_sqr()).collect(),
        d_omega,
        n,
        convention,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band(lo: f64, hi: f64, s: f64) -> NoiseSpectrum {
        NoiseSpectrum::tabulated(vec![[lo, s], [hi, s]]).unwrap()
    }

    #[test]
    fn zero_spectrum_gives_zero_trajectory() {
        let t = synthesize(&NoiseSpectrum::zero(), 1e-3, 1.0, 7).unwrap();
        assert_eq!(t.samples.len(), 1000);
        assert!(t.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = NoiseSpectrum::benchmark(1e3).unwrap();
        let a = synthesize(&spec, 1e-4, 0.05, 11).unwrap();
        let b = synthesize(&spec, 1e-4, 0.05, 11).unwrap();
        let c = synthesize(&spec, 1e-4, 0.05, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..1000 {
            for s in 0..2 {
                assert!(seen.insert(realization_seed(5, i, s)));
            }
        }
    }

    #[test]
    fn recurrence_matches_direct_evaluation() {
        let spec = NoiseSpectrum::benchmark(1e4).unwrap();
        let r = Synthesizer::new(&spec, 1e6).realize(3);
        let xs = r.sample_uniform(0.25e-6, 1e-6, 3000);
        for j in [0, 1, 1023, 1024, 2999] {
            let d = r.value(0.25e-6 + j as f64 * 1e-6);
            assert!((xs[j] - d).abs() <= 1e-9 * d.abs().max(1.0), "{j}");
        }
    }

    #[test]
    fn synthesizer_keeps_band_power() {
        let spec = NoiseSpectrum::benchmark(1e3).unwrap();
        let s = Synthesizer::new(&spec, 1e7);
        let want = spec.band_power(0.0, 1e7);
        assert!((s.variance() - want).abs() <= 1e-12 * want);
        assert!((s.variance() + s.clipped_power - spec.total_power()).abs() <= 1e-12 * want);
        assert!(s.components() > 100);
    }

    #[test]
    fn white_band_variance_matches_total_power() {
        let spec = band(10.0, 1e3, 2.0);
        let sigma2 = spec.total_power();
        let synth = Synthesizer::new(&spec, f64::INFINITY);
        let n = 200;
        let xs: Vec<f64> = (0..n)
            .map(|i| synth.realize(realization_seed(1, i, 0)).value(0.3))
            .collect();
        let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // se of the mean square of Gaussian samples is σ²√(2/n)
        let se = sigma2 * (2.0 / n as f64).sqrt();
        assert!((m2 - sigma2).abs() <= 3.0 * se, "{m2} {sigma2}");
    }

    #[test]
    fn parseval() {
        let spec = NoiseSpectrum::benchmark(1e3).unwrap();
        for conv in [Convention::PaperMoment, Convention::WienerKhinchin] {
            let t = synthesize(&spec.clone().with_convention(conv), 1e-4, 0.1, 4).unwrap();
            let p = periodogram(&t).unwrap();
            let ms = t.samples.iter().map(|x| x * x).sum::<f64>() / t.samples.len() as f64;
            assert!((p.integral() - ms).abs() <= 1e-10 * ms);
        }
        let odd = NoiseTrajectory {
            samples: (0..301).map(|i| (i as f64 * 0.37).sin() + 0.1).collect(),
            ..NoiseTrajectory::zeros(1.0, 0)
        };
        let p = periodogram(&odd).unwrap();
        let ms = odd.samples.iter().map(|x| x * x).sum::<f64>() / 301.0;
        assert!((p.integral() - ms).abs() <= 1e-10 * ms);
    }

    #[test]
    fn sinusoid_lands_in_one_bin() {
        let (n, dt, a) = (1024, 1e-3, 1.7);
        let j0 = 37;
        let w = 2.0 * PI * j0 as f64 / (n as f64 * dt);
        let t = NoiseTrajectory {
            samples: (0..n).map(|j| a * (w * j as f64 * dt).cos()).collect(),
            ..NoiseTrajectory::zeros(dt, 0)
        };
        let p = periodogram(&t).unwrap();
        assert!((p.bin_power(j0) - a * a / 2.0).abs() <= 1e-12);
        assert!((p.integral() - p.bin_power(j0)).abs() <= 1e-10);
    }

    #[test]
    fn short_input_rejected() {
        assert!(periodogram(&NoiseTrajectory::zeros(1.0, 100)).is_err());
    }

    #[test]
    fn csv_dump() {
        let t = NoiseTrajectory::constant(0.5, 2, 3.0);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,beta\n0.25,3.0\n0.75,3.0\n");
    }
}
