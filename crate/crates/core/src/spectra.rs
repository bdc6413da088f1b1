// SPDX-License-Identifier: Apache-2.0

//! Two-sided noise power spectral densities and Gaussian moments.
//!
//! The main model is `1/ω` noise with a `1/ω²` roll-off above a knee `ω_b`:
//! `S(ω) = A/ω` on `(ω_min, ω_b)`, `ω_b A/ω²` on `(ω_b, ω_max)`, zero
//! elsewhere, mirrored to negative frequencies.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Rad²/s² of total power in the benchmark spectrum.
pub const BENCHMARK_POWER: f64 = 2.07e9;
pub const BENCHMARK_OMEGA_MIN: f64 = 2.0 * PI;
pub const BENCHMARK_OMEGA_MAX: f64 = 4.5e9;
/// Rabi rate the benchmark spectrum is paired with.
pub const BENCHMARK_RABI: f64 = 1.5e6;

/// How `S(ω)` relates to the variance of the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `⟨β²⟩ = ∫S dω`.
    PaperMoment,
    /// `⟨β²⟩ = (1/2π)∫S dω`, the Fourier pair of the autocorrelation.
    #[default]
    WienerKhinchin,
}

impl Convention {
    /// Factor multiplying `∫S dω` to give a variance.
    pub fn variance_scale(&self) -> f64 {
        match self {
            Convention::PaperMoment => 1.0,
            Convention::WienerKhinchin => 1.0 / (2.0 * PI),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Convention::PaperMoment => "paper_moment",
            Convention::WienerKhinchin => "wiener_khinchin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumShape {
    RollOff {
        #[serde(rename = "A")]
        amplitude: f64,
        omega_min: f64,
        omega_b: f64,
        omega_max: f64,
    },
    /// Monotone `(ω, S)` table, linearly interpolated, zero outside.
    Tabulated { table: Vec<[f64; 2]> },
}

/// One analytic piece of the positive-frequency PSD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// `c/ω^p` on `[lo, hi]`, `p ∈ {1, 2}`.
    Power { lo: f64, hi: f64, c: f64, p: i32 },
    /// Linear from `s_lo` at `lo` to `s_hi` at `hi`.
    Linear { lo: f64, hi: f64, s_lo: f64, s_hi: f64 },
}

impl Piece {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Piece::Power { lo, hi, .. } | Piece::Linear { lo, hi, .. } => (lo, hi),
        }
    }

    pub fn value(&self, w: f64) -> f64 {
        match *self {
            Piece::Power { c, p, .. } => c / w.powi(p),
            Piece::Linear { lo, hi, s_lo, s_hi } => s_lo + (s_hi - s_lo) * (w - lo) / (hi - lo),
        }
    }

    /// `∫_a^b S dω` with `[a, b]` clipped to the piece.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return 0.0;
        }
        match *self {
            Piece::Power { c, p: 1, .. } => c * (b / a).ln(),
            Piece::Power { c, .. } => c * (1.0 / a - 1.0 / b),
            Piece::Linear { .. } => 0.5 * (self.value(a) + self.value(b)) * (b - a),
        }
    }

    /// Frequency in `[a, b]` (clipped to the piece) drawn with density
    /// `∝ S` from the uniform variate `u ∈ [0, 1)`.
    pub fn inverse_cdf(&self, a: f64, b: f64, u: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let (a, b) = (a.max(lo), b.min(hi));
        match *self {
            Piece::Power { p: 1, .. } => a * (b / a).powf(u),
            Piece::Power { .. } => 1.0 / (1.0 / a + u * (1.0 / b - 1.0 / a)),
            Piece::Linear { .. } => {
                let (sa, sb) = (self.value(a), self.value(b));
                let len = b - a;
                let target = u * 0.5 * (sa + sb) * len;
                if target <= 0.0 {
                    return a;
                }
                let k = (sb - sa) / len;
                let x = 2.0 * target / (sa + (sa * sa + 2.0 * k * target).max(0.0).sqrt());
                if x.is_finite() {
                    a + x.clamp(0.0, len)
                } else {
                    a + u * len
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpectrum {
    #[serde(flatten)]
    pub shape: SpectrumShape,
    #[serde(default)]
    pub convention: Convention,
}

impl NoiseSpectrum {
    pub fn roll_off(amplitude: f64, omega_min: f64, omega_b: f64, omega_max: f64) -> Result<Self> {
        let s = NoiseSpectrum {
            shape: SpectrumShape::RollOff {
                amplitude,
                omega_min,
                omega_b,
                omega_max,
            },
            convention: Convention::default(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Roll-off spectrum whose `∫₀^∞ S dω` equals `power` for any knee:
    /// `A = power/[ln(ω_b/ω_min) + 1 − ω_b/ω_max]`.
    pub fn constant_power(power: f64, omega_min: f64, omega_b: f64, omega_max: f64) -> Result<Self> {
        let denom = (omega_b / omega_min).ln() + 1.0 - omega_b / omega_max;
        if !(denom > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "knee {omega_b:e} outside [{omega_min:e}, {omega_max:e}]"
            )));
        }
        Self::roll_off(power / denom, omega_min, omega_b, omega_max)
    }

    /// The benchmark spectrum with knee `omega_b`.
    pub fn benchmark(omega_b: f64) -> Result<Self> {
        Self::constant_power(BENCHMARK_POWER, BENCHMARK_OMEGA_MIN, omega_b, BENCHMARK_OMEGA_MAX)
    }

    pub fn tabulated(table: Vec<[f64; 2]>) -> Result<Self> {
        let s = NoiseSpectrum {
            shape: SpectrumShape::Tabulated { table },
            convention: Convention::default(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Identically zero spectrum.
    pub fn zero() -> Self {
        NoiseSpectrum {
            shape: SpectrumShape::RollOff {
                amplitude: 0.0,
                omega_min: 1.0,
                omega_b: 1.0,
                omega_max: 1.0,
            },
            convention: Convention::default(),
        }
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: NoiseSpectrum = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            &SpectrumShape::RollOff {
                amplitude,
                omega_min,
                omega_b,
                omega_max,
            } => {
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(Error::InvalidParameter(format!("A = {amplitude}")));
                }
                if !(omega_min > 0.0 && omega_min <= omega_b && omega_b <= omega_max && omega_max.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "need 0 < omega_min ≤ omega_b ≤ omega_max, got {omega_min:e}, {omega_b:e}, {omega_max:e}"
                    )));
                }
            }
            SpectrumShape::Tabulated { table } => {
                if table.len() < 2 {
                    return Err(Error::InvalidParameter("table needs at least two rows".into()));
                }
                for w in table.windows(2) {
                    if !(w[1][0] > w[0][0]) {
                        return Err(Error::InvalidParameter("table ω must increase strictly".into()));
                    }
                }
                if table[0][0] < 0.0 || table.iter().any(|r| !(r[1] >= 0.0 && r[1].is_finite())) {
                    return Err(Error::InvalidParameter("table needs ω ≥ 0 and finite S ≥ 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Positive-frequency pieces, ordered, excluding empty ones.
    pub fn pieces(&self) -> Vec<Piece> {
        match &self.shape {
            &SpectrumShape::RollOff {
                amplitude,
                omega_min,
                omega_b,
                omega_max,
            } => {
                if amplitude == 0.0 {
                    return Vec::new();
                }
                let mut out = Vec::with_capacity(2);
                if omega_b > omega_min {
                    out.push(Piece::Power {
                        lo: omega_min,
                        hi: omega_b,
                        c: amplitude,
                        p: 1,
                    });
                }
                if omega_max > omega_b {
                    out.push(Piece::Power {
                        lo: omega_b,
                        hi: omega_max,
                        c: omega_b * amplitude,
                        p: 2,
                    });
                }
                out
            }
            SpectrumShape::Tabulated { table } => table
                .windows(2)
                .filter(|w| w[0][1] > 0.0 || w[1][1] > 0.0)
                .map(|w| Piece::Linear {
                    lo: w[0][0],
                    hi: w[1][0],
                    s_lo: w[0][1],
                    s_hi: w[1][1],
                })
                .collect(),
        }
    }

    /// Frequencies where `S` changes form.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for p in self.pieces() {
            let (lo, hi) = p.bounds();
            if out.last() != Some(&lo) {
                out.push(lo);
            }
            out.push(hi);
        }
        out
    }

    /// Support `[lo, hi]` of the positive-frequency PSD, `None` if zero.
    pub fn support(&self) -> Option<(f64, f64)> {
        let b = self.breakpoints();
        Some((*b.first()?, *b.last()?))
    }

    pub fn is_zero(&self) -> bool {
        self.pieces().is_empty()
    }

    /// `S(ω)`, even in `ω`.
    pub fn psd(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match &self.shape {
            &SpectrumShape::RollOff {
                amplitude,
                omega_min,
                omega_b,
                omega_max,
            } => {
                if w < omega_min || w > omega_max {
                    0.0
                } else if w <= omega_b {
                    amplitude / w
                } else {
                    omega_b * amplitude / (w * w)
                }
            }
            SpectrumShape::Tabulated { table } => {
                let (first, last) = (table[0][0], table[table.len() - 1][0]);
                if w < first || w > last {
                    return 0.0;
                }
                let i = table.partition_point(|r| r[0] <= w).clamp(1, table.len() - 1);
                let (a, b) = (table[i - 1], table[i]);
                a[1] + (b[1] - a[1]) * (w - a[0]) / (b[0] - a[0])
            }
        }
    }

    /// `∫_lo^hi S dω` over positive frequencies, exact per piece.
    pub fn one_sided_integral(&self, lo: f64, hi: f64) -> f64 {
        self.pieces().iter().fold(0.0, |acc, p| acc + p.integral(lo, hi))
    }

    /// Variance carried by `lo ≤ |ω| ≤ hi` under the active convention.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        2.0 * self.convention.variance_scale() * self.one_sided_integral(lo, hi)
    }

    /// `⟨β²⟩` under the active convention.
    pub fn total_power(&self) -> f64 {
        self.band_power(0.0, f64::INFINITY)
    }

    /// `⟨β^{2(m+1)}⟩ = (2m+1)!! ⟨β²⟩^{m+1}`.
    pub fn gaussian_moment(&self, m: u32) -> f64 {
        double_factorial(2 * m + 1) * self.total_power().powi(m as i32 + 1)
    }
}

/// `n!! = n(n−2)(n−4)…`, with `0!! = 1!! = 1`.
pub fn double_factorial(n: u32) -> f64 {
    (1..=n).rev().step_by(2).map(f64::from).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    fn bench(omega_b: f64) -> NoiseSpectrum {
        NoiseSpectrum::benchmark(omega_b)
            .unwrap()
            .with_convention(Convention::PaperMoment)
    }

    #[test]
    fn continuity_and_support() {
        let s = NoiseSpectrum::roll_off(3.0, 1.0, 10.0, 100.0).unwrap();
        let below = s.psd(10.0 * (1.0 - 1e-15));
        let above = s.psd(10.0 * (1.0 + 1e-15));
        assert!((s.psd(10.0) - 0.3).abs() < 1e-15);
        assert!((below - above).abs() < 1e-12);
        assert_eq!(s.psd(101.0), 0.0);
        assert_eq!(s.psd(0.5), 0.0);
        assert_eq!(s.psd(-5.0), s.psd(5.0));
    }

    #[test]
    fn pure_one_over_f_and_pure_roll_off() {
        let a = 2.0;
        let f = NoiseSpectrum::roll_off(a, 1.0, 1e4, 1e4)
            .unwrap()
            .with_convention(Convention::PaperMoment);
        assert!((f.total_power() - 2.0 * a * 1e4f64.ln()).abs() < 1e-12 * f.total_power());
        let r = NoiseSpectrum::roll_off(a, 3.0, 3.0, 3e4)
            .unwrap()
            .with_convention(Convention::PaperMoment);
        assert!((r.total_power() - 2.0 * a * (1.0 - 1e-4)).abs() < 1e-12);
    }

    #[test]
    fn benchmark_power_is_independent_of_knee() {
        for wb in [10.0, 1.5e3, 1.5e4, 1.5e5, 1.5e6, 1e8] {
            let s = bench(wb);
            let p = s.total_power();
            assert!((p - 2.0 * BENCHMARK_POWER).abs() <= 1e-12 * p, "{wb}: {p}");
            let w = NoiseSpectrum::benchmark(wb).unwrap();
            assert!((w.total_power() - p / (2.0 * PI)).abs() <= 1e-12 * p);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let s = bench(1.5e4);
        let num = integrate(
            |x: f64| s.psd(x.exp()) * x.exp(),
            &s.breakpoints().iter().map(|w| w.ln()).collect::<Vec<_>>(),
            1e-12,
            0.0,
            10_000,
        )
        .unwrap();
        let exact = s.one_sided_integral(0.0, f64::INFINITY);
        assert!((num.value - exact).abs() <= 1e-10 * exact);
    }

    #[test]
    fn moments() {
        let s = NoiseSpectrum::roll_off(1.0, 1.0, 1.0, 2.0)
            .unwrap()
            .with_convention(Convention::PaperMoment);
        // ∫ two-sided = 2·1·(1 − 1/2) = 1
        assert!((s.total_power() - 1.0).abs() < 1e-15);
        let s2 = NoiseSpectrum::roll_off(2.0, 1.0, 1.0, 2.0)
            .unwrap()
            .with_convention(Convention::PaperMoment);
        assert_eq!(s2.gaussian_moment(0), 2.0);
        assert_eq!(s2.gaussian_moment(1), 12.0);
        assert_eq!(s2.gaussian_moment(2), 120.0);
        assert_eq!(double_factorial(0), 1.0);
        assert_eq!(double_factorial(7), 105.0);
    }

    #[test]
    fn zero_spectrum() {
        let z = NoiseSpectrum::zero();
        assert!(z.is_zero());
        assert_eq!(z.total_power(), 0.0);
        assert_eq!(z.psd(1.0), 0.0);
        assert!(z.support().is_none());
    }

    #[test]
    fn tabulated_interpolates() {
        let t = NoiseSpectrum::tabulated(vec![[1.0, 2.0], [3.0, 4.0], [5.0, 0.0]])
            .unwrap()
            .with_convention(Convention::PaperMoment);
        assert_eq!(t.psd(2.0), 3.0);
        assert_eq!(t.psd(4.0), 2.0);
        assert_eq!(t.psd(0.5), 0.0);
        assert_eq!(t.psd(3.0), 4.0);
        assert!((t.total_power() - 2.0 * (6.0 + 4.0)).abs() < 1e-12);
        assert!(NoiseSpectrum::tabulated(vec![[1.0, 2.0], [1.0, 3.0]]).is_err());
        assert!(NoiseSpectrum::tabulated(vec![[1.0, -2.0], [2.0, 3.0]]).is_err());
    }

    #[test]
    fn validation() {
        assert!(NoiseSpectrum::roll_off(1.0, 0.0, 1.0, 2.0).is_err());
        assert!(NoiseSpectrum::roll_off(1.0, 2.0, 1.0, 3.0).is_err());
        assert!(NoiseSpectrum::roll_off(-1.0, 1.0, 1.0, 3.0).is_err());
        assert!(NoiseSpectrum::constant_power(1.0, 1.0, 5.0, 3.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"A": 5.0, "omega_min": 1.0, "omega_b": 10.0, "omega_max": 100.0, "convention": "paper_moment"}"#;
        let s = NoiseSpectrum::from_json(text).unwrap();
        assert_eq!(s.convention, Convention::PaperMoment);
        assert_eq!(s.psd(2.0), 2.5);
        let back = NoiseSpectrum::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let t = NoiseSpectrum::from_json(r#"{"table": [[0, 1], [2, 1]]}"#).unwrap();
        assert_eq!(t.convention, Convention::WienerKhinchin);
        assert!(NoiseSpectrum::from_json(r#"{"A": 1.0, "omega_min": 3.0, "omega_b": 2.0, "omega_max": 4.0}"#).is_err());
    }

    #[test]
    fn inverse_cdf_matches_piece_integrals() {
        let pieces = [
            Piece::Power {
                lo: 1.0,
                hi: 100.0,
                c: 2.0,
                p: 1,
            },
            Piece::Power {
                lo: 1.0,
                hi: 100.0,
                c: 2.0,
                p: 2,
            },
            Piece::Linear {
                lo: 1.0,
                hi: 3.0,
                s_lo: 0.5,
                s_hi: 4.0,
            },
            Piece::Linear {
                lo: 1.0,
                hi: 3.0,
                s_lo: 4.0,
                s_hi: 0.0,
            },
            Piece::Linear {
                lo: 1.0,
                hi: 3.0,
                s_lo: 1.0,
                s_hi: 1.0,
            },
        ];
        for p in pieces {
            let (a, b) = (1.5, 2.5);
            let total = p.integral(a, b);
            for u in [0.0, 0.1, 0.37, 0.5, 0.9, 0.999] {
                let w = p.inverse_cdf(a, b, u);
                assert!((p.integral(a, w) - u * total).abs() <= 1e-12 * total, "{p:?} {u}");
            }
        }
    }
}
