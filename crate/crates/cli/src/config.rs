// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration and command-line overrides.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::PathBuf;

use cpfilter::filterfn::log_grid;
use cpfilter::pulses::trapezoidalize;
use cpfilter::spectra::{BENCHMARK_OMEGA_MAX, BENCHMARK_OMEGA_MIN, BENCHMARK_POWER, BENCHMARK_RABI};
use cpfilter::{build_sequence, Convention, EnsembleConfig, NoiseSpectrum, PulseSequence, SequenceId};

use crate::CliError;

/// Frequencies given either as an explicit list or as a log-spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Log { lo: f64, hi: f64, per_decade: usize },
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Grid::List(v) => v.clone(),
            Grid::Log { lo, hi, per_decade } => {
                if !(*lo > 0.0 && hi >= lo && *per_decade > 0) {
                    return Err(CliError::Config(format!(
                        "bad log grid {lo}..{hi} at {per_decade}/decade"
                    )));
                }
                log_grid(*lo, *hi, *per_decade)
            }
        };
        if v.is_empty() {
            return Err(CliError::Config("empty ω_b grid".into()));
        }
        if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(CliError::Config(format!("grid value {x} is not a positive frequency")));
        }
        Ok(v)
    }
}

/// Roll-off spectrum parameters; the knee comes from the sweep grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Prefactor `A`; mutually exclusive with `power`.
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Total `∫S dω`, held fixed while the knee moves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    pub omega_min: f64,
    pub omega_max: f64,
    #[serde(default)]
    pub convention: Convention,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            amplitude: None,
            power: Some(BENCHMARK_POWER),
            omega_min: BENCHMARK_OMEGA_MIN,
            omega_max: BENCHMARK_OMEGA_MAX,
            convention: Convention::default(),
        }
    }
}

impl SpectrumConfig {
    pub fn at_knee(&self, omega_b: f64) -> Result<NoiseSpectrum, CliError> {
        let spec = match (self.amplitude, self.power) {
            (Some(a), None) => NoiseSpectrum::roll_off(a, self.omega_min, omega_b, self.omega_max),
            (None, Some(p)) => NoiseSpectrum::constant_power(p, self.omega_min, omega_b, self.omega_max),
            _ => return Err(CliError::Config("spectrum needs exactly one of `A` and `power`".into())),
        };
        Ok(spec
            .map_err(CliError::from_core_config)?
            .with_convention(self.convention))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Amplitude-only rows, then detuning-only rows.
    #[default]
    Separate,
    /// Every `(ω_b^a, ω_b^d)` pair with both quadratures on.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// ω_b^a values in rad/s; `null` turns amplitude noise off.
    #[serde(default)]
    pub amplitude: Option<Grid>,
    /// ω_b^d values in rad/s; `null` turns detuning noise off.
    #[serde(default)]
    pub detuning: Option<Grid>,
    #[serde(default)]
    pub mode: SweepMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let grid = Grid::Log {
            lo: 1e-3 * BENCHMARK_RABI,
            hi: 1e-1 * BENCHMARK_RABI,
            per_decade: 2,
        };
        SweepConfig {
            amplitude: Some(grid.clone()),
            detuning: Some(grid),
            mode: SweepMode::Separate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n: usize,
    pub seed: u64,
    /// Largest integration step in seconds.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub frozen: bool,
    #[serde(default)]
    pub multiplicative: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n: cpfilter::mcsim::DEFAULT_REALIZATIONS,
            seed: 0,
            dt: None,
            frozen: false,
            multiplicative: false,
        }
    }
}

impl McConfig {
    /// Ensemble settings for sweep row `row`.
    pub fn ensemble(&self, row: usize) -> EnsembleConfig {
        EnsembleConfig {
            n: self.n,
            seed: self.seed.wrapping_add(row as u64),
            dt: self.dt,
            bandwidth: None,
            frozen: self.frozen,
            multiplicative: self.multiplicative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FfConfig {
    /// Frequency grid in units of Ω.
    pub grid: Grid,
    /// Band, in units of Ω, for the low-frequency slope check.
    pub slope_band: [f64; 2],
}

impl Default for FfConfig {
    fn default() -> Self {
        FfConfig {
            grid: Grid::Log {
                lo: 1e-4,
                hi: 3.0,
                per_decade: 200,
            },
            slope_band: [1e-3, 1e-2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Frequency of the A/B chains in units of Ω.
    pub omega_over_omega: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { omega_over_omega: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sequences: Vec<SequenceId>,
    pub theta: f64,
    /// Rabi rate Ω in rad/s.
    pub omega: f64,
    /// Trapezoid ramp time in seconds; square pulses when absent.
    pub ramp: Option<f64>,
    pub spectrum: SpectrumConfig,
    pub sweep: SweepConfig,
    pub mc: McConfig,
    pub ff: FfConfig,
    pub geometry: GeometryConfig,
    /// Output directory.
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sequences: SequenceId::ALL.to_vec(),
            theta: PI,
            omega: BENCHMARK_RABI,
            ramp: None,
            spectrum: SpectrumConfig::default(),
            sweep: SweepConfig::default(),
            mc: McConfig::default(),
            ff: FfConfig::default(),
            geometry: GeometryConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub sequences: Vec<SequenceId>,
    pub omega_b: Vec<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// One sweep point; `None` means that quadrature is noiseless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub omega_b_a: Option<f64>,
    pub omega_b_d: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if !o.sequences.is_empty() {
            self.sequences = o.sequences.clone();
        }
        if !o.omega_b.is_empty() {
            let grid = Some(Grid::List(o.omega_b.clone()));
            if self.sweep.amplitude.is_none() && self.sweep.detuning.is_none() {
                self.sweep.amplitude = grid;
            } else {
                if self.sweep.amplitude.is_some() {
                    self.sweep.amplitude = grid.clone();
                }
                if self.sweep.detuning.is_some() {
                    self.sweep.detuning = grid;
                }
            }
        }
        if let Some(n) = o.n {
            self.mc.n = n;
        }
        if let Some(s) = o.seed {
            self.mc.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = p.clone();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.sequences.is_empty() {
            return Err(CliError::Config("no sequences selected".into()));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) || !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(CliError::Config(format!("θ = {}, Ω = {}", self.theta, self.omega)));
        }
        self.spectrum.at_knee(self.spectrum.omega_min.max(1e-300))?;
        self.points()?;
        self.ff.grid.values()?;
        let [lo, hi] = self.ff.slope_band;
        if !(lo > 0.0 && hi > lo) {
            return Err(CliError::Config(format!("slope band {lo}..{hi}")));
        }
        if !(self.geometry.omega_over_omega > 0.0) {
            return Err(CliError::Config("geometry frequency must be positive".into()));
        }
        if self.mc.n < 2 {
            return Err(CliError::Config(format!(
                "N = {} realizations; need at least 2",
                self.mc.n
            )));
        }
        if let Some(dt) = self.mc.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::Config(format!("dt = {dt}")));
            }
        }
        Ok(())
    }

    /// Sequences in config order.
    pub fn build_sequences(&self) -> Result<Vec<PulseSequence>, CliError> {
        self.sequences
            .iter()
            .map(|&id| {
                let seq = build_sequence(id, self.theta, self.omega).map_err(CliError::from_core_config)?;
                match self.ramp {
                    Some(r) => trapezoidalize(&seq, r).map_err(CliError::from_core_config),
                    None => Ok(seq),
                }
            })
            .collect()
    }

    /// Sweep points in config order.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let a = self.sweep.amplitude.as_ref().map(Grid::values).transpose()?;
        let d = self.sweep.detuning.as_ref().map(Grid::values).transpose()?;
        let pts = match (self.sweep.mode, a, d) {
            (_, None, None) => return Err(CliError::Config("no ω_b grid for either quadrature".into())),
            (SweepMode::Product, Some(a), Some(d)) => a
                .iter()
                .flat_map(|&x| {
                    d.iter().map(move |&y| Point {
                        omega_b_a: Some(x),
                        omega_b_d: Some(y),
                    })
                })
                .collect(),
            (_, a, d) => {
                let mut v: Vec<Point> = a
                    .unwrap_or_default()
                    .into_iter()
                    .map(|x| Point {
                        omega_b_a: Some(x),
                        omega_b_d: None,
                    })
                    .collect();
                v.extend(d.unwrap_or_default().into_iter().map(|y| Point {
                    omega_b_a: None,
                    omega_b_d: Some(y),
                }));
                v
            }
        };
        Ok(pts)
    }

    /// Amplitude and detuning spectra at a sweep point.
    pub fn spectra(&self, p: &Point) -> Result<(NoiseSpectrum, NoiseSpectrum), CliError> {
        let one = |wb: Option<f64>| match wb {
            Some(w) => self.spectrum.at_knee(w),
            None => Ok(NoiseSpectrum::zero()),
        };
        Ok((one(p.omega_b_a)?, one(p.omega_b_d)?))
    }
}
