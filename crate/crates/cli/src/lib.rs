// SPDX-License-Identifier: Apache-2.0

//! Runners behind the `cpfilter` binary. Every runner writes CSV files with
//! a header row into the configured output directory and returns their paths.
//! Rows follow config order whatever order the workers finish in.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use rayon::prelude::*;
use serde::Serialize;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use cpfilter::analytic::Estimator;
use cpfilter::filterfn::{crossover, lowfreq_slope};
use cpfilter::geometry::{crossover_bound, frequency_chains, static_chain, write_chains_csv};
use cpfilter::{ensemble, DcModel, Error, FilterFunction, FilterFunctionCurve, PulseSequence, Quadrature};

pub use config::{Grid, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 1 for configuration and I/O problems, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub(crate) fn from_core_config(e: Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownSequence(_) | Error::InvalidParameter(_) | Error::RampTooLarge { .. } | Error::Json(_) => {
                CliError::Config(e.to_string())
            }
            Error::Io(source) => CliError::Io {
                path: PathBuf::new(),
                source,
            },
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn out_dir(config: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&config.out).map_err(io_err(&config.out))?;
    Ok(&config.out)
}

fn write_rows<R: Serialize>(path: &Path, header: &[&str], rows: &[R]) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn prepare(config: &RunConfig) -> Result<(Vec<PulseSequence>, &Path), CliError> {
    config.validate()?;
    let seqs = config.build_sequences()?;
    Ok((seqs, out_dir(config)?))
}

/// `ff_<SEQ>.csv` with `omega_over_Omega, F_a, F_d` per sequence, and
/// `ff_slopes.csv` with the low-frequency log-log slope of each curve.
pub fn run_ff(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (seqs, dir) = prepare(config)?;
    let x = config.ff.grid.values()?;
    let omegas: Vec<f64> = x.iter().map(|v| v * config.omega).collect();
    let band = (
        config.ff.slope_band[0] * config.omega,
        config.ff.slope_band[1] * config.omega,
    );
    let curves: Vec<FilterFunctionCurve> = seqs
        .par_iter()
        .map(|s| FilterFunctionCurve::compute(&FilterFunction::for_sequence(s), &omegas))
        .collect();
    let mut paths = Vec::new();
    let mut slopes = Vec::new();
    for (s, curve) in seqs.iter().zip(&curves) {
        let path = dir.join(format!("ff_{}.csv", s.name));
        let rows: Vec<_> = x
            .iter()
            .zip(&curve.f_a)
            .zip(&curve.f_d)
            .map(|((x, a), d)| (x, a, d))
            .collect();
        write_rows(&path, &["omega_over_Omega", "F_a", "F_d"], &rows)?;
        paths.push(path);
        let slope = |q| match lowfreq_slope(curve, q, band) {
            Ok(v) => Ok(Some(v)),
            Err(Error::DegenerateFit(msg)) => {
                log::warn!("{} {q}: no slope ({msg})", s.name);
                Ok(None)
            }
            Err(e) => Err(CliError::from(e)),
        };
        slopes.push((
            s.name.as_str(),
            slope(Quadrature::Amplitude)?,
            slope(Quadrature::Detuning)?,
        ));
    }
    let path = dir.join("ff_slopes.csv");
    write_rows(&path, &["sequence", "slope_a", "slope_d"], &slopes)?;
    paths.push(path);
    Ok(paths)
}

#[derive(Serialize)]
struct SweepRow {
    sequence: &'static str,
    omega_b_a: Option<f64>,
    omega_b_d: Option<f64>,
    ff_loss: Option<f64>,
    dc_loss: Option<f64>,
    combined: Option<f64>,
    status: String,
}

/// `sweep.csv`: filter-function, dc and combined loss at every sweep point.
/// Rows whose estimate fails are written with a status message and make
/// the run fail after the file is complete.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (seqs, dir) = prepare(config)?;
    let points = config.points()?;
    let estimators: Vec<Result<Estimator, String>> = seqs
        .par_iter()
        .map(|s| Estimator::new(s).map_err(|e| e.to_string()))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..seqs.len())
        .flat_map(|i| (0..points.len()).map(move |j| (i, j)))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let p = &points[j];
            let mut row = SweepRow {
                sequence: seqs[i].name.as_str(),
                omega_b_a: p.omega_b_a,
                omega_b_d: p.omega_b_d,
                ff_loss: None,
                dc_loss: None,
                combined: None,
                status: "ok".into(),
            };
            let est = estimators[i].as_ref().map_err(Clone::clone).and_then(|e| {
                let (sa, sd) = config.spectra(p).map_err(|e| e.to_string())?;
                e.estimate(&sa, &sd).map_err(|e| e.to_string())
            });
            match est {
                Ok(e) => {
                    row.ff_loss = Some(e.ff_loss);
                    row.dc_loss = Some(e.dc_loss);
                    row.combined = Some(e.combined);
                }
                Err(msg) => row.status = msg,
            }
            row
        })
        .collect();
    let path = dir.join("sweep.csv");
    write_rows(
        &path,
        &[
            "sequence",
            "omega_b_a",
            "omega_b_d",
            "ff_loss",
            "dc_loss",
            "combined",
            "status",
        ],
        &rows,
    )?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        return Err(CliError::Numerical(format!(
            "{failed} sweep rows failed; see {}",
            path.display()
        )));
    }
    Ok(vec![path])
}

#[derive(Serialize)]
struct McRow<'a> {
    sequence: &'a str,
    omega_b_a: Option<f64>,
    omega_b_d: Option<f64>,
    n: usize,
    mean_loss: f64,
    std_error: f64,
    seed: u64,
    clipped_power_a: f64,
    clipped_power_d: f64,
}

/// `mc.csv`: Monte Carlo ensemble at every sweep point. Row `k` uses seed
/// `mc.seed + k`.
pub fn run_mc(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (seqs, dir) = prepare(config)?;
    let points = config.points()?;
    let mut rows = Vec::with_capacity(seqs.len() * points.len());
    for s in &seqs {
        for p in &points {
            let (sa, sd) = config.spectra(p)?;
            let cfg = config.mc.ensemble(rows.len());
            let r = ensemble(s, &sa, &sd, &cfg)?;
            if r.clipped_power_a > 0.0 || r.clipped_power_d > 0.0 {
                log::warn!(
                    "{} ω_b = ({:?}, {:?}): variance above the band limit left out: a {:.3e}, d {:.3e}",
                    s.name,
                    p.omega_b_a,
                    p.omega_b_d,
                    r.clipped_power_a,
                    r.clipped_power_d
                );
            }
            rows.push(McRow {
                sequence: s.name.as_str(),
                omega_b_a: p.omega_b_a,
                omega_b_d: p.omega_b_d,
                n: r.n,
                mean_loss: r.mean_loss,
                std_error: r.std_error,
                seed: r.seed,
                clipped_power_a: r.clipped_power_a,
                clipped_power_d: r.clipped_power_d,
            });
        }
    }
    let path = dir.join("mc.csv");
    write_rows(
        &path,
        &[
            "sequence",
            "omega_b_a",
            "omega_b_d",
            "N",
            "mean_loss",
            "std_error",
            "seed",
            "clipped_power_a",
            "clipped_power_d",
        ],
        &rows,
    )?;
    Ok(vec![path])
}

fn ok_or_none<T>(r: cpfilter::Result<T>) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NoSuppression) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// `chains_<SEQ>.csv` with the static chain and the A/B chains at the
/// configured frequency, and `geometry.csv` with closure defects, the
/// small-ω crossover bound and the actual amplitude crossover.
pub fn run_geometry(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (seqs, dir) = prepare(config)?;
    let w = config.geometry.omega_over_omega * config.omega;
    let mut paths = Vec::new();
    let mut summary = Vec::new();
    for s in &seqs {
        let st = static_chain(s)?;
        let (a, b) = frequency_chains(s, w)?;
        let path = dir.join(format!("chains_{}.csv", s.name));
        let file = File::create(&path).map_err(io_err(&path))?;
        write_chains_csv(&[st.clone(), a, b], BufWriter::new(file)).map_err(|e| match e {
            Error::Csv(c) => csv_err(&path, c),
            other => other.into(),
        })?;
        paths.push(path);
        let bound = ok_or_none(crossover_bound(s))?.map(|v| v / config.omega);
        let actual = ok_or_none(crossover(s, Quadrature::Amplitude))?
            .flatten()
            .map(|v| v / config.omega);
        summary.push((s.name.as_str(), st.relative_defect(), bound, actual));
    }
    let path = dir.join("geometry.csv");
    write_rows(
        &path,
        &["sequence", "closure_defect", "bound_over_Omega", "crossover_over_Omega"],
        &summary,
    )?;
    paths.push(path);
    Ok(paths)
}

/// `dc_fit.csv`: leading dc coefficients per sequence and term.
pub fn run_dc_fit(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (seqs, dir) = prepare(config)?;
    let models: Vec<cpfilter::Result<DcModel>> = seqs.par_iter().map(DcModel::fit).collect();
    let mut rows = Vec::new();
    for m in models {
        let m = m?;
        for c in [Some(m.amplitude), Some(m.detuning), m.cross].into_iter().flatten() {
            rows.push((
                c.sequence.as_str(),
                c.term.to_string(),
                c.order,
                c.c,
                c.physical(),
                c.residual,
            ));
        }
    }
    let path = dir.join("dc_fit.csv");
    write_rows(
        &path,
        &["sequence", "term", "order", "c", "c_physical", "residual"],
        &rows,
    )?;
    Ok(vec![path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let config = [
            Error::UnknownSequence("x".into()),
            Error::InvalidParameter("x".into()),
            Error::RampTooLarge {
                segment: 0,
                ramp: 1.0,
                duration: 1.0,
            },
        ];
        for e in config {
            assert_eq!(CliError::from(e).exit_code(), 1);
        }
        let numerical = [
            Error::NoSuppression,
            Error::WrongOrder {
                order: 1,
                residual: 0.5,
            },
            Error::DegenerateFit("x".into()),
            Error::NoConvergence {
                estimate: 0.0,
                error: 1.0,
                intervals: 3,
            },
        ];
        for e in numerical {
            assert_eq!(CliError::from(e).exit_code(), 2);
        }
        let io = std::io::Error::other("x");
        assert_eq!(CliError::from(Error::Io(io)).exit_code(), 1);
    }
}
