// SPDX-License-Identifier: Apache-2.0

//! Vector-chain picture of first-order amplitude-error cancellation.
//!
//! The static chain lists `θ_l ρ̃_a^{(l)}` head to tail; it closes exactly
//! when the first-order amplitude error vanishes. At finite `ω` the chains
//! `A_l ρ̃_a^{(l)}/ω` and `B_l ρ̃_a^{(l)}/ω` give
//! `F_a = ¼ω²(|ΣA|² + |ΣB|²)`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::{add, norm, scale, Vec3, ZERO3};
use crate::pulses::PulseSequence;
use crate::toggling::control_trajectories;

/// Relative closure defect below which a static chain counts as closed.
pub const CLOSURE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    Static,
    A,
    B,
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainKind::Static => "static",
            ChainKind::A => "A",
            ChainKind::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorChain {
    pub kind: ChainKind,
    /// rad/s, for the frequency chains.
    pub omega: Option<f64>,
    pub terms: Vec<Vec3>,
}

impl VectorChain {
    pub fn sum(&self) -> Vec3 {
        self.terms.iter().fold(ZERO3, |acc, t| add(&acc, t))
    }

    pub fn total_length(&self) -> f64 {
        self.terms.iter().map(norm).sum()
    }

    /// `|Σ terms|`.
    pub fn closure_defect(&self) -> f64 {
        norm(&self.sum())
    }

    /// Defect relative to the summed term lengths.
    pub fn relative_defect(&self) -> f64 {
        let len = self.total_length();
        if len == 0.0 {
            0.0
        } else {
            self.closure_defect() / len
        }
    }

    /// Head-to-tail vertices, starting at the origin.
    pub fn vertices(&self) -> Vec<Vec3> {
        let mut out = vec![ZERO3];
        for t in &self.terms {
            out.push(add(out.last().unwrap(), t));
        }
        out
    }

    /// Terms projected on the x–y plane; fails if any term leaves it.
    pub fn project_xy(&self) -> Result<Vec<[f64; 2]>> {
        let tol = 1e-10 * self.total_length().max(1.0);
        self.terms
            .iter()
            .map(|t| {
                if t[2].abs() > tol {
                    Err(Error::InvalidParameter(format!(
                        "chain term {t:?} leaves the x–y plane"
                    )))
                } else {
                    Ok([t[0], t[1]])
                }
            })
            .collect()
    }
}

/// `index, kind, x, y, z` rows for the given chains.
pub fn write_chains_csv<W: Write>(chains: &[VectorChain], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "kind", "x", "y", "z"])?;
    for chain in chains {
        for (i, t) in chain.terms.iter().enumerate() {
            out.serialize((i, chain.kind.to_string(), t[0], t[1], t[2]))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Terms `θ_l ρ̃_a^{(l)}` with `θ_l = Ω_l(t_l − t_{l−1})`.
pub fn static_chain(seq: &PulseSequence) -> Result<VectorChain> {
    let traj = control_trajectories(seq)?;
    Ok(VectorChain {
        kind: ChainKind::Static,
        omega: None,
        terms: traj
            .pieces
            .iter()
            .map(|p| scale(&p.amp_dir, p.rate * p.duration))
            .collect(),
    })
}

/// `(A_l ρ̃_a^{(l)}/ω, B_l ρ̃_a^{(l)}/ω)` with `A_l = cos ωt_l − cos ωt_{l−1}`
/// and `B_l = sin ωt_l − sin ωt_{l−1}`.
pub fn frequency_chains(seq: &PulseSequence, omega: f64) -> Result<(VectorChain, VectorChain)> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("ω must be positive, got {omega}")));
    }
    let traj = control_trajectories(seq)?;
    let mut a = Vec::with_capacity(traj.pieces.len());
    let mut b = Vec::with_capacity(traj.pieces.len());
    for p in &traj.pieces {
        let (s1, c1) = (omega * p.end()).sin_cos();
        let (s0, c0) = (omega * p.start).sin_cos();
        a.push(scale(&p.amp_dir, (c1 - c0) / omega));
        b.push(scale(&p.amp_dir, (s1 - s0) / omega));
    }
    let chain = |kind, terms| VectorChain {
        kind,
        omega: Some(omega),
        terms,
    };
    Ok((chain(ChainKind::A, a), chain(ChainKind::B, b)))
}

/// `F_a(ω)` rebuilt from the frequency chains.
pub fn ff_from_chains(a: &VectorChain, b: &VectorChain) -> f64 {
    let w = a.omega.unwrap_or(0.0);
    let (sa, sb) = (a.sum(), b.sum());
    0.25 * w * w * (norm(&sa).powi(2) + norm(&sb).powi(2))
}

/// Frequency where `¼(ωτ_P)² = (ωτ_CP)⁴/16`, i.e. `ω = 2τ_P/τ_CP²`.
pub fn crossover_bound_from_durations(tau_p: f64, tau_cp: f64) -> Result<f64> {
    if !(tau_p > 0.0 && tau_cp > 0.0) {
        return Err(Error::InvalidParameter(format!("durations {tau_p:e}, {tau_cp:e}")));
    }
    Ok(2.0 * tau_p / (tau_cp * tau_cp))
}

/// Small-ω estimate of the amplitude crossover, with `τ_P = θ/Ω` and
/// `τ_CP` the sequence duration. Requires a closed static chain.
pub fn crossover_bound(seq: &PulseSequence) -> Result<f64> {
    if static_chain(seq)?.relative_defect() > CLOSURE_TOLERANCE {
        return Err(Error::NoSuppression);
    }
    crossover_bound_from_durations(seq.target_theta / seq.omega, seq.duration())
}
