// SPDX-License-Identifier: Apache-2.0

//! Control sequences: the composite-pulse catalog, trapezoidal shaping and
//! discretization into piecewise-constant steps.
//!
//! A segment stores time, not angle: its rotation angle is the integral of
//! the amplitude envelope. Noise in the Hamiltonian couples per unit time,
//! so durations are the primitive quantity.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{phase_distance, Mat2};

/// Tolerance on `‖Π R_l − R(θ, φ)‖` (up to global phase).
pub const TARGET_TOLERANCE: f64 = 1e-10;

/// Steps per section used when a shaped sequence is routed through
/// [`discretize`] implicitly.
pub const DEFAULT_SHAPED_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequenceId {
    #[serde(rename = "primitive")]
    Primitive,
    #[serde(rename = "SK1")]
    Sk1,
    #[serde(rename = "BB1")]
    Bb1,
    #[serde(rename = "CORPSE")]
    Corpse,
    #[serde(rename = "CinSK")]
    CinSk,
    #[serde(rename = "CinBB")]
    CinBb,
    #[serde(rename = "DCG")]
    Dcg,
}

impl SequenceId {
    pub const ALL: [SequenceId; 7] = [
        SequenceId::Primitive,
        SequenceId::Sk1,
        SequenceId::Bb1,
        SequenceId::Corpse,
        SequenceId::CinSk,
        SequenceId::CinBb,
        SequenceId::Dcg,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SequenceId::Primitive => "primitive",
            SequenceId::Sk1 => "SK1",
            SequenceId::Bb1 => "BB1",
            SequenceId::Corpse => "CORPSE",
            SequenceId::CinSk => "CinSK",
            SequenceId::CinBb => "CinBB",
            SequenceId::Dcg => "DCG",
        }
    }
}

impl fmt::Display for SequenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SequenceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SequenceId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownSequence(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Square,
    /// Linear ramp up over `ramp`, flat top for `hold`, linear ramp down.
    Trapezoid {
        ramp: f64,
        hold: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Seconds.
    pub duration: f64,
    /// Peak Rabi rate in rad/s.
    pub amplitude: f64,
    /// Rotation-axis phase in rad.
    pub phase: f64,
    pub shape: Shape,
}

impl Segment {
    pub fn square(angle: f64, phase: f64, amplitude: f64) -> Self {
        Segment {
            duration: angle / amplitude,
            amplitude,
            phase,
            shape: Shape::Square,
        }
    }

    /// Rotation angle `∫Ω(t) dt`.
    pub fn angle(&self) -> f64 {
        match self.shape {
            Shape::Square => self.amplitude * self.duration,
            Shape::Trapezoid { ramp, hold } => self.amplitude * (hold + ramp),
        }
    }

    /// Ideal propagator of the segment. The phase is constant within a
    /// segment, so only the integrated angle matters.
    pub fn propagator(&self) -> Mat2 {
        Mat2::rotation(self.angle(), self.phase)
    }

    fn validate(&self, index: usize) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "segment {index}: duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "segment {index}: amplitude must be non-negative, got {}",
                self.amplitude
            )));
        }
        if let Shape::Trapezoid { ramp, hold } = self.shape {
            let total = hold + 2.0 * ramp;
            if ramp < 0.0 || hold < 0.0 || (total - self.duration).abs() > 1e-12 * self.duration {
                return Err(Error::InvalidParameter(format!(
                    "segment {index}: trapezoid needs duration = hold + 2 ramp with ramp, hold ≥ 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub name: SequenceId,
    pub target_theta: f64,
    pub target_phi: f64,
    /// Nominal (peak) Rabi rate, rad/s.
    pub omega: f64,
    pub segments: Vec<Segment>,
}

impl PulseSequence {
    /// Validates segment invariants and that the segment product realizes
    /// the target rotation up to global phase.
    pub fn new(
        name: SequenceId,
        target_theta: f64,
        target_phi: f64,
        omega: f64,
        segments: Vec<Segment>,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("sequence has no segments".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            s.validate(i)?;
        }
        let seq = PulseSequence {
            name,
            target_theta,
            target_phi,
            omega,
            segments,
        };
        seq.target_unitary()?;
        Ok(seq)
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// `t_0 = 0 < t_1 < … < t_n = τ`.
    pub fn boundary_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push(0.0);
        for s in &self.segments {
            t += s.duration;
            out.push(t);
        }
        out
    }

    pub fn is_square(&self) -> bool {
        self.segments.iter().all(|s| s.shape == Shape::Square)
    }

    /// Product of the ideal segment propagators, `R_n ⋯ R_1`.
    pub fn ideal_propagator(&self) -> Mat2 {
        self.segments
            .iter()
            .fold(Mat2::identity(), |acc, s| s.propagator() * acc)
    }

    /// `R(θ, φ)` of the target, checked against the segment product.
    pub fn target_unitary(&self) -> Result<Mat2> {
        let target = Mat2::rotation(self.target_theta, self.target_phi);
        let distance = phase_distance(&target, &self.ideal_propagator());
        if distance > TARGET_TOLERANCE {
            return Err(Error::TargetMismatch { distance });
        }
        Ok(target)
    }

    /// Square sequence with the same axes, angles and per-segment durations.
    pub fn square_equivalent(&self) -> PulseSequence {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment {
                duration: s.duration,
                amplitude: s.angle() / s.duration,
                phase: s.phase,
                shape: Shape::Square,
            })
            .collect();
        PulseSequence {
            segments,
            ..self.clone()
        }
    }

    /// Segments as piecewise-constant steps; fails for shaped segments.
    pub fn square_steps(&self) -> Result<Vec<Step>> {
        if !self.is_square() {
            return Err(Error::ShapedSequence);
        }
        Ok(self
            .segments
            .iter()
            .map(|s| Step {
                dt: s.duration,
                amplitude: s.amplitude,
                phase: s.phase,
            })
            .collect())
    }

    /// Square segments map 1:1, shaped ones go through [`discretize`].
    pub fn steps(&self) -> Vec<Step> {
        match self.square_steps() {
            Ok(steps) => steps,
            Err(_) => {
                discretize(self, DEFAULT_SHAPED_STEPS)
                    .expect("non-zero step count")
                    .steps
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub dt: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantControl {
    pub steps: Vec<Step>,
    pub source: SequenceId,
}

impl PiecewiseConstantControl {
    pub fn duration(&self) -> f64 {
        self.steps.iter().map(|s| s.dt).sum()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.steps.iter().map(|s| s.amplitude).fold(0.0, f64::max)
    }

    pub fn ideal_propagator(&self) -> Mat2 {
        self.steps.iter().fold(Mat2::identity(), |acc, s| {
            Mat2::rotation(s.amplitude * s.dt, s.phase) * acc
        })
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    Ok(())
}

/// `φ₁ = arccos(−θ/4π)` of the SK1/BB1 correction.
pub fn sk1_phase(theta: f64) -> f64 {
    (-theta / (4.0 * PI)).acos()
}

/// `k = arcsin[sin(θ/2)/2]` of the CORPSE construction.
pub fn corpse_k(theta: f64) -> f64 {
    ((theta / 2.0).sin() / 2.0).asin()
}

fn corpse_triple(theta: f64) -> [(f64, f64); 3] {
    let k = corpse_k(theta);
    [
        (TAU + theta / 2.0 - k, 0.0),
        (TAU - 2.0 * k, PI),
        (theta / 2.0 - k, 0.0),
    ]
}

/// Builds a catalog sequence correcting `R(θ, 0)` at Rabi rate `omega`.
pub fn build_sequence(name: SequenceId, theta: f64, omega: f64) -> Result<PulseSequence> {
    check_omega(omega)?;
    if !(theta > 0.0 && theta <= TAU + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in (0, 2π], got {theta}"
        )));
    }
    let phi1 = sk1_phase(theta);
    let angles: Vec<(f64, f64)> = match name {
        SequenceId::Primitive => vec![(theta, 0.0)],
        SequenceId::Sk1 => vec![(theta, 0.0), (TAU, -phi1), (TAU, phi1)],
        SequenceId::Bb1 => vec![(theta, 0.0), (PI, phi1), (TAU, 3.0 * phi1), (PI, phi1)],
        SequenceId::Corpse => corpse_triple(theta).to_vec(),
        SequenceId::CinSk => {
            let mut v = corpse_triple(theta).to_vec();
            v.extend([(TAU, -phi1), (TAU, phi1)]);
            v
        }
        SequenceId::CinBb => {
            let mut v = corpse_triple(theta).to_vec();
            v.extend([(PI, phi1), (TAU, 3.0 * phi1), (PI, phi1)]);
            v
        }
        SequenceId::Dcg => {
            if (theta - PI).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "DCG is only defined for theta = π, got {theta}"
                )));
            }
            // Amplitudes (Ω, Ω/2, Ω) over (τ/4, τ/2, τ/4), each a π rotation
            // about x; the product is R(3π, 0) = −R(π, 0).
            let segments = vec![
                Segment::square(PI, 0.0, omega),
                Segment::square(PI, 0.0, omega / 2.0),
                Segment::square(PI, 0.0, omega),
            ];
            return PulseSequence::new(name, theta, 0.0, omega, segments);
        }
    };
    let segments = angles
        .into_iter()
        .map(|(angle, phase)| Segment::square(angle, phase, omega))
        .collect();
    PulseSequence::new(name, theta, 0.0, omega, segments)
}

/// Replaces every square segment by a trapezoid of the same peak amplitude
/// and rotation angle.
///
/// The ramp of segment `l` is `ramp · Ω/Ω_l`, so a segment running at half
/// the nominal amplitude gets a ramp and hold twice as long: the stretched
/// and scaled profile that keeps the DCG first-order cancellation intact.
pub fn trapezoidalize(seq: &PulseSequence, ramp: f64) -> Result<PulseSequence> {
    if !(ramp >= 0.0 && ramp.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "ramp must be non-negative, got {ramp}"
        )));
    }
    if !seq.is_square() {
        return Err(Error::ShapedSequence);
    }
    if ramp == 0.0 {
        return Ok(seq.clone());
    }
    let mut segments = Vec::with_capacity(seq.segments.len());
    for (i, s) in seq.segments.iter().enumerate() {
        let r = ramp * seq.omega / s.amplitude;
        let hold = s.duration - r;
        if !(hold > 0.0) {
            return Err(Error::RampTooLarge {
                segment: i,
                ramp: r,
                duration: s.duration,
            });
        }
        segments.push(Segment {
            duration: hold + 2.0 * r,
            amplitude: s.amplitude,
            phase: s.phase,
            shape: Shape::Trapezoid { ramp: r, hold },
        });
    }
    PulseSequence::new(seq.name, seq.target_theta, seq.target_phi, seq.omega, segments)
}

/// Piecewise-constant approximation with `steps_per_segment` steps per
/// square segment and per trapezoid section (ramp up, hold, ramp down).
/// Ramp steps take the envelope value at their midpoint, which preserves
/// the rotation angle of a linear ramp exactly.
pub fn discretize(seq: &PulseSequence, steps_per_segment: usize) -> Result<PiecewiseConstantControl> {
    if steps_per_segment == 0 {
        return Err(Error::InvalidParameter("steps_per_segment must be ≥ 1".into()));
    }
    let n = steps_per_segment;
    let mut steps = Vec::new();
    for s in &seq.segments {
        let even = |steps: &mut Vec<Step>, total: f64, amp: f64| {
            let dt = total / n as f64;
            steps.extend((0..n).map(|_| Step {
                dt,
                amplitude: amp,
                phase: s.phase,
            }));
        };
        match s.shape {
            Shape::Square => even(&mut steps, s.duration, s.amplitude),
            Shape::Trapezoid { ramp, hold } => {
                if ramp > 0.0 {
                    let dt = ramp / n as f64;
                    steps.extend((0..n).map(|i| Step {
                        dt,
                        amplitude: s.amplitude * (i as f64 + 0.5) / n as f64,
                        phase: s.phase,
                    }));
                }
                if hold > 0.0 {
                    even(&mut steps, hold, s.amplitude);
                }
                if ramp > 0.0 {
                    let dt = ramp / n as f64;
                    steps.extend((0..n).rev().map(|i| Step {
                        dt,
                        amplitude: s.amplitude * (i as f64 + 0.5) / n as f64,
                        phase: s.phase,
                    }));
                }
            }
        }
    }
    Ok(PiecewiseConstantControl {
        steps,
        source: seq.name,
    })
}

/// JSON form of a sequence request:
/// `{"name": "SK1", "theta": 3.14159, "omega": 1.5e6, "shape": {"ramp": 2e-7}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub name: SequenceId,
    pub theta: f64,
    pub omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeConfig {
    /// Ramp time in seconds.
    pub ramp: f64,
}

impl SequenceConfig {
    pub fn build(&self) -> Result<PulseSequence> {
        let seq = build_sequence(self.name, self.theta, self.omega)?;
        match &self.shape {
            Some(shape) => trapezoidalize(&seq, shape.ramp),
            None => Ok(seq),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat2;
    use num_complex::Complex64;

    const OMEGA: f64 = 1.5e6;

    fn angles(seq: &PulseSequence) -> Vec<(f64, f64)> {
        seq.segments.iter().map(|s| (s.angle(), s.phase)).collect()
    }

    #[test]
    fn sk1_segments_at_pi() {
        let seq = build_sequence(SequenceId::Sk1, PI, OMEGA).unwrap();
        let phi1 = (-0.25f64).acos();
        assert!((phi1 - 1.823477).abs() < 1e-6);
        let got = angles(&seq);
        let want = [(PI, 0.0), (TAU, -phi1), (TAU, phi1)];
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g.0 - w.0).abs() < 1e-12 && (g.1 - w.1).abs() < 1e-12);
        }
    }

    #[test]
    fn corpse_angles_at_pi() {
        let seq = build_sequence(SequenceId::Corpse, PI, OMEGA).unwrap();
        assert!((corpse_k(PI) - PI / 6.0).abs() < 1e-15);
        let want = [(7.0 * PI / 3.0, 0.0), (5.0 * PI / 3.0, PI), (PI / 3.0, 0.0)];
        for (g, w) in angles(&seq).iter().zip(want.iter()) {
            assert!((g.0 - w.0).abs() < 1e-12 && (g.1 - w.1).abs() < 1e-15);
        }
    }

    #[test]
    fn cinbb_is_corpse_then_bb1_correction() {
        let seq = build_sequence(SequenceId::CinBb, PI, OMEGA).unwrap();
        let phi1 = sk1_phase(PI);
        let got = angles(&seq);
        assert_eq!(got.len(), 6);
        let want = [(PI, phi1), (TAU, 3.0 * phi1), (PI, phi1)];
        for (g, w) in got[3..].iter().zip(want.iter()) {
            assert!((g.0 - w.0).abs() < 1e-12 && (g.1 - w.1).abs() < 1e-12);
        }
    }

    #[test]
    fn durations_are_angle_over_amplitude() {
        let seq = build_sequence(SequenceId::Bb1, PI, OMEGA).unwrap();
        assert!((seq.duration() - 5.0 * PI / OMEGA).abs() < 1e-18);
        let dcg = build_sequence(SequenceId::Dcg, PI, OMEGA).unwrap();
        let t = dcg.boundary_times();
        let tau = dcg.duration();
        assert!((t[1] - tau / 4.0).abs() < 1e-18);
        assert!((t[2] - 3.0 * tau / 4.0).abs() < 1e-18);
        assert_eq!(dcg.segments[1].amplitude, OMEGA / 2.0);
    }

    #[test]
    fn catalog_realizes_target_on_theta_grid() {
        for id in SequenceId::ALL {
            let thetas: Vec<f64> = if id == SequenceId::Dcg {
                vec![PI]
            } else {
                (1..=10).map(|i| TAU * i as f64 / 10.0).chain([PI / 2.0]).collect()
            };
            for theta in thetas {
                let seq = build_sequence(id, theta, OMEGA).unwrap();
                let target = Mat2::rotation(theta, 0.0);
                let d = phase_distance(&target, &seq.ideal_propagator());
                assert!(d <= 1e-10, "{id} θ={theta}: {d}");
                let tr = (target.dagger() * seq.ideal_propagator()).trace().norm();
                assert!((tr - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn primitive_target_is_minus_i_sigma_x() {
        let seq = build_sequence(SequenceId::Primitive, PI, OMEGA).unwrap();
        let u = seq.target_unitary().unwrap();
        let want = Mat2::pauli_x().scale(Complex64::new(0.0, -1.0));
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn dcg_product_is_minus_target() {
        let seq = build_sequence(SequenceId::Dcg, PI, OMEGA).unwrap();
        let prod = seq.ideal_propagator();
        let want = -Mat2::rotation(PI, 0.0);
        assert!(prod.max_abs_diff(&want) < 1e-14);
        assert!(prod.max_abs_diff(&Mat2::rotation(3.0 * PI, 0.0)) < 1e-14);
        seq.target_unitary().unwrap();
    }

    #[test]
    fn corrupted_sequence_is_rejected() {
        let mut seq = build_sequence(SequenceId::Corpse, PI, OMEGA).unwrap();
        seq.segments[1].phase += 1e-3;
        assert!(matches!(seq.target_unitary(), Err(Error::TargetMismatch { .. })));
    }

    #[test]
    fn build_errors() {
        assert!(matches!("XY4".parse::<SequenceId>(), Err(Error::UnknownSequence(_))));
        assert!(build_sequence(SequenceId::Sk1, 0.0, OMEGA).is_err());
        assert!(build_sequence(SequenceId::Sk1, 7.0, OMEGA).is_err());
        assert!(build_sequence(SequenceId::Sk1, PI, -1.0).is_err());
        assert!(build_sequence(SequenceId::Dcg, PI / 2.0, OMEGA).is_err());
        assert_eq!("cinbb".parse::<SequenceId>().unwrap(), SequenceId::CinBb);
    }

    #[test]
    fn zero_ramp_is_identity() {
        let seq = build_sequence(SequenceId::Sk1, PI, OMEGA).unwrap();
        assert_eq!(trapezoidalize(&seq, 0.0).unwrap(), seq);
    }

    #[test]
    fn primitive_trapezoid_keeps_angle() {
        let seq = build_sequence(SequenceId::Primitive, PI, OMEGA).unwrap();
        let ramp = 0.2 * PI / OMEGA;
        let trap = trapezoidalize(&seq, ramp).unwrap();
        let s = trap.segments[0];
        match s.shape {
            Shape::Trapezoid { ramp: r, hold } => {
                assert!((r - ramp).abs() < 1e-20);
                assert!((hold - 0.8 * PI / OMEGA).abs() < 1e-18);
            }
            Shape::Square => panic!("expected trapezoid"),
        }
        assert!((s.duration - 1.2 * PI / OMEGA).abs() < 1e-18);
        assert!((s.angle() - PI).abs() < 1e-12);
    }

    #[test]
    fn dcg_middle_ramp_is_stretched() {
        let seq = build_sequence(SequenceId::Dcg, PI, OMEGA).unwrap();
        let r1 = 0.1 * PI / OMEGA;
        let trap = trapezoidalize(&seq, r1).unwrap();
        let (Shape::Trapezoid { ramp: ra, hold: wa }, Shape::Trapezoid { ramp: rb, hold: wb }) =
            (trap.segments[0].shape, trap.segments[1].shape)
        else {
            panic!("expected trapezoids");
        };
        assert!((rb - 0.2 * PI / OMEGA).abs() < 1e-18);
        assert!((rb - 2.0 * ra).abs() < 1e-18);
        assert!((wb - 2.0 * wa).abs() < 1e-18);
        assert_eq!(trap.segments[1].amplitude, OMEGA / 2.0);
    }

    #[test]
    fn ramp_too_large() {
        let seq = build_sequence(SequenceId::Primitive, PI, OMEGA).unwrap();
        assert!(matches!(
            trapezoidalize(&seq, PI / OMEGA),
            Err(Error::RampTooLarge { .. })
        ));
    }

    #[test]
    fn square_discretization_one_step_per_segment() {
        let seq = build_sequence(SequenceId::Sk1, PI, OMEGA).unwrap();
        let c = discretize(&seq, 1).unwrap();
        assert_eq!(c.steps.len(), 3);
        for (step, seg) in c.steps.iter().zip(&seq.segments) {
            assert_eq!(step.dt, seg.duration);
            assert_eq!(step.amplitude, seg.amplitude);
            assert_eq!(step.phase, seg.phase);
        }
        assert!(discretize(&seq, 0).is_err());
    }

    #[test]
    fn trapezoid_ramp_midpoints() {
        let seq = build_sequence(SequenceId::Primitive, PI, OMEGA).unwrap();
        // r = w: r + w = π/Ω.
        let trap = trapezoidalize(&seq, 0.5 * PI / OMEGA).unwrap();
        let c = discretize(&trap, 4).unwrap();
        assert_eq!(c.steps.len(), 12);
        let ramp: Vec<f64> = c.steps[..4].iter().map(|s| s.amplitude / OMEGA).collect();
        assert_eq!(ramp, vec![0.125, 0.375, 0.625, 0.875]);
        let down: Vec<f64> = c.steps[8..].iter().map(|s| s.amplitude / OMEGA).collect();
        assert_eq!(down, vec![0.875, 0.625, 0.375, 0.125]);
        assert!((c.duration() - trap.duration()).abs() <= 1e-12 * trap.duration());
        let angle: f64 = c.steps.iter().map(|s| s.amplitude * s.dt).sum();
        assert!((angle - PI).abs() < 1e-12);
        assert!(phase_distance(&c.ideal_propagator(), &Mat2::rotation(PI, 0.0)) < 1e-10);
    }

    #[test]
    fn square_equivalent_keeps_timing() {
        let seq = build_sequence(SequenceId::Sk1, PI, OMEGA).unwrap();
        let trap = trapezoidalize(&seq, 0.25 * PI / OMEGA).unwrap();
        let sq = trap.square_equivalent();
        assert!(sq.is_square());
        assert_eq!(sq.boundary_times(), trap.boundary_times());
        sq.target_unitary().unwrap();
    }

    #[test]
    fn sequence_json_config() {
        let cfg = SequenceConfig::from_json(
            r#"{"name": "CORPSE", "theta": 3.141592653589793, "omega": 1.5e6, "shape": {"ramp": 1e-7}}"#,
        )
        .unwrap();
        let seq = cfg.build().unwrap();
        assert_eq!(seq.name, SequenceId::Corpse);
        assert!(!seq.is_square());
        let plain = SequenceConfig::from_json(r#"{"name": "SK1", "theta": 1.0, "omega": 2.0}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!(plain.is_square());
    }
}
