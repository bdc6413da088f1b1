// SPDX-License-Identifier: Apache-2.0

//! Small fixed-size linear algebra: real 3-vectors, SO(3) matrices and
//! 2×2 complex matrices for single-qubit propagators.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const ZERO3: Vec3 = [0.0; 3];
pub const IDENTITY3: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Row vector times matrix: `(v M)_j = Σ_i v_i M_ij`.
pub fn vec_mat(v: &Vec3, m: &Mat3) -> Vec3 {
    let mut out = ZERO3;
    for (i, vi) in v.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            *o += vi * m[i][j];
        }
    }
    out
}

pub fn mat_mul3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose3(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn det3(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Largest entry of `|MᵀM − I|`.
pub fn orthogonality_defect(a: &Mat3) -> f64 {
    let p = mat_mul3(&transpose3(a), a);
    let mut worst: f64 = 0.0;
    for (i, row) in p.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((x - target).abs());
        }
    }
    worst
}

/// Active rotation of Bloch vectors by `angle` about unit `axis` (Rodrigues).
pub fn rotation_matrix(angle: f64, axis: &Vec3) -> Mat3 {
    let (s, c) = angle.sin_cos();
    let [x, y, z] = *axis;
    let t = 1.0 - c;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

/// Equatorial rotation axis `(cos φ, sin φ, 0)`.
pub fn equatorial_axis(phi: f64) -> Vec3 {
    let (s, c) = phi.sin_cos();
    [c, s, 0.0]
}

/// 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[C1, C0], [C0, C1]])
    }

    pub fn zeros() -> Self {
        Mat2([[C0, C0], [C0, C0]])
    }

    pub fn pauli_x() -> Self {
        Mat2([[C0, C1], [C1, C0]])
    }

    pub fn pauli_y() -> Self {
        Mat2([[C0, -CI], [CI, C0]])
    }

    pub fn pauli_z() -> Self {
        Mat2([[C1, C0], [C0, -C1]])
    }

    pub fn pauli(k: usize) -> Self {
        match k {
            0 => Self::pauli_x(),
            1 => Self::pauli_y(),
            2 => Self::pauli_z(),
            _ => panic!("pauli index {k} out of range"),
        }
    }

    /// `exp(-i t h·σ)` for a real 3-vector `h`.
    pub fn exp_su2(h: &Vec3, t: f64) -> Self {
        let mag = norm(h);
        if mag == 0.0 {
            return Self::identity();
        }
        let angle = mag * t;
        let (s, c) = angle.sin_cos();
        let n = scale(h, 1.0 / mag);
        let nz = Complex64::new(0.0, -s * n[2]);
        let off = Complex64::new(-s * n[1], -s * n[0]);
        // c I - i s (n·σ)
        Mat2([
            [Complex64::new(c, 0.0) + nz, off],
            [Complex64::new(s * n[1], -s * n[0]), Complex64::new(c, 0.0) - nz],
        ])
    }

    /// `R(θ, φ) = exp[-iθ(cos φ σx + sin φ σy)/2]`.
    pub fn rotation(theta: f64, phi: f64) -> Self {
        Self::exp_su2(&equatorial_axis(phi), theta / 2.0)
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Decomposes `M = a₀ I + Σ_k a_k σ_k`.
    pub fn pauli_coefficients(&self) -> (Complex64, [Complex64; 3]) {
        let m = &self.0;
        let a0 = (m[0][0] + m[1][1]) * 0.5;
        let ax = (m[0][1] + m[1][0]) * 0.5;
        let ay = (m[0][1] - m[1][0]) * Complex64::new(0.0, 0.5);
        let az = (m[0][0] - m[1][1]) * 0.5;
        (a0, [ax, ay, az])
    }

    /// Largest entry of `|M†M − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.dagger() * *self;
        let id = Self::identity();
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((p.0[i][j] - id.0[i][j]).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;

    fn neg(self) -> Mat2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Splits a unitary into its rotation angle `λ ∈ [0, π/2]` and unit axis,
/// discarding global phase (`V ≃ ±(cos λ I − i sin λ n·σ)`).
///
/// The angle is taken from `atan2` of the vector and scalar parts, which
/// keeps full relative precision when `λ` is tiny.
pub fn rotation_angle_axis(v: &Mat2) -> (f64, Vec3) {
    let d = v.det().sqrt();
    let w = if d.norm() > 0.0 { v.scale(d.inv()) } else { *v };
    let (a0, a) = w.pauli_coefficients();
    // For SU(2): a0 = cos λ, a_k = -i sin λ n_k.
    let vecpart = [-a[0].im, -a[1].im, -a[2].im];
    let s = norm(&vecpart);
    let c = a0.re;
    let mut angle = s.atan2(c.abs());
    let sign = if c < 0.0 { -1.0 } else { 1.0 };
    let axis = if s > 0.0 {
        scale(&vecpart, sign / s)
    } else {
        [0.0, 0.0, 1.0]
    };
    if angle > std::f64::consts::FRAC_PI_2 {
        angle = std::f64::consts::PI - angle;
    }
    (angle, axis)
}

/// Operator-norm distance between `a` and `b` after optimal global phase.
pub fn phase_distance(a: &Mat2, b: &Mat2) -> f64 {
    let (angle, _) = rotation_angle_axis(&(a.dagger() * *b));
    2.0 * (angle / 2.0).sin()
}

/// SO(3) image `Λ_ij = Tr[U† σ_i U σ_j] / 2` of a 2×2 unitary.
pub fn so3_image(u: &Mat2) -> Mat3 {
    let ud = u.dagger();
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        let conj = ud * Mat2::pauli(i) * *u;
        for (j, x) in row.iter_mut().enumerate() {
            *x = (conj * Mat2::pauli(j)).trace().re / 2.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_pi_about_x_is_minus_i_sigma_x() {
        let r = Mat2::rotation(PI, 0.0);
        let expected = Mat2::pauli_x().scale(Complex64::new(0.0, -1.0));
        assert!(r.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn exp_su2_is_unitary_with_unit_det() {
        let u = Mat2::exp_su2(&[0.3, -1.2, 0.7], 2.1);
        assert!(u.unitarity_defect() < 1e-14);
        assert!((u.det() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn so3_image_matches_rodrigues() {
        let (theta, phi) = (1.234, -0.77);
        let from_trace = so3_image(&Mat2::rotation(theta, phi));
        let rod = rotation_matrix(theta, &equatorial_axis(phi));
        for i in 0..3 {
            for j in 0..3 {
                assert!((from_trace[i][j] - rod[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let a = Mat2::rotation(0.9, 0.4);
        let b = a.scale(Complex64::from_polar(1.0, 2.2));
        assert!(phase_distance(&a, &b) < 1e-15);
        assert!(phase_distance(&a, &(-a)) < 1e-15);
    }

    #[test]
    fn phase_distance_resolves_tiny_angles() {
        let a = Mat2::rotation(0.9, 0.4);
        let b = a * Mat2::exp_su2(&[0.0, 0.0, 1.0], 1e-12);
        let d = phase_distance(&a, &b);
        assert!((d - 1e-12).abs() < 1e-15, "{d}");
    }
}
