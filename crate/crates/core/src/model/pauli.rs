//! 2×2 spin algebra: Pauli matrices, closed-form SU(2) exponentials, the
//! non-Abelian phase matrix and its onsite Pauli decomposition.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Dense 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn pauli(axis: Pauli) -> Self {
        match axis {
            Pauli::X => Mat2::new(ZERO, ONE, ONE, ZERO),
            Pauli::Y => Mat2::new(ZERO, -I, I, ZERO),
            Pauli::Z => Mat2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    pub fn scale(self, s: C64) -> Self {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn dagger(self) -> Self {
        let m = self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn conj(self) -> Self {
        let m = self.0;
        Mat2([[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]])
    }

    pub fn transpose(self) -> Self {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn det(self) -> C64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(self) -> Option<Self> {
        let d = self.det();
        if d == ZERO {
            return None;
        }
        let m = self.0;
        Some(Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]).scale(d.inv()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(self, other: Self) -> f64 {
        let d = self - other;
        d.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Coefficients `(c0, cx, cy, cz)` with `self = c0 σ0 + cx σx + cy σy + cz σz`.
    pub fn pauli_coefficients(self) -> [C64; 4] {
        let m = self.0;
        let half = C64::new(0.5, 0.0);
        [
            (m[0][0] + m[1][1]) * half,
            (m[0][1] + m[1][0]) * half,
            (m[1][0] - m[0][1]) * half * (-I),
            (m[0][0] - m[1][1]) * half,
        ]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

/// `exp(i θ σ)` for a Pauli axis, `cos θ σ0 + i sin θ σ`. Valid for complex θ.
pub fn exp_i_pauli(theta: C64, axis: Pauli) -> Mat2 {
    Mat2::identity().scale(theta.cos()) + Mat2::pauli(axis).scale(I * theta.sin())
}

/// The non-Abelian phase matrix `Θ = e^{iθσy} e^{iθσz}`.
pub fn theta_matrix(theta: C64) -> Mat2 {
    exp_i_pauli(theta, Pauli::Y) * exp_i_pauli(theta, Pauli::Z)
}

/// Factors in the opposite order, `e^{iθσz} e^{iθσy}`.
pub fn theta_matrix_reversed(theta: C64) -> Mat2 {
    exp_i_pauli(theta, Pauli::Z) * exp_i_pauli(theta, Pauli::Y)
}

/// `Θ^{-1} = e^{-iθσz} e^{-iθσy}`, exact for complex θ.
pub fn theta_matrix_inverse(theta: C64) -> Mat2 {
    exp_i_pauli(-theta, Pauli::Z) * exp_i_pauli(-theta, Pauli::Y)
}

/// Commutator `[Θ, Θ̃]` of the two factor orderings; nonzero exactly when the
/// phase modulation is genuinely non-Abelian.
pub fn non_abelian_commutator(theta: C64) -> Mat2 {
    let a = theta_matrix(theta);
    let b = theta_matrix_reversed(theta);
    a * b - b * a
}

/// Pauli decomposition of the onsite term `e^{-iφ}Θ + e^{iφ}Θ^{-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnsiteBlock {
    pub d0: C64,
    pub dx: C64,
    pub dy: C64,
    pub dz: C64,
}

impl OnsiteBlock {
    pub fn to_matrix(&self) -> Mat2 {
        Mat2::identity().scale(self.d0)
            + Mat2::pauli(Pauli::X).scale(self.dx)
            + Mat2::pauli(Pauli::Y).scale(self.dy)
            + Mat2::pauli(Pauli::Z).scale(self.dz)
    }

    /// True when the spin-flip terms vanish, i.e. the block is diagonal.
    pub fn is_spin_diagonal(&self) -> bool {
        self.dx == ZERO && self.dy == ZERO
    }
}

/// Closed-form coefficients of the onsite term:
///
/// ```text
/// d0 = cos φ (cos 2θ + 1)
/// dx = sin φ (cos 2θ - 1)
/// dy = dz = sin φ sin 2θ
/// ```
pub fn onsite_block(theta: C64, phi: f64) -> OnsiteBlock {
    let (s, c) = phi.sin_cos();
    // exact zeros at φ ∈ {0, ±π} keep the spin sectors decoupled bit-for-bit
    let (s, c) = (snap_unit(s), snap_unit(c));
    let cos2 = (theta * 2.0).cos();
    let sin2 = (theta * 2.0).sin();
    let d_yz = sin2 * s;
    OnsiteBlock { d0: (cos2 + 1.0) * c, dx: (cos2 - 1.0) * s, dy: d_yz, dz: d_yz }
}

fn snap_unit(x: f64) -> f64 {
    if x.abs() < 1e-15 {
        0.0
    } else if (x.abs() - 1.0).abs() < 1e-15 {
        x.signum()
    } else {
        x
    }
}

/// Direct evaluation of `e^{-iφ}Θ + e^{iφ}Θ^{-1}` from the matrix exponentials.
pub fn onsite_direct(theta: C64, phi: f64) -> Mat2 {
    let e = C64::from_polar(1.0, -phi);
    theta_matrix(theta).scale(e) + theta_matrix_inverse(theta).scale(e.conj())
}

/// The spin rotation `U = e^{-i(π/4)σx}` that carries σy → σz and σz → −σy.
pub fn pt_rotation() -> Mat2 {
    exp_i_pauli(C64::new(-std::f64::consts::FRAC_PI_4, 0.0), Pauli::X)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Brute-force matrix exponential by Taylor series, independent of the
    /// closed form.
    fn expm_series(m: Mat2) -> Mat2 {
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..60 {
            term = (term * m).scale(c(1.0 / k as f64, 0.0));
            sum = sum + term;
        }
        sum
    }

    #[test]
    fn theta_zero_is_identity() {
        assert!(theta_matrix(c(0.0, 0.0)).max_abs_diff(Mat2::identity()) < 1e-15);
    }

    #[test]
    fn theta_half_pi_is_minus_i_sigma_x() {
        let got = theta_matrix(c(FRAC_PI_2, 0.0));
        let want = Mat2::pauli(Pauli::X).scale(-I);
        assert!(got.max_abs_diff(want) < 1e-12);
        // the same product via series exponentials
        let th = c(FRAC_PI_2, 0.0);
        let series = expm_series(Mat2::pauli(Pauli::Y).scale(I * th))
            * expm_series(Mat2::pauli(Pauli::Z).scale(I * th));
        assert!(series.max_abs_diff(want) < 1e-12);
    }

    #[test]
    fn closed_form_matches_series_for_complex_angles() {
        for &th in &[c(0.3, 0.0), c(1.1, 0.4), c(-2.0, -0.7)] {
            for axis in [Pauli::X, Pauli::Y, Pauli::Z] {
                let series = expm_series(Mat2::pauli(axis).scale(I * th));
                assert!(exp_i_pauli(th, axis).max_abs_diff(series) < 1e-12);
            }
        }
    }

    #[test]
    fn real_theta_gives_unitary() {
        let t = theta_matrix(c(0.77, 0.0));
        assert!((t * t.dagger()).max_abs_diff(Mat2::identity()) < 1e-14);
    }

    #[test]
    fn non_abelian_condition() {
        assert!(non_abelian_commutator(c(FRAC_PI_4, 0.0)).max_abs() > 0.1);
        for k in 0..4 {
            let th = c(k as f64 * FRAC_PI_2, 0.0);
            assert!(non_abelian_commutator(th).max_abs() < 1e-12, "θ = {k}π/2");
        }
    }

    #[test]
    fn inverse_is_inverse() {
        let th = c(0.4, 0.25);
        let p = theta_matrix(th) * theta_matrix_inverse(th);
        assert!(p.max_abs_diff(Mat2::identity()) < 1e-13);
    }

    #[test]
    fn onsite_examples() {
        let b = onsite_block(c(0.0, 0.0), 0.0);
        assert_eq!((b.d0, b.dx, b.dy, b.dz), (c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));

        let b = onsite_block(c(FRAC_PI_4, 0.0), FRAC_PI_2);
        assert!((b.d0 - c(0.0, 0.0)).norm() < 1e-15);
        assert!((b.dx - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((b.dy - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(b.dy, b.dz);
    }

    #[test]
    fn onsite_imaginary_angle() {
        // cos(2iγ) = cosh 2γ, sin(2iγ) = i sinh 2γ, evaluated with real
        // hyperbolics as the independent route
        let gamma = 0.5_f64;
        let b = onsite_block(c(0.0, gamma), FRAC_PI_2);
        assert!(b.d0.norm() < 1e-15);
        assert!((b.dx - c((2.0 * gamma).cosh() - 1.0, 0.0)).norm() < 1e-14);
        assert!((b.dy - c(0.0, (2.0 * gamma).sinh())).norm() < 1e-14);
        assert!((b.dx.re - 0.543_080_634_815_243_7).abs() < 1e-12);
        assert!((b.dy.im - 1.175_201_193_643_801_4).abs() < 1e-12);
    }

    #[test]
    fn pauli_coefficients_roundtrip() {
        let m = Mat2::new(c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0), c(0.2, 0.0));
        let [a, x, y, z] = m.pauli_coefficients();
        let back = OnsiteBlock { d0: a, dx: x, dy: y, dz: z }.to_matrix();
        assert!(back.max_abs_diff(m) < 1e-15);
    }

    #[test]
    fn rotation_maps_y_to_z() {
        let u = pt_rotation();
        let sy = Mat2::pauli(Pauli::Y);
        let sz = Mat2::pauli(Pauli::Z);
        assert!((u * sy * u.dagger()).max_abs_diff(sz) < 1e-15);
        assert!((u * sz * u.dagger()).max_abs_diff(sy.scale(-ONE)) < 1e-15);
    }
}
