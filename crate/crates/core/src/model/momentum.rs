//! Momentum-space (dual) form of Models 1 and 2 and the PT-symmetry check.
//!
//! With `ψ_n = Σ_ℓ e^{-i2παℓn} φ_ℓ`, the hopping becomes diagonal and the
//! onsite term couples modes two steps apart:
//!
//! ```text
//! Λ_ℓ = (J_L e^{-i2παℓ} + J_R e^{i2παℓ} + V cos φ) σ0 − V sin φ σx
//! Ξ   = (V/2) (cos φ σ0 + sin φ σx − i sin φ σy − i sin φ σz)
//! ```
//!
//! `Ξ` sits in block `(ℓ, ℓ+2)` and `Ξ†` in block `(ℓ, ℓ-2)`, indices mod `L`.

use faer::Mat;
use num_complex::Complex64 as C64;

use super::pauli::{pt_rotation, Mat2, Pauli};
use super::{Boundary, HamiltonianMatrix, ModelKind, ModelSpec};
use crate::error::{Error, Result};

/// `(Λ_ℓ, Ξ)` for mode `ℓ`.
pub fn momentum_blocks(spec: &ModelSpec, ell: usize) -> (Mat2, Mat2) {
    let (jl, jr) = spec.hoppings();
    let k = spec.alpha.phase(ell as i64);
    let wave = C64::from_polar(1.0, -k);
    let (s, c) = spec.phi.sin_cos();
    let v = spec.v;
    let lambda = Mat2::identity().scale(jl * wave + jr * wave.conj() + v * c)
        + Mat2::pauli(Pauli::X).scale(C64::new(-v * s, 0.0));
    (lambda, coupling(v, spec.phi))
}

fn coupling(v: f64, phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    let i = C64::new(0.0, 1.0);
    (Mat2::identity().scale(C64::new(c, 0.0))
        + Mat2::pauli(Pauli::X).scale(C64::new(s, 0.0))
        + Mat2::pauli(Pauli::Y).scale(-i * s)
        + Mat2::pauli(Pauli::Z).scale(-i * s))
    .scale(C64::new(v / 2.0, 0.0))
}

/// Momentum-space Hamiltonian of a periodic Model 1 or Model 2 ring.
pub fn build_momentum_hamiltonian(spec: &ModelSpec) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    if !matches!(spec.kind, ModelKind::Model1 | ModelKind::Model2) {
        return Err(Error::InvalidSpec(format!("no momentum form for {}", spec.kind)));
    }
    if spec.boundary != Boundary::Periodic {
        return Err(Error::InvalidSpec("momentum form needs periodic boundaries".into()));
    }
    let l = spec.len;
    let mut m = Mat::<C64>::zeros(2 * l, 2 * l);
    let add = |m: &mut Mat<C64>, row: usize, col: usize, b: &Mat2| {
        for a in 0..2 {
            for c in 0..2 {
                m[(2 * row + a, 2 * col + c)] += b.0[a][c];
            }
        }
    };
    for ell in 0..l {
        let (lambda, xi) = momentum_blocks(spec, ell);
        add(&mut m, ell, ell, &lambda);
        add(&mut m, ell, (ell + 2) % l, &xi);
        add(&mut m, ell, (ell + l - 2) % l, &xi.dagger());
    }
    Ok(HamiltonianMatrix { matrix: m, spec: spec.clone(), orbitals: 2 })
}

/// Outcome of the PT-symmetry algebra check.
#[derive(Clone, Debug)]
pub struct PtReport {
    /// `U σy U† = σz`.
    pub rotates_y_to_z: bool,
    /// `U σz U† = −σy`.
    pub rotates_z_to_minus_y: bool,
    /// `U σx U† = σx`.
    pub fixes_x: bool,
    /// The antiunitary `ℓ → −ℓ` combined with `U† K` maps every sampled `Λ`
    /// and `Ξ` block onto itself. With modes `e^{-i2παℓn}` the spin part of
    /// the momentum-space PT operator is `U†` rather than `U`.
    pub momentum_blocks_invariant: bool,
    /// Largest residual across all checks.
    pub max_residual: f64,
}

impl PtReport {
    pub fn passed(&self) -> bool {
        self.rotates_y_to_z && self.rotates_z_to_minus_y && self.fixes_x && self.momentum_blocks_invariant
    }
}

/// Verifies the spin rotation behind the PT symmetry and its action on the
/// momentum-space blocks of Models 1 and 2 over a fixed parameter sample.
pub fn pt_operator_check() -> PtReport {
    const TOL: f64 = 1e-12;
    let u = pt_rotation();
    let ud = u.dagger();
    let conj = |m: Mat2| u * m * ud;
    let r_yz = conj(Mat2::pauli(Pauli::Y)).max_abs_diff(Mat2::pauli(Pauli::Z));
    let r_zy = conj(Mat2::pauli(Pauli::Z)).max_abs_diff(Mat2::pauli(Pauli::Y).scale(C64::new(-1.0, 0.0)));
    let r_x = conj(Mat2::pauli(Pauli::X)).max_abs_diff(Mat2::pauli(Pauli::X));

    let back = |m: Mat2| ud * m * u;
    let mut r_blocks = 0.0f64;
    for kind in [ModelKind::Model1, ModelKind::Model2] {
        for &(v, phi, beta) in &[(1.0, std::f64::consts::FRAC_PI_3, 0.0), (2.5, -0.7, 0.4), (0.3, 2.9, -1.2)] {
            let spec = ModelSpec::fibonacci(kind, 7).with_j(0.8).with_v(v).with_phi(phi).with_beta(beta);
            let l = spec.len;
            for ell in 0..l {
                let mirror = (l - ell) % l;
                let (lambda, xi) = momentum_blocks(&spec, ell);
                let (lambda_m, _) = momentum_blocks(&spec, mirror);
                // block (ℓ, ℓ+2) is the image of block (−ℓ, −ℓ−2) = Ξ†
                r_blocks = r_blocks.max(back(lambda_m.conj()).max_abs_diff(lambda));
                r_blocks = r_blocks.max(back(xi.dagger().conj()).max_abs_diff(xi));
                r_blocks = r_blocks.max(back(xi.conj()).max_abs_diff(xi.dagger()));
            }
        }
    }
    PtReport {
        rotates_y_to_z: r_yz < TOL,
        rotates_z_to_minus_y: r_zy < TOL,
        fixes_x: r_x < TOL,
        momentum_blocks_invariant: r_blocks < TOL,
        max_residual: r_yz.max(r_zy).max(r_x).max(r_blocks),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn coupling_at_quarter_turn() {
        let i = C64::new(0.0, 1.0);
        let want = Mat2::pauli(Pauli::X) - Mat2::pauli(Pauli::Y).scale(i) - Mat2::pauli(Pauli::Z).scale(i);
        assert!(coupling(2.0, FRAC_PI_2).max_abs_diff(want) < 1e-15);
    }

    #[test]
    fn pt_check_passes() {
        let report = pt_operator_check();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn rejects_model3_and_open_chains() {
        let s = ModelSpec::fibonacci(ModelKind::Model3, 5);
        assert!(build_momentum_hamiltonian(&s).is_err());
        let s = ModelSpec::fibonacci(ModelKind::Model1, 5).with_boundary(Boundary::Open);
        assert!(build_momentum_hamiltonian(&s).is_err());
    }

    #[test]
    fn free_ring_is_diagonal() {
        let s = ModelSpec::fibonacci(ModelKind::Model2, 6).with_v(0.0).with_j(1.0);
        let h = build_momentum_hamiltonian(&s).unwrap().matrix;
        for r in 0..h.nrows() {
            for c in 0..h.ncols() {
                if r != c {
                    assert_eq!(h[(r, c)], C64::new(0.0, 0.0));
                }
            }
            let ell = r / 2;
            let want = 2.0 * s.alpha.phase(ell as i64).cos();
            assert!((h[(r, r)] - C64::new(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn dual_spectrum_matches_real_space() {
        use crate::model::build_hamiltonian;
        use crate::spectrum::decompose;
        for spec in [
            ModelSpec::fibonacci(ModelKind::Model1, 5).with_j(0.5).with_phi(std::f64::consts::PI / 10.0),
            ModelSpec::fibonacci(ModelKind::Model2, 6).with_v(6.0).with_phi(FRAC_PI_2).with_beta(1.1),
        ] {
            let a = decompose(&build_hamiltonian(&spec).unwrap()).unwrap().eigenvalues;
            let mut b = decompose(&build_momentum_hamiltonian(&spec).unwrap()).unwrap().eigenvalues;
            for e in a {
                let (k, d) = b.iter().enumerate().map(|(k, f)| (k, (e - f).norm())).min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
                assert!(d < 1e-8, "{e} unmatched ({d})");
                b.swap_remove(k);
            }
        }
    }
}
