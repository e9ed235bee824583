//! Self-checks on small lattices: independent routes to the same spectrum,
//! structural symmetries, winding nullity and eigenvector quality.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{
    build_abelian_chains, build_hamiltonian, build_momentum_hamiltonian, pt_operator_check, Approximant, ModelKind,
    ModelSpec,
};
use crate::spectrum::{decompose_matrix, decompose_with, DecomposeOptions};
use crate::topology::{trace_off_spectrum, winding_trace, BaseEnergies, WindingOptions};

/// Largest distance between two spectra after greedily pairing every value
/// of `a` with its nearest unused partner in `b`.
pub fn spectral_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut pool = b.to_vec();
    let mut worst = 0.0f64;
    for e in a {
        let (k, d) = pool
            .iter()
            .enumerate()
            .map(|(k, f)| (k, (e - f).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("same length");
        worst = worst.max(d);
        pool.swap_remove(k);
    }
    worst
}

/// How far a spectrum is from being closed under complex conjugation.
pub fn conjugation_defect(values: &[C64]) -> f64 {
    let conj: Vec<C64> = values.iter().map(|e| e.conj()).collect();
    spectral_distance(values, &conj)
}

/// Eigenvalues through the general complex solver only.
fn plain_eigenvalues(m: &faer::Mat<C64>) -> Result<Vec<C64>> {
    Ok(decompose_matrix(m, 1, false)?.eigenvalues)
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<22} cases={:<4} worst={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.tolerance
        )?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub checks: Vec<CheckOutcome>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub seed: u64,
    /// Random models for the conjugation and eigenvector-quality checks.
    pub n_random: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { seed: 7, n_random: 100 }
    }
}

const FIB_LENGTHS: [usize; 6] = [3, 5, 8, 13, 21, 34];

/// A random periodic model on a Fibonacci ring of at most 34 sites with
/// random flux and V <= 2J. Open chains are left out: the one-way hopping of
/// Model 1 makes them defective. Larger V/J lets the eigenvector condition
/// number of the one-way ring grow like (V/J)^L, past what double precision
/// can bi-orthonormalize.
pub fn random_spec(rng: &mut impl Rng) -> ModelSpec {
    let kind = [ModelKind::Model1, ModelKind::Model2, ModelKind::Model3, ModelKind::AbelianScalar][rng.gen_range(0..4)];
    let q = FIB_LENGTHS[rng.gen_range(0..FIB_LENGTHS.len())];
    let alpha = Approximant::fibonacci_with_denominator(q as u64).expect("Fibonacci length");
    let j = rng.gen_range(0.2..1.5);
    ModelSpec::new(kind, alpha, q)
        .with_flux(rng.gen_range(0.0..TAU))
        .with_j(j)
        .with_v(rng.gen_range(0.0..2.0 * j))
        .with_phi(rng.gen_range(-PI..PI))
        .with_beta(rng.gen_range(-0.8..0.8))
        .with_gamma(rng.gen_range(-0.6..0.6))
}

fn outcome(name: &'static str, worst: f64, tolerance: f64, cases: usize, failures: Vec<String>) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tolerance && failures.is_empty(),
        worst,
        tolerance,
        cases,
        detail: failures.into_iter().take(3).collect::<Vec<_>>().join("; "),
    }
}

/// Real-space and momentum-space spectra of Models 1 and 2 agree.
pub fn check_momentum_duality(rng: &mut impl Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut failures = vec![];
    for kind in [ModelKind::Model1, ModelKind::Model2] {
        for q in [5usize, 8, 13] {
            for _ in 0..3 {
                let spec = ModelSpec::new(kind, Approximant::fibonacci_with_denominator(q as u64).unwrap(), q)
                    .with_j(rng.gen_range(0.2..1.5))
                    .with_v(rng.gen_range(0.0..3.0))
                    .with_phi(rng.gen_range(-PI..PI))
                    .with_beta(rng.gen_range(-1.0..1.0));
                let d = (|| -> Result<f64> {
                    let a = plain_eigenvalues(&build_hamiltonian(&spec)?.matrix)?;
                    let b = plain_eigenvalues(&build_momentum_hamiltonian(&spec)?.matrix)?;
                    Ok(spectral_distance(&a, &b))
                })();
                cases += 1;
                match d {
                    Ok(d) => worst = worst.max(d),
                    Err(e) => failures.push(format!("{kind} L={q}: {e}")),
                }
            }
        }
    }
    outcome("momentum-duality", worst, 1e-8, cases, failures)
}

/// At `φ ∈ {0, π}` the spectrum is the union of the two spin chains.
pub fn check_abelian_union(rng: &mut impl Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut failures = vec![];
    for kind in [ModelKind::Model1, ModelKind::Model2, ModelKind::Model3] {
        for phi in [0.0, PI] {
            for q in [5usize, 8, 13] {
                let spec = ModelSpec::new(kind, Approximant::fibonacci_with_denominator(q as u64).unwrap(), q)
                    .with_j(rng.gen_range(0.2..1.5))
                    .with_v(rng.gen_range(0.0..3.0))
                    .with_phi(phi)
                    .with_beta(rng.gen_range(-1.0..1.0))
                    .with_gamma(rng.gen_range(-0.8..0.8));
                let d = (|| -> Result<f64> {
                    let full = plain_eigenvalues(&build_hamiltonian(&spec)?.matrix)?;
                    let chains = build_abelian_chains(&spec)?;
                    let mut union = plain_eigenvalues(&chains.up)?;
                    union.extend(plain_eigenvalues(&chains.down)?);
                    Ok(spectral_distance(&full, &union))
                })();
                cases += 1;
                match d {
                    Ok(d) => worst = worst.max(d),
                    Err(e) => failures.push(format!("{kind} phi={phi} L={q}: {e}")),
                }
            }
        }
    }
    outcome("abelian-union", worst, 1e-8, cases, failures)
}

/// Periodic spectra without flux are closed under conjugation (relative to
/// `max(1, |E|max)`).
pub fn check_conjugation_closure(rng: &mut impl Rng, n: usize) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut failures = vec![];
    for _ in 0..n {
        let spec = random_spec(rng).with_flux(0.0);
        cases += 1;
        match build_hamiltonian(&spec).and_then(|h| plain_eigenvalues(&h.matrix)) {
            Ok(v) => {
                let scale = v.iter().map(|e| e.norm()).fold(1.0, f64::max);
                worst = worst.max(conjugation_defect(&v) / scale);
            }
            Err(e) => failures.push(format!("{spec:?}: {e}")),
        }
    }
    outcome("conjugation-closure", worst, 1e-8, cases, failures)
}

/// A base energy at least `gap` away from every eigenvalue of every flux
/// sample; `None` if the random draws keep landing on the spectrum.
fn off_spectrum_base(rng: &mut impl Rng, values: &[C64], gap: f64) -> Option<f64> {
    let r = values.iter().map(|e| e.norm()).fold(0.0, f64::max) + 1.0;
    (0..200).map(|_| rng.gen_range(-r..r)).find(|&b| values.iter().all(|e| (e - C64::new(b, 0.0)).norm() > gap))
}

/// Hermitian models never wind.
pub fn check_hermitian_winding(rng: &mut impl Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut failures = vec![];
    for kind in [ModelKind::Model2, ModelKind::Model3, ModelKind::AbelianScalar] {
        for q in [5usize, 8, 13, 21] {
            let spec = ModelSpec::new(kind, Approximant::fibonacci_with_denominator(q as u64).unwrap(), q)
                .with_j(rng.gen_range(0.2..1.5))
                .with_v(rng.gen_range(0.0..3.0))
                .with_phi(rng.gen_range(-PI..PI));
            // Eigenvalues of a Hermitian H(ϑ) move at most ‖∂H/∂ϑ‖ Δϑ between
            // samples, so a base that clears every sampled spectrum by more
            // than that clears the whole loop.
            const SAMPLES: usize = 32;
            let drift = (2.0 * spec.j + 4.0 * spec.v) / q as f64 * (PI / SAMPLES as f64);
            let values: Result<Vec<C64>> = (0..SAMPLES).try_fold(Vec::new(), |mut acc, k| {
                let h = build_hamiltonian(&spec.clone().with_flux(TAU * k as f64 / SAMPLES as f64))?;
                acc.extend(plain_eigenvalues(&h.matrix)?);
                Ok(acc)
            });
            let values = match values {
                Ok(v) => v,
                Err(e) => {
                    failures.push(e.to_string());
                    continue;
                }
            };
            for _ in 0..3 {
                let Some(base) = off_spectrum_base(rng, &values, drift + 1e-3) else { continue };
                cases += 1;
                match winding_trace(&spec, base, &WindingOptions { parallel: false, ..Default::default() }) {
                    Ok(t) => {
                        worst = worst.max(t.total().abs());
                        if t.winding().ok() != Some(0) {
                            failures.push(format!("{kind} L={q} base={base}: {}", t.total()));
                        }
                    }
                    Err(e) => failures.push(format!("{kind} L={q} base={base}: {e}")),
                }
            }
        }
    }
    outcome("hermitian-winding", worst, 1e-3, cases, failures)
}

/// Winding of `det(H(ϑ) - E)` for two spin copies of a clean non-reciprocal
/// ring, from the closed-form plane-wave product on a fine grid.
pub fn clean_ring_winding(spec: &ModelSpec, base: f64, grid: usize) -> f64 {
    let (jl, jr) = spec.bare_hoppings();
    let l = spec.len as f64;
    let log_det = |t: f64| -> C64 {
        (0..spec.len)
            .map(|m| {
                let k = TAU * m as f64 / l;
                let e = jl * C64::from_polar(1.0, k - t / l) + jr * C64::from_polar(1.0, t / l - k);
                2.0 * (e - base).ln()
            })
            .sum()
    };
    let mut acc = 0.0;
    let mut prev = log_det(0.0).im;
    for s in 1..=grid {
        let cur = log_det(TAU * s as f64 / grid as f64).im;
        let mut d = cur - prev;
        d -= TAU * (d / TAU).round();
        acc += d;
        prev = cur;
    }
    acc / TAU
}

/// The banded-LU winding of a free non-reciprocal ring matches the plane-wave
/// product.
pub fn check_clean_ring_winding() -> CheckOutcome {
    let spec = ModelSpec::new(ModelKind::Model2, Approximant::fibonacci_with_denominator(8).unwrap(), 8)
        .with_v(0.0)
        .with_beta(0.5);
    let reference = clean_ring_winding(&spec, 0.0, 10_000);
    let got = winding_trace(&spec, 0.0, &WindingOptions { parallel: false, ..Default::default() });
    let (worst, failures) = match got {
        Ok(t) => {
            let ok = t.winding().ok() == Some(reference.round() as i64) && reference.round() == 2.0;
            ((t.total() - reference).abs(), if ok { vec![] } else { vec![format!("{} vs {reference}", t.total())] })
        }
        Err(e) => (f64::INFINITY, vec![e.to_string()]),
    };
    outcome("clean-ring-winding", worst, 1e-3, 1, failures)
}

/// Bi-orthonormality, completeness, unit right vectors and residuals.
pub fn check_eigenvector_quality(rng: &mut impl Rng, n: usize) -> CheckOutcome {
    let mut worst = 0.0f64;
    let mut failures = vec![];
    for _ in 0..n {
        let spec = random_spec(rng);
        let r = (|| -> Result<[f64; 4]> {
            let h = build_hamiltonian(&spec)?;
            let dec = decompose_with(&h, &DecomposeOptions::default())?;
            let norm_h = h.matrix.norm_l2().max(f64::MIN_POSITIVE);
            let unit = (0..dec.len()).map(|j| (dec.right.col(j).norm_l2() - 1.0).abs()).fold(0.0, f64::max);
            Ok([
                dec.binormalization_defect() / 1e-8,
                dec.completeness_defect() / 1e-6,
                unit / 1e-12,
                dec.max_residual(&h.matrix) / (1e-8 * norm_h),
            ])
        })();
        match r {
            Ok(ratios) => {
                let m = ratios.into_iter().fold(0.0, f64::max);
                if m > 1.0 {
                    failures.push(format!(
                        "{} L={} J={:.3} V={:.3} phi={:.3} flux={:.3} ratios {:?}",
                        spec.kind,
                        spec.len,
                        spec.j,
                        spec.v,
                        spec.phi,
                        spec.flux,
                        ratios.map(|r| format!("{r:.2e}"))
                    ));
                }
                worst = worst.max(m);
            }
            Err(e) => failures.push(format!("{} L={}: {e}", spec.kind, spec.len)),
        }
    }
    // worst is reported as a fraction of each quantity's own tolerance
    outcome("eigenvector-quality", worst, 1.0, n, failures)
}

pub fn check_pt_algebra() -> CheckOutcome {
    let r = pt_operator_check();
    let failures = if r.passed() { vec![] } else { vec![format!("{r:?}")] };
    outcome("pt-algebra", r.max_residual, 1e-12, 1, failures)
}

/// Runs every check.
pub fn run_oracle_suite(opts: &OracleOptions) -> OracleReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    OracleReport {
        checks: vec![
            check_pt_algebra(),
            check_momentum_duality(&mut rng),
            check_abelian_union(&mut rng),
            check_conjugation_closure(&mut rng, opts.n_random),
            check_hermitian_winding(&mut rng),
            check_clean_ring_winding(),
            check_eigenvector_quality(&mut rng, opts.n_random),
        ],
    }
}

/// Windings around `bases` at `n_theta` and `2 n_theta` initial steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridStability {
    pub coarse: (i64, i64),
    pub fine: (i64, i64),
    /// Largest distance of any unrounded total from an integer.
    pub quantization_error: f64,
}

impl GridStability {
    pub fn stable(&self) -> bool {
        self.coarse == self.fine && self.quantization_error <= 1e-3
    }
}

pub fn winding_grid_stability(spec: &ModelSpec, bases: BaseEnergies, n_theta: usize) -> Result<GridStability> {
    let mut quant = 0.0f64;
    let mut wind = |n: usize| -> Result<(i64, i64)> {
        let opts = WindingOptions { n_theta: n, parallel: false, ..Default::default() };
        let t1 = trace_off_spectrum(spec, bases.e1, &opts)?;
        let t2 = trace_off_spectrum(spec, bases.e2, &opts)?;
        quant = quant.max(t1.quantization_error()).max(t2.quantization_error());
        Ok((t1.total().round() as i64, t2.total().round() as i64))
    };
    let coarse = wind(n_theta)?;
    let fine = wind(2 * n_theta)?;
    Ok(GridStability { coarse, fine, quantization_error: quant })
}
