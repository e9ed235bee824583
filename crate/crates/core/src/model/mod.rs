//! Lattice models: parameterization, real-space Hamiltonians and the
//! spin-decoupled Abelian chains.
//!
//! Sites are labelled `n = 1..=L`; site `n` occupies rows `2(n-1)` (spin up)
//! and `2(n-1) + 1` (spin down) of the dense matrix. The hopping `J_L` sits on
//! the block superdiagonal (`ψ_{n+1} → row n`) and `J_R` on the subdiagonal.

mod config;
mod momentum;
pub mod pauli;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use config::{format_angle, parse_angle};
pub(crate) use config::kv_lines;
pub use momentum::{build_momentum_hamiltonian, pt_operator_check, momentum_blocks, PtReport};
use pauli::{onsite_block, Mat2, OnsiteBlock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Unidirectional hopping `(J_L, J_R) = (J, 0)`.
    Model1,
    /// Nonreciprocal hopping `(J e^{-β}, J e^{β})`.
    Model2,
    /// Reciprocal hopping with complex phase `θ_n = 2παn + iγ`.
    Model3,
    /// Single-component chain with hopping `(J e^{-β}, J e^{β})` and
    /// potential `V cos(2παn + iγ)`.
    AbelianScalar,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Model1 => "model1",
            ModelKind::Model2 => "model2",
            ModelKind::Model3 => "model3",
            ModelKind::AbelianScalar => "abelian",
        }
    }

    /// Orbitals per site.
    pub fn orbitals(self) -> usize {
        match self {
            ModelKind::AbelianScalar => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "model1" => Ok(ModelKind::Model1),
            "2" | "model2" => Ok(ModelKind::Model2),
            "3" | "model3" => Ok(ModelKind::Model3),
            "abelian" | "abelianscalar" | "scalar" => Ok(ModelKind::AbelianScalar),
            other => Err(Error::invalid("kind", format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "pbc",
            Boundary::Open => "obc",
        }
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pbc" | "periodic" => Ok(Boundary::Periodic),
            "obc" | "open" => Ok(Boundary::Open),
            other => Err(Error::invalid("boundary", format!("expected pbc or obc, got `{other}`"))),
        }
    }
}

/// Rational stand-in `p/q` for the irrational modulation frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Approximant {
    pub p: u64,
    pub q: u64,
}

impl Approximant {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("alpha_q", "denominator must be positive"));
        }
        if gcd(p, q) != 1 {
            return Err(Error::invalid("alpha_p", format!("{p}/{q} is not in lowest terms")));
        }
        Ok(Approximant { p, q })
    }

    /// `F_{k-1} / F_k` with `F_1 = F_2 = 1`.
    pub fn fibonacci(k: u32) -> Self {
        let (a, b) = fibonacci_pair(k);
        Approximant { p: a, q: b }
    }

    /// Fibonacci approximant whose denominator is `q`, if `q` is a Fibonacci number.
    pub fn fibonacci_with_denominator(q: u64) -> Option<Self> {
        (2..90).map(Approximant::fibonacci).take_while(|a| a.q <= q).find(|a| a.q == q)
    }

    pub fn value(self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// `2π α n` reduced modulo `2π` in exact integer arithmetic.
    pub fn phase(self, n: i64) -> f64 {
        let q = self.q as i128;
        let r = ((self.p as i128 * n as i128) % q + q) % q;
        2.0 * PI * r as f64 / self.q as f64
    }
}

fn fibonacci_pair(k: u32) -> (u64, u64) {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 1..k {
        let next = a + b;
        a = b;
        b = next;
    }
    (a, b)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Full parameterization of one Hamiltonian instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub j: f64,
    pub v: f64,
    pub phi: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha: Approximant,
    pub len: usize,
    pub boundary: Boundary,
    /// Threaded flux `ϑ`.
    pub flux: f64,
    /// Divides the flux added to `θ_n` in Model 3; `None` means `L`.
    pub flux_divisor: Option<f64>,
}

impl ModelSpec {
    /// Periodic ring of `L = F_k` sites at `α = F_{k-1}/F_k`, with `J = V = 1`
    /// and every other parameter zero.
    pub fn fibonacci(kind: ModelKind, k: u32) -> Self {
        let alpha = Approximant::fibonacci(k);
        ModelSpec::new(kind, alpha, alpha.q as usize)
    }

    pub fn new(kind: ModelKind, alpha: Approximant, len: usize) -> Self {
        ModelSpec {
            kind,
            j: 1.0,
            v: 1.0,
            phi: 0.0,
            beta: 0.0,
            gamma: 0.0,
            alpha,
            len,
            boundary: Boundary::Periodic,
            flux: 0.0,
            flux_divisor: None,
        }
    }

    pub fn with_j(mut self, j: f64) -> Self {
        self.j = j;
        self
    }

    pub fn with_v(mut self, v: f64) -> Self {
        self.v = v;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_flux(mut self, flux: f64) -> Self {
        self.flux = flux;
        self
    }

    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        self
    }

    /// Matrix dimension: `2L` for the spinful models, `L` for the scalar chain.
    pub fn dim(&self) -> usize {
        self.kind.orbitals() * self.len
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn validate(&self) -> Result<()> {
        for (key, x) in [
            ("J", self.j),
            ("V", self.v),
            ("phi", self.phi),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("flux", self.flux),
        ] {
            if !x.is_finite() {
                return Err(Error::invalid(key, "must be finite"));
            }
        }
        if !(-PI..=PI).contains(&self.phi) {
            return Err(Error::invalid("phi", format!("{} outside [-pi, pi]", self.phi)));
        }
        if self.len == 0 {
            return Err(Error::invalid("L", "lattice must have at least one site"));
        }
        Approximant::new(self.alpha.p, self.alpha.q)?;
        if let Some(d) = self.flux_divisor {
            if !(d.is_finite() && d != 0.0) {
                return Err(Error::invalid("flux_divisor", "must be finite and nonzero"));
            }
        }
        match self.boundary {
            Boundary::Periodic => {
                if self.len < 3 {
                    return Err(Error::invalid("L", "a periodic ring needs at least 3 sites"));
                }
                if self.len as u64 != self.alpha.q {
                    return Err(Error::invalid(
                        "L",
                        format!("periodic lattice needs L = q = {}, got {}", self.alpha.q, self.len),
                    ));
                }
            }
            Boundary::Open => {
                if self.flux != 0.0 {
                    return Err(Error::invalid("flux", "flux threading requires a periodic lattice"));
                }
            }
        }
        Ok(())
    }

    /// Bare hopping pair `(J_L, J_R)` before flux threading.
    pub fn bare_hoppings(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::Model1 => (self.j, 0.0),
            ModelKind::Model2 | ModelKind::AbelianScalar => {
                (self.j * (-self.beta).exp(), self.j * self.beta.exp())
            }
            ModelKind::Model3 => (self.j, self.j),
        }
    }

    /// Hopping pair including the flux phases `e^{∓iϑ/L}` (all kinds except
    /// Model 3, which threads flux through the phase modulation).
    pub fn hoppings(&self) -> (C64, C64) {
        let (jl, jr) = self.bare_hoppings();
        if self.kind == ModelKind::Model3 || self.flux == 0.0 {
            return (C64::new(jl, 0.0), C64::new(jr, 0.0));
        }
        let twist = C64::from_polar(1.0, self.flux / self.len as f64);
        (jl * twist.conj(), jr * twist)
    }

    /// Phase modulation `θ_n` for site label `n`.
    pub fn theta(&self, n: usize) -> C64 {
        let base = self.alpha.phase(n as i64);
        match self.kind {
            ModelKind::Model3 => {
                let divisor = self.flux_divisor.unwrap_or(self.len as f64);
                C64::new(base + self.flux / divisor, self.gamma)
            }
            _ => C64::new(base, 0.0),
        }
    }

    /// Onsite Pauli coefficients at site `n`, excluding the factor `V`.
    pub fn onsite_coefficients(&self, n: usize) -> OnsiteBlock {
        onsite_block(self.theta(n), self.phi)
    }

    /// Onsite block `V (e^{-iφ}Θ_n + e^{iφ}Θ_n^{-1})`; for the scalar chain the
    /// `(0,0)` entry carries `V cos(2παn + iγ)` and the rest is zero.
    pub fn onsite(&self, n: usize) -> Mat2 {
        let v = C64::new(self.v, 0.0);
        match self.kind {
            ModelKind::AbelianScalar => {
                let mut m = Mat2::zero();
                m.0[0][0] = v * C64::new(self.alpha.phase(n as i64), self.gamma).cos();
                m
            }
            _ => self.onsite_coefficients(n).to_matrix().scale(v),
        }
    }

    /// Key-value form, one `key = value` per line.
    pub fn to_kv(&self) -> String {
        config::to_kv(self)
    }

    /// Parses the key-value form; unspecified keys keep their defaults.
    pub fn from_kv(text: &str) -> Result<Self> {
        config::from_kv(text)
    }

    /// Sets one parameter by its config key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        config::set_key(self, key, value)
    }

    /// Reads one numeric parameter by its config key.
    pub fn get(&self, key: &str) -> Result<f64> {
        config::get_key(self, key)
    }
}

/// Nearest-neighbour lattice operator in block form: the onsite blocks and
/// the uniform hopping pair. Cheap to rebuild for every flux value.
#[derive(Clone, Debug)]
pub struct LatticeBlocks {
    pub orbitals: usize,
    pub onsite: Vec<Mat2>,
    pub hop_left: C64,
    pub hop_right: C64,
    pub periodic: bool,
}

impl LatticeBlocks {
    pub fn from_spec(spec: &ModelSpec) -> Self {
        let (hop_left, hop_right) = spec.hoppings();
        LatticeBlocks {
            orbitals: spec.kind.orbitals(),
            onsite: (1..=spec.len).map(|n| spec.onsite(n)).collect(),
            hop_left,
            hop_right,
            periodic: spec.is_periodic(),
        }
    }

    pub fn sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn dim(&self) -> usize {
        self.orbitals * self.sites()
    }

    /// Calls `f(row, col, value)` for every structurally nonzero entry; the
    /// wrap-around hoppings are emitted only on periodic lattices.
    pub fn for_each_entry(&self, mut f: impl FnMut(usize, usize, C64)) {
        let (o, l) = (self.orbitals, self.sites());
        for (i, block) in self.onsite.iter().enumerate() {
            for a in 0..o {
                for b in 0..o {
                    f(o * i + a, o * i + b, block.0[a][b]);
                }
            }
        }
        let mut bond = |i: usize, k: usize| {
            for a in 0..o {
                f(o * i + a, o * k + a, self.hop_left);
                f(o * k + a, o * i + a, self.hop_right);
            }
        };
        for i in 0..l.saturating_sub(1) {
            bond(i, i + 1);
        }
        if self.periodic && l > 2 {
            bond(l - 1, 0);
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let n = self.dim();
        let mut m = Mat::<C64>::zeros(n, n);
        self.for_each_entry(|r, c, z| m[(r, c)] += z);
        m
    }

    /// True when every onsite block is diagonal, so the two spin species
    /// never mix.
    pub fn spin_decoupled(&self) -> bool {
        self.orbitals == 2
            && self.onsite.iter().all(|b| b.0[0][1] == C64::new(0.0, 0.0) && b.0[1][0] == C64::new(0.0, 0.0))
    }
}

/// Dense Hamiltonian together with the spec it was built from.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    pub matrix: Mat<C64>,
    pub spec: ModelSpec,
    /// Orbitals per site (2 for the spin models, 1 for the scalar chain).
    pub orbitals: usize,
}

impl HamiltonianMatrix {
    /// Wraps an arbitrary square matrix, e.g. for solver tests. The spec is
    /// nominal and only records the dimension.
    pub fn from_matrix(matrix: Mat<C64>) -> Self {
        let n = matrix.nrows();
        let alpha = Approximant { p: 1, q: n.max(1) as u64 };
        let spec = ModelSpec::new(ModelKind::AbelianScalar, alpha, n).with_boundary(Boundary::Open);
        HamiltonianMatrix { matrix, spec, orbitals: 1 }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest entrywise `|H - H†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Lattice blocks, when the matrix came from a model spec.
    pub fn blocks(&self) -> LatticeBlocks {
        LatticeBlocks::from_spec(&self.spec)
    }
}

/// Real-space Hamiltonian of `spec`.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    let blocks = LatticeBlocks::from_spec(spec);
    Ok(HamiltonianMatrix { matrix: blocks.to_dense(), spec: spec.clone(), orbitals: blocks.orbitals })
}

/// The two spin-polarized scalar chains of a spin-decoupled model.
#[derive(Clone, Debug)]
pub struct AbelianChains {
    /// Chain with potential `V (d0 + dz)`.
    pub up: Mat<C64>,
    /// Chain with potential `V (d0 - dz)`.
    pub down: Mat<C64>,
}

/// Splits a model with `φ ∈ {0, ±π}` into its two independent spin chains.
pub fn build_abelian_chains(spec: &ModelSpec) -> Result<AbelianChains> {
    spec.validate()?;
    if spec.kind == ModelKind::AbelianScalar {
        return Err(Error::InvalidSpec("the scalar chain has no spin sectors".into()));
    }
    let blocks = LatticeBlocks::from_spec(spec);
    if let Some(n) = (1..=spec.len).find(|&n| !spec.onsite_coefficients(n).is_spin_diagonal()) {
        return Err(Error::invalid(
            "phi",
            format!("spin sectors couple at site {n}; chains exist only for phi in {{0, pi, -pi}}"),
        ));
    }
    let chain = |spin: usize| {
        let scalar = LatticeBlocks {
            orbitals: 1,
            onsite: blocks
                .onsite
                .iter()
                .map(|b| {
                    let mut m = Mat2::zero();
                    m.0[0][0] = b.0[spin][spin];
                    m
                })
                .collect(),
            ..blocks.clone()
        };
        scalar.to_dense()
    };
    Ok(AbelianChains { up: chain(0), down: chain(1) })
}
