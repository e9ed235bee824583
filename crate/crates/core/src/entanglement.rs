//! Biorthogonal single-particle correlation matrices, entanglement spectra
//! and entropies of free-fermion states built from a decomposition.
//!
//! For an occupied set `occ`, `P = Σ_{m∈occ} |R_m⟩⟨L_m|` and the correlation
//! matrix of a block of sites is `C_{ab} = ⟨b|P|a⟩` over the composite
//! (site, orbital) index. `C` is not Hermitian in general, so its eigenvalues
//! `ζ` can carry small imaginary parts that are reported rather than hidden.

use std::fmt::Write as _;
use std::ops::Range;

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::{eigenvalues_only, SpectralDecomposition};

/// `|Im ζ|` above which a spectrum is flagged as complex.
pub const COMPLEX_ZETA_TOL: f64 = 1e-6;
/// Clamp applied to `ζ` before forming `ξ = ln(1/ζ - 1)`.
pub const ZETA_CLAMP: f64 = 1e-12;

/// Which eigenstates are filled.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum OccupationRule {
    /// Every state with `Re E <= cutoff`.
    BelowReE(f64),
    /// Every state with `|Im E| <= tol_imag`.
    AllRealEnergy(f64),
    /// Explicit indices into the sorted spectrum.
    ExplicitSet(Vec<usize>),
}

impl OccupationRule {
    /// Occupied indices, ascending. Because the spectrum is sorted by
    /// `(Re E, Im E)`, `BelowReE` always fills a prefix and ties in `Re E`
    /// are filled in `Im E` order.
    pub fn occupied(&self, dec: &SpectralDecomposition) -> Vec<usize> {
        let e = &dec.eigenvalues;
        match self {
            OccupationRule::BelowReE(cut) => (0..e.len()).take_while(|&j| e[j].re <= *cut).collect(),
            OccupationRule::AllRealEnergy(tol) => (0..e.len()).filter(|&j| e[j].im.abs() <= *tol).collect(),
            OccupationRule::ExplicitSet(idx) => {
                let mut idx: Vec<usize> = idx.iter().copied().filter(|&j| j < e.len()).collect();
                idx.sort_unstable();
                idx.dedup();
                idx
            }
        }
    }
}

/// A contiguous block of lattice sites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Subsystem {
    pub sites: Range<usize>,
}

impl Subsystem {
    /// Sites `0..⌊L/2⌋`.
    pub fn half(sites: usize) -> Self {
        Subsystem { sites: 0..sites / 2 }
    }

    /// Composite (site, orbital) row indices.
    fn rows(&self, orbitals: usize) -> Range<usize> {
        orbitals * self.sites.start..orbitals * self.sites.end
    }

    /// The bonds cut on a ring, as `(left site, right site)` pairs.
    pub fn cuts(&self, total_sites: usize) -> [(usize, usize); 2] {
        let before = (self.sites.start + total_sites - 1) % total_sites;
        [(before, self.sites.start), (self.sites.end - 1, self.sites.end % total_sites)]
    }
}

/// Correlation matrix of `subsystem` for the states selected by `rule`.
pub fn correlation_matrix(dec: &SpectralDecomposition, rule: &OccupationRule, subsystem: &Subsystem) -> Result<Mat<C64>> {
    let occ = rule.occupied(dec);
    if occ.is_empty() {
        return Err(Error::EmptyOccupation);
    }
    correlation_from(dec, &occ, subsystem)
}

fn correlation_from(dec: &SpectralDecomposition, occ: &[usize], subsystem: &Subsystem) -> Result<Mat<C64>> {
    let rows = subsystem.rows(dec.orbitals);
    if rows.is_empty() || rows.end > dec.right.nrows() {
        return Err(Error::invalid("subsystem", format!("sites {:?} outside the lattice", subsystem.sites)));
    }
    let n = rows.len();
    let r = Mat::<C64>::from_fn(n, occ.len(), |i, k| dec.right[(rows.start + i, occ[k])]);
    let l = Mat::<C64>::from_fn(n, occ.len(), |i, k| dec.left[(rows.start + i, occ[k])]);
    // P_A = R_A L_A^†, and C = P_A^T.
    let p = &r * l.adjoint();
    Ok(p.transpose().to_owned())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationSpectrum {
    /// Eigenvalues of `C` as computed, sorted by real part.
    pub zeta_raw: Vec<C64>,
    /// Real parts clamped to `[0, 1]`.
    pub zeta: Vec<f64>,
    /// Entanglement energies `ln(1/ζ - 1)`.
    pub xi: Vec<f64>,
    pub entropy: f64,
    /// Largest `|Im ζ|`.
    pub max_imag: f64,
    /// Largest distance of `Re ζ` outside `[0, 1]`.
    pub max_clamp: f64,
}

impl CorrelationSpectrum {
    pub fn empty() -> Self {
        CorrelationSpectrum { zeta_raw: vec![], zeta: vec![], xi: vec![], entropy: 0.0, max_imag: 0.0, max_clamp: 0.0 }
    }

    /// Some `|Im ζ|` reached [`COMPLEX_ZETA_TOL`]; the real parts were used
    /// anyway.
    pub fn complex_warning(&self) -> bool {
        self.max_imag >= COMPLEX_ZETA_TOL
    }

    /// Fraction of `ζ` within `tol` of 0 or 1.
    pub fn pinned_fraction(&self, tol: f64) -> f64 {
        if self.zeta.is_empty() {
            return 1.0;
        }
        self.zeta.iter().filter(|&&z| z < tol || z > 1.0 - tol).count() as f64 / self.zeta.len() as f64
    }
}

/// `-[ζ ln ζ + (1-ζ) ln(1-ζ)]` with `0 ln 0 = 0`.
pub fn binary_entropy(z: f64) -> f64 {
    let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
    h(z) + h(1.0 - z)
}

/// Entropy rebuilt from entanglement energies through `ζ = 1 / (1 + e^ξ)`.
pub fn entropy_from_xi(xi: &[f64]) -> f64 {
    xi.iter().map(|&x| binary_entropy(1.0 / (1.0 + x.exp()))).sum()
}

pub fn entanglement_spectrum(c: &Mat<C64>) -> Result<CorrelationSpectrum> {
    let mut raw = eigenvalues_only(c)?;
    raw.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(spectrum_from_zeta(raw))
}

/// Builds the spectrum from raw eigenvalues of a correlation matrix.
pub fn spectrum_from_zeta(raw: Vec<C64>) -> CorrelationSpectrum {
    let max_imag = raw.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_clamp = raw.iter().map(|z| (-z.re).max(z.re - 1.0).max(0.0)).fold(0.0, f64::max);
    let zeta: Vec<f64> = raw.iter().map(|z| z.re.clamp(0.0, 1.0)).collect();
    let xi = zeta
        .iter()
        .map(|&z| {
            let z = z.clamp(ZETA_CLAMP, 1.0 - ZETA_CLAMP);
            (1.0 / z - 1.0).ln()
        })
        .collect();
    let entropy = zeta.iter().map(|&z| binary_entropy(z)).sum();
    CorrelationSpectrum { zeta_raw: raw, zeta, xi, entropy, max_imag, max_clamp }
}

/// Entanglement entropy for one occupation rule; an empty occupied set
/// gives `S = 0`.
pub fn entanglement_entropy(dec: &SpectralDecomposition, rule: &OccupationRule, subsystem: &Subsystem) -> Result<CorrelationSpectrum> {
    match correlation_matrix(dec, rule, subsystem) {
        Ok(c) => entanglement_spectrum(&c),
        Err(Error::EmptyOccupation) => Ok(CorrelationSpectrum::empty()),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EsCut {
    pub cutoff: f64,
    pub spectrum: CorrelationSpectrum,
}

/// Entanglement spectra for `n_cutoffs` Fermi levels evenly spaced over the
/// `Re E` range of the spectrum, each filling every state at or below it.
pub fn es_vs_energy_scan(dec: &SpectralDecomposition, subsystem: &Subsystem, n_cutoffs: usize) -> Result<Vec<EsCut>> {
    if dec.is_empty() || n_cutoffs == 0 {
        return Ok(vec![]);
    }
    let lo = dec.eigenvalues[0].re;
    let hi = dec.eigenvalues[dec.len() - 1].re;
    let cutoffs: Vec<f64> = if n_cutoffs == 1 {
        vec![hi]
    } else {
        (0..n_cutoffs).map(|k| lo + (hi - lo) * k as f64 / (n_cutoffs - 1) as f64).collect()
    };
    cutoffs
        .into_par_iter()
        .map(|cutoff| {
            let spectrum = entanglement_entropy(dec, &OccupationRule::BelowReE(cutoff), subsystem)?;
            Ok(EsCut { cutoff, spectrum })
        })
        .collect()
}

/// `cutoff,index,re_zeta,im_zeta` rows, preceded by a comment naming the
/// subsystem and its two cuts.
pub fn es_csv(scan: &[EsCut], subsystem: &Subsystem, total_sites: usize) -> String {
    let [(a0, a1), (b0, b1)] = subsystem.cuts(total_sites);
    let mut out = format!(
        "# subsystem sites {}..{} of {total_sites}; cuts at bonds {a0}-{a1} and {b0}-{b1}\ncutoff,index,re_zeta,im_zeta\n",
        subsystem.sites.start, subsystem.sites.end
    );
    for cut in scan {
        for (k, z) in cut.spectrum.zeta_raw.iter().enumerate() {
            let _ = writeln!(out, "{:e},{k},{:e},{:e}", cut.cutoff, z.re, z.im);
        }
    }
    out
}
