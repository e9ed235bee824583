//! Inverse / normalized participation ratios, their extrema and averages,
//! the critical-phase indicator `eta`, and mobility-edge tables.

use std::fmt::Write as _;

use serde::Serialize;

use crate::spectrum::SpectralDecomposition;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationProfile {
    /// `IPR_j = Σ |ψ_j|⁴` of each right eigenvector, in spectrum order.
    pub ipr: Vec<f64>,
    /// `NPR_j = (D · IPR_j)^{-1}` with `D` the Hilbert-space dimension.
    pub npr: Vec<f64>,
    pub ipr_max: f64,
    pub ipr_min: f64,
    pub ipr_avg: f64,
    pub npr_avg: f64,
    /// `log10(⟨IPR⟩⟨NPR⟩)`.
    pub eta: f64,
}

/// IPR of one vector, normalized on the fly so unit norm is not assumed.
pub fn ipr_of<'a>(amplitudes: impl IntoIterator<Item = &'a num_complex::Complex64>) -> f64 {
    let (mut s2, mut s4) = (0.0, 0.0);
    for z in amplitudes {
        let p = z.norm_sqr();
        s2 += p;
        s4 += p * p;
    }
    if s2 == 0.0 {
        0.0
    } else {
        s4 / (s2 * s2)
    }
}

pub fn profile(dec: &SpectralDecomposition) -> LocalizationProfile {
    let dim = dec.right.nrows();
    let ipr = (0..dec.right.ncols())
        .map(|j| {
            let col = dec.right.col(j);
            ipr_of((0..dim).map(|r| &col[r]))
        })
        .collect();
    profile_from_ipr(ipr, dim)
}

/// Builds the profile from precomputed IPRs over a `dim`-dimensional space.
pub fn profile_from_ipr(ipr: Vec<f64>, dim: usize) -> LocalizationProfile {
    let d = dim as f64;
    let npr: Vec<f64> = ipr.iter().map(|&p| 1.0 / (d * p)).collect();
    let count = ipr.len().max(1) as f64;
    let ipr_max = ipr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ipr_min = ipr.iter().copied().fold(f64::INFINITY, f64::min);
    let ipr_avg = ipr.iter().sum::<f64>() / count;
    let npr_avg = npr.iter().sum::<f64>() / count;
    LocalizationProfile { eta: (ipr_avg * npr_avg).log10(), ipr, npr, ipr_max, ipr_min, ipr_avg, npr_avg }
}

/// Default classification threshold `τ = 10 / D`.
pub fn default_ipr_threshold(dim: usize) -> f64 {
    10.0 / dim as f64
}

/// `η` of a spectrum made only of fully extended or only of fully localized
/// states, `-log10 D`.
pub fn eta_floor(dim: usize) -> f64 {
    -(dim as f64).log10()
}

/// Default `η` above which a point counts as critical: halfway (in decades)
/// between the pure-phase floor `-log10 D` and the value `-½ log10 D` of
/// states with `IPR ~ D^{-1/2}`.
pub fn default_critical_eta(dim: usize) -> f64 {
    0.75 * eta_floor(dim)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateClass {
    Extended,
    Localized,
}

impl StateClass {
    pub fn of(ipr: f64, threshold: f64) -> Self {
        if ipr > threshold {
            StateClass::Localized
        } else {
            StateClass::Extended
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StateClass::Extended => "extended",
            StateClass::Localized => "localized",
        }
    }
}

/// Maximal run of same-class states along `Re E`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyInterval {
    pub re_min: f64,
    pub re_max: f64,
    pub class: StateClass,
    pub count: usize,
    /// Every state in the run has `|Im E| <= tol_imag`.
    pub all_real: bool,
    /// Every state in the run has `|Im E| > tol_imag`.
    pub all_complex: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MobilityEdgeTable {
    pub intervals: Vec<EnergyInterval>,
    /// `Re E` midpoints between neighbouring intervals of opposite class.
    pub edges: Vec<f64>,
}

impl MobilityEdgeTable {
    pub fn localized(&self) -> impl Iterator<Item = &EnergyInterval> {
        self.intervals.iter().filter(|i| i.class == StateClass::Localized)
    }
}

pub fn mobility_edge_table(
    dec: &SpectralDecomposition,
    profile: &LocalizationProfile,
    tol_imag: f64,
    ipr_threshold: f64,
) -> MobilityEdgeTable {
    let re: Vec<f64> = dec.eigenvalues.iter().map(|e| e.re).collect();
    let im: Vec<f64> = dec.eigenvalues.iter().map(|e| e.im).collect();
    classify(&re, &im, &profile.ipr, tol_imag, ipr_threshold)
}

/// Classification of states already sorted by `Re E`.
pub fn classify(re: &[f64], im: &[f64], ipr: &[f64], tol_imag: f64, ipr_threshold: f64) -> MobilityEdgeTable {
    let mut intervals: Vec<EnergyInterval> = Vec::new();
    for j in 0..re.len() {
        let class = StateClass::of(ipr[j], ipr_threshold);
        let real = im[j].abs() <= tol_imag;
        match intervals.last_mut() {
            Some(last) if last.class == class => {
                last.re_max = re[j];
                last.count += 1;
                last.all_real &= real;
                last.all_complex &= !real;
            }
            _ => intervals.push(EnergyInterval {
                re_min: re[j],
                re_max: re[j],
                class,
                count: 1,
                all_real: real,
                all_complex: !real,
            }),
        }
    }
    let edges = intervals.windows(2).map(|w| 0.5 * (w[0].re_max + w[1].re_min)).collect();
    MobilityEdgeTable { intervals, edges }
}

/// Per-state rows `index,re_e,im_e,ipr,class`.
pub fn states_csv(dec: &SpectralDecomposition, profile: &LocalizationProfile, ipr_threshold: f64) -> String {
    let mut out = String::from("index,re_e,im_e,ipr,class\n");
    for (j, (e, &p)) in dec.eigenvalues.iter().zip(&profile.ipr).enumerate() {
        let _ = writeln!(out, "{j},{:e},{:e},{:e},{}", e.re, e.im, p, StateClass::of(p, ipr_threshold).name());
    }
    out
}
