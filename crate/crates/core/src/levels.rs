//! Adjacent-gap-ratio statistics of the real parts of a spectrum.
//!
//! With levels sorted by `Re E` and spacings `s_j = Re E_j - Re E_{j-1}`,
//! `g_j = min(s_j, s_{j+1}) / max(s_j, s_{j+1})`. A complex-conjugate pair
//! shares its real part and contributes a genuine zero spacing; an exact
//! degeneracy of real levels (from a symmetry) is merged into one level and
//! counted instead.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::{default_tol_imag, SpectralDecomposition};

/// Spacings below this fraction of the spectral width count as degenerate.
pub const DEGENERATE_SPACING: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgrResult {
    pub g_values: Vec<f64>,
    pub g_mean: f64,
    /// Degenerate spacings removed by merging levels.
    pub n_dropped: usize,
    /// Ratios skipped because both spacings vanished.
    pub n_undefined: usize,
}

pub fn adjacent_gap_ratio(dec: &SpectralDecomposition) -> Result<AgrResult> {
    gap_ratios(&dec.eigenvalues, default_tol_imag(dec))
}

/// Gap ratios of `values`; `tol_imag` decides which near-ties are
/// complex-conjugate partners.
pub fn gap_ratios(values: &[C64], tol_imag: f64) -> Result<AgrResult> {
    if values.len() < 3 {
        return Err(Error::TooFewLevels(values.len()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let width = sorted[sorted.len() - 1].re - sorted[0].re;
    let tie = DEGENERATE_SPACING * width;

    let mut spacings = Vec::with_capacity(sorted.len());
    let mut n_dropped = 0;
    let mut prev = sorted[0];
    for &e in &sorted[1..] {
        let s = e.re - prev.re;
        if s <= tie {
            let conjugate_pair = prev.im.abs() > tol_imag && e.im.abs() > tol_imag && prev.im.signum() != e.im.signum();
            if !conjugate_pair {
                n_dropped += 1;
                continue;
            }
            spacings.push(0.0);
        } else {
            spacings.push(s);
        }
        prev = e;
    }

    let mut g_values = Vec::with_capacity(spacings.len());
    let mut n_undefined = 0;
    for w in spacings.windows(2) {
        let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
        if hi == 0.0 {
            n_undefined += 1;
        } else {
            g_values.push(lo / hi);
        }
    }
    if g_values.is_empty() {
        return Err(Error::TooFewLevels(spacings.len() + 1));
    }
    let g_mean = g_values.iter().sum::<f64>() / g_values.len() as f64;
    Ok(AgrResult { g_values, g_mean, n_dropped, n_undefined })
}

/// Histogram of `g` over `bins` equal bins of `[0, 1]`: `lo,hi,count`.
pub fn histogram_csv(result: &AgrResult, bins: usize) -> String {
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for &g in &result.g_values {
        counts[((g * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let mut out = String::from("lo,hi,count\n");
    for (k, c) in counts.iter().enumerate() {
        let _ = writeln!(out, "{},{},{c}", k as f64 / bins as f64, (k + 1) as f64 / bins as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn picket_fence() {
        let r = gap_ratios(&real(&[0.0, 1.0, 2.0, 3.0]), 1e-9).unwrap();
        assert_eq!(r.g_values, vec![1.0, 1.0]);
        assert_eq!(r.g_mean, 1.0);
    }

    #[test]
    fn three_levels() {
        let r = gap_ratios(&real(&[3.0, 0.0, 1.0]), 1e-9).unwrap();
        assert_eq!(r.g_values, vec![0.5]);
    }

    #[test]
    fn too_few() {
        assert!(matches!(gap_ratios(&real(&[0.0, 1.0]), 1e-9), Err(Error::TooFewLevels(2))));
    }

    #[test]
    fn real_degeneracies_are_merged() {
        let r = gap_ratios(&real(&[0.0, 1.0, 1.0, 3.0, 4.0]), 1e-9).unwrap();
        assert_eq!(r.n_dropped, 1);
        assert_eq!(r.g_values, vec![0.5, 0.5]);
    }

    #[test]
    fn conjugate_pairs_give_zero_ratios() {
        let v = vec![C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(1.0, 0.5), C64::new(1.0, -0.5), C64::new(2.5, 0.0)];
        let r = gap_ratios(&v, 1e-9).unwrap();
        assert_eq!(r.n_dropped, 0);
        assert_eq!(r.g_values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn affine_invariance() {
        let xs = [0.3, 1.9, 2.0, 4.4, 7.1, 7.15, 9.0];
        let a = gap_ratios(&real(&xs), 1e-9).unwrap().g_mean;
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 13.0).collect();
        let b = gap_ratios(&real(&ys), 1e-9).unwrap().g_mean;
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn poisson_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut x = 0.0;
        let levels: Vec<C64> = (0..100_000)
            .map(|_| {
                x += -(1.0 - rng.gen::<f64>()).ln();
                C64::new(x, 0.0)
            })
            .collect();
        let g = gap_ratios(&levels, 1e-9).unwrap().g_mean;
        assert!((g - (2.0 * std::f64::consts::LN_2 - 1.0)).abs() < 0.01, "{g}");
    }

    #[test]
    fn histogram_counts_everything() {
        let r = gap_ratios(&real(&[0.0, 1.0, 3.0, 4.0, 4.5]), 1e-9).unwrap();
        let csv = histogram_csv(&r, 4);
        let total: usize = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
        assert_eq!(total, r.g_values.len());
    }
}
