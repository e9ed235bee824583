//! Spectral winding numbers of flux-threaded rings and the choice of base
//! energies.
//!
//! `w = (1/2π) ∮ dϑ ∂_ϑ arg det[H(ϑ) - E_b]` is accumulated from principal-value
//! phase increments between neighbouring flux values. Any increment larger
//! than `π/2` triggers bisection of that step, so the accumulated phase can
//! not alias by a full turn unless the determinant moves by more than `π/2`
//! between two points that are already closer than `2π / max_points`.

pub mod banded;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::localization::LocalizationProfile;
use crate::model::{LatticeBlocks, ModelSpec};
use crate::spectrum::SpectralDecomposition;
pub use banded::{det_phase, DetPhase};

#[derive(Clone, Copy, Debug)]
pub struct WindingOptions {
    /// Initial number of flux steps over `[0, 2π]`.
    pub n_theta: usize,
    /// Refinement budget: total flux points never exceed this.
    pub max_points: usize,
    /// Relative pivot size below which the base energy counts as lying on
    /// the spectrum.
    pub pivot_floor: f64,
    /// Evaluate the initial grid on the rayon pool.
    pub parallel: bool,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions { n_theta: 256, max_points: 1 << 14, pivot_floor: 1e-14, parallel: true }
    }
}

/// Accumulated determinant phase along the flux loop.
#[derive(Clone, Debug, Serialize)]
pub struct WindingTrace {
    pub base_energy: f64,
    /// Flux values, ascending from 0 to `2π`.
    pub theta: Vec<f64>,
    /// Accumulated `arg det / 2π` relative to `ϑ = 0`.
    pub turns: Vec<f64>,
    /// Largest single-step increment `|Δ arg det|`.
    pub max_step_phase: f64,
}

impl WindingTrace {
    /// Total unrounded winding.
    pub fn total(&self) -> f64 {
        self.turns.last().copied().unwrap_or(0.0)
    }

    /// Distance of the total from the nearest integer.
    pub fn quantization_error(&self) -> f64 {
        (self.total() - self.total().round()).abs()
    }

    /// The integer winding, if the total is within `1e-3` of one.
    pub fn winding(&self) -> Result<i64> {
        if self.quantization_error() > 1e-3 {
            return Err(Error::NotQuantized { value: self.total() });
        }
        Ok(self.total().round() as i64)
    }

    /// `theta,turns` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,turns\n");
        for (t, w) in self.theta.iter().zip(&self.turns) {
            let _ = writeln!(out, "{t:e},{w:e}");
        }
        out
    }
}

fn flux_phase(spec: &ModelSpec, theta: f64, base: f64, opts: &WindingOptions) -> Result<C64> {
    let blocks = LatticeBlocks::from_spec(&spec.clone().with_flux(theta));
    let d = det_phase(&blocks, C64::new(base, 0.0));
    if !(d.min_pivot > opts.pivot_floor * d.scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::BaseOnSpectrum { base, theta });
    }
    Ok(d.phase)
}

/// Determinant phase along `ϑ ∈ [0, 2π]` around base energy `base`.
pub fn winding_trace(spec: &ModelSpec, base: f64, opts: &WindingOptions) -> Result<WindingTrace> {
    spec.clone().with_flux(0.0).validate()?;
    if !spec.is_periodic() {
        return Err(Error::invalid("boundary", "winding numbers need a periodic lattice"));
    }
    if opts.n_theta == 0 {
        return Err(Error::invalid("n_theta", "must be positive"));
    }
    let n = opts.n_theta;
    let grid: Vec<f64> = (0..=n).map(|k| TAU * k as f64 / n as f64).collect();
    let coarse: Vec<C64> = if opts.parallel {
        grid.par_iter().map(|&t| flux_phase(spec, t, base, opts)).collect::<Result<_>>()?
    } else {
        grid.iter().map(|&t| flux_phase(spec, t, base, opts)).collect::<Result<_>>()?
    };

    let mut budget = opts.max_points.saturating_sub(n + 1);
    let mut theta = vec![0.0];
    let mut turns = vec![0.0];
    let mut acc = 0.0;
    let mut max_step = 0.0f64;
    for k in 0..n {
        // depth-first bisection of [grid[k], grid[k+1]]
        let mut stack = vec![(grid[k + 1], coarse[k + 1])];
        let (mut t0, mut z0) = (grid[k], coarse[k]);
        while let Some(&(t1, z1)) = stack.last() {
            let step = (z1 / z0).arg();
            if step.abs() > FRAC_PI_2 {
                if budget == 0 {
                    return Err(Error::NonConvergent { points: opts.max_points });
                }
                budget -= 1;
                let tm = 0.5 * (t0 + t1);
                stack.push((tm, flux_phase(spec, tm, base, opts)?));
                continue;
            }
            stack.pop();
            acc += step;
            max_step = max_step.max(step.abs());
            theta.push(t1);
            turns.push(acc / TAU);
            t0 = t1;
            z0 = z1;
        }
    }
    debug_assert!(max_step < PI);
    Ok(WindingTrace { base_energy: base, theta, turns, max_step_phase: max_step })
}

/// Integer winding number around `base` with an initial grid of `n_theta`
/// steps.
pub fn winding_number(spec: &ModelSpec, base: f64, n_theta: usize) -> Result<i64> {
    winding_trace(spec, base, &WindingOptions { n_theta, ..Default::default() })?.winding()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BaseEnergies {
    pub e1: f64,
    pub e2: f64,
}

impl BaseEnergies {
    pub fn coincide(&self) -> bool {
        self.e1 == self.e2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindingResult {
    pub w1: i64,
    pub w2: i64,
    pub base_energies: BaseEnergies,
    pub n_theta: usize,
    pub max_step_phase: f64,
}

/// Relative shift applied to a base energy that lands on the spectrum.
pub const BASE_NUDGE: f64 = 1e-6;

/// Determinant phase around `base`. A base energy lying on the spectrum is
/// moved just above and just below; the upper trace is returned when both
/// sides give the same winding.
pub fn trace_off_spectrum(spec: &ModelSpec, base: f64, opts: &WindingOptions) -> Result<WindingTrace> {
    match winding_trace(spec, base, opts) {
        Err(err @ Error::BaseOnSpectrum { .. }) => {
            let delta = BASE_NUDGE * base.abs().max(1.0);
            let above = winding_trace(spec, base + delta, opts)?;
            let below = winding_trace(spec, base - delta, opts)?;
            if above.winding()? == below.winding()? {
                Ok(above)
            } else {
                Err(err)
            }
        }
        other => other,
    }
}

/// Winding and largest phase step around `base`, see [`trace_off_spectrum`].
pub fn winding_off_spectrum(spec: &ModelSpec, base: f64, opts: &WindingOptions) -> Result<(i64, f64)> {
    let t = trace_off_spectrum(spec, base, opts)?;
    Ok((t.winding()?, t.max_step_phase))
}

/// `(w1, w2)` around the two base energies; a single loop when they coincide.
pub fn winding_pair(spec: &ModelSpec, bases: BaseEnergies, opts: &WindingOptions) -> Result<WindingResult> {
    let (w1, step1) = winding_off_spectrum(spec, bases.e1, opts)?;
    let (w2, step2) = if bases.coincide() { (w1, step1) } else { winding_off_spectrum(spec, bases.e2, opts)? };
    Ok(WindingResult { w1, w2, base_energies: bases, n_theta: opts.n_theta, max_step_phase: step1.max(step2) })
}

/// Real parts and IPRs of every state at one point of a parameter sweep,
/// states sorted by `Re E`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepStates {
    pub param: f64,
    pub re_energies: Vec<f64>,
    pub ipr: Vec<f64>,
}

impl SweepStates {
    pub fn new(param: f64, dec: &SpectralDecomposition, profile: &LocalizationProfile) -> Self {
        SweepStates {
            param,
            re_energies: dec.eigenvalues.iter().map(|e| e.re).collect(),
            ipr: profile.ipr.clone(),
        }
    }

    fn localized(&self, threshold: f64) -> usize {
        self.ipr.iter().filter(|&&p| p > threshold).count()
    }

    /// Midpoint between `e` and the nearest different `Re E`, so the base
    /// energy stays off this point's spectrum.
    fn off_spectrum(&self, e: f64) -> f64 {
        let nearest = self
            .re_energies
            .iter()
            .copied()
            .filter(|&x| x != e)
            .min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()));
        nearest.map_or(e, |x| 0.5 * (e + x))
    }

    fn lowest_localized(&self, threshold: f64) -> Option<f64> {
        self.re_energies.iter().zip(&self.ipr).filter(|(_, &p)| p > threshold).map(|(&e, _)| e).reduce(f64::min)
    }

    fn highest_extended(&self, threshold: f64) -> Option<f64> {
        self.re_energies.iter().zip(&self.ipr).filter(|(_, &p)| p <= threshold).map(|(&e, _)| e).reduce(f64::max)
    }
}

/// Base energies from a one-dimensional sweep.
///
/// The sweep is read from its more extended end (fewer states above the IPR
/// threshold) towards its more localized end. `E1` is the lowest `Re E`
/// among the localized states at the first point that has any, i.e. the
/// first state whose IPR lifts off. `E2` belongs to the last state to lift
/// off: the highest-`Re E` extended state just before the point where the
/// localized count first reaches its maximum. When both events happen at
/// the same point all states localize together and `E2 = E1`. Each chosen
/// `Re E` is then moved halfway to its nearest neighbour in `Re E`, since the
/// state itself is part of the spectrum the winding must avoid.
pub fn select_base_energies(sweep: &[SweepStates], ipr_threshold: f64) -> Result<BaseEnergies> {
    if sweep.is_empty() {
        return Err(Error::NoLocalizedStates { threshold: ipr_threshold });
    }
    let counts: Vec<usize> = sweep.iter().map(|s| s.localized(ipr_threshold)).collect();
    let forward = counts[0] <= counts[counts.len() - 1];
    let order: Vec<usize> = if forward { (0..sweep.len()).collect() } else { (0..sweep.len()).rev().collect() };

    let first = order
        .iter()
        .position(|&i| counts[i] > 0)
        .ok_or(Error::NoLocalizedStates { threshold: ipr_threshold })?;
    let most = counts.iter().copied().max().unwrap_or(0);
    let full = order.iter().position(|&i| counts[i] == most).unwrap_or(first);

    let at_first = &sweep[order[first]];
    let e1 = at_first.lowest_localized(ipr_threshold).map(|e| at_first.off_spectrum(e)).unwrap_or(f64::NAN);
    if full == first {
        return Ok(BaseEnergies { e1, e2: e1 });
    }
    let before_full = &sweep[order[full - 1]];
    let e2 = before_full.highest_extended(ipr_threshold).map(|e| before_full.off_spectrum(e)).unwrap_or(e1);
    Ok(BaseEnergies { e1, e2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelKind;

    fn states(param: f64, re: &[f64], ipr: &[f64]) -> SweepStates {
        SweepStates { param, re_energies: re.to_vec(), ipr: ipr.to_vec() }
    }

    #[test]
    fn base_on_spectrum_is_nudged_off() {
        // a strongly localized level barely moves with flux, so a base
        // energy placed exactly on it at zero flux has a well-defined winding
        let spec = ModelSpec::new(ModelKind::AbelianScalar, crate::model::Approximant::fibonacci_with_denominator(8).unwrap(), 8)
            .with_v(20.0);
        let dec = crate::spectrum::decompose(&crate::model::build_hamiltonian(&spec).unwrap()).unwrap();
        let base = dec.eigenvalues[7].re;
        let opts = WindingOptions { pivot_floor: 1e-9, ..Default::default() };
        assert!(matches!(winding_trace(&spec, base, &opts), Err(Error::BaseOnSpectrum { .. })));
        assert_eq!(winding_off_spectrum(&spec, base, &opts).unwrap().0, 0);
    }

    #[test]
    fn single_localized_state() {
        let sweep = vec![
            states(0.0, &[-1.0, 0.0, 1.0], &[0.01, 0.01, 0.01]),
            states(0.1, &[-1.0, 0.2, 1.0], &[0.01, 0.8, 0.01]),
            states(0.2, &[-1.0, 0.0, 1.0], &[0.01, 0.01, 0.01]),
        ];
        let b = select_base_energies(&sweep, 0.1).unwrap();
        assert_eq!((b.e1, b.e2), (0.6, 0.6));
    }

    #[test]
    fn simultaneous_transition_gives_one_base() {
        let sweep = vec![
            states(0.0, &[-1.0, 0.0, 1.0], &[0.9, 0.9, 0.9]),
            states(0.1, &[-1.1, 0.0, 1.1], &[0.9, 0.9, 0.9]),
            states(0.2, &[-1.2, 0.0, 1.2], &[0.01, 0.01, 0.01]),
        ];
        let b = select_base_energies(&sweep, 0.1).unwrap();
        assert!(b.coincide());
        assert_eq!(b.e1, -0.55);
    }

    #[test]
    fn staggered_transition_gives_two_bases() {
        // extended → critical → localized, listed from the localized end
        let sweep = vec![
            states(0.0, &[-1.0, 0.0, 1.0], &[0.9, 0.9, 0.9]),
            states(0.1, &[-1.0, 0.1, 1.0], &[0.9, 0.01, 0.9]),
            states(0.2, &[-1.0, 0.2, 1.0], &[0.9, 0.01, 0.01]),
            states(0.3, &[-1.0, 0.3, 1.0], &[0.01, 0.01, 0.01]),
        ];
        let b = select_base_energies(&sweep, 0.1).unwrap();
        assert_eq!(b.e1, -0.4);
        assert_eq!(b.e2, 0.55);
    }

    #[test]
    fn never_localized() {
        let sweep = vec![states(0.0, &[0.0, 1.0], &[0.01, 0.01])];
        assert!(matches!(select_base_energies(&sweep, 0.1), Err(Error::NoLocalizedStates { .. })));
    }

    #[test]
    fn hermitian_ring_has_zero_winding() {
        let spec = ModelSpec::fibonacci(ModelKind::Model3, 8).with_v(0.5).with_phi(1.0);
        for base in [-3.1, 0.05, 0.77, 2.9] {
            let tr = winding_trace(&spec, base, &WindingOptions::default()).unwrap();
            assert_eq!(tr.winding().unwrap(), 0, "base {base}");
            assert!(tr.max_step_phase < PI);
        }
    }

    #[test]
    fn open_chain_rejected() {
        let spec = ModelSpec::fibonacci(ModelKind::Model1, 8).with_boundary(crate::model::Boundary::Open);
        assert!(winding_number(&spec, 0.0, 64).is_err());
    }
}
