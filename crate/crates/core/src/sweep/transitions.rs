//! Reading phase boundaries off a one-dimensional cut.

use serde::Serialize;

use super::DiagnosticsRecord;

/// Coarse phase of one grid point from its IPR extremes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseClass {
    /// No state above the IPR threshold.
    Extended,
    /// Localized and extended states coexist (mobility edges).
    Critical,
    /// Every state above the IPR threshold.
    Localized,
}

impl PhaseClass {
    pub fn of(row: &DiagnosticsRecord) -> Option<Self> {
        let loc = row.localization?;
        let thr = row.tolerances?.ipr_threshold;
        Some(if loc.ipr_max <= thr {
            PhaseClass::Extended
        } else if loc.ipr_min > thr {
            PhaseClass::Localized
        } else {
            PhaseClass::Critical
        })
    }
}

/// A change of some per-point quantity between neighbouring grid points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Step<T> {
    /// Midpoint of the two axis-1 values.
    pub at: f64,
    pub from: T,
    pub to: T,
}

/// Every change of `f` along the rows, skipping points where it is `None`.
pub fn steps<T: PartialEq + Copy>(rows: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> Option<T>) -> Vec<Step<T>> {
    let known: Vec<(f64, T)> = rows.iter().filter_map(|r| Some((r.axis1, f(r)?))).collect();
    known
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| Step { at: 0.5 * (w[0].0 + w[1].0), from: w[0].1, to: w[1].1 })
        .collect()
}

pub fn phase_boundaries(rows: &[DiagnosticsRecord]) -> Vec<Step<PhaseClass>> {
    steps(rows, PhaseClass::of)
}

pub fn w1_jumps(rows: &[DiagnosticsRecord]) -> Vec<Step<i64>> {
    steps(rows, |r| r.winding.map(|w| w.w1))
}

pub fn w2_jumps(rows: &[DiagnosticsRecord]) -> Vec<Step<i64>> {
    steps(rows, |r| r.winding.map(|w| w.w2))
}

/// Axis-1 value of the first row satisfying `pred`.
pub fn first_where(rows: &[DiagnosticsRecord], pred: impl Fn(&DiagnosticsRecord) -> bool) -> Option<f64> {
    rows.iter().find(|r| pred(r)).map(|r| r.axis1)
}

/// Axis-1 range `[first, last]` of rows in the critical class.
pub fn critical_window(rows: &[DiagnosticsRecord]) -> Option<(f64, f64)> {
    let crit: Vec<f64> = rows.iter().filter(|r| PhaseClass::of(r) == Some(PhaseClass::Critical)).map(|r| r.axis1).collect();
    Some((*crit.first()?, *crit.last()?))
}
