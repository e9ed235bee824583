//! Parameter sweeps: every grid point is decomposed once and all requested
//! diagnostics are read off that decomposition. Winding numbers need base
//! energies chosen from a whole cut, so they run as a second pass over each
//! axis-1 line once every point of the line is done.

mod output;
mod plan;
pub mod transitions;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{entanglement_entropy, OccupationRule, Subsystem};
use crate::error::{Error, Result};
use crate::levels::adjacent_gap_ratio;
use crate::localization::{default_ipr_threshold, profile};
use crate::model::{build_hamiltonian, ModelSpec};
use crate::spectrum::{decompose_with, default_tol_imag, realness, DecomposeOptions};
use crate::topology::{select_base_energies, winding_pair, BaseEnergies, SweepStates, WindingOptions};
pub use output::{read_checkpoint, to_csv, to_json, write_outputs, Checkpoint, SCHEMA_VERSION};
pub use plan::{Axis, Diagnostic, SweepPlan};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealnessRow {
    pub e_imag_max: f64,
    pub e_imag_min: f64,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRow {
    pub ipr_max: f64,
    pub ipr_min: f64,
    pub eta: f64,
    /// States above the IPR threshold.
    pub n_localized: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingRow {
    pub w1: i64,
    pub w2: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementRow {
    /// Half-chain entropy with every real-energy state filled.
    pub entropy: f64,
    /// Largest `|Im ζ|` of the correlation matrix.
    pub zeta_imag_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub g_mean: f64,
    pub n_dropped: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_imag: f64,
    pub ipr_threshold: f64,
}

/// One grid point. A diagnostic that was not requested or could not be
/// computed is `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub index: usize,
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub realness: Option<RealnessRow>,
    pub localization: Option<LocalizationRow>,
    pub winding: Option<WindingRow>,
    pub entanglement: Option<EntanglementRow>,
    pub levelstat: Option<LevelRow>,
    pub tolerances: Option<Tolerances>,
    pub error: Option<String>,
}

impl DiagnosticsRecord {
    fn empty(index: usize, point: (f64, Option<f64>)) -> Self {
        DiagnosticsRecord {
            index,
            axis1: point.0,
            axis2: point.1,
            realness: None,
            localization: None,
            winding: None,
            entanglement: None,
            levelstat: None,
            tolerances: None,
            error: None,
        }
    }

    fn push_error(&mut self, e: impl std::fmt::Display) {
        let msg = e.to_string();
        self.error = Some(match self.error.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    }
}

/// A finished point together with what the winding pass needs from it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointResult {
    pub record: DiagnosticsRecord,
    pub seconds: f64,
    /// `(Re E, IPR)` per state, kept only when windings are requested.
    pub states: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub rows: Vec<DiagnosticsRecord>,
    pub seconds: Vec<f64>,
    /// Base energies of each axis-1 line when windings were requested;
    /// `None` for a line without any localized state.
    pub base_energies: Vec<Option<BaseEnergies>>,
    /// Points taken from a checkpoint instead of being recomputed.
    pub resumed: usize,
}

impl SweepResult {
    pub fn n_errors(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// The rows of axis-1 line `k` (the whole result for a 1D sweep).
    pub fn line(&self, k: usize) -> &[DiagnosticsRecord] {
        let n1 = self.plan.axis1.values.len();
        &self.rows[k * n1..(k + 1) * n1]
    }
}

/// Options that affect how a sweep runs but not what it produces.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Checkpoint file; resumed from when it already exists.
    pub checkpoint: Option<PathBuf>,
    /// Stop after computing this many new points, leaving the checkpoint
    /// behind (used to exercise resumption).
    pub stop_after: Option<usize>,
}

/// Diagnostics of a single model, as a one-point sweep would report them.
pub fn evaluate_point(plan: &SweepPlan, index: usize) -> PointResult {
    let start = Instant::now();
    let mut record = DiagnosticsRecord::empty(index, plan.point(index));
    let states = match point_diagnostics(plan, index, &mut record) {
        Ok(states) => states,
        Err(e) => {
            record.push_error(e);
            None
        }
    };
    PointResult { record, seconds: start.elapsed().as_secs_f64(), states }
}

fn point_diagnostics(plan: &SweepPlan, index: usize, rec: &mut DiagnosticsRecord) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let spec = plan.spec_at(index)?;
    let h = build_hamiltonian(&spec)?;
    let opts = DecomposeOptions { perturb_retry: plan.perturb_retry, seed: plan.seed, fast_paths: true };
    let dec = decompose_with(&h, &opts)?;
    let tol_imag = plan.tol_imag.unwrap_or_else(|| default_tol_imag(&dec));
    let ipr_threshold = plan.ipr_threshold.unwrap_or_else(|| default_ipr_threshold(dec.len()));
    rec.tolerances = Some(Tolerances { tol_imag, ipr_threshold });

    if plan.wants(Diagnostic::Realness) {
        let r = realness(&dec, tol_imag);
        rec.realness = Some(RealnessRow { e_imag_max: r.e_imag_max, e_imag_min: r.e_imag_min, rho: r.rho });
    }
    let needs_profile = plan.wants(Diagnostic::Localization) || plan.wants(Diagnostic::Winding);
    let prof = needs_profile.then(|| profile(&dec));
    if let (true, Some(p)) = (plan.wants(Diagnostic::Localization), &prof) {
        rec.localization = Some(LocalizationRow {
            ipr_max: p.ipr_max,
            ipr_min: p.ipr_min,
            eta: p.eta,
            n_localized: p.ipr.iter().filter(|&&x| x > ipr_threshold).count(),
        });
    }
    if plan.wants(Diagnostic::Entanglement) {
        match entanglement_entropy(&dec, &OccupationRule::AllRealEnergy(tol_imag), &Subsystem::half(dec.sites())) {
            Ok(s) => rec.entanglement = Some(EntanglementRow { entropy: s.entropy, zeta_imag_max: s.max_imag }),
            Err(e) => rec.push_error(e),
        }
    }
    if plan.wants(Diagnostic::Levelstat) {
        match adjacent_gap_ratio(&dec) {
            Ok(g) => rec.levelstat = Some(LevelRow { g_mean: g.g_mean, n_dropped: g.n_dropped }),
            Err(e) => rec.push_error(e),
        }
    }
    Ok(match (plan.wants(Diagnostic::Winding), prof) {
        (true, Some(p)) => Some((dec.eigenvalues.iter().map(|e| e.re).collect(), p.ipr)),
        _ => None,
    })
}

pub fn run_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    run_sweep_with(plan, &RunOptions::default())
}

/// Runs a sweep. Rows come out in grid order whatever the execution order;
/// with a checkpoint the completed points are saved every
/// `plan.checkpoint_every` points and never recomputed on resume.
pub fn run_sweep_with(plan: &SweepPlan, opts: &RunOptions) -> Result<SweepResult> {
    plan.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidPlan(format!("thread pool: {e}")))?;

    let n = plan.len();
    let mut done: Vec<Option<PointResult>> = vec![None; n];
    let mut resumed = 0;
    if let Some(path) = &opts.checkpoint {
        if path.exists() {
            let cp = read_checkpoint(path)?;
            let mut saved = cp.plan;
            saved.threads = plan.threads;
            saved.output = plan.output.clone();
            if saved != *plan {
                return Err(Error::InvalidPlan(format!("{} belongs to a different plan", path.display())));
            }
            for p in cp.points {
                let i = p.record.index;
                if i < n && done[i].is_none() {
                    done[i] = Some(p);
                    resumed += 1;
                }
            }
        }
    }

    let todo: Vec<usize> = (0..n).filter(|&i| done[i].is_none()).collect();
    let chunk = if opts.checkpoint.is_some() && plan.checkpoint_every > 0 { plan.checkpoint_every } else { todo.len().max(1) };
    let mut computed = 0;
    for batch in todo.chunks(chunk) {
        let take = opts.stop_after.map_or(batch.len(), |s| s.saturating_sub(computed).min(batch.len()));
        if take == 0 {
            break;
        }
        let results: Vec<PointResult> = pool.install(|| batch[..take].par_iter().map(|&i| evaluate_point(plan, i)).collect());
        computed += take;
        for r in results {
            let i = r.record.index;
            done[i] = Some(r);
        }
        if let Some(path) = &opts.checkpoint {
            output::write_checkpoint(path, plan, &done)?;
        }
    }
    if done.iter().any(Option::is_none) {
        return Err(Error::InvalidPlan(format!("sweep stopped early after {computed} new points")));
    }
    let mut points: Vec<PointResult> = done.into_iter().flatten().collect();

    let base_energies = if plan.wants(Diagnostic::Winding) { pool.install(|| winding_pass(plan, &mut points)) } else { vec![] };
    let seconds = points.iter().map(|p| p.seconds).collect();
    let rows = points.into_iter().map(|p| p.record).collect();
    Ok(SweepResult { plan: plan.clone(), rows, seconds, base_energies, resumed })
}

/// Picks base energies line by line and evaluates the windings.
fn winding_pass(plan: &SweepPlan, points: &mut [PointResult]) -> Vec<Option<BaseEnergies>> {
    let n1 = plan.axis1.values.len();
    let wopts = WindingOptions { n_theta: plan.n_theta, parallel: false, ..Default::default() };
    let mut bases = Vec::new();
    for line in points.chunks_mut(n1) {
        let sweep: Vec<SweepStates> = line
            .iter()
            .filter_map(|p| {
                let (re, ipr) = p.states.clone()?;
                Some(SweepStates { param: p.record.axis1, re_energies: re, ipr })
            })
            .collect();
        let threshold = line.iter().find_map(|p| p.record.tolerances).map(|t| t.ipr_threshold);
        let Some(threshold) = threshold else {
            bases.push(None);
            continue;
        };
        let chosen = match select_base_energies(&sweep, threshold) {
            Ok(b) => b,
            Err(e) => {
                for p in line.iter_mut() {
                    p.record.push_error(&e);
                }
                bases.push(None);
                continue;
            }
        };
        bases.push(Some(chosen));
        let windings: Vec<Result<WindingRow>> = line
            .par_iter()
            .map(|p| {
                let spec = plan.spec_at(p.record.index)?;
                let w = winding_pair(&spec, chosen, &wopts)?;
                Ok(WindingRow { w1: w.w1, w2: w.w2 })
            })
            .collect();
        for (p, w) in line.iter_mut().zip(windings) {
            match w {
                Ok(w) => p.record.winding = Some(w),
                Err(e) => p.record.push_error(e),
            }
        }
    }
    bases
}

/// Diagnostics of one model. Windings go around `bases` when given, else
/// around base energies picked from this model's own localized states, else
/// around the middle of the widest gap in `Re E`.
pub fn diagnose(plan_template: &SweepPlan, spec: &ModelSpec, bases: Option<BaseEnergies>) -> Result<(DiagnosticsRecord, Option<BaseEnergies>)> {
    let mut plan = plan_template.clone();
    plan.base = spec.clone();
    plan.axis1 = Axis::new("J", vec![spec.j]);
    plan.axis2 = None;
    plan.validate()?;
    let point = evaluate_point(&plan, 0);
    let mut record = point.record;
    if !plan.wants(Diagnostic::Winding) {
        return Ok((record, None));
    }
    let Some((re, ipr)) = point.states else { return Ok((record, None)) };
    let chosen = bases.unwrap_or_else(|| {
        let threshold = record.tolerances.map_or(f64::INFINITY, |t| t.ipr_threshold);
        let states = SweepStates { param: spec.j, re_energies: re.clone(), ipr };
        select_base_energies(&[states], threshold).unwrap_or_else(|_| {
            let e = widest_gap_center(&re);
            BaseEnergies { e1: e, e2: e }
        })
    });
    let wopts = WindingOptions { n_theta: plan.n_theta, ..Default::default() };
    match winding_pair(spec, chosen, &wopts) {
        Ok(w) => record.winding = Some(WindingRow { w1: w.w1, w2: w.w2 }),
        Err(e) => record.push_error(e),
    }
    Ok((record, Some(chosen)))
}

fn widest_gap_center(re: &[f64]) -> f64 {
    let mut sorted = re.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .windows(2)
        .max_by(|a, b| (a[1] - a[0]).total_cmp(&(b[1] - b[0])))
        .map_or(0.0, |w| 0.5 * (w[0] + w[1]))
}

/// Paths of the JSON copy and timing sidecar belonging to a CSV output.
pub fn sibling_paths(csv: &Path) -> (PathBuf, PathBuf) {
    let name = csv.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    (csv.with_extension("json"), csv.with_file_name(format!("{name}.timing.csv")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelKind;

    fn small_plan() -> SweepPlan {
        let base = ModelSpec::fibonacci(ModelKind::Model1, 8).with_v(1.0).with_phi(std::f64::consts::PI / 10.0);
        SweepPlan::new(base, Axis::new("J", vec![0.1, 0.5, 1.2])).with_diagnostics(Diagnostic::ALL)
    }

    #[test]
    fn single_point_matches_direct_diagnostics() {
        let mut plan = small_plan().with_diagnostics([Diagnostic::Realness, Diagnostic::Localization]);
        plan.axis1.values = vec![0.5];
        let res = run_sweep(&plan).unwrap();
        assert_eq!(res.rows.len(), 1);
        let spec = plan.spec_at(0).unwrap();
        let dec = crate::spectrum::decompose(&build_hamiltonian(&spec).unwrap()).unwrap();
        let r = realness(&dec, default_tol_imag(&dec));
        let p = profile(&dec);
        let row = &res.rows[0];
        assert_eq!(row.realness.unwrap().rho, r.rho);
        assert_eq!(row.localization.unwrap().eta, p.eta);
        assert!(row.winding.is_none() && row.entanglement.is_none());
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut a = small_plan();
        a.threads = Some(1);
        let mut b = small_plan();
        b.threads = Some(3);
        let ra = run_sweep(&a).unwrap();
        let rb = run_sweep(&b).unwrap();
        assert_eq!(ra.rows, rb.rows);
        assert!(ra.rows.iter().all(|r| r.levelstat.is_some()));
    }

    #[test]
    fn point_failures_are_recorded() {
        // on 3 sites the default threshold 10/D exceeds 1, so nothing ever localizes
        let base = ModelSpec::fibonacci(ModelKind::Model3, 4);
        let plan = SweepPlan::new(base, Axis::new("gamma", vec![0.0, 0.2])).with_diagnostics([Diagnostic::Winding]);
        let res = run_sweep(&plan).unwrap();
        assert_eq!(res.n_errors(), 2);
        assert!(res.rows.iter().all(|r| r.winding.is_none()));
        assert_eq!(res.base_energies, vec![None]);
    }

    #[test]
    fn hermitian_model_diagnoses_clean() {
        let spec = ModelSpec::fibonacci(ModelKind::Model3, 8).with_v(0.5).with_phi(std::f64::consts::FRAC_PI_2);
        let plan = small_plan();
        let (row, bases) = diagnose(&plan, &spec, None).unwrap();
        assert_eq!(row.winding, Some(WindingRow { w1: 0, w2: 0 }));
        assert_eq!(row.realness.unwrap().rho, 0.0);
        assert!(bases.is_some());
    }
}
