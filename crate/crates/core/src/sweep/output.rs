//! CSV / JSON results and the JSON-lines checkpoint.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{sibling_paths, DiagnosticsRecord, PointResult, SweepPlan, SweepResult};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "null".to_string(), |x| x.to_string())
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// One row per grid point in grid order, after a `# schema` line. Missing
/// values are written as `null`.
pub fn to_csv(res: &SweepResult) -> String {
    let plan = &res.plan;
    let mut out = format!("# nhqc sweep schema {SCHEMA_VERSION}\nindex,{}", plan.axis1.param);
    if let Some(a2) = &plan.axis2 {
        let _ = write!(out, ",{}", a2.param);
    }
    out.push_str(
        ",e_imag_max,e_imag_min,rho,ipr_max,ipr_min,eta,n_localized,w1,w2,entropy,zeta_imag_max,g_mean,n_dropped,tol_imag,ipr_threshold,error\n",
    );
    for r in &res.rows {
        let _ = write!(out, "{},{}", r.index, r.axis1);
        if plan.axis2.is_some() {
            let _ = write!(out, ",{}", opt(r.axis2));
        }
        let re = r.realness;
        let lo = r.localization;
        let w = r.winding;
        let en = r.entanglement;
        let lv = r.levelstat;
        let tol = r.tolerances;
        let cells = [
            opt(re.map(|x| x.e_imag_max)),
            opt(re.map(|x| x.e_imag_min)),
            opt(re.map(|x| x.rho)),
            opt(lo.map(|x| x.ipr_max)),
            opt(lo.map(|x| x.ipr_min)),
            opt(lo.map(|x| x.eta)),
            opt(lo.map(|x| x.n_localized)),
            opt(w.map(|x| x.w1)),
            opt(w.map(|x| x.w2)),
            opt(en.map(|x| x.entropy)),
            opt(en.map(|x| x.zeta_imag_max)),
            opt(lv.map(|x| x.g_mean)),
            opt(lv.map(|x| x.n_dropped)),
            opt(tol.map(|x| x.tol_imag)),
            opt(tol.map(|x| x.ipr_threshold)),
            r.error.as_deref().map_or_else(|| "null".to_string(), quoted),
        ];
        for c in cells {
            out.push(',');
            out.push_str(&c);
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonResult<'a> {
    schema_version: u32,
    plan: &'a SweepPlan,
    base_energies: &'a [Option<crate::topology::BaseEnergies>],
    rows: &'a [DiagnosticsRecord],
}

/// The CSV content nested per diagnostic, with the plan and the chosen base
/// energies.
pub fn to_json(res: &SweepResult) -> Result<String> {
    let doc = JsonResult { schema_version: SCHEMA_VERSION, plan: &res.plan, base_energies: &res.base_energies, rows: &res.rows };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn timing_csv(res: &SweepResult) -> String {
    let mut out = String::from("index,seconds\n");
    for (r, s) in res.rows.iter().zip(&res.seconds) {
        let _ = writeln!(out, "{},{s:.3}", r.index);
    }
    out
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Writes `csv`, its `.json` sibling and the `.timing.csv` sidecar. Wall
/// times live only in the sidecar so the other two are reproducible byte for
/// byte.
pub fn write_outputs(res: &SweepResult, csv: &Path) -> Result<()> {
    let (json, timing) = sibling_paths(csv);
    write_atomic(csv, &to_csv(res))?;
    write_atomic(&json, &to_json(res)?)?;
    write_atomic(&timing, &timing_csv(res))
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    schema_version: u32,
    plan: SweepPlan,
}

/// Finished points saved by an interrupted sweep.
pub struct Checkpoint {
    pub plan: SweepPlan,
    pub points: Vec<PointResult>,
}

pub(super) fn write_checkpoint(path: &Path, plan: &SweepPlan, done: &[Option<PointResult>]) -> Result<()> {
    let header = CheckpointHeader { schema_version: SCHEMA_VERSION, plan: plan.clone() };
    let mut out = serde_json::to_string(&header)? + "\n";
    for p in done.iter().flatten() {
        out += &serde_json::to_string(p)?;
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::InvalidPlan(format!("{} is empty", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    let header: CheckpointHeader = serde_json::from_str(&first)?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidPlan(format!("checkpoint schema {} is not {SCHEMA_VERSION}", header.schema_version)));
    }
    let mut points = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            points.push(serde_json::from_str(&line)?);
        }
    }
    Ok(Checkpoint { plan: header.plan, points })
}
