//! Plan files: flat `key = value` text with `model.*` and dotted axis keys.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{kv_lines, ModelSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Diagnostic {
    Realness,
    Localization,
    Winding,
    Entanglement,
    Levelstat,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 5] =
        [Diagnostic::Realness, Diagnostic::Localization, Diagnostic::Winding, Diagnostic::Entanglement, Diagnostic::Levelstat];

    pub fn name(self) -> &'static str {
        match self {
            Diagnostic::Realness => "realness",
            Diagnostic::Localization => "localization",
            Diagnostic::Winding => "winding",
            Diagnostic::Entanglement => "entanglement",
            Diagnostic::Levelstat => "levelstat",
        }
    }
}

impl FromStr for Diagnostic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Diagnostic::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid("diagnostics", format!("unknown diagnostic `{s}`")))
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One swept model parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: impl Into<String>, values: Vec<f64>) -> Self {
        Axis { param: param.into(), values }
    }

    /// `start, start + step, ...` up to `stop` inclusive, snapped to 12
    /// decimals so that `0.1 * 3` prints as `0.3`.
    pub fn range(param: impl Into<String>, start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(Error::InvalidPlan(format!("bad range {start}..{stop} step {step}")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let values = (0..n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect();
        Ok(Axis { param: param.into(), values })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub base: ModelSpec,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub diagnostics: BTreeSet<Diagnostic>,
    /// CSV output; the JSON copy and the timing sidecar sit next to it.
    pub output: Option<PathBuf>,
    /// Rows between checkpoint writes; 0 disables checkpointing.
    pub checkpoint_every: usize,
    /// Absolute `|Im E|` tolerance; per-point `1e-8 ρ(H)` when absent.
    pub tol_imag: Option<f64>,
    /// IPR threshold; `10 / D` when absent.
    pub ipr_threshold: Option<f64>,
    pub n_theta: usize,
    /// Allow winding numbers on two-dimensional grids.
    pub winding_2d: bool,
    pub seed: u64,
    pub threads: Option<usize>,
    pub perturb_retry: bool,
}

impl SweepPlan {
    pub fn new(base: ModelSpec, axis1: Axis) -> Self {
        SweepPlan {
            base,
            axis1,
            axis2: None,
            diagnostics: [Diagnostic::Realness, Diagnostic::Localization].into_iter().collect(),
            output: None,
            checkpoint_every: 0,
            tol_imag: None,
            ipr_threshold: None,
            n_theta: 256,
            winding_2d: false,
            seed: 0,
            threads: None,
            perturb_retry: false,
        }
    }

    pub fn with_diagnostics(mut self, d: impl IntoIterator<Item = Diagnostic>) -> Self {
        self.diagnostics = d.into_iter().collect();
        self
    }

    pub fn wants(&self, d: Diagnostic) -> bool {
        self.diagnostics.contains(&d)
    }

    pub fn len(&self) -> usize {
        self.axis1.values.len() * self.axis2.as_ref().map_or(1, |a| a.values.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of grid point `index`; axis1 varies fastest.
    pub fn point(&self, index: usize) -> (f64, Option<f64>) {
        let n1 = self.axis1.values.len();
        let a1 = self.axis1.values[index % n1];
        (a1, self.axis2.as_ref().map(|a| a.values[index / n1]))
    }

    /// Model at grid point `index`.
    pub fn spec_at(&self, index: usize) -> Result<ModelSpec> {
        let (a1, a2) = self.point(index);
        let mut spec = self.base.clone();
        if let Some(axis) = &self.axis2 {
            spec.set(&axis.param, &a2.unwrap_or_default().to_string())?;
        }
        spec.set(&self.axis1.param, &a1.to_string())?;
        spec.validate()?;
        Ok(spec)
    }

    /// Everything that can be checked without solving anything.
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let axes = std::iter::once(&self.axis1).chain(self.axis2.as_ref());
        for axis in axes {
            if axis.values.is_empty() {
                return Err(Error::InvalidPlan(format!("axis `{}` has no values", axis.param)));
            }
            if let Some(v) = axis.values.iter().find(|v| !v.is_finite()) {
                return Err(Error::invalid(axis.param.clone(), format!("non-finite value {v}")));
            }
            self.base.get(&axis.param)?;
        }
        if let Some(a2) = &self.axis2 {
            if a2.param.eq_ignore_ascii_case(&self.axis1.param) {
                return Err(Error::InvalidPlan("both axes sweep the same parameter".into()));
            }
            if self.wants(Diagnostic::Winding) && !self.winding_2d {
                return Err(Error::InvalidPlan(
                    "winding on a 2D grid costs n_theta factorizations per point; set winding_2d = true".into(),
                ));
            }
        }
        if self.wants(Diagnostic::Winding) && !self.base.is_periodic() {
            return Err(Error::invalid("diagnostics", "winding needs periodic boundaries"));
        }
        if self.n_theta == 0 {
            return Err(Error::invalid("winding.n_theta", "must be positive"));
        }
        for (key, v) in [("tol_imag", self.tol_imag), ("ipr_threshold", self.ipr_threshold)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(key, "must be positive"));
                }
            }
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads", "must be positive"));
        }
        for k in 0..self.len() {
            self.spec_at(k)?;
        }
        Ok(())
    }

    /// Parses a plan file. Recognized keys: `model.<model key>`,
    /// `axis{1,2}.param`, `axis{1,2}.values` or `axis{1,2}.start/stop/step`,
    /// `diagnostics`, `output`, `checkpoint_every`, `tol_imag`,
    /// `ipr_threshold`, `winding.n_theta`, `winding_2d`, `seed`, `threads`,
    /// `perturb_retry`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut model = String::new();
        let mut axes: [AxisKeys; 2] = Default::default();
        let mut plan = SweepPlan::new(ModelSpec::default(), Axis::new("J", vec![]));
        for entry in kv_lines(text) {
            let (_, key, value) = entry?;
            let lower = key.to_ascii_lowercase();
            if let Some(k) = key.strip_prefix("model.") {
                model.push_str(&format!("{k} = {value}\n"));
            } else if let Some((n, field)) = lower.strip_prefix("axis").and_then(|r| r.split_once('.')) {
                let slot = match n {
                    "1" => &mut axes[0],
                    "2" => &mut axes[1],
                    _ => return Err(Error::UnknownKey(key.to_string())),
                };
                slot.set(key, field, value)?;
            } else {
                plan.set(key, value)?;
            }
        }
        plan.base = ModelSpec::from_kv(&model)?;
        plan.axis1 = axes[0].build("axis1")?.ok_or_else(|| Error::InvalidPlan("missing axis1".into()))?;
        plan.axis2 = axes[1].build("axis2")?;
        plan.validate()?;
        Ok(plan)
    }

    /// Sets one non-model, non-axis key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::invalid(key, format!("`{v}` is not a number")));
        let int = |v: &str| v.trim().parse::<u64>().map_err(|_| Error::invalid(key, format!("`{v}` is not a count")));
        let flag = |v: &str| match v.trim() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(Error::invalid(key, format!("`{v}` is not a boolean"))),
        };
        match key.to_ascii_lowercase().as_str() {
            "diagnostics" => {
                self.diagnostics = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.parse())
                    .collect::<Result<_>>()?;
            }
            "output" => self.output = Some(PathBuf::from(value.trim())),
            "checkpoint_every" => self.checkpoint_every = int(value)? as usize,
            "tol_imag" => self.tol_imag = Some(num(value)?),
            "ipr_threshold" => self.ipr_threshold = Some(num(value)?),
            "winding.n_theta" | "n_theta" => self.n_theta = int(value)? as usize,
            "winding_2d" => self.winding_2d = flag(value)?,
            "seed" => self.seed = int(value)?,
            "threads" => self.threads = Some(int(value)? as usize),
            "perturb_retry" => self.perturb_retry = flag(value)?,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}

#[derive(Default)]
struct AxisKeys {
    param: Option<String>,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
}

impl AxisKeys {
    fn set(&mut self, key: &str, field: &str, value: &str) -> Result<()> {
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::invalid(key, format!("`{v}` is not a number")));
        match field {
            "param" => self.param = Some(value.trim().to_string()),
            "values" => self.values = Some(value.split(',').map(num).collect::<Result<_>>()?),
            "start" => self.start = Some(num(value)?),
            "stop" => self.stop = Some(num(value)?),
            "step" => self.step = Some(num(value)?),
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    fn build(&self, name: &str) -> Result<Option<Axis>> {
        let Some(param) = self.param.clone() else {
            if self.values.is_some() || self.start.is_some() {
                return Err(Error::InvalidPlan(format!("{name} has values but no param")));
            }
            return Ok(None);
        };
        match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => Ok(Some(Axis::new(param, v.clone()))),
            (None, Some(a), Some(b), Some(s)) => Axis::range(param, a, b, s).map(Some),
            _ => Err(Error::InvalidPlan(format!("{name} needs either values or start/stop/step"))),
        }
    }
}
