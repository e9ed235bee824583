//! Flat `key = value` text form of [`ModelSpec`].
//!
//! ```text
//! kind = model2
//! J = 1
//! V = 6
//! phi = pi/2
//! beta = 1.1
//! alpha_p = 377
//! alpha_q = 610
//! L = 610
//! boundary = pbc
//! ```
//!
//! Angles accept `pi` expressions such as `pi/10`, `-pi`, `0.5*pi`.

use std::f64::consts::PI;

use super::{Approximant, ModelKind, ModelSpec};
use crate::error::{Error, Result};

pub const KEYS: &[&str] =
    &["kind", "J", "V", "phi", "beta", "gamma", "alpha_p", "alpha_q", "L", "boundary", "flux", "flux_divisor"];

/// Parses a real number, optionally written as a multiple of `pi`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let Some(at) = s.find("pi") else {
        return s.parse::<f64>().ok().filter(|x| x.is_finite());
    };
    let coef = match s[..at].trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let rest = &s[at + 2..];
    let denom = if rest.is_empty() { 1.0 } else { rest.strip_prefix('/')?.parse::<f64>().ok()? };
    let x = coef * PI / denom;
    x.is_finite().then_some(x)
}

/// Shortest text that parses back to the same `f64`.
pub fn format_angle(x: f64) -> String {
    format!("{x}")
}

fn canonical(key: &str) -> Option<&'static str> {
    let k = key.trim();
    KEYS.iter().copied().find(|c| c.eq_ignore_ascii_case(k))
}

fn number(key: &str, value: &str) -> Result<f64> {
    parse_angle(value).ok_or_else(|| Error::invalid(key, format!("`{}` is not a finite number", value.trim())))
}

fn integer(key: &str, value: &str) -> Result<u64> {
    value.trim().parse::<u64>().map_err(|_| Error::invalid(key, format!("`{}` is not a nonnegative integer", value.trim())))
}

pub(super) fn set_key(spec: &mut ModelSpec, key: &str, value: &str) -> Result<()> {
    let key = canonical(key).ok_or_else(|| Error::UnknownKey(key.trim().to_string()))?;
    match key {
        "kind" => spec.kind = value.parse()?,
        "J" => spec.j = number(key, value)?,
        "V" => spec.v = number(key, value)?,
        "phi" => spec.phi = number(key, value)?,
        "beta" => spec.beta = number(key, value)?,
        "gamma" => spec.gamma = number(key, value)?,
        "flux" => spec.flux = number(key, value)?,
        "flux_divisor" => {
            spec.flux_divisor = match value.trim() {
                "" | "L" | "l" | "none" => None,
                v => Some(number(key, v)?),
            }
        }
        "boundary" => spec.boundary = value.parse()?,
        "alpha_p" => spec.alpha.p = integer(key, value)?,
        "alpha_q" => {
            spec.alpha.q = integer(key, value)?;
            if spec.is_periodic() {
                spec.len = spec.alpha.q as usize;
            }
        }
        "L" => {
            let len = integer(key, value)? as usize;
            spec.len = len;
            // keep a Fibonacci ring consistent when only L changes
            if spec.is_periodic() && spec.alpha.q != len as u64 {
                if let Some(a) = Approximant::fibonacci_with_denominator(len as u64) {
                    spec.alpha = a;
                }
            }
        }
        _ => unreachable!("every canonical key is handled"),
    }
    Ok(())
}

pub(super) fn get_key(spec: &ModelSpec, key: &str) -> Result<f64> {
    let key = canonical(key).ok_or_else(|| Error::UnknownKey(key.trim().to_string()))?;
    Ok(match key {
        "J" => spec.j,
        "V" => spec.v,
        "phi" => spec.phi,
        "beta" => spec.beta,
        "gamma" => spec.gamma,
        "flux" => spec.flux,
        "flux_divisor" => spec.flux_divisor.unwrap_or(spec.len as f64),
        "alpha_p" => spec.alpha.p as f64,
        "alpha_q" => spec.alpha.q as f64,
        "L" => spec.len as f64,
        other => return Err(Error::invalid(other, "not a numeric parameter")),
    })
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub(crate) fn kv_lines(text: &str) -> impl Iterator<Item = Result<(usize, &str, &str)>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        Some(match line.split_once('=') {
            Some((k, v)) => Ok((i + 1, k.trim(), v.trim())),
            None => Err(Error::InvalidSpec(format!("line {}: expected `key = value`, got `{line}`", i + 1))),
        })
    })
}

pub(super) fn from_kv(text: &str) -> Result<ModelSpec> {
    let mut spec = ModelSpec::fibonacci(ModelKind::Model1, 15);
    let mut alpha_given = false;
    let mut len_given = false;
    let mut entries = Vec::new();
    for entry in kv_lines(text) {
        let (_, k, v) = entry?;
        match canonical(k) {
            Some("alpha_p" | "alpha_q") => alpha_given = true,
            Some("L") => len_given = true,
            _ => {}
        }
        entries.push((k, v));
    }
    // boundary first so the L/alpha coupling sees the final boundary
    entries.sort_by_key(|(k, _)| canonical(k) != Some("boundary"));
    for (k, v) in entries {
        set_key(&mut spec, k, v)?;
    }
    if alpha_given && !len_given {
        spec.len = spec.alpha.q as usize;
    }
    spec.validate()?;
    Ok(spec)
}

pub(super) fn to_kv(spec: &ModelSpec) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    line("kind", spec.kind.name().into());
    line("J", format_angle(spec.j));
    line("V", format_angle(spec.v));
    line("phi", format_angle(spec.phi));
    line("beta", format_angle(spec.beta));
    line("gamma", format_angle(spec.gamma));
    line("alpha_p", spec.alpha.p.to_string());
    line("alpha_q", spec.alpha.q.to_string());
    line("L", spec.len.to_string());
    line("boundary", spec.boundary.name().into());
    line("flux", format_angle(spec.flux));
    if let Some(d) = spec.flux_divisor {
        line("flux_divisor", format_angle(d));
    }
    out
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::fibonacci(ModelKind::Model1, 15)
    }
}
