//! Residual reports and deterministic numeric formatting.

use crate::error::Result;
use crate::expr::{Evaluator, ScalarExpr};
use rayon::prelude::*;

/// Max/mean absolute residual of one named check over a sample set.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
}

impl CheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs <= tol
    }
}

/// Evaluates `|e|` over the sample set in parallel.
pub fn scan_abs(
    name: &str,
    coords: &[String],
    points: &[Vec<f64>],
    e: &ScalarExpr,
) -> Result<CheckReport> {
    scan_values(name, coords, points, std::slice::from_ref(e), |v| v[0].abs())
}

/// Evaluates `sqrt(max(e, 0))` over the sample set; `e` is a squared norm
/// whose tiny negative round-off excursions are clamped.
pub fn scan_norm(
    name: &str,
    coords: &[String],
    points: &[Vec<f64>],
    norm_sq: &ScalarExpr,
) -> Result<CheckReport> {
    scan_values(name, coords, points, std::slice::from_ref(norm_sq), |v| {
        v[0].max(0.0).sqrt()
    })
}

/// Evaluates a list of expressions at every sample point and folds each
/// value vector to a single nonnegative residual.
pub fn scan_values<F>(
    name: &str,
    coords: &[String],
    points: &[Vec<f64>],
    exprs: &[ScalarExpr],
    fold: F,
) -> Result<CheckReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values: Result<Vec<f64>> = points
        .par_iter()
        .map(|p| {
            let mut ev = Evaluator::new(coords, p);
            let vals: Result<Vec<f64>> =
                exprs.iter().map(|e| Ok(ev.eval(e)?)).collect();
            Ok(fold(&vals?))
        })
        .collect();
    let values = values?;
    let max_abs = values
        .iter()
        .cloned()
        .reduce(f64::max)
        .unwrap_or(0.0);
    let mean_abs = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    Ok(CheckReport {
        name: name.to_string(),
        samples: points.len(),
        max_abs,
        mean_abs,
    })
}

/// Merges per-check reports by taking the worst residuals.
pub fn worst(name: &str, reports: &[CheckReport]) -> CheckReport {
    CheckReport {
        name: name.to_string(),
        samples: reports.iter().map(|r| r.samples).max().unwrap_or(0),
        max_abs: reports.iter().map(|r| r.max_abs).fold(0.0, f64::max),
        mean_abs: reports
            .iter()
            .map(|r| r.mean_abs)
            .sum::<f64>()
            / reports.len().max(1) as f64,
    }
}

/// Fixed-width float formatting with 17 significant digits, enough to
/// round-trip any f64 and keep reports byte-identical across runs.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Minimal JSON string escaping for report fields.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}
