//! Coordinate charts with domain guards and deterministic sample sets.

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// An inequality `expr(point) >= floor` that must hold everywhere on the
/// domain; used to keep sample boxes away from singular loci.
#[derive(Debug, Clone)]
pub struct Exclusion {
    pub label: String,
    pub expr: ScalarExpr,
    pub floor: f64,
}

/// Ordered coordinate names plus a domain guard (a box and excluded loci).
/// Every guarded evaluation routes through [`Chart::guard_check`].
#[derive(Debug, Clone)]
pub struct Chart {
    coords: Vec<String>,
    bounds: Vec<(f64, f64)>,
    exclusions: Vec<Exclusion>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[S], bounds: Vec<(f64, f64)>) -> Arc<Chart> {
        let names: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        for (i, a) in names.iter().enumerate() {
            for b in names.iter().skip(i + 1) {
                assert_ne!(a, b, "coordinate names must be distinct");
            }
        }
        assert_eq!(names.len(), bounds.len());
        Arc::new(Chart {
            coords: names,
            bounds,
            exclusions: Vec::new(),
        })
    }

    pub fn with_exclusion(self: &Arc<Self>, label: &str, expr: ScalarExpr, floor: f64) -> Arc<Chart> {
        let mut c = (**self).clone();
        c.exclusions.push(Exclusion {
            label: label.to_string(),
            expr,
            floor,
        });
        Arc::new(c)
    }

    /// New chart with one extra (fiber) coordinate appended.
    pub fn extended(self: &Arc<Self>, fiber: &str, range: (f64, f64)) -> Arc<Chart> {
        let mut c = (**self).clone();
        assert!(!c.coords.iter().any(|x| x == fiber));
        c.coords.push(fiber.to_string());
        c.bounds.push(range);
        Arc::new(c)
    }

    /// Same chart restricted to a different box (exclusions kept).
    pub fn with_bounds(self: &Arc<Self>, bounds: Vec<(f64, f64)>) -> Arc<Chart> {
        let mut c = (**self).clone();
        assert_eq!(bounds.len(), c.bounds.len());
        c.bounds = bounds;
        Arc::new(c)
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn exclusions(&self) -> &[Exclusion] {
        &self.exclusions
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Errors unless the point lies in the box and clears every exclusion.
    pub fn guard_check(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.coords.len() {
            return Err(Error::Guard(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.coords.len()
            )));
        }
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            let pad = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
            if point[i] < lo - pad || point[i] > hi + pad {
                return Err(Error::Guard(format!(
                    "coordinate {} = {} outside [{}, {}]",
                    self.coords[i], point[i], lo, hi
                )));
            }
        }
        for ex in &self.exclusions {
            let v = ex.expr.eval_real(&self.coords, point)?;
            if v < ex.floor {
                return Err(Error::Guard(format!(
                    "excluded locus `{}`: {} < {}",
                    ex.label, v, ex.floor
                )));
            }
        }
        Ok(())
    }

    /// Checks that the whole lattice of a candidate box clears the guard.
    pub fn validate_box(&self, bounds: &[(f64, f64)]) -> Result<()> {
        if bounds.len() != self.dim() {
            return Err(Error::Guard(format!(
                "box has {} axes, chart has {}",
                bounds.len(),
                self.dim()
            )));
        }
        let d = self.dim();
        let n = 4usize;
        for idx in 0..n.pow(d as u32) {
            let mut rem = idx;
            let mut p = vec![0.0; d];
            for k in 0..d {
                let i = rem % n;
                rem /= n;
                let (lo, hi) = bounds[k];
                p[k] = lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
            }
            self.guard_check(&p).map_err(|e| {
                Error::Guard(format!("box validation failed at {:?}: {}", p, e))
            })?;
        }
        Ok(())
    }

    /// Deterministic sample set: an interior lattice (`n` per axis, midpoint
    /// offsets) plus `n_random` uniform points from a seeded generator.
    pub fn sample_points(&self, n: usize, n_random: usize, seed: u64) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::new();
        let total = n.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = vec![0.0; d];
            for k in 0..d {
                let i = rem % n;
                rem /= n;
                let (lo, hi) = self.bounds[k];
                p[k] = lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
            }
            if self.guard_check(&p).is_ok() {
                out.push(p);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut produced = 0usize;
        let mut attempts = 0usize;
        while produced < n_random && attempts < 100 * (n_random + 1) {
            attempts += 1;
            let p: Vec<f64> = self
                .bounds
                .iter()
                .map(|(lo, hi)| rng.gen_range(*lo..*hi))
                .collect();
            if self.guard_check(&p).is_ok() {
                out.push(p);
                produced += 1;
            }
        }
        out
    }

    /// Default sample set sized per the reporting convention: a 125-point
    /// lattice (3 axes) or 81-point lattice (4 axes) plus random fill.
    pub fn default_samples(&self, seed: u64) -> Vec<Vec<f64>> {
        match self.dim() {
            3 => self.sample_points(5, 75, seed),
            4 => self.sample_points(3, 119, seed),
            _ => self.sample_points(4, 50, seed),
        }
    }

    pub fn parse(&self, text: &str) -> Result<ScalarExpr> {
        Ok(crate::expr::parse_expr(text, &self.coords)?)
    }
}
