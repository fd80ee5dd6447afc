//! The curl-eigenfield (Beltrami) construction.
//!
//! From a 1-form `A` with `dA + 2*A = 0` (a curl eigenfield of eigenvalue
//! -2, hence a solution of `lap A = 4A` for the Hodge Laplacian), builds the
//! 4-metric `g = rho^2 h + rho^-2 (rho drho + A)^2` over `N x (0, inf)`.

use crate::chart::Chart;
use crate::curvature4::Metric4;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::exterior3::{Frame3, Metric3, OneForm3};
use crate::report::{scan_norm, scan_values, CheckReport};
use std::sync::Arc;

pub const FIELD_FLOOR: f64 = 1e-6;

/// Eigenfield data: base metric and the 1-form `A` on a 4-dimensional chart
/// whose last coordinate is the fiber radius `rho`.
#[derive(Debug, Clone)]
pub struct BeltramiData {
    pub h: Metric3,
    pub a: OneForm3,
}

impl BeltramiData {
    pub fn chart(&self) -> &Arc<Chart> {
        self.h.chart()
    }

    fn base_samples(&self) -> Vec<Vec<f64>> {
        self.chart().sample_points(3, 40, 7)
    }
}

/// Residuals of the defining equations: `|dA + 2*A|` and the eigenvalue
/// defect `|lap A - 4A|` for the Hodge Laplacian.
pub fn verify_beltrami(data: &BeltramiData, points: &[Vec<f64>]) -> Result<Vec<CheckReport>> {
    let h = &data.h;
    let names = data.chart().coords();
    let curl_defect = h
        .d1(&data.a)
        .add(&h.star1(&data.a).scale(&ScalarExpr::int(2)));
    let eigen = scan_norm(
        "beltrami-eq",
        names,
        points,
        &h.inner22(&curl_defect, &curl_defect),
    )?;
    let lap_defect = h
        .hodge_laplacian1(&data.a)
        .sub(&data.a.scale(&ScalarExpr::int(4)));
    let laplace = scan_norm(
        "hodge-laplace",
        names,
        points,
        &h.norm_sq1(&lap_defect),
    )?;
    Ok(vec![eigen, laplace])
}

/// Checks the standing invariants: the eigenfield residuals and the field
/// floor `|A| >= 1e-6` (which keeps the frame and the curvature form alive).
pub fn validate(data: &BeltramiData, points: &[Vec<f64>]) -> Result<()> {
    let reports = verify_beltrami(data, points)?;
    let tols = [1e-8, 1e-6];
    for (r, tol) in reports.iter().zip(tols) {
        if !r.passes(tol) {
            return Err(Error::Invariant(format!(
                "{} residual {} exceeds {}",
                r.name, r.max_abs, tol
            )));
        }
    }
    let h = &data.h;
    let names = data.chart().coords();
    let floor = scan_values(
        "field-floor",
        names,
        points,
        std::slice::from_ref(&h.norm_sq1(&data.a)),
        |v| -v[0].max(0.0).sqrt(),
    )?;
    if floor.max_abs > -FIELD_FLOOR {
        return Err(Error::Invariant(format!(
            "|A| drops to {} below the floor {}",
            -floor.max_abs,
            FIELD_FLOOR
        )));
    }
    Ok(())
}

/// Assembles `g = rho^2 h + rho^-2 (rho drho + A)^2`. With the fundamental
/// field `rho^-1 d/drho` the fiber constant is `V(rho^2) = 2`.
pub fn beltrami_build(data: &BeltramiData) -> Result<Metric4> {
    let bounds = data.chart().bounds();
    let rho_range = bounds[3];
    if rho_range.0 <= 0.0 {
        return Err(Error::Invariant(format!(
            "fiber interval [{}, {}] must stay away from 0",
            rho_range.0, rho_range.1
        )));
    }
    validate(data, &data.base_samples())?;
    let names = data.chart().coords();
    let rho = ScalarExpr::var(&names[3]);
    Metric4::assemble(
        data.h.clone(),
        ScalarExpr::powi(rho.clone(), 2),
        data.a.clone(),
        rho,
        2.0,
        data.chart().clone(),
    )
}

/// Adapted frame with `z` along `A`; the other two legs annihilate `A`.
pub fn beltrami_frame(data: &BeltramiData) -> Result<Frame3> {
    let h = &data.h;
    let names = data.chart().coords();
    let norm_sq = h.norm_sq1(&data.a);
    let floor = scan_values(
        "field-floor",
        names,
        &data.base_samples(),
        std::slice::from_ref(&norm_sq),
        |v| -v[0].max(0.0).sqrt(),
    )?;
    if floor.max_abs > -FIELD_FLOOR {
        return Err(Error::Invariant(format!(
            "|A| drops to {} below the floor {}",
            -floor.max_abs,
            FIELD_FLOOR
        )));
    }
    let inv_len = ScalarExpr::quot(ScalarExpr::one(), ScalarExpr::sqrt(norm_sq));
    let z = h.sharp(&data.a).scale(&inv_len);
    Frame3::complete(h, z)
}

#[cfg(test)]
mod tests;
