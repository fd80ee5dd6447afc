//! The curl-fibration (Gibbons-Hawking) construction.
//!
//! From a positive harmonic function `u` and a potential 1-form `A` with
//! `du = *dA` on an oriented 3-manifold, builds the 4-metric
//! `g = u h + u^-1 (dt + A)^2` with its Killing fundamental field, adapted
//! frame and fiber diagnostics.

use crate::chart::Chart;
use crate::curvature4::Metric4;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::exterior3::{Frame3, Metric3, OneForm3, Vector3};
use crate::report::{scan_norm, scan_values, CheckReport};
use std::sync::Arc;

pub const GRADIENT_FLOOR: f64 = 1e-6;
pub const CURVATURE_FORM_FLOOR: f64 = 1e-6;

/// Monopole data: base metric, positive harmonic `u` and potential `A` on a
/// 4-dimensional chart whose last coordinate is the fiber.
#[derive(Debug, Clone)]
pub struct GHData {
    pub h: Metric3,
    pub u: ScalarExpr,
    pub a: OneForm3,
}

impl GHData {
    pub fn chart(&self) -> &Arc<Chart> {
        self.h.chart()
    }

    fn base_samples(&self) -> Vec<Vec<f64>> {
        self.chart().sample_points(3, 40, 7)
    }
}

/// Residuals of the defining equations: `|du - *dA|` and the harmonicity
/// defect `|codiff du|` over the sample set.
pub fn verify_monopole(data: &GHData, points: &[Vec<f64>]) -> Result<Vec<CheckReport>> {
    let h = &data.h;
    let names = data.chart().coords();
    let du = h.d0(&data.u);
    let defect = du.sub(&h.star2(&h.d1(&data.a)));
    let monopole = scan_norm("monopole-eq", names, points, &h.norm_sq1(&defect))?;
    let harmonic = scan_values(
        "harmonic",
        names,
        points,
        std::slice::from_ref(&h.codiff1(&du)),
        |v| v[0].abs(),
    )?;
    Ok(vec![monopole, harmonic])
}

/// Checks the standing invariants: the monopole and harmonic residuals,
/// positivity of `u` and the curvature-form floor `|dA| >= 1e-6`.
pub fn validate(data: &GHData, points: &[Vec<f64>]) -> Result<()> {
    let reports = verify_monopole(data, points)?;
    for r in &reports {
        if !r.passes(1e-8) {
            return Err(Error::Invariant(format!(
                "{} residual {} exceeds 1e-8",
                r.name, r.max_abs
            )));
        }
    }
    let h = &data.h;
    let names = data.chart().coords();
    let positivity = scan_values(
        "u-positivity",
        names,
        points,
        std::slice::from_ref(&data.u),
        |v| -v[0],
    )?;
    if positivity.max_abs >= 0.0 {
        return Err(Error::Invariant(format!(
            "u is not positive on the box (min u = {})",
            -positivity.max_abs
        )));
    }
    let da = h.d1(&data.a);
    let omega_floor = scan_values(
        "curvature-form-floor",
        names,
        points,
        std::slice::from_ref(&h.inner22(&da, &da)),
        |v| -v[0].max(0.0).sqrt(),
    )?;
    if omega_floor.max_abs > -CURVATURE_FORM_FLOOR {
        return Err(Error::Invariant(format!(
            "|dA| drops to {} below the floor {}",
            -omega_floor.max_abs,
            CURVATURE_FORM_FLOOR
        )));
    }
    Ok(())
}

/// Assembles `g = u h + u^-1 (dt + A)^2`; the fundamental field is the
/// fiber translation field, so `c = V(lambda^-2) = V(u) = 0`.
pub fn gh_build(data: &GHData) -> Result<Metric4> {
    validate(data, &data.base_samples())?;
    Metric4::assemble(
        data.h.clone(),
        data.u.clone(),
        data.a.clone(),
        ScalarExpr::one(),
        0.0,
        data.chart().clone(),
    )
}

/// Adapted frame with `z` along `grad u`; the other two legs annihilate `u`.
pub fn gh_frame(data: &GHData) -> Result<Frame3> {
    let h = &data.h;
    let names = data.chart().coords();
    let du = h.d0(&data.u);
    let norm_sq = h.norm_sq1(&du);
    let floor = scan_values(
        "gradient-floor",
        names,
        &data.base_samples(),
        std::slice::from_ref(&norm_sq),
        |v| -v[0].max(0.0).sqrt(),
    )?;
    if floor.max_abs > -GRADIENT_FLOOR {
        return Err(Error::Invariant(format!(
            "|du| drops to {} below the floor {}",
            -floor.max_abs,
            GRADIENT_FLOOR
        )));
    }
    let inv_len = ScalarExpr::quot(ScalarExpr::one(), ScalarExpr::sqrt(norm_sq));
    let z = h.sharp(&du).scale(&inv_len);
    Frame3::complete(h, z)
}

/// Second-fundamental-form and induced-curvature diagnostics for the level
/// sets of `u`; both vanish exactly when the fibers are flat and geodesic.
pub fn fiber_diagnostic(data: &GHData, points: &[Vec<f64>]) -> Result<Vec<CheckReport>> {
    let h = &data.h;
    let names = data.chart().coords();
    let frame = gh_frame(data)?;
    let du = h.d0(&data.u);
    let inv_len = ScalarExpr::quot(ScalarExpr::one(), h.norm1(&du));
    let n = du.scale(&inv_len);

    // Covariant derivative of the unit conormal, as a (0,2) tensor.
    let gam = h.christoffel();
    let mut grad_n: [[ScalarExpr; 3]; 3] =
        std::array::from_fn(|_| std::array::from_fn(|_| ScalarExpr::zero()));
    for i in 0..3 {
        for j in 0..3 {
            let partial = n.0[j].differentiate(&names[i]);
            let conn = ScalarExpr::add_all((0..3).map(|k| &gam[k][i][j] * &n.0[k]));
            grad_n[i][j] = &partial - &conn;
        }
    }
    // Second fundamental form on the tangent frame legs.
    let pair = |s: &Vector3, t: &Vector3| {
        ScalarExpr::add_all(
            (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| ScalarExpr::mul_all([s.0[i].clone(), grad_n[i][j].clone(), t.0[j].clone()])),
        )
    };
    let ii_xx = pair(&frame.x, &frame.x);
    let ii_xy = pair(&frame.x, &frame.y);
    let ii_yx = pair(&frame.y, &frame.x);
    let ii_yy = pair(&frame.y, &frame.y);

    let second_fundamental = scan_values(
        "second-fundamental-form",
        names,
        points,
        &[ii_xx.clone(), ii_xy.clone(), ii_yx.clone(), ii_yy.clone()],
        |v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt(),
    )?;

    // Induced Gauss curvature from the ambient sectional curvature of the
    // tangent plane plus the determinant of the shape operator.
    let riem = h.riemann_lowered();
    let mut sec_terms = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    sec_terms.push(ScalarExpr::mul_all([
                        riem[a][b][c][d].clone(),
                        frame.x.0[a].clone(),
                        frame.y.0[b].clone(),
                        frame.x.0[c].clone(),
                        frame.y.0[d].clone(),
                    ]));
                }
            }
        }
    }
    let sec = ScalarExpr::add_all(sec_terms);
    let gauss = scan_values(
        "induced-curvature",
        names,
        points,
        &[sec, ii_xx, ii_yy, ii_xy, ii_yx],
        |v| (v[0] + v[1] * v[2] - v[3] * v[4]).abs(),
    )?;
    Ok(vec![second_fundamental, gauss])
}

#[cfg(test)]
mod tests;
