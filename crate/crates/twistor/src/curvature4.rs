//! Four-dimensional metrics fibered over a 3-dimensional base.
//!
//! A twistorial metric is assembled from a base metric `h`, a conformal
//! factor `lambda^-2` and a connection form `theta` with `theta(V) = 1` as
//!
//! ```text
//! g = lambda^-2 h + lambda^2 theta (x) theta
//! ```
//!
//! Christoffel symbols, their coordinate derivatives and the Ricci tensor are
//! computed symbolically once and cached; curvature at a point is then pure
//! numeric evaluation, which keeps sampling loops cheap.

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::{Evaluator, ScalarExpr};
use crate::exterior3::{Metric3, OneForm3, TwoForm3, Vector3};
use nalgebra::{Matrix4, Matrix6};
use std::sync::{Arc, OnceLock};

/// Sign convention tying the anti-self-dual projector to the frame produced
/// by Cholesky factorization in chart coordinate order. Pinned so that the
/// curl-free fibrations in the catalogue (whose Weyl curvature is known to
/// lie entirely in one half) report a vanishing anti-self-dual part.
pub const ASD_ORIENTATION: f64 = -1.0;

/// A 4-component vector field in chart coordinates.
#[derive(Debug, Clone)]
pub struct Vector4(pub [ScalarExpr; 4]);

/// A 4-component 1-form in chart coordinates.
#[derive(Debug, Clone)]
pub struct OneForm4(pub [ScalarExpr; 4]);

impl OneForm4 {
    pub fn apply(&self, v: &Vector4) -> ScalarExpr {
        ScalarExpr::add_all((0..4).map(|i| &self.0[i] * &v.0[i]))
    }
}

pub type Mat4 = [[ScalarExpr; 4]; 4];

fn zero_mat4() -> Mat4 {
    std::array::from_fn(|_| std::array::from_fn(|_| ScalarExpr::zero()))
}

/// A metric on a 4-dimensional chart together with the fibration data used
/// to build it. The last chart coordinate is the fiber coordinate.
#[derive(Debug, Clone)]
pub struct Metric4 {
    chart: Arc<Chart>,
    g: Mat4,
    inv: Mat4,
    lambda_m2: ScalarExpr,
    theta: OneForm4,
    v: Vector4,
    c: f64,
    base: Metric3,
    omega: TwoForm3,
    christoffel: Arc<OnceLock<Vec<ScalarExpr>>>,
    dchristoffel: Arc<OnceLock<Vec<ScalarExpr>>>,
    ricci: Arc<OnceLock<Mat4>>,
}

impl Metric4 {
    /// Assembles `g = lambda^-2 h + lambda^2 theta^2` on the base chart
    /// extended by a fiber coordinate. `theta` is given by its base part
    /// `a` plus `fiber_coeff` times the fiber differential, and must pair to
    /// one with the fundamental field `1/fiber_coeff d/dfiber`.
    pub fn assemble(
        base: Metric3,
        lambda_m2: ScalarExpr,
        a: OneForm3,
        fiber_coeff: ScalarExpr,
        c: f64,
        chart: Arc<Chart>,
    ) -> Result<Metric4> {
        if chart.dim() != 4 {
            return Err(Error::Invariant(
                "twistorial metric needs a 4-dimensional chart".into(),
            ));
        }
        let theta = OneForm4([
            a.0[0].clone(),
            a.0[1].clone(),
            a.0[2].clone(),
            fiber_coeff.clone(),
        ]);
        let v = Vector4([
            ScalarExpr::zero(),
            ScalarExpr::zero(),
            ScalarExpr::zero(),
            ScalarExpr::quot(ScalarExpr::one(), fiber_coeff),
        ]);
        let lambda_2 = ScalarExpr::quot(ScalarExpr::one(), lambda_m2.clone());
        let mut g = zero_mat4();
        for i in 0..4 {
            for j in i..4 {
                let mut terms = Vec::new();
                if i < 3 && j < 3 {
                    terms.push(&lambda_m2 * base.component(i, j));
                }
                terms.push(ScalarExpr::mul_all([
                    lambda_2.clone(),
                    theta.0[i].clone(),
                    theta.0[j].clone(),
                ]));
                g[i][j] = ScalarExpr::add_all(terms);
                g[j][i] = g[i][j].clone();
            }
        }
        let omega = base.d1(&a);
        Metric4::from_parts(chart, g, lambda_m2, theta, v, c, base, omega)
    }

    /// Builds a metric directly from its component matrix, for product
    /// metrics and tests. The fibration data still has to be supplied.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        chart: Arc<Chart>,
        g: Mat4,
        lambda_m2: ScalarExpr,
        theta: OneForm4,
        v: Vector4,
        c: f64,
        base: Metric3,
        omega: TwoForm3,
    ) -> Result<Metric4> {
        for i in 0..4 {
            for j in (i + 1)..4 {
                if g[i][j] != g[j][i] {
                    return Err(Error::Invariant(format!(
                        "metric component ({i},{j}) differs from ({j},{i})"
                    )));
                }
            }
        }
        let det = det4(&g);
        let mut inv = zero_mat4();
        for i in 0..4 {
            for j in 0..4 {
                let minor = minor3(&g, i, j);
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                let cof = ScalarExpr::mul(ScalarExpr::int(sign), minor);
                inv[j][i] = ScalarExpr::quot(cof, det.clone());
            }
        }
        Ok(Metric4 {
            chart,
            g,
            inv,
            lambda_m2,
            theta,
            v,
            c,
            base,
            omega,
            christoffel: Arc::new(OnceLock::new()),
            dchristoffel: Arc::new(OnceLock::new()),
            ricci: Arc::new(OnceLock::new()),
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coords(&self) -> &[String] {
        self.chart.coords()
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.g[i][j]
    }

    pub fn inverse_component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.inv[i][j]
    }

    pub fn lambda_m2(&self) -> &ScalarExpr {
        &self.lambda_m2
    }

    pub fn theta(&self) -> &OneForm4 {
        &self.theta
    }

    pub fn fundamental_field(&self) -> &Vector4 {
        &self.v
    }

    pub fn fiber_constant(&self) -> f64 {
        self.c
    }

    pub fn base(&self) -> &Metric3 {
        &self.base
    }

    pub fn curvature_form(&self) -> &TwoForm3 {
        &self.omega
    }

    fn diff(&self, e: &ScalarExpr, i: usize) -> ScalarExpr {
        e.differentiate(&self.coords()[i])
    }

    /// Horizontal lift of a base vector field: subtract the `theta`-component
    /// along the fundamental field.
    pub fn lift(&self, s: &Vector3) -> Vector4 {
        let s4 = Vector4([
            s.0[0].clone(),
            s.0[1].clone(),
            s.0[2].clone(),
            ScalarExpr::zero(),
        ]);
        let pairing = self.theta.apply(&s4);
        Vector4(std::array::from_fn(|i| {
            &s4.0[i] - &(&pairing * &self.v.0[i])
        }))
    }

    /// Directional derivative of a scalar along a 4-vector field.
    pub fn derive_along(&self, x: &Vector4, f: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::add_all((0..4).map(|i| &x.0[i] * &self.diff(f, i)))
    }

    /// Lie derivative of this metric along a 4-vector field.
    pub fn lie_metric(&self, x: &Vector4) -> Mat4 {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let transport =
                    ScalarExpr::add_all((0..4).map(|k| &x.0[k] * &self.diff(&self.g[i][j], k)));
                let frame = ScalarExpr::add_all((0..4).flat_map(|k| {
                    [
                        &self.g[k][j] * &self.diff(&x.0[k], i),
                        &self.g[i][k] * &self.diff(&x.0[k], j),
                    ]
                }));
                &transport + &frame
            })
        })
    }

    fn gamma_index(k: usize, i: usize, j: usize) -> usize {
        16 * k + 4 * i + j
    }

    /// Christoffel symbols, flattened as `[k][i][j]`.
    pub fn christoffel(&self) -> &[ScalarExpr] {
        self.christoffel.get_or_init(|| {
            let mut out = Vec::with_capacity(64);
            for k in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        let sum = ScalarExpr::add_all((0..4).map(|l| {
                            let inner = &(&self.diff(&self.g[l][j], i)
                                + &self.diff(&self.g[l][i], j))
                                - &self.diff(&self.g[i][j], l);
                            &self.inv[k][l] * &inner
                        }));
                        out.push(ScalarExpr::mul(ScalarExpr::rational(1, 2), sum).simplify());
                    }
                }
            }
            out
        })
    }

    /// Coordinate derivatives of the Christoffel symbols, flattened as
    /// `[axis][k][i][j]`.
    fn dchristoffel(&self) -> &[ScalarExpr] {
        self.dchristoffel.get_or_init(|| {
            let gam = self.christoffel();
            let mut out = Vec::with_capacity(256);
            for axis in 0..4 {
                for e in gam {
                    out.push(self.diff(e, axis));
                }
            }
            out
        })
    }

    /// Symbolic Ricci tensor, cached.
    pub fn ricci(&self) -> &Mat4 {
        self.ricci.get_or_init(|| {
            let gam = self.christoffel();
            let at = |k: usize, i: usize, j: usize| &gam[Self::gamma_index(k, i, j)];
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let mut terms = Vec::new();
                    for k in 0..4 {
                        terms.push(self.diff(at(k, i, j), k));
                        terms.push(ScalarExpr::neg(self.diff(at(k, k, j), i)));
                        for l in 0..4 {
                            terms.push(at(k, k, l) * at(l, i, j));
                            terms.push(ScalarExpr::neg(at(k, i, l) * at(l, k, j)));
                        }
                    }
                    ScalarExpr::add_all(terms)
                })
            })
        })
    }

    /// Numeric metric matrix at a point.
    pub fn eval_metric(&self, point: &[f64]) -> Result<Matrix4<f64>> {
        let names = self.coords();
        let mut ev = Evaluator::new(names, point);
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = ev.eval(&self.g[i][j])?;
            }
        }
        Ok(m)
    }

    /// Numeric Ricci tensor at a point.
    pub fn eval_ricci(&self, point: &[f64]) -> Result<Matrix4<f64>> {
        let ric = self.ricci();
        let names = self.coords();
        let mut ev = Evaluator::new(names, point);
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = ev.eval(&ric[i][j])?;
            }
        }
        Ok(m)
    }

    /// Fully lowered Riemann tensor at a point, `R[a][b][c][d]` with the
    /// convention `R(X,Y)Z = (nabla_X nabla_Y - nabla_Y nabla_X - ...) Z`.
    pub fn eval_riemann(&self, point: &[f64]) -> Result<[[[[f64; 4]; 4]; 4]; 4]> {
        let gam = self.christoffel();
        let dgam = self.dchristoffel();
        let names = self.coords();
        let mut ev = Evaluator::new(names, point);

        let mut gam_n = [0.0f64; 64];
        for (n, e) in gam.iter().enumerate() {
            gam_n[n] = ev.eval(e)?;
        }
        let mut dgam_n = [0.0f64; 256];
        for (n, e) in dgam.iter().enumerate() {
            dgam_n[n] = ev.eval(e)?;
        }
        let g = self.eval_metric(point)?;

        let at = |k: usize, i: usize, j: usize| gam_n[Self::gamma_index(k, i, j)];
        let dat = |axis: usize, k: usize, i: usize, j: usize| {
            dgam_n[64 * axis + Self::gamma_index(k, i, j)]
        };

        let mut up = [[[[0.0f64; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut v = dat(c, a, d, b) - dat(d, a, c, b);
                        for e in 0..4 {
                            v += at(a, c, e) * at(e, d, b) - at(a, d, e) * at(e, c, b);
                        }
                        up[a][b][c][d] = v;
                    }
                }
            }
        }
        let mut low = [[[[0.0f64; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut v = 0.0;
                        for e in 0..4 {
                            v += g[(a, e)] * up[e][b][c][d];
                        }
                        low[a][b][c][d] = v;
                    }
                }
            }
        }
        Ok(low)
    }

    /// Pointwise norm of the anti-self-dual part of the Weyl curvature.
    ///
    /// Works in an orthonormal frame from the Cholesky factor of the metric;
    /// the half-spaces of the 2-form bundle are fixed by [`ASD_ORIENTATION`]
    /// together with the frame's orientation relative to chart order.
    pub fn weyl_asd_norm(&self, point: &[f64]) -> Result<f64> {
        let g = self.eval_metric(point)?;
        let riem = self.eval_riemann(point)?;
        let chol = nalgebra::Cholesky::new(g).ok_or_else(|| {
            Error::Invariant(format!("metric not positive definite at {:?}", point))
        })?;
        // Frame matrix E with E^T g E = I; columns are frame vectors.
        let e = chol
            .l()
            .transpose()
            .try_inverse()
            .ok_or_else(|| Error::Invariant("singular Cholesky factor".into()))?;
        let det_e = e.determinant();

        // Riemann in the orthonormal frame.
        let mut rf = [[[[0.0f64; 4]; 4]; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut v = 0.0;
                        for i in 0..4 {
                            for j in 0..4 {
                                for k in 0..4 {
                                    for l in 0..4 {
                                        v += e[(i, a)]
                                            * e[(j, b)]
                                            * e[(k, c)]
                                            * e[(l, d)]
                                            * riem[i][j][k][l];
                                    }
                                }
                            }
                        }
                        rf[a][b][c][d] = v;
                    }
                }
            }
        }
        let mut ric = [[0.0f64; 4]; 4];
        let mut scal = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let mut v = 0.0;
                for c in 0..4 {
                    v += rf[c][a][c][b];
                }
                ric[a][b] = v;
            }
            scal += ric[a][a];
        }
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let weyl = |a: usize, b: usize, c: usize, d: usize| {
            rf[a][b][c][d]
                - 0.5
                    * (delta(a, c) * ric[b][d] - delta(a, d) * ric[b][c]
                        + delta(b, d) * ric[a][c]
                        - delta(b, c) * ric[a][d])
                + scal / 6.0 * (delta(a, c) * delta(b, d) - delta(a, d) * delta(b, c))
        };

        // 2-form index pairs ordered so the Hodge star swaps A and A + 3.
        const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];
        let mut w = Matrix6::zeros();
        for (ia, &(a, b)) in PAIRS.iter().enumerate() {
            for (ib, &(c, d)) in PAIRS.iter().enumerate() {
                w[(ia, ib)] = weyl(a, b, c, d);
            }
        }
        let eps = ASD_ORIENTATION * det_e.signum();
        let mut star = Matrix6::zeros();
        for a in 0..3 {
            star[(a, a + 3)] = 1.0;
            star[(a + 3, a)] = 1.0;
        }
        let p_minus = (Matrix6::identity() - eps * star) * 0.5;
        let w_minus = p_minus * w * p_minus;
        // The pair basis double-counts antisymmetric index pairs exactly like
        // the standard normalization |W|^2 = W_abcd W^abcd / 4 expects.
        Ok(w_minus.norm())
    }
}

fn det4(g: &Mat4) -> ScalarExpr {
    let mut terms = Vec::new();
    for j in 0..4 {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        terms.push(ScalarExpr::mul_all([
            ScalarExpr::int(sign),
            g[0][j].clone(),
            minor3(g, 0, j),
        ]));
    }
    ScalarExpr::add_all(terms)
}

/// Determinant of the 3x3 submatrix omitting row `i` and column `j`.
fn minor3(g: &Mat4, i: usize, j: usize) -> ScalarExpr {
    let rows: Vec<usize> = (0..4).filter(|&r| r != i).collect();
    let cols: Vec<usize> = (0..4).filter(|&c| c != j).collect();
    let m = |r: usize, c: usize| &g[rows[r]][cols[c]];
    let mut terms = Vec::new();
    for c in 0..3 {
        let (a, b) = ((c + 1) % 3, (c + 2) % 3);
        // Cyclic column choice keeps the cofactor signs implicit.
        let minor = &(m(1, a) * m(2, b)) - &(m(1, b) * m(2, a));
        terms.push(m(0, c) * &minor);
    }
    ScalarExpr::add_all(terms)
}

#[cfg(test)]
mod tests;
