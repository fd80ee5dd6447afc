//! Exterior calculus and Riemannian geometry on a 3-dimensional chart.
//!
//! Two-forms are stored component-wise against the basis
//! `(dy^dz, dz^dx, dx^dy)`, so the Hodge star, curl and cross product reduce
//! to index shuffles. All operators here are symbolic; numeric evaluation
//! happens through [`ScalarExpr`] at guarded sample points.

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use std::sync::{Arc, OnceLock};

/// A 1-form `a_1 dx + a_2 dy + a_3 dz`.
#[derive(Debug, Clone)]
pub struct OneForm3(pub [ScalarExpr; 3]);

/// A vector field `v^1 d/dx + v^2 d/dy + v^3 d/dz`.
#[derive(Debug, Clone)]
pub struct Vector3(pub [ScalarExpr; 3]);

/// A 2-form `w_1 dy^dz + w_2 dz^dx + w_3 dx^dy`; component `w_a` is the
/// coefficient whose basis element omits coordinate `a`.
#[derive(Debug, Clone)]
pub struct TwoForm3(pub [ScalarExpr; 3]);

/// The coefficient of `dx^dy^dz`.
#[derive(Debug, Clone)]
pub struct ThreeForm3(pub ScalarExpr);

/// Symmetric 2-tensor stored as `[xx, xy, xz, yy, yz, zz]`.
#[derive(Debug, Clone)]
pub struct SymTensor3(pub [ScalarExpr; 6]);

impl SymTensor3 {
    pub fn zero() -> Self {
        SymTensor3(std::array::from_fn(|_| ScalarExpr::zero()))
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarExpr {
        const IDX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
        &self.0[IDX[i][j]]
    }

    pub fn from_fn<F: FnMut(usize, usize) -> ScalarExpr>(mut f: F) -> Self {
        SymTensor3([f(0, 0), f(0, 1), f(0, 2), f(1, 1), f(1, 2), f(2, 2)])
    }

    pub fn add(&self, other: &SymTensor3) -> SymTensor3 {
        SymTensor3(std::array::from_fn(|i| &self.0[i] + &other.0[i]))
    }

    pub fn sub(&self, other: &SymTensor3) -> SymTensor3 {
        SymTensor3(std::array::from_fn(|i| &self.0[i] - &other.0[i]))
    }

    pub fn scale(&self, c: &ScalarExpr) -> SymTensor3 {
        SymTensor3(std::array::from_fn(|i| c * &self.0[i]))
    }
}

impl OneForm3 {
    pub fn zero() -> Self {
        OneForm3(std::array::from_fn(|_| ScalarExpr::zero()))
    }

    pub fn add(&self, other: &OneForm3) -> OneForm3 {
        OneForm3(std::array::from_fn(|i| &self.0[i] + &other.0[i]))
    }

    pub fn sub(&self, other: &OneForm3) -> OneForm3 {
        OneForm3(std::array::from_fn(|i| &self.0[i] - &other.0[i]))
    }

    pub fn scale(&self, c: &ScalarExpr) -> OneForm3 {
        OneForm3(std::array::from_fn(|i| c * &self.0[i]))
    }

    /// Pairing with a vector field.
    pub fn apply(&self, v: &Vector3) -> ScalarExpr {
        ScalarExpr::add_all((0..3).map(|i| &self.0[i] * &v.0[i]))
    }
}

impl Vector3 {
    pub fn zero() -> Self {
        Vector3(std::array::from_fn(|_| ScalarExpr::zero()))
    }

    pub fn add(&self, other: &Vector3) -> Vector3 {
        Vector3(std::array::from_fn(|i| &self.0[i] + &other.0[i]))
    }

    pub fn sub(&self, other: &Vector3) -> Vector3 {
        Vector3(std::array::from_fn(|i| &self.0[i] - &other.0[i]))
    }

    pub fn scale(&self, c: &ScalarExpr) -> Vector3 {
        Vector3(std::array::from_fn(|i| c * &self.0[i]))
    }

    /// Directional derivative of a scalar.
    pub fn apply(&self, coords: &[String], f: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::add_all((0..3).map(|i| &self.0[i] * &f.differentiate(&coords[i])))
    }
}

impl TwoForm3 {
    pub fn zero() -> Self {
        TwoForm3(std::array::from_fn(|_| ScalarExpr::zero()))
    }

    pub fn add(&self, other: &TwoForm3) -> TwoForm3 {
        TwoForm3(std::array::from_fn(|i| &self.0[i] + &other.0[i]))
    }

    pub fn sub(&self, other: &TwoForm3) -> TwoForm3 {
        TwoForm3(std::array::from_fn(|i| &self.0[i] - &other.0[i]))
    }

    pub fn scale(&self, c: &ScalarExpr) -> TwoForm3 {
        TwoForm3(std::array::from_fn(|i| c * &self.0[i]))
    }

    /// Full component `w(e_i, e_j)` from the packed storage.
    pub fn component(&self, i: usize, j: usize) -> ScalarExpr {
        // The packed slot for the pair {i, j} is the omitted index; the sign
        // is the cyclic orientation of (i, j, omitted).
        if i == j {
            return ScalarExpr::zero();
        }
        let k = 3 - i - j;
        let even = (i + 1) % 3 == j;
        if even {
            self.0[k].clone()
        } else {
            ScalarExpr::neg(self.0[k].clone())
        }
    }
}

/// A Riemannian metric on the first three coordinates of a chart, with its
/// symbolic inverse, volume density and cached Christoffel symbols.
#[derive(Debug, Clone)]
pub struct Metric3 {
    chart: Arc<Chart>,
    g: [[ScalarExpr; 3]; 3],
    inv: [[ScalarExpr; 3]; 3],
    sqrt_det: ScalarExpr,
    christoffel: Arc<OnceLock<[[[ScalarExpr; 3]; 3]; 3]>>,
}

impl Metric3 {
    /// Builds a metric from its component matrix; the matrix must be
    /// symmetric and is inverted symbolically by adjugate over determinant.
    pub fn new(chart: Arc<Chart>, g: [[ScalarExpr; 3]; 3]) -> Result<Metric3> {
        assert!(chart.dim() >= 3, "metric needs at least three coordinates");
        for i in 0..3 {
            for j in (i + 1)..3 {
                if g[i][j] != g[j][i] {
                    return Err(Error::Invariant(format!(
                        "metric component ({i},{j}) differs from ({j},{i})"
                    )));
                }
            }
        }
        let det = det3(&g);
        let mut inv: [[ScalarExpr; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| ScalarExpr::zero()));
        for i in 0..3 {
            for j in 0..3 {
                // Cofactor expansion; the adjugate of a symmetric matrix is
                // symmetric, so no transpose is needed.
                let (a, b) = ((i + 1) % 3, (i + 2) % 3);
                let (c, d) = ((j + 1) % 3, (j + 2) % 3);
                let cof = &(&g[a][c] * &g[b][d]) - &(&g[a][d] * &g[b][c]);
                inv[j][i] = ScalarExpr::quot(cof, det.clone());
            }
        }
        let sqrt_det = ScalarExpr::sqrt(det);
        Ok(Metric3 {
            chart,
            g,
            inv,
            sqrt_det,
            christoffel: Arc::new(OnceLock::new()),
        })
    }

    pub fn euclidean(chart: Arc<Chart>) -> Metric3 {
        let g = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                if i == j {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            })
        });
        Metric3::new(chart, g).expect("identity matrix is symmetric")
    }

    /// Conformally scaled copy `c * h`.
    pub fn scaled(&self, c: &ScalarExpr) -> Result<Metric3> {
        let g = std::array::from_fn(|i| std::array::from_fn(|j| c * &self.g[i][j]));
        Metric3::new(self.chart.clone(), g)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coords(&self) -> &[String] {
        &self.chart.coords()[..3]
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.g[i][j]
    }

    pub fn inverse_component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.inv[i][j]
    }

    pub fn sqrt_det(&self) -> &ScalarExpr {
        &self.sqrt_det
    }

    pub fn as_sym_tensor(&self) -> SymTensor3 {
        SymTensor3::from_fn(|i, j| self.g[i][j].clone())
    }

    fn diff(&self, e: &ScalarExpr, i: usize) -> ScalarExpr {
        e.differentiate(&self.coords()[i])
    }

    // ----- musical isomorphisms -----

    pub fn sharp(&self, a: &OneForm3) -> Vector3 {
        Vector3(std::array::from_fn(|i| {
            ScalarExpr::add_all((0..3).map(|j| &self.inv[i][j] * &a.0[j]))
        }))
    }

    pub fn flat(&self, v: &Vector3) -> OneForm3 {
        OneForm3(std::array::from_fn(|i| {
            ScalarExpr::add_all((0..3).map(|j| &self.g[i][j] * &v.0[j]))
        }))
    }

    // ----- exterior derivative -----

    pub fn d0(&self, f: &ScalarExpr) -> OneForm3 {
        OneForm3(std::array::from_fn(|i| self.diff(f, i)))
    }

    /// `d` of a 1-form: the curl in packed 2-form storage.
    pub fn d1(&self, a: &OneForm3) -> TwoForm3 {
        TwoForm3(std::array::from_fn(|k| {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            &self.diff(&a.0[j], i) - &self.diff(&a.0[i], j)
        }))
    }

    /// `d` of a 2-form: the divergence of the packed components.
    pub fn d2(&self, w: &TwoForm3) -> ThreeForm3 {
        ThreeForm3(ScalarExpr::add_all((0..3).map(|i| self.diff(&w.0[i], i))))
    }

    // ----- Hodge star -----

    pub fn star0(&self, f: &ScalarExpr) -> ThreeForm3 {
        ThreeForm3(f * &self.sqrt_det)
    }

    pub fn star1(&self, a: &OneForm3) -> TwoForm3 {
        let sharp = self.sharp(a);
        TwoForm3(std::array::from_fn(|i| &self.sqrt_det * &sharp.0[i]))
    }

    pub fn star2(&self, w: &TwoForm3) -> OneForm3 {
        OneForm3(std::array::from_fn(|i| {
            let num = ScalarExpr::add_all((0..3).map(|a| &self.g[i][a] * &w.0[a]));
            ScalarExpr::quot(num, self.sqrt_det.clone())
        }))
    }

    pub fn star3(&self, t: &ThreeForm3) -> ScalarExpr {
        ScalarExpr::quot(t.0.clone(), self.sqrt_det.clone())
    }

    // ----- codifferential and Laplacians -----

    /// Codifferential of a 1-form, `-*d*`; for an exact form `du` this is
    /// minus the Laplace-Beltrami operator applied to `u`.
    pub fn codiff1(&self, a: &OneForm3) -> ScalarExpr {
        ScalarExpr::neg(self.star3(&self.d2(&self.star1(a))))
    }

    /// Codifferential of a 2-form, `+*d*`; the sign is pinned by the product
    /// rule `codiff2(a^b) = codiff1(a) b - a codiff1(b) - [a#, b#]_flat`.
    pub fn codiff2(&self, w: &TwoForm3) -> OneForm3 {
        self.star2(&self.d1(&self.star2(w)))
    }

    /// Laplace-Beltrami operator on scalars.
    pub fn laplacian(&self, f: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::neg(self.codiff1(&self.d0(f)))
    }

    /// Hodge Laplacian `d codiff + codiff d` on 1-forms.
    pub fn hodge_laplacian1(&self, a: &OneForm3) -> OneForm3 {
        self.d0(&self.codiff1(a)).add(&self.codiff2(&self.d1(a)))
    }

    // ----- products -----

    pub fn wedge11(&self, a: &OneForm3, b: &OneForm3) -> TwoForm3 {
        TwoForm3(std::array::from_fn(|k| {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            &(&a.0[i] * &b.0[j]) - &(&a.0[j] * &b.0[i])
        }))
    }

    /// Metric cross product of 1-forms, `*(a ^ b)`.
    pub fn cross(&self, a: &OneForm3, b: &OneForm3) -> OneForm3 {
        self.star2(&self.wedge11(a, b))
    }

    pub fn sym_prod(&self, a: &OneForm3, b: &OneForm3) -> SymTensor3 {
        SymTensor3::from_fn(|i, j| {
            ScalarExpr::mul(
                ScalarExpr::rational(1, 2),
                &(&a.0[i] * &b.0[j]) + &(&a.0[j] * &b.0[i]),
            )
        })
    }

    pub fn inner11(&self, a: &OneForm3, b: &OneForm3) -> ScalarExpr {
        let sharp = self.sharp(b);
        a.apply(&sharp)
    }

    pub fn norm_sq1(&self, a: &OneForm3) -> ScalarExpr {
        self.inner11(a, a)
    }

    pub fn norm1(&self, a: &OneForm3) -> ScalarExpr {
        ScalarExpr::sqrt(self.norm_sq1(a))
    }

    pub fn inner22(&self, w: &TwoForm3, v: &TwoForm3) -> ScalarExpr {
        let num = ScalarExpr::add_all(
            (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).map(|(a, b)| {
                ScalarExpr::mul_all([self.g[a][b].clone(), w.0[a].clone(), v.0[b].clone()])
            }),
        );
        ScalarExpr::quot(num, &self.sqrt_det * &self.sqrt_det)
    }

    /// Pointwise squared norm of a symmetric 2-tensor, `tr(h^-1 T h^-1 T)`.
    pub fn tensor_norm_sq(&self, t: &SymTensor3) -> ScalarExpr {
        let mut terms = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        terms.push(ScalarExpr::mul_all([
                            self.inv[i][j].clone(),
                            t.get(j, k).clone(),
                            self.inv[k][l].clone(),
                            t.get(l, i).clone(),
                        ]));
                    }
                }
            }
        }
        ScalarExpr::add_all(terms)
    }

    pub fn trace(&self, t: &SymTensor3) -> ScalarExpr {
        ScalarExpr::add_all(
            (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| &self.inv[i][j] * t.get(i, j)),
        )
    }

    // ----- Lie operations -----

    pub fn lie_bracket(&self, x: &Vector3, y: &Vector3) -> Vector3 {
        Vector3(std::array::from_fn(|i| {
            &x.apply(self.coords(), &y.0[i]) - &y.apply(self.coords(), &x.0[i])
        }))
    }

    /// Lie derivative of this metric along a vector field.
    pub fn lie_metric(&self, x: &Vector3) -> SymTensor3 {
        SymTensor3::from_fn(|i, j| {
            let transport =
                ScalarExpr::add_all((0..3).map(|k| &x.0[k] * &self.diff(&self.g[i][j], k)));
            let frame = ScalarExpr::add_all((0..3).flat_map(|k| {
                [
                    &self.g[k][j] * &self.diff(&x.0[k], i),
                    &self.g[i][k] * &self.diff(&x.0[k], j),
                ]
            }));
            &transport + &frame
        })
    }

    // ----- curvature -----

    pub fn christoffel(&self) -> &[[[ScalarExpr; 3]; 3]; 3] {
        self.christoffel.get_or_init(|| {
            std::array::from_fn(|k| {
                std::array::from_fn(|i| {
                    std::array::from_fn(|j| {
                        let sum = ScalarExpr::add_all((0..3).map(|l| {
                            let inner = &(&self.diff(&self.g[l][j], i)
                                + &self.diff(&self.g[l][i], j))
                                - &self.diff(&self.g[i][j], l);
                            &self.inv[k][l] * &inner
                        }));
                        ScalarExpr::mul(ScalarExpr::rational(1, 2), sum).simplify()
                    })
                })
            })
        })
    }

    /// Ricci tensor `R_ij = dGamma^k_ij/dk - dGamma^k_kj/di + quadratics`.
    pub fn ricci(&self) -> SymTensor3 {
        let gam = self.christoffel();
        SymTensor3::from_fn(|i, j| {
            let mut terms = Vec::new();
            for k in 0..3 {
                terms.push(self.diff(&gam[k][i][j], k));
                terms.push(ScalarExpr::neg(self.diff(&gam[k][k][j], i)));
                for l in 0..3 {
                    terms.push(&gam[k][k][l] * &gam[l][i][j]);
                    terms.push(ScalarExpr::neg(&gam[k][i][l] * &gam[l][k][j]));
                }
            }
            ScalarExpr::add_all(terms)
        })
    }

    /// Fully lowered curvature tensor `R[a][b][c][d]`, normalized so that
    /// contracting the first and third slots gives [`Metric3::ricci`].
    pub fn riemann_lowered(&self) -> [[[[ScalarExpr; 3]; 3]; 3]; 3] {
        let gam = self.christoffel();
        let up: [[[[ScalarExpr; 3]; 3]; 3]; 3] = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                std::array::from_fn(|c| {
                    std::array::from_fn(|d| {
                        let mut terms = vec![
                            self.diff(&gam[a][d][b], c),
                            ScalarExpr::neg(self.diff(&gam[a][c][b], d)),
                        ];
                        for e in 0..3 {
                            terms.push(&gam[a][c][e] * &gam[e][d][b]);
                            terms.push(ScalarExpr::neg(&gam[a][d][e] * &gam[e][c][b]));
                        }
                        ScalarExpr::add_all(terms)
                    })
                })
            })
        });
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                std::array::from_fn(|c| {
                    std::array::from_fn(|d| {
                        ScalarExpr::add_all((0..3).map(|e| &self.g[a][e] * &up[e][b][c][d]))
                    })
                })
            })
        })
    }

    /// Covariant Hessian of a scalar.
    pub fn hessian(&self, f: &ScalarExpr) -> SymTensor3 {
        let gam = self.christoffel();
        let df: Vec<ScalarExpr> = (0..3).map(|i| self.diff(f, i)).collect();
        SymTensor3::from_fn(|i, j| {
            let second = self.diff(&df[j], i);
            let correction = ScalarExpr::add_all((0..3).map(|k| &gam[k][i][j] * &df[k]));
            &second - &correction
        })
    }
}

/// An `h`-orthonormal, positively oriented frame on the base.
#[derive(Debug, Clone)]
pub struct Frame3 {
    pub x: Vector3,
    pub y: Vector3,
    pub z: Vector3,
}

impl Frame3 {
    /// Completes a unit field `z` to a positive orthonormal frame.
    ///
    /// Gram-Schmidt starts from the coordinate field least aligned with `z`
    /// at the box center (ties broken in coordinate order), and `y = z x x`
    /// closes the frame with positive orientation.
    pub fn complete(h: &Metric3, z: Vector3) -> Result<Frame3> {
        let center = {
            let b = h.chart().bounds();
            vec![
                0.5 * (b[0].0 + b[0].1),
                0.5 * (b[1].0 + b[1].1),
                0.5 * (b[2].0 + b[2].1),
            ]
        };
        let names = h.coords();
        let z_flat = h.flat(&z);
        let mut seed = 0usize;
        let mut best = f64::INFINITY;
        for i in 0..3 {
            let e_i = Vector3(std::array::from_fn(|k| {
                ScalarExpr::int((k == i) as i64)
            }));
            let align = z_flat.apply(&e_i).eval_real(names, &center).map_err(|e| {
                Error::Invariant(format!("frame seed evaluation failed: {e}"))
            })?;
            let len = h
                .norm_sq1(&h.flat(&e_i))
                .eval_real(names, &center)
                .map_err(|e| Error::Invariant(format!("frame seed evaluation failed: {e}")))?
                .sqrt();
            let score = align.abs() / len;
            if score < best - 1e-12 {
                best = score;
                seed = i;
            }
        }
        let e_seed = Vector3(std::array::from_fn(|k| {
            ScalarExpr::int((k == seed) as i64)
        }));
        let along = z_flat.apply(&e_seed);
        let x_raw = e_seed.sub(&z.scale(&along));
        let x_len = ScalarExpr::sqrt(h.norm_sq1(&h.flat(&x_raw)));
        let x = x_raw.scale(&ScalarExpr::quot(ScalarExpr::one(), x_len));
        let y = h.sharp(&h.cross(&z_flat, &h.flat(&x)));
        Ok(Frame3 { x, y, z })
    }
}

fn det3(g: &[[ScalarExpr; 3]; 3]) -> ScalarExpr {
    let mut terms = Vec::new();
    for (j, s) in [(0usize, 1i64), (1, 1), (2, 1)] {
        let (a, b) = ((j + 1) % 3, (j + 2) % 3);
        let minor = &(&g[1][a] * &g[2][b]) - &(&g[1][b] * &g[2][a]);
        terms.push(ScalarExpr::mul_all([
            ScalarExpr::int(s),
            g[0][j].clone(),
            minor,
        ]));
    }
    ScalarExpr::add_all(terms)
}
