//! Ricci-soliton verification.
//!
//! The defining equation is `Ric + a g + 1/2 L_E g = 0`. For fibered metrics
//! the same content splits into five relations against the adapted frame;
//! both codepaths are implemented and cross-validated against each other.

use crate::beltrami::BeltramiData;
use crate::curvature4::{Mat4, Metric4, Vector4};
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::exterior3::{Frame3, Metric3, SymTensor3, Vector3};
use crate::gibbons_hawking::GHData;
use crate::report::{scan_values, CheckReport};

pub const OMEGA_FLOOR: f64 = 1e-6;

/// Classification of a soliton by the sign of its constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolitonClass {
    Shrinking,
    Steady,
    Expanding,
}

impl SolitonClass {
    pub fn of(a: f64) -> SolitonClass {
        if a < 0.0 {
            SolitonClass::Shrinking
        } else if a == 0.0 {
            SolitonClass::Steady
        } else {
            SolitonClass::Expanding
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolitonClass::Shrinking => "shrinking",
            SolitonClass::Steady => "steady",
            SolitonClass::Expanding => "expanding",
        }
    }
}

/// A candidate flow `E = f V + x X + y Y + z Z` written against the
/// fundamental field and the lifted adapted frame; the components may
/// depend on the fiber coordinate.
#[derive(Debug, Clone)]
pub struct SolitonCandidate {
    pub f: ScalarExpr,
    pub x: ScalarExpr,
    pub y: ScalarExpr,
    pub z: ScalarExpr,
    pub a: f64,
}

impl SolitonCandidate {
    pub fn class(&self) -> SolitonClass {
        SolitonClass::of(self.a)
    }

    /// The candidate as a coordinate vector field on the total space.
    pub fn assemble(&self, m: &Metric4, frame: &Frame3) -> Vector4 {
        let v = m.fundamental_field();
        let legs = [
            (m.lift(&frame.x), &self.x),
            (m.lift(&frame.y), &self.y),
            (m.lift(&frame.z), &self.z),
        ];
        Vector4(std::array::from_fn(|i| {
            let mut terms = vec![&self.f * &v.0[i]];
            for (leg, coeff) in &legs {
                terms.push(*coeff * &leg.0[i]);
            }
            ScalarExpr::add_all(terms)
        }))
    }
}

/// Symbolic soliton tensor `Ric + a g + 1/2 L_E g`.
pub fn soliton_tensor(m: &Metric4, e: &Vector4, a: f64) -> Mat4 {
    let ric = m.ricci();
    let lie = m.lie_metric(e);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            ScalarExpr::add_all([
                ric[i][j].clone(),
                ScalarExpr::mul(ScalarExpr::float(a), m.component(i, j).clone()),
                ScalarExpr::mul(ScalarExpr::rational(1, 2), lie[i][j].clone()),
            ])
        })
    })
}

fn mat4_norm_sq(m: &Metric4, t: &Mat4) -> ScalarExpr {
    let mut terms = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    terms.push(ScalarExpr::mul_all([
                        m.inverse_component(i, j).clone(),
                        t[j][k].clone(),
                        m.inverse_component(k, l).clone(),
                        t[l][i].clone(),
                    ]));
                }
            }
        }
    }
    ScalarExpr::add_all(terms)
}

/// Residual of the soliton equation in the pointwise g-norm.
pub fn soliton_residual(
    m: &Metric4,
    e: &Vector4,
    a: f64,
    points: &[Vec<f64>],
) -> Result<CheckReport> {
    let t = soliton_tensor(m, e, a);
    let norm_sq = mat4_norm_sq(m, &t);
    scan_values(
        "soliton-eq",
        m.coords(),
        points,
        std::slice::from_ref(&norm_sq),
        |v| v[0].max(0.0).sqrt(),
    )
}

/// Which of the equivalent relation systems to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Generic,
    Gh,
    Beltrami,
}

/// Construction data for the relation systems: the generic mode works for
/// any assembled metric, the other two use the specialized displays.
pub enum RelationData<'a> {
    Generic(&'a Metric4),
    Gh(&'a GHData, &'a Metric4),
    Beltrami(&'a BeltramiData, &'a Metric4),
}

/// Pairing of a 2-form on the base with two frame legs.
pub(crate) fn omega_pairing(omega: &crate::exterior3::TwoForm3, frame: &Frame3) -> ScalarExpr {
    let mut terms = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            terms.push(ScalarExpr::mul_all([
                omega.component(i, j),
                frame.x.0[i].clone(),
                frame.y.0[j].clone(),
            ]));
        }
    }
    ScalarExpr::add_all(terms)
}

/// The base metric pulled back to the total space (fiber row and column
/// vanish in these coordinates).
pub(crate) fn pullback_base(h: &Metric3) -> Mat4 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if i < 3 && j < 3 {
                h.component(i, j).clone()
            } else {
                ScalarExpr::zero()
            }
        })
    })
}

pub(crate) fn lie_mat4(m: &Metric4, x: &Vector4, t: &Mat4) -> Mat4 {
    let names = m.coords();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let transport = ScalarExpr::add_all(
                (0..4).map(|k| &x.0[k] * &t[i][j].differentiate(&names[k])),
            );
            let frame = ScalarExpr::add_all((0..4).flat_map(|k| {
                [
                    &t[k][j] * &x.0[k].differentiate(&names[i]),
                    &t[i][k] * &x.0[k].differentiate(&names[j]),
                ]
            }));
            &transport + &frame
        })
    })
}

pub(crate) fn pair_mat4(t: &Mat4, s1: &Vector4, s2: &Vector4) -> ScalarExpr {
    let mut terms = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            terms.push(ScalarExpr::mul_all([
                s1.0[i].clone(),
                t[i][j].clone(),
                s2.0[j].clone(),
            ]));
        }
    }
    ScalarExpr::add_all(terms)
}

/// Components of the fifth relation of each system: a symmetric bilinear
/// form evaluated on the six lifted frame pairs.
fn horizontal_relation(
    m: &Metric4,
    frame: &Frame3,
    cand: &SolitonCandidate,
    scalar_coeff: &ScalarExpr,
    lie_coeff: &ScalarExpr,
    ricci_coeff: &ScalarExpr,
) -> Vec<ScalarExpr> {
    let h = m.base();
    let lifts = [m.lift(&frame.x), m.lift(&frame.y), m.lift(&frame.z)];
    let legs = [&frame.x, &frame.y, &frame.z];
    let f_field = {
        let xl = &lifts[0];
        let yl = &lifts[1];
        let zl = &lifts[2];
        Vector4(std::array::from_fn(|i| {
            ScalarExpr::add_all([
                &cand.x * &xl.0[i],
                &cand.y * &yl.0[i],
                &cand.z * &zl.0[i],
            ])
        }))
    };
    let lie = lie_mat4(m, &f_field, &pullback_base(h));
    let ric_n = h.ricci();
    let mut out = Vec::with_capacity(6);
    for a in 0..3 {
        for b in a..3 {
            let lie_term = pair_mat4(&lie, &lifts[a], &lifts[b]);
            let h_term = h3_pair(h, legs[a], legs[b]);
            let ric_term = sym3_pair(ric_n.clone(), legs[a], legs[b]);
            out.push(ScalarExpr::add_all([
                lie_coeff * &lie_term,
                ScalarExpr::mul(scalar_coeff.clone(), h_term),
                ricci_coeff * &ric_term,
            ]));
        }
    }
    out
}

pub(crate) fn h3_pair(h: &Metric3, s1: &Vector3, s2: &Vector3) -> ScalarExpr {
    let mut terms = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            terms.push(ScalarExpr::mul_all([
                s1.0[i].clone(),
                h.component(i, j).clone(),
                s2.0[j].clone(),
            ]));
        }
    }
    ScalarExpr::add_all(terms)
}

pub(crate) fn sym3_pair(t: SymTensor3, s1: &Vector3, s2: &Vector3) -> ScalarExpr {
    let mut terms = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            terms.push(ScalarExpr::mul_all([
                s1.0[i].clone(),
                t.get(i, j).clone(),
                s2.0[j].clone(),
            ]));
        }
    }
    ScalarExpr::add_all(terms)
}

/// Evaluates the five relations of the chosen system at the sample points.
/// Returns one report per relation; the fifth folds its six components into
/// a pointwise sup.
pub fn five_relations(
    data: &RelationData,
    frame: &Frame3,
    cand: &SolitonCandidate,
    points: &[Vec<f64>],
) -> Result<Vec<CheckReport>> {
    let (m, scalars) = match data {
        RelationData::Generic(m) => (*m, generic_relations(m, frame, cand)),
        RelationData::Gh(d, m) => (*m, gh_relations(d, m, frame, cand)),
        RelationData::Beltrami(d, m) => (*m, beltrami_relations(d, m, frame, cand)),
    };
    let (r14, r5) = scalars;
    let names = m.coords();
    let mut out = Vec::with_capacity(5);
    for (k, e) in r14.iter().enumerate() {
        out.push(scan_values(
            &format!("relation-{}", k + 1),
            names,
            points,
            std::slice::from_ref(e),
            |v| v[0].abs(),
        )?);
    }
    out.push(scan_values("relation-5", names, points, &r5, |v| {
        v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    })?);
    Ok(out)
}

type Relations = ([ScalarExpr; 4], Vec<ScalarExpr>);

fn generic_relations(m: &Metric4, frame: &Frame3, cand: &SolitonCandidate) -> Relations {
    let lambda_m2 = m.lambda_m2();
    let lambda_2 = ScalarExpr::quot(ScalarExpr::one(), lambda_m2.clone());
    let lambda_m4 = ScalarExpr::powi(lambda_m2.clone(), 2);
    let c = ScalarExpr::float(m.fiber_constant());
    let a = ScalarExpr::float(cand.a);
    let omega_xy = omega_pairing(m.curvature_form(), frame);
    let v = m.fundamental_field();
    let xl = m.lift(&frame.x);
    let yl = m.lift(&frame.y);
    let zl = m.lift(&frame.z);

    let r1 = ScalarExpr::add_all([
        m.derive_along(v, &cand.f),
        a.clone(),
        ScalarExpr::mul_all([
            ScalarExpr::rational(-1, 2),
            lambda_2.clone(),
            &(&cand.f * &c) + &(&cand.z * &omega_xy),
        ]),
    ]);
    let r2 = ScalarExpr::add_all([
        m.derive_along(&xl, &cand.f),
        ScalarExpr::neg(&cand.y * &omega_xy),
        &lambda_m4 * &m.derive_along(v, &cand.x),
    ]);
    let r3 = ScalarExpr::add_all([
        m.derive_along(&yl, &cand.f),
        &cand.x * &omega_xy,
        &lambda_m4 * &m.derive_along(v, &cand.y),
    ]);
    let r4 = ScalarExpr::add_all([
        m.derive_along(&zl, &cand.f),
        &lambda_m4 * &m.derive_along(v, &cand.z),
    ]);

    // lambda^2 (-c^2 + f c + z Omega(X,Y) + 2 a lambda^-2)
    let scalar = ScalarExpr::mul(
        lambda_2.clone(),
        ScalarExpr::add_all([
            ScalarExpr::float(-m.fiber_constant() * m.fiber_constant()),
            &cand.f * &c,
            &cand.z * &omega_xy,
            ScalarExpr::mul_all([ScalarExpr::int(2), a, lambda_m2.clone()]),
        ]),
    );
    let two_lambda_2 = ScalarExpr::mul(ScalarExpr::int(2), lambda_2);
    let r5 = horizontal_relation(m, frame, cand, &scalar, &ScalarExpr::one(), &two_lambda_2);
    ([r1, r2, r3, r4], r5)
}

fn gh_relations(
    data: &GHData,
    m: &Metric4,
    frame: &Frame3,
    cand: &SolitonCandidate,
) -> Relations {
    let h = &data.h;
    let names = m.coords();
    let t_name = &names[3];
    let du_norm = h.norm1(&h.d0(&data.u));
    let u_inv = ScalarExpr::quot(ScalarExpr::one(), data.u.clone());
    let u_sq = ScalarExpr::powi(data.u.clone(), 2);
    let a = ScalarExpr::float(cand.a);
    let ft = cand.f.differentiate(t_name);
    let coords3 = h.coords();

    let r1 = ScalarExpr::add_all([
        ft.clone(),
        a.clone(),
        ScalarExpr::mul_all([
            ScalarExpr::rational(-1, 2),
            cand.z.clone(),
            u_inv.clone(),
            du_norm.clone(),
        ]),
    ]);
    let leg_relation = |leg: &Vector3, comp: &ScalarExpr, cross: Option<(&ScalarExpr, i64)>| {
        let a_of_leg = data.a.apply(leg);
        let mut terms = vec![
            ScalarExpr::neg(&a_of_leg * &ft),
            leg.apply(coords3, &cand.f),
            &u_sq * &comp.differentiate(t_name),
        ];
        if let Some((other, sign)) = cross {
            terms.push(ScalarExpr::mul_all([
                ScalarExpr::int(sign),
                other.clone(),
                du_norm.clone(),
            ]));
        }
        ScalarExpr::add_all(terms)
    };
    let r2 = leg_relation(&frame.x, &cand.x, Some((&cand.y, -1)));
    let r3 = leg_relation(&frame.y, &cand.y, Some((&cand.x, 1)));
    let r4 = leg_relation(&frame.z, &cand.z, None);

    // u^-1 (z |du| + 2 a u)
    let scalar = ScalarExpr::mul(
        u_inv.clone(),
        &(&cand.z * &du_norm)
            + &ScalarExpr::mul_all([ScalarExpr::int(2), a, data.u.clone()]),
    );
    let two_u_inv = ScalarExpr::mul(ScalarExpr::int(2), u_inv);
    let r5 = horizontal_relation(m, frame, cand, &scalar, &ScalarExpr::one(), &two_u_inv);
    ([r1, r2, r3, r4], r5)
}

fn beltrami_relations(
    data: &BeltramiData,
    m: &Metric4,
    frame: &Frame3,
    cand: &SolitonCandidate,
) -> Relations {
    let h = &data.h;
    let names = m.coords();
    let rho = ScalarExpr::var(&names[3]);
    let rho3 = ScalarExpr::powi(rho.clone(), 3);
    let a_norm = h.norm1(&data.a);
    let a = ScalarExpr::float(cand.a);
    let frho = cand.f.differentiate(&names[3]);
    let coords3 = h.coords();

    let r1 = ScalarExpr::add_all([
        &rho * &frho,
        &a * &ScalarExpr::powi(rho.clone(), 2),
        ScalarExpr::neg(cand.f.clone()),
        &cand.z * &a_norm,
    ]);
    let r2 = ScalarExpr::add_all([
        frame.x.apply(coords3, &cand.f),
        ScalarExpr::mul_all([ScalarExpr::int(2), cand.y.clone(), a_norm.clone()]),
        &rho3 * &cand.x.differentiate(&names[3]),
    ]);
    let r3 = ScalarExpr::add_all([
        frame.y.apply(coords3, &cand.f),
        ScalarExpr::mul_all([ScalarExpr::int(-2), cand.x.clone(), a_norm.clone()]),
        &rho3 * &cand.y.differentiate(&names[3]),
    ]);
    let r4 = ScalarExpr::add_all([
        ScalarExpr::mul_all([
            ScalarExpr::int(-1),
            a_norm.clone(),
            ScalarExpr::quot(frho, rho.clone()),
        ]),
        frame.z.apply(coords3, &cand.f),
        &rho3 * &cand.z.differentiate(&names[3]),
    ]);

    // rho^2 L_F h + 2 Ric + 2 (f - z|A| + a rho^2 - 2) h
    let scalar = ScalarExpr::mul(
        ScalarExpr::int(2),
        ScalarExpr::add_all([
            cand.f.clone(),
            ScalarExpr::neg(&cand.z * &a_norm),
            &a * &ScalarExpr::powi(rho.clone(), 2),
            ScalarExpr::int(-2),
        ]),
    );
    let rho2 = ScalarExpr::powi(rho, 2);
    let r5 = horizontal_relation(m, frame, cand, &scalar, &rho2, &ScalarExpr::int(2));
    ([r1, r2, r3, r4], r5)
}

/// Defect of the fibration being adapted to the metric: the frame must
/// annihilate the dilation and see the curvature form through `lambda^-2`.
pub fn twistoriality_check(
    m: &Metric4,
    frame: &Frame3,
    points: &[Vec<f64>],
) -> Result<Vec<CheckReport>> {
    let names = m.coords();
    let lambda_m2 = m.lambda_m2();
    let lambda = ScalarExpr::pow(lambda_m2.clone(), num_rational::Rational64::new(-1, 2));
    let xl = m.lift(&frame.x);
    let yl = m.lift(&frame.y);
    let zl = m.lift(&frame.z);
    let omega_xy = omega_pairing(m.curvature_form(), frame);
    let checks = [
        ("x-dilation", m.derive_along(&xl, &lambda)),
        ("y-dilation", m.derive_along(&yl, &lambda)),
        (
            "z-conformal",
            &m.derive_along(&zl, lambda_m2) - &omega_xy,
        ),
        (
            "fiber-constant",
            &m.derive_along(m.fundamental_field(), lambda_m2)
                - &ScalarExpr::float(m.fiber_constant()),
        ),
    ];
    checks
        .iter()
        .map(|(name, e)| {
            scan_values(name, names, points, std::slice::from_ref(e), |v| v[0].abs())
        })
        .collect()
}

/// Block structure of the Ricci tensor of an assembled metric plus the
/// Einstein verdict. Errors when the curvature form drops below the floor,
/// where the fibration degenerates to a warped product.
#[derive(Debug)]
pub struct RicciStructure {
    pub reports: Vec<CheckReport>,
    pub einstein: bool,
    pub einstein_residual: f64,
}

pub fn ricci_structure_check(
    m: &Metric4,
    frame: &Frame3,
    points: &[Vec<f64>],
    einstein_tol: f64,
) -> Result<RicciStructure> {
    let names = m.coords();
    let omega_xy = omega_pairing(m.curvature_form(), frame);
    let floor = scan_values(
        "omega-floor",
        names,
        points,
        std::slice::from_ref(&omega_xy),
        |v| -v[0].abs(),
    )?;
    if floor.max_abs > -OMEGA_FLOOR {
        return Err(Error::Invariant(format!(
            "|Omega(X,Y)| drops to {} below the floor {}; the fibration degenerates",
            -floor.max_abs,
            OMEGA_FLOOR
        )));
    }

    let ric = m.ricci();
    let v = m.fundamental_field();
    let lifts = [m.lift(&frame.x), m.lift(&frame.y), m.lift(&frame.z)];
    let legs = [&frame.x, &frame.y, &frame.z];
    let h = m.base();
    let ric_n = h.ricci();
    let c = m.fiber_constant();

    let vertical = pair_mat4(ric, v, v);
    let mixed: Vec<ScalarExpr> = lifts.iter().map(|l| pair_mat4(ric, v, l)).collect();
    let mut horizontal = Vec::new();
    for a in 0..3 {
        for b in a..3 {
            let lhs = pair_mat4(ric, &lifts[a], &lifts[b]);
            let rhs = &sym3_pair(ric_n.clone(), legs[a], legs[b])
                - &ScalarExpr::mul(
                    ScalarExpr::float(c * c / 2.0),
                    h3_pair(h, legs[a], legs[b]),
                );
            horizontal.push(&lhs - &rhs);
        }
    }

    let mut reports = Vec::new();
    reports.push(scan_values(
        "ricci-vertical",
        names,
        points,
        std::slice::from_ref(&vertical),
        |v| v[0].abs(),
    )?);
    reports.push(scan_values("ricci-mixed", names, points, &mixed, |v| {
        v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    })?);
    reports.push(scan_values(
        "ricci-horizontal",
        names,
        points,
        &horizontal,
        |v| v.iter().fold(0.0f64, |acc, x| acc.max(x.abs())),
    )?);

    // Einstein defect: trace-free part of the Ricci tensor in the g-norm.
    let scal = {
        let mut terms = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                terms.push(m.inverse_component(i, j) * &ric[i][j]);
            }
        }
        ScalarExpr::add_all(terms)
    };
    let defect: Mat4 = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            &ric[i][j]
                - &ScalarExpr::mul_all([
                    ScalarExpr::rational(1, 4),
                    scal.clone(),
                    m.component(i, j).clone(),
                ])
        })
    });
    let defect_norm_sq = mat4_norm_sq(m, &defect);
    let einstein_report = scan_values(
        "einstein-defect",
        names,
        points,
        std::slice::from_ref(&defect_norm_sq),
        |v| v[0].max(0.0).sqrt(),
    )?;
    let einstein = einstein_report.max_abs <= einstein_tol;
    let einstein_residual = einstein_report.max_abs;
    reports.push(einstein_report);
    Ok(RicciStructure {
        reports,
        einstein,
        einstein_residual,
    })
}

#[cfg(test)]
mod tests;
