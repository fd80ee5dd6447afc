use super::*;
use crate::catalogue;
use crate::expr::parse_expr;
use crate::exterior3::Vector3;

fn parse(text: &str, ch: &Chart) -> ScalarExpr {
    parse_expr(text, ch.coords()).unwrap()
}

fn planar() -> BeltramiData {
    match catalogue::entry("bel.planar").unwrap().data {
        catalogue::EntryData::Bel(d) => d,
        _ => unreachable!(),
    }
}

fn abc() -> BeltramiData {
    match catalogue::entry("bel.abc").unwrap().data {
        catalogue::EntryData::Bel(d) => d,
        _ => unreachable!(),
    }
}

#[test]
fn planar_eigenfield_residuals_vanish() {
    let data = planar();
    let pts = data.chart().sample_points(3, 40, 3);
    for r in verify_beltrami(&data, &pts).unwrap() {
        assert!(r.max_abs <= 1e-10, "{} = {}", r.name, r.max_abs);
    }
}

#[test]
fn scaled_trigonometric_eigenfield_passes() {
    let data = abc();
    let pts = data.chart().sample_points(3, 40, 3);
    for r in verify_beltrami(&data, &pts).unwrap() {
        assert!(r.max_abs <= 1e-8, "{} = {}", r.name, r.max_abs);
    }
}

#[test]
fn constant_form_fails_eigenfield_equation() {
    let ch = planar().chart().clone();
    let data = BeltramiData {
        h: Metric3::euclidean(ch.clone()),
        a: OneForm3([ScalarExpr::zero(), ScalarExpr::zero(), ScalarExpr::one()]),
    };
    let pts = ch.sample_points(2, 10, 3);
    let reports = verify_beltrami(&data, &pts).unwrap();
    assert!((reports[0].max_abs - 2.0).abs() < 1e-12, "|dA + 2*A| = {}", reports[0].max_abs);
}

#[test]
fn build_reports_fiber_constant_two() {
    let data = planar();
    let m = beltrami_build(&data).unwrap();
    assert_eq!(m.fiber_constant(), 2.0);
    // V(lambda^-2) = rho^-1 d/drho (rho^2) = 2 identically.
    let c_expr = m.derive_along(m.fundamental_field(), m.lambda_m2());
    let names = m.coords();
    for p in m.chart().sample_points(2, 10, 5) {
        let v = c_expr.eval_real(names, &p).unwrap();
        assert!((v - 2.0).abs() <= 1e-12);
    }
}

#[test]
fn build_rejects_fiber_interval_touching_zero() {
    let ch = Chart::new(
        &["x", "y", "z", "rho"],
        vec![(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (0.0, 1.0)],
    );
    let data = BeltramiData {
        h: Metric3::euclidean(ch.clone()),
        a: OneForm3([parse("cos(2*z)", &ch), parse("sin(2*z)", &ch), ScalarExpr::zero()]),
    };
    assert!(beltrami_build(&data).is_err());
}

#[test]
fn frame_follows_the_field() {
    let data = planar();
    let f = beltrami_frame(&data).unwrap();
    let names = data.chart().coords();
    // At z = 0 the field is A = dx, so Z = d/dx.
    let p = vec![0.2, -0.3, 0.0, 1.0];
    for i in 0..3 {
        let want = if i == 0 { 1.0 } else { 0.0 };
        let v = f.z.0[i].eval_real(names, &p).unwrap();
        assert!((v - want).abs() < 1e-12);
    }
}

#[test]
fn frame_is_orthonormal_at_random_points() {
    for data in [planar(), abc()] {
        let f = beltrami_frame(&data).unwrap();
        let h = &data.h;
        let names = data.chart().coords();
        let legs = [&f.x, &f.y, &f.z];
        for p in data.chart().sample_points(1, 50, 29) {
            for (i, a) in legs.iter().enumerate() {
                for (j, b) in legs.iter().enumerate() {
                    let inner = h.inner11(&h.flat(a), &h.flat(b));
                    let v = inner.eval_real(names, &p).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-10, "Gram ({i},{j}) = {v}");
                }
            }
        }
    }
}

#[test]
fn curvature_form_pairs_to_minus_twice_field_norm() {
    // Omega(X, Y) = -2|A| for eigenfield data; -2 exactly on the planar one.
    for data in [planar(), abc()] {
        let h = &data.h;
        let f = beltrami_frame(&data).unwrap();
        let omega = h.d1(&data.a);
        let mut terms = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                terms.push(ScalarExpr::mul_all([
                    omega.component(i, j),
                    f.x.0[i].clone(),
                    f.y.0[j].clone(),
                ]));
            }
        }
        let pairing = ScalarExpr::add_all(terms);
        let want = ScalarExpr::mul(ScalarExpr::int(-2), h.norm1(&data.a));
        let names = data.chart().coords();
        for p in data.chart().sample_points(2, 20, 31) {
            let a = pairing.eval_real(names, &p).unwrap();
            let b = want.eval_real(names, &p).unwrap();
            assert!((a - b).abs() < 1e-10, "Omega(X,Y) = {} vs -2|A| = {}", a, b);
        }
    }
}

#[test]
fn lifted_field_leg_measures_conformal_factor() {
    // The lift of Z is Z - |A| rho^-1 d/drho, and it carries lambda^-2 =
    // rho^2 to -2|A|, matching Omega(X, Y).
    let data = planar();
    let m = beltrami_build(&data).unwrap();
    let f = beltrami_frame(&data).unwrap();
    let z_lift = m.lift(&Vector3(f.z.0.clone()));
    let carried = m.derive_along(&z_lift, m.lambda_m2());
    let want = ScalarExpr::mul(ScalarExpr::int(-2), data.h.norm1(&data.a));
    let names = m.coords();
    for p in m.chart().sample_points(2, 20, 37) {
        let a = carried.eval_real(names, &p).unwrap();
        let b = want.eval_real(names, &p).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}
