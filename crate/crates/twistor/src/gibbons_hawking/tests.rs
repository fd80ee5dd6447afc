use super::*;
use crate::catalogue;
use crate::expr::parse_expr;

fn parse(text: &str, ch: &Chart) -> ScalarExpr {
    parse_expr(text, ch.coords()).unwrap()
}

fn linear_chart() -> Arc<Chart> {
    Chart::new(
        &["x", "y", "z", "t"],
        vec![(-1.0, 1.0), (-1.0, 1.0), (0.5, 1.5), (0.0, 1.0)],
    )
}

fn linear_data() -> GHData {
    let ch = linear_chart();
    GHData {
        h: Metric3::euclidean(ch.clone()),
        u: parse("z", &ch),
        a: OneForm3([ScalarExpr::zero(), parse("x", &ch), ScalarExpr::zero()]),
    }
}

#[test]
fn linear_monopole_residuals_vanish() {
    let data = linear_data();
    let pts = data.chart().sample_points(3, 40, 3);
    for r in verify_monopole(&data, &pts).unwrap() {
        assert!(r.max_abs <= 1e-12, "{} = {}", r.name, r.max_abs);
    }
}

#[test]
fn single_pole_satisfies_monopole_equation() {
    let entry = catalogue::entry("gh.pole1").unwrap();
    let data = match entry.data {
        catalogue::EntryData::Gh(d) => d,
        _ => unreachable!(),
    };
    let pts = data.chart().sample_points(3, 40, 3);
    for r in verify_monopole(&data, &pts).unwrap() {
        assert!(r.max_abs <= 1e-8, "{} = {}", r.name, r.max_abs);
    }
}

#[test]
fn sign_broken_potential_fails() {
    let ch = linear_chart();
    let data = GHData {
        h: Metric3::euclidean(ch.clone()),
        u: parse("z", &ch),
        a: OneForm3([parse("y", &ch), ScalarExpr::zero(), ScalarExpr::zero()]),
    };
    let pts = data.chart().sample_points(3, 10, 3);
    let reports = verify_monopole(&data, &pts).unwrap();
    assert!(reports[0].max_abs > 1e-1, "broken data must show a residual");
}

#[test]
fn build_produces_killing_fundamental_field() {
    let data = linear_data();
    let m = gh_build(&data).unwrap();
    assert_eq!(m.fiber_constant(), 0.0);
    let lie = m.lie_metric(m.fundamental_field());
    let names = m.coords();
    for p in m.chart().sample_points(2, 20, 5) {
        for row in &lie {
            for e in row {
                assert!(e.eval_real(names, &p).unwrap().abs() <= 1e-10);
            }
        }
    }
    // V(lambda^-2) = V(u) must equal the reported constant 0.
    let c_expr = m.derive_along(m.fundamental_field(), m.lambda_m2());
    for p in m.chart().sample_points(2, 10, 5) {
        assert!(c_expr.eval_real(names, &p).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn build_rejects_nonpositive_u() {
    let ch = Chart::new(
        &["x", "y", "z", "t"],
        vec![(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (0.0, 1.0)],
    );
    let data = GHData {
        h: Metric3::euclidean(ch.clone()),
        u: parse("z", &ch),
        a: OneForm3([ScalarExpr::zero(), parse("x", &ch), ScalarExpr::zero()]),
    };
    assert!(gh_build(&data).is_err());
}

#[test]
fn frame_for_axis_aligned_gradient() {
    let data = linear_data();
    let f = gh_frame(&data).unwrap();
    let names = data.chart().coords();
    let p = vec![0.3, -0.2, 1.0, 0.0];
    let at = |v: &Vector3, i: usize| v.0[i].eval_real(names, &p).unwrap();
    for i in 0..3 {
        let want_z = if i == 2 { 1.0 } else { 0.0 };
        assert!((at(&f.z, i) - want_z).abs() < 1e-12);
    }
    // The seed picks x first, so X = d/dx and Y = d/dy.
    assert!((at(&f.x, 0) - 1.0).abs() < 1e-12);
    assert!((at(&f.y, 1) - 1.0).abs() < 1e-12);
}

#[test]
fn frame_for_tilted_gradient_is_orthonormal() {
    let ch = linear_chart();
    let data = GHData {
        h: Metric3::euclidean(ch.clone()),
        u: parse("x + y + z", &ch),
        a: OneForm3([parse("2*z", &ch), parse("3*x", &ch), parse("y", &ch)]),
    };
    let f = gh_frame(&data).unwrap();
    let h = &data.h;
    let names = ch.coords();
    let gram = [
        (h.inner11(&h.flat(&f.x), &h.flat(&f.x)), 1.0),
        (h.inner11(&h.flat(&f.y), &h.flat(&f.y)), 1.0),
        (h.inner11(&h.flat(&f.z), &h.flat(&f.z)), 1.0),
        (h.inner11(&h.flat(&f.x), &h.flat(&f.y)), 0.0),
        (h.inner11(&h.flat(&f.x), &h.flat(&f.z)), 0.0),
        (h.inner11(&h.flat(&f.y), &h.flat(&f.z)), 0.0),
    ];
    for p in ch.sample_points(2, 20, 9) {
        for (e, want) in &gram {
            let v = e.eval_real(names, &p).unwrap();
            assert!((v - want).abs() < 1e-10, "Gram entry {} vs {}", v, want);
        }
        // Positive orientation and Z along (1,1,1)/sqrt(3).
        let mut m = [[0.0f64; 3]; 3];
        for (row, v) in [&f.x, &f.y, &f.z].iter().enumerate() {
            for i in 0..3 {
                m[row][i] = v.0[i].eval_real(names, &p).unwrap();
            }
        }
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        assert!(det > 0.5, "orientation determinant {}", det);
        let s = 1.0 / 3.0f64.sqrt();
        for i in 0..3 {
            assert!((m[2][i] - s).abs() < 1e-10);
        }
        // The frame legs other than Z annihilate u.
        let ux = f.x.apply(h.coords(), &data.u);
        let uy = f.y.apply(h.coords(), &data.u);
        assert!(ux.eval_real(names, &p).unwrap().abs() < 1e-10);
        assert!(uy.eval_real(names, &p).unwrap().abs() < 1e-10);
    }
}

#[test]
fn curvature_form_pairs_to_gradient_norm_on_frame() {
    // Omega(X, Y) = |du| for monopole data.
    let data = linear_data();
    let h = &data.h;
    let f = gh_frame(&data).unwrap();
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
    let want = h.norm1(&h.d0(&data.u));
    let names = data.chart().coords();
    for p in data.chart().sample_points(2, 20, 13) {
        let a = pairing.eval_real(names, &p).unwrap();
        let b = want.eval_real(names, &p).unwrap();
        assert!((a - b).abs() < 1e-10, "Omega(X,Y) = {} vs |du| = {}", a, b);
    }
}

#[test]
fn planes_are_flat_and_geodesic() {
    for u_text in ["z", "x + 2*y + 3*z"] {
        let ch = linear_chart();
        let data = GHData {
            h: Metric3::euclidean(ch.clone()),
            u: parse(u_text, &ch),
            a: OneForm3::zero(),
        };
        let pts = ch.sample_points(2, 20, 17);
        let reports = fiber_diagnostic(&data, &pts).unwrap();
        for r in &reports {
            assert!(r.max_abs <= 1e-10, "{} = {} for u = {}", r.name, r.max_abs, u_text);
        }
    }
}

#[test]
fn spheres_are_not_geodesic() {
    let ch = Chart::new(
        &["x", "y", "z", "t"],
        vec![(0.6, 1.4), (0.6, 1.4), (-0.4, 0.4), (0.0, 1.0)],
    );
    let data = GHData {
        h: Metric3::euclidean(ch.clone()),
        u: parse("1/(2*sqrt(x^2 + y^2 + z^2))", &ch),
        a: OneForm3::zero(),
    };
    let pts = ch.sample_points(2, 5, 19);
    let reports = fiber_diagnostic(&data, &pts).unwrap();
    assert!(
        reports[0].max_abs > 1e-3,
        "sphere second fundamental form {}",
        reports[0].max_abs
    );
}

#[test]
fn horospheres_have_flat_induced_metric() {
    // Level sets of z in h = e^{2z}(dx^2 + dy^2) + dz^2 have second
    // fundamental form equal to the induced metric (norm sqrt(2) in the
    // orthonormal frame) yet vanishing induced curvature; this pins the
    // sign pairing the ambient sectional term with the shape determinant.
    let ch = linear_chart();
    let e2z = parse("exp(2*z)", &ch);
    let g = [
        [e2z.clone(), ScalarExpr::zero(), ScalarExpr::zero()],
        [ScalarExpr::zero(), e2z, ScalarExpr::zero()],
        [ScalarExpr::zero(), ScalarExpr::zero(), ScalarExpr::one()],
    ];
    let data = GHData {
        h: Metric3::new(ch.clone(), g).unwrap(),
        u: parse("z", &ch),
        a: OneForm3::zero(),
    };
    let pts = ch.sample_points(2, 10, 23);
    let reports = fiber_diagnostic(&data, &pts).unwrap();
    assert!(
        (reports[0].max_abs - 2.0f64.sqrt()).abs() < 1e-8,
        "second fundamental form {}",
        reports[0].max_abs
    );
    assert!(reports[1].max_abs <= 1e-8, "induced curvature {}", reports[1].max_abs);
}
