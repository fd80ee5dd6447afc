use super::*;
use crate::expr::parse_expr;

fn chart4() -> Arc<Chart> {
    Chart::new(
        &["x", "y", "z", "t"],
        vec![(-1.0, 1.0), (-1.0, 1.0), (0.5, 1.5), (-1.0, 1.0)],
    )
}

fn parse(text: &str, ch: &Chart) -> ScalarExpr {
    parse_expr(text, ch.coords()).unwrap()
}

/// Flat product R^3 x S^1 written as a trivial fibration.
fn flat_product() -> Metric4 {
    let ch = chart4();
    let base = Metric3::euclidean(ch.clone());
    Metric4::assemble(
        base,
        ScalarExpr::one(),
        OneForm3::zero(),
        ScalarExpr::one(),
        0.0,
        ch,
    )
    .unwrap()
}

/// The linear monopole u = z with potential A = x dy.
fn linear_monopole() -> Metric4 {
    let ch = chart4();
    let base = Metric3::euclidean(ch.clone());
    let a = OneForm3([ScalarExpr::zero(), parse("x", &ch), ScalarExpr::zero()]);
    Metric4::assemble(base, parse("z", &ch), a, ScalarExpr::one(), 0.0, ch).unwrap()
}

fn sample(m: &Metric4) -> Vec<Vec<f64>> {
    m.chart().sample_points(2, 8, 31)
}

#[test]
fn flat_product_is_flat() {
    let m = flat_product();
    for p in sample(&m) {
        let ric = m.eval_ricci(&p).unwrap();
        assert!(ric.norm() < 1e-12, "Ricci {} at {:?}", ric.norm(), p);
        let riem = m.eval_riemann(&p).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        assert!(riem[a][b][c][d].abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn sheared_flat_metric_is_flat() {
    // Pull the flat metric back through (x, y, z, t) -> (x + y/2, y, z, t+x);
    // constant shears keep it flat but make g non-diagonal.
    let ch = chart4();
    let base = Metric3::euclidean(ch.clone());
    let e = |v: i64| ScalarExpr::int(v);
    let s: [[i64; 4]; 4] = [[1, 0, 0, 0], [1, 2, 0, 0], [0, 0, 1, 0], [2, 0, 0, 1]];
    let mut g = zero_mat4();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = Vec::new();
            for k in 0..4 {
                acc.push(&e(s[i][k]) * &e(s[j][k]));
            }
            g[i][j] = ScalarExpr::add_all(acc);
        }
    }
    let m = Metric4::from_parts(
        ch,
        g,
        ScalarExpr::one(),
        OneForm4([e(0), e(0), e(0), e(1)]),
        Vector4([e(0), e(0), e(0), e(1)]),
        0.0,
        base,
        TwoForm3::zero(),
    )
    .unwrap();
    for p in sample(&m) {
        let ric = m.eval_ricci(&p).unwrap();
        assert!(ric.norm() < 1e-12);
        assert!(m.weyl_asd_norm(&p).unwrap() < 1e-12);
    }
}

#[test]
fn linear_monopole_is_ricci_flat() {
    let m = linear_monopole();
    for p in sample(&m) {
        let ric = m.eval_ricci(&p).unwrap();
        assert!(ric.norm() < 1e-8, "Ricci {} at {:?}", ric.norm(), p);
    }
}

#[test]
fn linear_monopole_has_no_antiselfdual_weyl() {
    // This curl fibration has curvature on one side of the 2-form bundle
    // only; the test pins the orientation constant.
    let m = linear_monopole();
    for p in sample(&m) {
        let asd = m.weyl_asd_norm(&p).unwrap();
        assert!(asd < 1e-8, "ASD Weyl {} at {:?}", asd, p);
        // The metric is curved, so the full Weyl tensor must not vanish.
        let riem = m.eval_riemann(&p).unwrap();
        let mut total = 0.0f64;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        total += riem[a][b][c][d] * riem[a][b][c][d];
                    }
                }
            }
        }
        assert!(total.sqrt() > 1e-3, "Riemann unexpectedly small at {:?}", p);
    }
}

#[test]
fn lift_is_horizontal_and_projects_correctly() {
    let m = linear_monopole();
    let ch = m.chart().clone();
    let s = Vector3([parse("y", &ch), parse("z", &ch), parse("1", &ch)]);
    let lifted = m.lift(&s);
    // theta(lift) = 0 and the base components are unchanged.
    let pairing = m.theta().apply(&lifted);
    let names = ch.coords();
    for p in sample(&m) {
        let v = pairing.eval_real(names, &p).unwrap();
        assert!(v.abs() < 1e-12);
        for i in 0..3 {
            let a = lifted.0[i].eval_real(names, &p).unwrap();
            let b = s.0[i].eval_real(names, &p).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn killing_field_annihilates_metric() {
    let m = linear_monopole();
    let dt = Vector4([
        ScalarExpr::zero(),
        ScalarExpr::zero(),
        ScalarExpr::zero(),
        ScalarExpr::one(),
    ]);
    let lie = m.lie_metric(&dt);
    let names = m.coords();
    for p in sample(&m) {
        for row in &lie {
            for e in row {
                assert!(e.eval_real(names, &p).unwrap().abs() < 1e-12);
            }
        }
    }
}

#[test]
fn inverse_metric_is_exact() {
    let m = linear_monopole();
    let names = m.coords();
    for p in sample(&m) {
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += m.component(i, k).eval_real(names, &p).unwrap()
                        * m.inverse_component(k, j).eval_real(names, &p).unwrap();
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc - want).abs() < 1e-11, "(g g^-1)_{}{} = {}", i, j, acc);
            }
        }
    }
}
