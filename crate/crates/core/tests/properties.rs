use proptest::prelude::*;

use paracr::curvature::{Metric4, Route, NODE_BUDGET};
use paracr::expr::sample::{zero_test, SampleDomain, Verdict};
use paracr::expr::{parse_expr, EvalPoint, Expr};
use paracr::forms::{Chart, DiffForm};
use paracr::jet::{jet_domain, swap, PdePair};
use paracr::models::{newman_tangency, Tangency};
use paracr::ode::{Branch, Datum112};
use paracr::par::Exec;

const VARS: [&str; 3] = ["x", "y", "z"];

/// Random smooth expressions in x, y, z with no poles on the real line.
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        (1i64..=5, 1i64..=4).prop_map(|(n, d)| Expr::rational(n, d)),
        prop::sample::select(VARS.to_vec()).prop_map(Expr::var),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (2 + b.powi(2))),
            (inner.clone(), 2i32..=3).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| (a.sin()).exp()),
            inner.clone().prop_map(|a| (1 + a.powi(2)).sqrt()),
            inner.prop_map(|a| -a),
        ]
    })
}

fn arb_point() -> impl Strategy<Value = EvalPoint> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(x, y, z)| EvalPoint::new().with("x", x).with("y", y).with("z", z))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn chart() -> Chart {
    Chart::new(&["x", "y", "z", "w"])
}

/// Random polynomial 1-form on (x, y, z, w).
fn arb_one_form() -> impl Strategy<Value = DiffForm> {
    let coeff = prop::collection::vec(-3i64..=3, 6).prop_map(|c| {
        parse_expr(&format!(
            "{}*x*y + {}*z^2 + {}*w*x + {}*y + {}*z*w*y + {}",
            c[0], c[1], c[2], c[3], c[4], c[5]
        ))
        .unwrap()
    });
    prop::collection::vec(coeff, 4).prop_map(|cs| DiffForm::from_components(&chart(), cs))
}

fn forms_equal(a: &DiffForm, b: &DiffForm) -> bool {
    let diff = a.sub(b).unwrap();
    let dom = SampleDomain::new(&[("x", -1.0, 1.0), ("y", -1.0, 1.0), ("z", -1.0, 1.0), ("w", -1.0, 1.0)]).samples(8);
    let cs = diff.coefficients();
    cs.is_empty() || zero_test(&cs, &dom).unwrap().verdict == Verdict::Zero
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_parse_round_trip(e in arb_expr(), pt in arb_point()) {
        let text = e.to_string();
        let back = parse_expr(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert!(close(back.evaluate(&pt).unwrap(), e.evaluate(&pt).unwrap(), 1e-12));
    }

    #[test]
    fn derivative_is_linear(f in arb_expr(), g in arb_expr(), a in -3i64..=3, b in -3i64..=3, pt in arb_point()) {
        let lhs = (Expr::int(a) * &f + Expr::int(b) * &g).diff("x").evaluate(&pt).unwrap();
        let rhs = (a as f64) * f.diff("x").evaluate(&pt).unwrap() + (b as f64) * g.diff("x").evaluate(&pt).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn derivative_matches_finite_differences(e in arb_expr(), pt in arb_point(), v in 0usize..3) {
        let var = VARS[v];
        let exact = e.diff(var).evaluate(&pt).unwrap();
        let h = 1e-5;
        let x0 = pt.get(var).unwrap();
        let at = |x: f64| { let mut q = pt.clone(); q.insert(var, x); e.evaluate(&q).unwrap() };
        // Fourth-order central difference.
        let fd = (-at(x0 + 2.0 * h) + 8.0 * at(x0 + h) - 8.0 * at(x0 - h) + at(x0 - 2.0 * h)) / (12.0 * h);
        prop_assert!((exact - fd).abs() <= 1e-6 * exact.abs().max(1.0), "{} vs {}", exact, fd);
    }

    #[test]
    fn substituting_a_constant_matches_evaluation(e in arb_expr(), pt in arb_point()) {
        let y = pt.get("y").unwrap();
        let sub = e.substitute_values(&[("y", y)]);
        prop_assert!(!sub.free_vars().contains("y"));
        prop_assert!(close(sub.evaluate(&pt).unwrap(), e.evaluate(&pt).unwrap(), 1e-12));
    }

    #[test]
    fn wedge_is_graded_commutative(a in arb_one_form(), b in arb_one_form(), c in arb_one_form()) {
        let ab = a.wedge(&b).unwrap();
        prop_assert!(forms_equal(&ab, &b.wedge(&a).unwrap().neg()));
        let abc = ab.wedge(&c).unwrap();
        prop_assert!(forms_equal(&abc, &c.wedge(&ab).unwrap()));
        prop_assert!(forms_equal(&a.wedge(&a).unwrap(), &DiffForm::zero(&chart(), 2)));
    }

    #[test]
    fn leibniz_rule(a in arb_one_form(), b in arb_one_form()) {
        let lhs = a.wedge(&b).unwrap().d();
        let rhs = a.d().wedge(&b).unwrap().sub(&a.wedge(&b.d()).unwrap()).unwrap();
        prop_assert!(forms_equal(&lhs, &rhs));
    }

    #[test]
    fn d_squared_vanishes(a in arb_one_form(), f in arb_expr()) {
        prop_assert!(forms_equal(&a.d().d(), &DiffForm::zero(&chart(), 3)));
        let scalar = DiffForm::scalar(&chart(), f);
        prop_assert!(forms_equal(&scalar.d().d(), &DiffForm::zero(&chart(), 2)));
    }

    #[test]
    fn tangency_iff_null(r in prop::array::uniform3(-1.0..1.0f64), sign in prop::bool::ANY, mag in 0.1..1.0f64, null in prop::bool::ANY) {
        let d3 = if sign { mag } else { -mag };
        let (d1, d2) = (r[1], r[2]);
        let d0 = if null { d1 * d2 / d3 } else { r[0] };
        let da = [d0, d1, d2, d3];
        let tol = 1e-9;
        let norm2: f64 = da.iter().map(|v| v * v).sum();
        let is_null = (d0 * d3 - d1 * d2).abs() < tol * norm2;
        prop_assert_eq!(newman_tangency(da, tol).is_tangent(), is_null);
        if let Tangency::Tangent { at: Some((x, y)), .. } = newman_tangency(da, tol) {
            prop_assert!((d1 + d3 * y).abs() < 1e-12 && (d2 + d3 * x).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn swap_exchanges_metricity_invariants(c in prop::collection::vec(-2i64..=2, 6)) {
        let r = parse_expr(&format!("{}*z + {}*p*q + {}*s^2/4 + {}*x*s", c[0], c[1], c[2], c[3])).unwrap();
        let t = parse_expr(&format!("{}*y*q + {}*s^2/4 + {}*z*p", c[4], c[5], c[0])).unwrap();
        let pp = PdePair::new(r, t).unwrap();
        let (j1, j2) = pp.point_metricity_invariants();
        let (k1, k2) = pp.swapped().point_metricity_invariants();
        let dom = jet_domain(&pp, 0.5).guard(pp.swapped().one_minus_rsts()).samples(8);
        let z = zero_test(&[swap(&j1) - k2, swap(&j2) - k1], &dom).unwrap();
        prop_assert_eq!(z.verdict, Verdict::Zero);
    }

    #[test]
    fn curvature_identities_on_random_metrics(c in prop::collection::vec(-3i64..=3, 5)) {
        let g = Metric4::from_fn(["u", "v", "w", "t"], |i, j| {
            let base = match (i, j) { (0, 3) => "1", (1, 2) => "-1", _ => "0" };
            let bump = match (i, j) {
                (0, 0) => format!("{}*v^2/10", c[0]),
                (1, 1) => format!("{}*u*w/10", c[1]),
                (2, 3) => format!("{}*t*u/10", c[2]),
                (0, 1) => format!("{}*sin(w)/10", c[3]),
                (3, 3) => format!("{}*exp(v)/10", c[4]),
                _ => "0".into(),
            };
            parse_expr(&format!("{base} + {bump}")).unwrap()
        });
        let pts = [[0.1, -0.2, 0.3, 0.05], [-0.3, 0.2, 0.1, -0.1]];
        for cu in g.curvature(&pts, Route::Symbolic { budget: NODE_BUDGET }, Exec::Sequential).unwrap() {
            prop_assert!(cu.identity_residuals().max() < 1e-7, "{:?}", cu.identity_residuals());
        }
    }

    #[test]
    fn rescaling_a2_keeps_the_branch(k in 1i64..=3) {
        let dom = SampleDomain::new(&[("x", -1.0, 1.0), ("y", -1.0, 1.0), ("a1", -1.0, 1.0), ("a2", -1.0, 1.0)]);
        for src in ["x*a1 + y*a2", "x*a1"] {
            let p = parse_expr(src).unwrap();
            let scaled = p.substitute(&[("a2".to_string(), Expr::int(2 * k) * Expr::var("a2"))].into_iter().collect());
            let (_, b1, _) = Datum112::new(p).unwrap().classify(&dom).unwrap();
            let (_, b2, _) = Datum112::new(scaled).unwrap().classify(&dom).unwrap();
            prop_assert_eq!(b1, b2);
            prop_assert!(b1 != Branch::Mixed);
        }
    }
}
