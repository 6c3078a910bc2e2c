use super::*;
use crate::expr::parse_expr;
use crate::expr::sample::SampleDomain;
use crate::jet::{jet_domain, PdePair};

fn e(s: &str) -> Expr {
    parse_expr(s).unwrap()
}

fn metric(coords: [&str; 4], upper: [[&str; 4]; 4]) -> Metric4 {
    Metric4::from_fn(coords, |i, j| e(upper[i][j]))
}

fn grid(lo: f64, hi: f64, n: usize, seed: u64) -> Vec<[f64; 4]> {
    SampleDomain::new(&[("a", lo, hi), ("b", lo, hi), ("c", lo, hi), ("d", lo, hi)])
        .seed(seed)
        .candidates(n)
        .iter()
        .map(|p| [p.get("a").unwrap(), p.get("b").unwrap(), p.get("c").unwrap(), p.get("d").unwrap()])
        .collect()
}

/// A deliberately unsymmetric, curved test metric.
fn lumpy() -> Metric4 {
    metric(
        ["u", "v", "w", "t"],
        [
            ["1 + u^2/5", "v*w/7", "0.1*t", "0"],
            ["", "-1 + sin(u)/4", "0", "0.2*u*t"],
            ["", "", "1 + exp(v)/9", "0.05*w"],
            ["", "", "", "-1 - w^2/6"],
        ],
    )
}

fn gk(kappa: &str) -> Metric4 {
    let f = format!("(1 + {kappa}*(a0*a1 + a2*a3))^(-2)");
    metric(
        ["a0", "a1", "a2", "a3"],
        [["0", &f, "0", "0"], ["", "0", "0", "0"], ["", "", "0", &f], ["", "", "", "0"]],
    )
}

#[test]
fn flat_split_metric_has_structurally_zero_riemann() {
    let g = metric(
        ["a0", "a1", "a2", "a3"],
        [["0", "0", "0", "1"], ["", "0", "-1", "0"], ["", "", "0", "0"], ["", "", "", "0"]],
    );
    let s = g.symbolic_curvature(NODE_BUDGET).unwrap();
    assert!(s.riemann_structurally_zero());
}

#[test]
fn routes_agree_on_a_curved_metric() {
    let g = lumpy();
    let pts = grid(-0.5, 0.5, 6, 3);
    let sym = g.curvature(&pts, Route::Symbolic { budget: NODE_BUDGET }, Exec::default()).unwrap();
    let jet = g.curvature(&pts, Route::Jet, Exec::default()).unwrap();
    let fd = g.curvature(&pts, Route::FiniteDifference { step: 1e-4 }, Exec::default()).unwrap();
    for ((s, j), f) in sym.iter().zip(&jet).zip(&fd) {
        assert!(s.max_riemann() > 1e-3);
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    assert!((s.gamma[a][b][c] - j.gamma[a][b][c]).abs() < 1e-12);
                    for d in 0..N {
                        assert!((s.riemann[a][b][c][d] - j.riemann[a][b][c][d]).abs() < 1e-10);
                        assert!((s.riemann[a][b][c][d] - f.riemann[a][b][c][d]).abs() < 1e-5);
                    }
                }
            }
        }
        assert!(s.identity_residuals().max() < 1e-10, "{:?}", s.identity_residuals());
    }
}

#[test]
fn christoffel_symbols_match_finite_differences() {
    let g = lumpy();
    for x in grid(-0.5, 0.5, 5, 11) {
        let exact = curvature_from_jet(x, &g.jet(&x).unwrap()).unwrap();
        let fd = FiniteDifference { field: &g, step: 1e-5 };
        // Second differences at this step are noisy, but Γ only uses first ones.
        let approx_gamma = curvature_from_jet(x, &fd.jet(&x).unwrap()).unwrap().gamma;
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    let (u, v) = (exact.gamma[a][b][c], approx_gamma[a][b][c]);
                    assert!((u - v).abs() <= 1e-5 * u.abs().max(1e-3), "{u} vs {v}");
                }
            }
        }
    }
}

#[test]
fn kappa_metric_has_constant_scalar_curvature_and_no_weyl() {
    let pts = grid(-0.3, 0.3, 20, 5);
    for (kappa, expect_flat) in [("1", false), ("2", false), ("-1", false), ("0", true)] {
        let c = gk(kappa).curvature(&pts, Route::Auto, Exec::default()).unwrap();
        let st = CurvatureStats::from_samples(&c);
        assert!(st.scalar_std < 1e-7, "kappa {kappa}: {st:?}");
        assert!(st.max_weyl < 1e-7, "kappa {kappa}: {st:?}");
        if expect_flat {
            assert!(st.max_riemann < 1e-12);
        } else {
            assert!(st.scalar_mean.abs() > 1.0);
        }
    }
}

#[test]
fn mixed_weyl_is_conformally_invariant() {
    let g = lumpy();
    let phi = e("0.3*u*v - w^2/5 + sin(t)/3");
    let rescaled = g.conformal_rescale(&phi);
    assert_eq!(rescaled.history.len(), 1);
    let pts = grid(-0.5, 0.5, 5, 17);
    let a = g.curvature(&pts, Route::Jet, Exec::default()).unwrap();
    let b = rescaled.curvature(&pts, Route::Jet, Exec::default()).unwrap();
    let scalar = ExprScalar::new(g.chart(), &phi);
    let conf = Conformal { field: &g, phi: &scalar };
    let c = curvature_field(&conf, &pts, Exec::default()).unwrap();
    for ((x, y), z) in a.iter().zip(&b).zip(&c) {
        let scale = x.max_weyl_mixed();
        assert!(scale > 1e-3);
        let flat = |t: &T4| t.iter().flatten().flatten().flatten().copied().collect::<Vec<f64>>();
        for ((u, v), w) in flat(&x.weyl_mixed).into_iter().zip(flat(&y.weyl_mixed)).zip(flat(&z.weyl_mixed)) {
            assert!((u - v).abs() < 1e-7 * scale);
            assert!((v - w).abs() < 1e-10 * scale);
        }
    }
    let same = g.conformal_rescale(&Expr::zero());
    for i in 0..N {
        for j in 0..N {
            assert_eq!(same.entry(i, j), g.entry(i, j));
        }
    }
}

#[test]
fn singular_metric_is_reported() {
    let g = metric(["a", "b", "c", "d"], [["1", "0", "0", "0"], ["", "0", "0", "0"], ["", "", "1", "0"], ["", "", "", "1"]]);
    assert_eq!(g.curvature(&[[0.0; 4]], Route::Jet, Exec::Sequential), Err(CurvError::Singular));
}

#[test]
fn split_signature() {
    assert_eq!(signature(&[[0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0], [0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]], 1e-12), (2, 2));
}

#[test]
fn flat_pair_mne1_descends_to_a_flat_metric() {
    let pp = PdePair::new(Expr::zero(), Expr::zero()).unwrap();
    let m = build_metric(&pp, MetricKind::Mne1).unwrap();
    let dom = jet_domain(&pp, 1.0).guard(pp.four_minus_rsts());
    assert!(m.degeneracy_and_descent_check(&pp, &dom).unwrap().all_pass());
    let g4 = m.descend(0.0, 0.0).unwrap();
    assert_eq!(g4.chart().names(), ["z", "p", "q", "s"]);
    assert_eq!(*g4.entry(0, 3), Expr::int(-8));
    assert_eq!(*g4.entry(1, 2), Expr::int(8));
    assert!(g4.symbolic_curvature(NODE_BUDGET).unwrap().riemann_structurally_zero());
    assert_eq!(
        build_metric(&pp, MetricKind::Mne2).unwrap_err(),
        CurvError::GuardViolated("mne2")
    );
}

#[test]
fn s_only_pair_descends_to_the_pp_wave_slice_metric() {
    let pp = PdePair::new(e("s^3"), e("s")).unwrap();
    let dom = jet_domain(&pp, 0.4).guard(pp.rsts()).guard(pp.four_minus_rsts());
    for kind in [MetricKind::Mne1, MetricKind::Mne2] {
        let m = build_metric(&pp, kind).unwrap();
        let rep = m.degeneracy_and_descent_check(&pp, &dom).unwrap();
        assert!(rep.all_pass(), "{kind:?}: {rep:?}");
        let (ax, ay) = lie_factors(&pp, kind);
        let z = crate::expr::sample::zero_test(&[ax, ay], &dom).unwrap();
        assert_eq!(z.verdict, crate::expr::sample::Verdict::Zero);
    }
    let slice = |x0: f64, y0: f64| build_metric(&pp, MetricKind::Mne2).unwrap().descend(x0, y0).unwrap();
    let (a, b) = (slice(0.0, 0.0), slice(1.0, -1.0));
    let pt: EvalPoint = [("z", 0.1), ("p", 0.2), ("q", -0.3), ("s", 0.25)].into_iter().collect();
    let want = [
        (0, 3, 1.0 - 3.0 * 0.25f64.powi(2)),
        (1, 1, 1.0),
        (1, 2, -1.0),
        (2, 2, 3.0 * 0.25f64.powi(2)),
        (0, 0, 0.0),
    ];
    for (i, j, w) in want {
        assert!((a.entry(i, j).evaluate(&pt).unwrap() - w).abs() < 1e-14, "({i},{j})");
        assert!((b.entry(i, j).evaluate(&pt).unwrap() - w).abs() < 1e-14, "({i},{j})");
    }
}
