//! The flat (1,2,3) model: explicit coframe and structure equations,
//! Newman's tangency/nullity correspondence, and the κ-family of PDE pairs.

use crate::expr::sample::{zero_test, SampleDomain, Verdict, ZeroTest};
use crate::expr::{parse_expr, EvalError, Expr};
use crate::forms::{Chart, DiffForm, FormError, SymmetricForm};
use crate::jet::PdePair;
use crate::curvature::Metric4;
use crate::report::{Check, Report, Status};

pub const FLAT_COORDS: [&str; 11] = ["x", "y", "a0", "a1", "a2", "a3", "a", "f11", "f22", "f31", "f32"];

pub const COFRAME_NAMES: [&str; 11] = [
    "theta1", "theta2", "theta3", "theta4", "Omega1", "Omega2", "Omega3", "Omega4", "Omega5", "Omega6", "A",
];

pub fn flat_chart() -> Chart {
    Chart::new(&FLAT_COORDS)
}

fn e(src: &str) -> Expr {
    parse_expr(src).expect("built-in formula parses")
}

/// θ1..θ4, Ω1..Ω6, A in that order.
pub fn flat_coframe() -> Vec<DiffForm> {
    let c = flat_chart();
    let f = |parts: &[(&str, &str)]| {
        let parts: Vec<(&str, Expr)> = parts.iter().map(|(n, s)| (*n, e(s))).collect();
        DiffForm::one_form(&c, &parts).expect("flat coordinates")
    };
    let theta1 = f(&[
        ("a0", "-a*f32/f22"),
        ("a2", "-a*f32/f22*y"),
        ("a1", "(f11*f22 - x*a*f32)/f22"),
        ("a3", "(f11*f22 - x*a*f32)/f22*y"),
    ]);
    let theta2 = f(&[
        ("a0", "-a*f31/f11"),
        ("a1", "-a*f31/f11*x"),
        ("a2", "(f11*f22 - y*a*f31)/f11"),
        ("a3", "(f11*f22 - y*a*f31)/f11*x"),
    ]);
    let theta3 = f(&[
        ("a0", "-a*f31*f32/(f11*f22)"),
        ("a1", "f31*(f11*f22 - x*a*f32)/(f11*f22)"),
        ("a2", "f32*(f11*f22 - y*a*f31)/(f11*f22)"),
        ("a3", "-(f11*f22 - x*a*f32)*(f11*f22 - y*a*f31)/(a*f11*f22)"),
    ]);
    let theta4 = f(&[("a0", "a"), ("a1", "a*x"), ("a2", "a*y"), ("a3", "a*x*y")]);
    let omega1 = f(&[
        ("f11", "1/(2*f11)"),
        ("f22", "-1/(2*f22)"),
        ("y", "a*f31/(f11*f22)"),
        ("x", "-a*f32/(f11*f22)"),
    ]);
    let omega2 = f(&[("x", "a/f11")]);
    let omega3 = f(&[("y", "a/f22")]);
    // (f31/f11) d log(a f31/(f11 f22)) expanded so that f31 never divides.
    let omega4 = f(&[
        ("a", "f31/(f11*a)"),
        ("f31", "1/f11"),
        ("f11", "-f31/f11^2"),
        ("f22", "-f31/(f11*f22)"),
        ("y", "a*f31^2/(f11^2*f22)"),
    ]);
    let omega5 = f(&[
        ("a", "f32/(f22*a)"),
        ("f32", "1/f22"),
        ("f11", "-f32/(f22*f11)"),
        ("f22", "-f32/f22^2"),
        ("x", "a*f32^2/(f11*f22^2)"),
    ]);
    let omega6 = f(&[
        ("f11", "1/(2*f11)"),
        ("f22", "1/(2*f22)"),
        ("a", "-1/a"),
        ("y", "-a*f31/(f11*f22)"),
        ("x", "-a*f32/(f11*f22)"),
    ]);
    let a = f(&[("f11", "-1/f11"), ("f22", "-1/f22")]);
    vec![theta1, theta2, theta3, theta4, omega1, omega2, omega3, omega4, omega5, omega6, a]
}

/// Sample box for the 11-dimensional chart with |a|, |f11|, |f22| > 0.1.
pub fn flat_domain(samples: usize, seed: u64) -> SampleDomain {
    let mut d = SampleDomain::new(&FLAT_COORDS.map(|c| (c, -1.5, 1.5)))
        .samples(samples)
        .seed(seed)
        .guard_floor(0.1);
    for g in ["a", "f11", "f22"] {
        d = d.guard(Expr::var(g));
    }
    d
}

/// LHS − RHS of each structure equation, named.
pub fn structure_residuals(cf: &[DiffForm]) -> Result<Vec<(&'static str, DiffForm)>, FormError> {
    let [t1, t2, t3, t4, o1, o2, o3, o4, o5, o6, a] = cf else {
        panic!("coframe needs 11 forms");
    };
    let half_a = a.scale(&Expr::rational(1, 2));
    let w = |x: &DiffForm, y: &DiffForm| x.wedge(y);
    let rhs = [
        (
            "d theta1",
            t1,
            w(&o1.sub(&half_a)?, t1)?.sub(&w(o3, t3)?)?.sub(&w(o5, t4)?)?,
        ),
        (
            "d theta2",
            t2,
            w(&o1.neg().sub(&half_a)?, t2)?.sub(&w(o2, t3)?)?.sub(&w(o4, t4)?)?,
        ),
        (
            "d theta3",
            t3,
            w(o4, t1)?.add(&w(o5, t2)?)?.add(&w(&o6.sub(&half_a)?, t3)?)?,
        ),
        (
            "d theta4",
            t4,
            w(o2, t1)?.add(&w(o3, t2)?)?.add(&w(&o6.neg().sub(&half_a)?, t4)?)?,
        ),
        ("d Omega1", o1, w(o2, o5)?.sub(&w(o3, o4)?)?),
        ("d Omega2", o2, w(o2, &o1.add(o6)?)?),
        ("d Omega3", o3, w(&o1.sub(o6)?, o3)?),
        ("d Omega4", o4, w(o4, &o1.sub(o6)?)?),
        ("d Omega5", o5, w(&o1.add(o6)?, o5)?),
        ("d Omega6", o6, w(o2, o5)?.add(&w(o3, o4)?)?),
        ("d A", a, DiffForm::zero(a.chart(), 2)),
    ];
    rhs.into_iter()
        .map(|(name, lhs, r)| Ok((name, lhs.d().sub(&r)?)))
        .collect()
}

fn residual_test(res: &DiffForm, dom: &SampleDomain) -> Result<ZeroTest, EvalError> {
    let coeffs = res.coefficients();
    if coeffs.is_empty() {
        return zero_test(&[Expr::zero()], dom);
    }
    zero_test(&coeffs, dom)
}

/// Zero-test every coefficient of every structure equation.
pub fn verify_flat_structure_equations(dom: &SampleDomain) -> Result<Report, FormError> {
    verify_coframe(&flat_coframe(), dom)
}

pub fn verify_coframe(cf: &[DiffForm], dom: &SampleDomain) -> Result<Report, FormError> {
    let mut rep = Report::new();
    for (name, res) in structure_residuals(cf)? {
        let z = residual_test(&res, dom)?;
        rep.push(Check::from_zero_test(format!("structure {name}"), &z, Verdict::Zero, dom.tol_zero));
    }
    Ok(rep)
}

/// Perturb form `which` by `eps·d(coord)`, then report whether some
/// structure equation notices.
pub fn mutation_detected(which: usize, coord: &str, eps: f64, dom: &SampleDomain) -> Result<bool, FormError> {
    let mut cf = flat_coframe();
    let bump = DiffForm::d_coord(cf[which].chart(), coord)?.scale(&Expr::from_f64(eps));
    cf[which] = cf[which].add(&bump)?;
    for (_, res) in structure_residuals(&cf)? {
        if residual_test(&res, dom)?.verdict == Verdict::Nonzero {
            return Ok(true);
        }
    }
    Ok(false)
}

/// G = 2(θ1θ2 + θ3θ4) − (−2 f11 f22 (da0 da3 − da1 da2)), entrywise.
pub fn bilinear_identity_residual() -> Result<Vec<Expr>, FormError> {
    let cf = flat_coframe();
    let c = flat_chart();
    let g = SymmetricForm::product(&cf[0], &cf[1])?
        .add(&SymmetricForm::product(&cf[2], &cf[3])?)
        .scale(&Expr::int(2));
    let d = |n: &str| DiffForm::d_coord(&c, n);
    let flat = SymmetricForm::product(&d("a0")?, &d("a3")?)?
        .add(&SymmetricForm::product(&d("a1")?, &d("a2")?)?.scale(&Expr::int(-1)))
        .scale(&e("2*f11*f22"));
    Ok(g.add(&flat).upper())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tangency {
    /// Tangent at (x*, y*); `None` when the two solutions coincide.
    Tangent { at: Option<(f64, f64)>, residual: f64 },
    NotTangent { margin: f64 },
}

impl Tangency {
    pub fn is_tangent(&self) -> bool {
        matches!(self, Tangency::Tangent { .. })
    }
}

/// Are the solutions z = a·(1,x,y,xy) and (a + da)·(1,x,y,xy) tangent somewhere?
///
/// With da3 ≠ 0 the tangency point is x* = −da2/da3, y* = −da1/da3 and the
/// remaining intersection condition is tested with residual scaled by
/// |da3|/‖da‖², so that `tol` is comparable to the null-cone test
/// |da0·da3 − da1·da2| < tol·‖da‖².
pub fn newman_tangency(da: [f64; 4], tol: f64) -> Tangency {
    let [d0, d1, d2, d3] = da;
    let norm2 = da.iter().map(|v| v * v).sum::<f64>();
    if norm2 == 0.0 {
        return Tangency::Tangent { at: None, residual: 0.0 };
    }
    if d3 != 0.0 {
        let (x, y) = (-d2 / d3, -d1 / d3);
        let r = d0 + d1 * x + d2 * y + d3 * x * y;
        let scaled = (r * d3).abs() / norm2;
        return if scaled < tol {
            Tangency::Tangent { at: Some((x, y)), residual: scaled }
        } else {
            Tangency::NotTangent { margin: scaled - tol }
        };
    }
    // d3 = 0: dz_x = d1 and dz_y = d2 must vanish identically.
    if d1 != 0.0 || d2 != 0.0 {
        return Tangency::NotTangent {
            margin: d1.abs().max(d2.abs()) / norm2.sqrt(),
        };
    }
    // Only d0 is left and the two graphs are parallel.
    Tangency::NotTangent { margin: d0.abs() / norm2.sqrt() }
}

/// The κ-family: the PDE pair, its general solution and the metric g_κ.
pub struct SiFamily {
    pub kappa: f64,
    pub pair: PdePair,
    pub psi: Expr,
    pub metric: Metric4,
}

pub fn si_family(kappa: f64) -> SiFamily {
    let k = Expr::from_f64(kappa);
    let den = e("z + x*p - y*q");
    let r = e("-2*y*p*s") / &den;
    let t = -(2 * &k / Expr::var("y")) * Expr::var("s") / &den - e("2*x/y*(z - y*q)*s") / &den;
    let psi = (&k * e("(a0*a1 + a2*a3)*y") + &k * Expr::var("a1") - e("y + a0*y^2 + a3*x*y"))
        / e("a2*y - a1*x");
    let conf = (1 + &k * e("a0*a1 + a2*a3")).powi(-2);
    let metric = Metric4::from_fn(["a0", "a1", "a2", "a3"], |i, j| match (i, j) {
        (0, 1) | (2, 3) => conf.clone(),
        _ => Expr::zero(),
    });
    let pair = PdePair::new(r, t).expect("si family is nondegenerate");
    SiFamily { kappa, pair, psi, metric }
}

impl SiFamily {
    /// Jet-space sample box avoiding y = 0 and the pole of R, T.
    pub fn jet_domain(&self, samples: usize, seed: u64) -> SampleDomain {
        SampleDomain::new(&[
            ("x", -1.0, 1.0),
            ("y", 0.5, 1.5),
            ("z", 1.0, 2.0),
            ("p", -0.5, 0.5),
            ("q", -0.5, 0.5),
            ("s", -0.5, 0.5),
        ])
        .samples(samples)
        .seed(seed)
        .guard(Expr::var("y"))
        .guard(e("z + x*p - y*q"))
        .guard(self.pair.one_minus_rsts())
        .guard_floor(0.05)
    }

    /// Sample box for (x, y, a0..a3) with the solution's denominator guarded.
    pub fn solution_domain(&self, samples: usize, seed: u64) -> SampleDomain {
        SampleDomain::new(&[
            ("x", -1.0, 1.0),
            ("y", 0.5, 1.5),
            ("a0", -1.0, 1.0),
            ("a1", -1.0, 1.0),
            ("a2", -1.0, 1.0),
            ("a3", -1.0, 1.0),
        ])
        .samples(samples)
        .seed(seed)
        .guard(e("a2*y - a1*x"))
        .guard(Expr::var("y"))
        .guard_floor(0.1)
    }

    /// Points of the solution space where 1 + κ(a0a1 + a2a3) stays away from 0.
    pub fn metric_points(&self, samples: usize, seed: u64) -> Vec<[f64; 4]> {
        SampleDomain::new(&[("a0", -0.5, 0.5), ("a1", -0.5, 0.5), ("a2", -0.5, 0.5), ("a3", -0.5, 0.5)])
            .seed(seed)
            .candidates(samples)
            .iter()
            .map(|p| ["a0", "a1", "a2", "a3"].map(|n| p.get(n).unwrap_or(0.0)))
            .collect()
    }
}

/// Summary check: is the status of every check in `rep` a pass?
pub fn all_pass_check(name: &str, rep: &Report) -> Check {
    let status = rep.status();
    let failing = rep.checks.iter().filter(|c| c.status != Status::Pass).count();
    let mut c = Check::new(name, status);
    c.samples = rep.checks.len();
    if failing > 0 {
        c.note = Some(format!("{failing} of {} sub-checks not passing", rep.checks.len()));
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::EvalPoint;

    #[test]
    fn coframe_spot_values() {
        let cf = flat_coframe();
        let pt: EvalPoint = FLAT_COORDS
            .iter()
            .map(|&c| {
                let v = match c {
                    "a" | "f11" | "f22" => 1.0,
                    _ => 0.0,
                };
                (c, v)
            })
            .collect();
        let da3 = cf[2].coefficient(&["a3"]).unwrap();
        assert_eq!(da3.evaluate(&pt).unwrap(), -1.0);
        let theta4 = &cf[3];
        assert_eq!(theta4.coefficient(&["a0"]).unwrap(), Expr::var("a"));
    }

    #[test]
    fn structure_equations_hold() {
        let rep = verify_flat_structure_equations(&flat_domain(30, 42)).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
        assert_eq!(rep.checks.len(), 11);
    }

    #[test]
    fn mutation_of_theta1_is_detected() {
        assert!(mutation_detected(0, "a3", 0.01, &flat_domain(10, 42)).unwrap());
    }

    #[test]
    fn bilinear_form_matches_the_flat_metric() {
        let z = zero_test(&bilinear_identity_residual().unwrap(), &flat_domain(20, 1)).unwrap();
        assert_eq!(z.verdict, Verdict::Zero);
    }

    #[test]
    fn tangency_examples() {
        assert!(!newman_tangency([0.0, 1.0, 1.0, 1.0], 1e-12).is_tangent());
        match newman_tangency([1.0, 1.0, 1.0, 1.0], 1e-12) {
            Tangency::Tangent { at: Some((x, y)), .. } => assert_eq!((x, y), (-1.0, -1.0)),
            other => panic!("{other:?}"),
        }
        assert!(newman_tangency([0.0; 4], 1e-12).is_tangent());
        assert!(!newman_tangency([1.0, 0.0, 0.0, 0.0], 1e-12).is_tangent());
        assert!(!newman_tangency([0.0, 1.0, 0.0, 0.0], 1e-12).is_tangent());
    }

    #[test]
    fn si_solution_and_metricity() {
        let si = si_family(1.0);
        let rep = si.pair.check_solution(&si.psi, &si.solution_domain(50, 42), 1e-8).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
        let dom = si.jet_domain(20, 42);
        let (j1, j2) = si.pair.point_metricity_invariants();
        let z = zero_test(&[si.pair.integrability_residual(), j1, j2], &dom).unwrap();
        assert_eq!(z.verdict, Verdict::Zero, "{z:?}");
    }

    #[test]
    fn si_metric_descends() {
        use crate::curvature::{build_metric, MetricKind};
        let si = si_family(1.0);
        let dom = si.jet_domain(20, 7).guard(si.pair.rsts()).guard(si.pair.four_minus_rsts());
        for kind in [MetricKind::Mne1, MetricKind::Mne2] {
            let m = build_metric(&si.pair, kind).unwrap();
            let rep = m.degeneracy_and_descent_check(&si.pair, &dom).unwrap();
            assert!(rep.all_pass(), "{kind:?}: {rep:#?}");
        }
    }
}
