//! The two degenerate conformal representatives on the jet chart and their
//! descent to the 4-dimensional solution space.

use crate::expr::sample::{zero_test, SampleDomain, Verdict};
use crate::expr::Expr;
use crate::forms::{DiffForm, SymmetricForm};
use crate::jet::{jet_chart, PdePair};
use crate::report::{Check, Report};

use super::{CurvError, Metric4};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Defined where R_sT_s ≠ 4.
    Mne1,
    /// Defined where R_sT_s ≠ 0.
    Mne2,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Mne1 => "mne1",
            MetricKind::Mne2 => "mne2",
        }
    }
}

/// The contact forms λ, ν1, ν2, ν3 of a pair.
pub struct ContactForms {
    pub lambda: DiffForm,
    pub nu1: DiffForm,
    pub nu2: DiffForm,
    pub nu3: DiffForm,
}

pub fn contact_forms(pp: &PdePair) -> ContactForms {
    let c = jet_chart();
    let td = pp.total_derivatives();
    let v = Expr::var;
    let form = |parts: &[(&str, Expr)]| DiffForm::one_form(&c, parts).expect("jet coordinate");
    ContactForms {
        lambda: form(&[("z", Expr::one()), ("x", -v("p")), ("y", -v("q"))]),
        nu1: form(&[("p", Expr::one()), ("x", -pp.r()), ("y", -v("s"))]),
        nu2: form(&[("q", Expr::one()), ("x", -v("s")), ("y", -pp.t())]),
        nu3: form(&[("s", Expr::one()), ("x", -&td.dyr), ("y", -&td.dxt)]),
    }
}

/// Partial derivatives of R and T and their total derivatives used by the
/// metric formulas.
struct Jets<'a> {
    pp: &'a PdePair,
    rs: Expr,
    ts: Expr,
    rp: Expr,
    rq: Expr,
    rz: Expr,
    tp: Expr,
    tq: Expr,
    tz: Expr,
}

impl<'a> Jets<'a> {
    fn new(pp: &'a PdePair) -> Self {
        let (r, t) = (pp.r(), pp.t());
        Jets {
            pp,
            rs: pp.r_s().clone(),
            ts: pp.t_s().clone(),
            rp: r.diff("p"),
            rq: r.diff("q"),
            rz: r.diff("z"),
            tp: t.diff("p"),
            tq: t.diff("q"),
            tz: t.diff("z"),
        }
    }

    fn dx(&self, f: &Expr) -> Expr {
        self.pp.dx(f)
    }

    fn dy(&self, f: &Expr) -> Expr {
        self.pp.dy(f)
    }
}

/// Degenerate symmetric form on the jet chart together with its defining pieces.
#[derive(Debug, Clone)]
pub struct DegenerateMetric {
    pub kind: MetricKind,
    pub g: SymmetricForm,
    /// v for mne1, v' for mne2.
    pub v: Expr,
    /// ω for mne1, ω' for mne2.
    pub omega: DiffForm,
}

fn two_v(j: &Jets) -> Expr {
    let (rs, ts, rp, rq, rz, tp, tq, tz) = (&j.rs, &j.ts, &j.rp, &j.rq, &j.rz, &j.tp, &j.tq, &j.tz);
    let dx_ts = j.dx(ts);
    let dy_rs = j.dy(rs);
    let dy2_rs = j.dy(&dy_rs);
    let dx_tq = j.dx(tq);
    let dx_tp = j.dx(tp);
    let dy_tq = j.dy(tq);
    let dy_tp = j.dy(tp);
    let dy_rq = j.dy(rq);
    let dy_rp = j.dy(rp);
    let p2 = |e: &Expr| e.powi(2);
    let p3 = |e: &Expr| e.powi(3);
    Expr::add_all([
        8 * &dx_tq,
        -4 * &dy2_rs,
        4 * &dx_ts * &dy_rs,
        4 * rs * &dx_tp,
        -4 * rs * &dy_tq,
        -4 * p2(rs) * &dy_tp,
        8 * rq * tp,
        -14 * rs * tp * &dy_rs,
        4 * rp * rs * tp,
        3 * p2(rs) * tp * &dx_ts,
        -6 * p3(rs) * p2(tp),
        -4 * tq * &dy_rs,
        4 * rs * tq * &dx_ts,
        -6 * p2(rs) * tp * tq,
        8 * ts * &dy_rq,
        -2 * p2(&dy_rs) * ts,
        4 * rp * ts * &dy_rs,
        -2 * rs * ts * &dx_tq,
        rs * ts * &dy2_rs,
        4 * rs * ts * &dy_rp,
        -1 * p2(rs) * ts * &dx_tp,
        p2(rs) * ts * &dy_tq,
        p3(rs) * ts * &dy_tp,
        8 * rz * ts,
        2 * rq * rs * tp * ts,
        2 * rp * p2(rs) * tp * ts,
        8 * rq * tq * ts,
        -3 * rs * tq * ts * &dy_rs,
        4 * rp * rs * tq * ts,
        -2 * p3(rs) * tp * tq * ts,
        -2 * p2(rs) * p2(tq) * ts,
        4 * rq * p2(ts) * &dy_rs,
        -2 * rs * p2(ts) * &dy_rq,
        -1 * p2(rs) * p2(ts) * &dy_rp,
        -2 * rs * rz * p2(ts),
        2 * rq * p2(rs) * tp * p2(ts),
        2 * rq * rs * tq * p2(ts),
        8 * rs * tz,
        -2 * p2(rs) * ts * tz,
    ])
}

fn v_prime(j: &Jets) -> Expr {
    let (rs, ts, rp, rq, rz, tp, tq, tz) = (&j.rs, &j.ts, &j.rp, &j.rq, &j.rz, &j.tp, &j.tq, &j.tz);
    let dx_rs = j.dx(rs);
    let dy_ts = j.dy(ts);
    let dy_rs = j.dy(rs);
    let dx_dy_rs = j.dx(&dy_rs);
    let dy_rq = j.dy(rq);
    let dx_tq = j.dx(tq);
    let dy_rp = j.dy(rp);
    let p2 = |e: &Expr| e.powi(2);
    let p3 = |e: &Expr| e.powi(3);
    Expr::add_all([
        2 * p2(rs) * &dx_rs * &dy_ts,
        -4 * rq * p2(rs) * &dy_ts,
        -1 * rp * p3(rs) * &dy_ts,
        -4 * p2(rs) * tp * &dx_rs,
        8 * rq * p2(rs) * tp,
        2 * rp * p3(rs) * tp,
        2 * p2(&dx_rs) * ts,
        -8 * rq * ts * &dx_rs,
        8 * p2(rq) * ts,
        -2 * rp * rs * ts * &dx_rs,
        4 * rp * rq * rs * ts,
        -1 * p2(rs) * ts * &dx_dy_rs,
        2 * p2(rs) * ts * &dy_rq,
        p3(rs) * ts * &dx_tq,
        p3(rs) * ts * &dy_rp,
        -1 * rq * p3(rs) * tp * ts,
        -3 * p2(rs) * tq * ts * &dx_rs,
        6 * rq * p2(rs) * tq * ts,
        rp * p3(rs) * tq * ts,
        2 * rq * rs * p2(ts) * &dx_rs,
        -4 * p2(rq) * rs * p2(ts),
        p3(rs) * rz * p2(ts),
        rs.powi(4) * ts * tz,
    ])
}

fn quadratic_part(cf: &ContactForms, ts: &Expr, rs: &Expr) -> Result<SymmetricForm, CurvError> {
    let n11 = SymmetricForm::product(&cf.nu1, &cf.nu1)?;
    let n12 = SymmetricForm::product(&cf.nu1, &cf.nu2)?;
    let n22 = SymmetricForm::product(&cf.nu2, &cf.nu2)?;
    Ok(n11.scale(ts).add(&n12.scale(&Expr::int(-2))).add(&n22.scale(rs)))
}

/// One of the two representatives of the conformal class on the jet chart.
pub fn build_metric(pp: &PdePair, kind: MetricKind) -> Result<DegenerateMetric, CurvError> {
    let guard = match kind {
        MetricKind::Mne1 => pp.four_minus_rsts(),
        MetricKind::Mne2 => pp.rsts(),
    };
    let unit = SampleDomain::new(&crate::jet::JET_COORDS.map(|c| (c, -1.0, 1.0)));
    if zero_test(&[guard], &unit)?.verdict == Verdict::Zero {
        return Err(CurvError::GuardViolated(kind.name()));
    }
    let j = Jets::new(pp);
    let cf = contact_forms(pp);
    let (rs, ts, rp, rq, tp, tq) = (&j.rs, &j.ts, &j.rp, &j.rq, &j.tp, &j.tq);
    let rsts = pp.rsts();
    let (v, omega, rest) = match kind {
        MetricKind::Mne1 => {
            let v = Expr::rational(1, 2) * two_v(&j);
            let c1 = Expr::add_all([
                4 * j.dx(ts),
                -2 * ts * j.dy(rs),
                4 * rp * ts,
                -2 * rs.powi(2) * tp * ts,
                -2 * rs * tq * ts,
                4 * rq * ts.powi(2),
            ]);
            let c2 = Expr::add_all([
                4 * j.dy(rs),
                -2 * rs * j.dx(ts),
                4 * rs * tq,
                -2 * rq * rs * ts.powi(2),
                -2 * rp * rs * ts,
                4 * rs.powi(2) * tp,
            ]);
            let c3 = 2 * (4 - &rsts) * (&rsts - 1);
            let omega = cf
                .nu1
                .scale(&c1)
                .add(&cf.nu2.scale(&c2))?
                .add(&cf.nu3.scale(&c3))?
                .add(&cf.lambda.scale(&v))?;
            let rest = quadratic_part(&cf, ts, rs)?.scale(&(2 * (&rsts - 4)));
            (v, omega, rest)
        }
        MetricKind::Mne2 => {
            let v = v_prime(&j);
            let c1 = (-j.dy(ts) + 2 * tp - rs * tp * ts + tq * ts) / ts;
            let c2 = (-j.dx(rs) + 2 * rq - rq * rs * ts + rp * rs) / rs;
            let c3 = 1 - &rsts;
            let cl = -(&v / (2 * rs.powi(3) * ts));
            let omega = cf
                .nu1
                .scale(&c1)
                .add(&cf.nu2.scale(&c2))?
                .add(&cf.nu3.scale(&c3))?
                .add(&cf.lambda.scale(&cl))?;
            let rest = quadratic_part(&cf, ts, rs)?;
            (v, omega, rest)
        }
    };
    let g = SymmetricForm::product(&cf.lambda, &omega)?
        .scale(&Expr::int(2))
        .add(&rest);
    Ok(DegenerateMetric { kind, g, v, omega })
}

/// The conformal factors α(D_x), α(D_y) with L_{D_x} g = α(D_x) g.
pub fn lie_factors(pp: &PdePair, kind: MetricKind) -> (Expr, Expr) {
    let j = Jets::new(pp);
    let (rs, ts, rp, rq, tp, tq) = (&j.rs, &j.ts, &j.rp, &j.rq, &j.tp, &j.tq);
    match kind {
        MetricKind::Mne1 => {
            let pre = pp.four_minus_rsts().powi(-2);
            let dy_rs = j.dy(rs);
            let dx_ts = j.dx(ts);
            let ax = Expr::add_all([
                8 * &dy_rs,
                16 * rp,
                -8 * rs * &dx_ts,
                8 * rs.powi(2) * tp,
                8 * rs * tq,
                -24 * rq * ts,
                -4 * rs * ts * &dy_rs,
                -16 * rp * rs * ts,
                3 * rs.powi(2) * ts * &dx_ts,
                -4 * rs.powi(3) * tp * ts,
                -4 * rs.powi(2) * tq * ts,
                10 * rq * rs * ts.powi(2),
                4 * rp * rs.powi(2) * ts.powi(2),
            ]);
            let ay = Expr::add_all([
                8 * &dx_ts,
                16 * tq,
                -8 * ts * &dy_rs,
                8 * rq * ts.powi(2),
                8 * rp * ts,
                -24 * rs * tp,
                -4 * rs * ts * &dx_ts,
                -16 * rs * tq * ts,
                3 * rs * ts.powi(2) * &dy_rs,
                -4 * rq * rs * ts.powi(3),
                -4 * rp * rs * ts.powi(2),
                10 * rs.powi(2) * tp * ts,
                4 * rs.powi(2) * tq * ts.powi(2),
            ]);
            (&pre * ax, pre * ay)
        }
        MetricKind::Mne2 => (
            (j.dx(rs) - 2 * rq) / rs,
            (j.dy(ts) - 2 * tp) / ts,
        ),
    }
}

impl DegenerateMetric {
    /// Residual expressions: g(D_x,·), g(D_y,·), L_{D_x}g − α(D_x)g, L_{D_y}g − α(D_y)g.
    pub fn descent_residuals(&self, pp: &PdePair) -> [Vec<Expr>; 4] {
        let td = pp.total_derivatives();
        let (ax, ay) = lie_factors(pp, self.kind);
        let lie = |f: &crate::forms::VectorField, a: &Expr| {
            let l = self.g.lie_derivative(f);
            l.upper()
                .into_iter()
                .zip(self.g.upper())
                .map(|(lij, gij)| lij - a * gij)
                .collect::<Vec<_>>()
        };
        [
            self.g.contract(&td.dx),
            self.g.contract(&td.dy),
            lie(&td.dx, &ax),
            lie(&td.dy, &ay),
        ]
    }

    /// Degeneracy along D_x, D_y and conformal invariance of g along them.
    pub fn degeneracy_and_descent_check(&self, pp: &PdePair, dom: &SampleDomain) -> Result<Report, CurvError> {
        let names = ["degenerate-along-Dx", "degenerate-along-Dy", "lie-Dx-conformal", "lie-Dy-conformal"];
        let mut rep = Report::new();
        for (name, exprs) in names.into_iter().zip(self.descent_residuals(pp)) {
            let z = zero_test(&exprs, dom)?;
            rep.push(Check::from_zero_test(
                format!("{}-{}", self.kind.name(), name),
                &z,
                Verdict::Zero,
                dom.tol_zero,
            ));
        }
        Ok(rep)
    }

    /// Restrict to the transversal slice x = x0, y = y0; the chart becomes (z, p, q, s).
    pub fn descend(&self, x0: f64, y0: f64) -> Result<Metric4, CurvError> {
        let g = self.g.restrict_to_slice(&[("x", x0), ("y", y0)])?;
        Ok(Metric4::from_form(g))
    }
}
