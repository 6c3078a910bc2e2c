//! The PDE pair z_xx = R, z_yy = T on the jet chart (x, y, z, p, q, s).

use std::collections::HashMap;
use std::sync::OnceLock;

use thiserror::Error;

use crate::expr::sample::{zero_test, SampleDomain, Verdict};
use crate::expr::{EvalError, Expr};
use crate::forms::{Chart, VectorField};
use crate::report::{Check, Report, Status};

pub const JET_COORDS: [&str; 6] = ["x", "y", "z", "p", "q", "s"];

pub fn jet_chart() -> Chart {
    Chart::new(&JET_COORDS)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("`{0}` is not a jet coordinate")]
    ForeignVariable(String),
    #[error("1 - R_s T_s vanishes identically")]
    Degenerate,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    X,
    Y,
}

/// The implicitly defined D_xT, D_yR together with the fields D_x, D_y.
#[derive(Debug, Clone)]
pub struct TotalDerivatives {
    pub dxt: Expr,
    pub dyr: Expr,
    pub dx: VectorField,
    pub dy: VectorField,
}

impl TotalDerivatives {
    pub fn apply(&self, which: Dir, f: &Expr) -> Expr {
        match which {
            Dir::X => self.dx.apply(f),
            Dir::Y => self.dy.apply(f),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PdePair {
    r: Expr,
    t: Expr,
    rs: Expr,
    ts: Expr,
    td: OnceLock<TotalDerivatives>,
}

fn v(name: &str) -> Expr {
    Expr::var(name)
}

impl PdePair {
    /// Checks the variables and rejects pairs with 1 − R_sT_s ≡ 0 on the unit box.
    pub fn new(r: Expr, t: Expr) -> Result<PdePair, JetError> {
        for e in [&r, &t] {
            if let Some(bad) = e.free_vars().into_iter().find(|n| !JET_COORDS.contains(&n.as_str())) {
                return Err(JetError::ForeignVariable(bad));
            }
        }
        let pp = PdePair::new_unchecked(r, t);
        let box_dom = unit_box();
        let z = zero_test(&[pp.one_minus_rsts()], &box_dom)?;
        if z.verdict == Verdict::Zero {
            return Err(JetError::Degenerate);
        }
        Ok(pp)
    }

    fn new_unchecked(r: Expr, t: Expr) -> PdePair {
        PdePair {
            rs: r.diff("s"),
            ts: t.diff("s"),
            r,
            t,
            td: OnceLock::new(),
        }
    }

    pub fn r(&self) -> &Expr {
        &self.r
    }

    pub fn t(&self) -> &Expr {
        &self.t
    }

    pub fn r_s(&self) -> &Expr {
        &self.rs
    }

    pub fn t_s(&self) -> &Expr {
        &self.ts
    }

    pub fn rsts(&self) -> Expr {
        &self.rs * &self.ts
    }

    pub fn one_minus_rsts(&self) -> Expr {
        1 - self.rsts()
    }

    pub fn four_minus_rsts(&self) -> Expr {
        4 - self.rsts()
    }

    /// The pair after exchanging x↔y, p↔q (and hence R↔T).
    pub fn swapped(&self) -> PdePair {
        PdePair::new_unchecked(swap(&self.t), swap(&self.r))
    }

    pub fn total_derivatives(&self) -> &TotalDerivatives {
        self.td.get_or_init(|| {
            let (r, t) = (&self.r, &self.t);
            let (p, q, s) = (v("p"), v("q"), v("s"));
            let a = t.diff("x") + &p * t.diff("z") + r * t.diff("p") + &s * t.diff("q");
            let b = r.diff("y") + &q * r.diff("z") + &s * r.diff("p") + t * r.diff("q");
            let den = self.one_minus_rsts();
            let dxt = (&a + &self.ts * &b) / &den;
            let dyr = (&b + &self.rs * &a) / &den;
            let chart = jet_chart();
            let one = Expr::one();
            let zero = Expr::zero();
            let dx = VectorField::new(
                &chart,
                vec![one.clone(), zero.clone(), p.clone(), r.clone(), s.clone(), dyr.clone()],
            );
            let dy = VectorField::new(&chart, vec![zero, one, q, s, t.clone(), dxt.clone()]);
            TotalDerivatives { dxt, dyr, dx, dy }
        })
    }

    pub fn dx(&self, f: &Expr) -> Expr {
        self.total_derivatives().apply(Dir::X, f)
    }

    pub fn dy(&self, f: &Expr) -> Expr {
        self.total_derivatives().apply(Dir::Y, f)
    }

    /// Residuals of the two linear relations defining D_xT and D_yR.
    pub fn defining_relations(&self) -> [Expr; 2] {
        let td = self.total_derivatives();
        let (p, q, s) = (v("p"), v("q"), v("s"));
        let (r, t) = (&self.r, &self.t);
        let a = t.diff("x") + &p * t.diff("z") + r * t.diff("p") + &s * t.diff("q");
        let b = r.diff("y") + &q * r.diff("z") + &s * r.diff("p") + t * r.diff("q");
        [
            &td.dxt - (a + &td.dyr * &self.ts),
            &td.dyr - (b + &td.dxt * &self.rs),
        ]
    }

    /// D_x²T − D_y²R.
    pub fn integrability_residual(&self) -> Expr {
        let td = self.total_derivatives();
        self.dx(&td.dxt) - self.dy(&td.dyr)
    }

    /// [D_x, D_y] − (D_x²T − D_y²R)∂_s, component-wise over (x,y,z,p,q,s).
    pub fn commutator_components(&self) -> Vec<Expr> {
        let td = self.total_derivatives();
        let mut c = td.dx.bracket(&td.dy).components().to_vec();
        c[5] = &c[5] - self.integrability_residual();
        c
    }

    pub fn commutator_residual(&self, dom: &SampleDomain) -> Result<Report, JetError> {
        let mut rep = Report::new();
        let comps = self.commutator_components();
        for (name, e) in JET_COORDS.iter().zip(comps) {
            let z = zero_test(&[e], dom)?;
            rep.push(Check::from_zero_test(
                format!("commutator-d{name}"),
                &z,
                Verdict::Zero,
                dom.tol_zero,
            ));
        }
        Ok(rep)
    }

    /// The metricity polynomials (J1, J2).
    pub fn point_metricity_invariants(&self) -> (Expr, Expr) {
        let (r, t) = (&self.r, &self.t);
        let (rs, ts) = (&self.rs, &self.ts);
        let (rp, rq) = (r.diff("p"), r.diff("q"));
        let (tp, tq) = (t.diff("p"), t.diff("q"));
        let rsts = self.rsts();
        let j1 = Expr::add_all([
            (&rsts - 4) * self.dx(rs),
            rs * (2 * self.dy(rs) - rs * self.dx(ts)),
            8 * &rq,
            -6 * &rq * rs * ts,
            4 * &rp * rs,
            2 * rs.powi(2) * &tq,
            -2 * &rp * rs.powi(2) * ts,
            2 * rs.powi(3) * &tp,
        ]);
        let j2 = Expr::add_all([
            (&rsts - 4) * self.dy(ts),
            ts * (2 * self.dx(ts) - ts * self.dy(rs)),
            8 * &tp,
            -6 * rs * &tp * ts,
            4 * &tq * ts,
            2 * &rp * ts.powi(2),
            -2 * rs * &tq * ts.powi(2),
            2 * &rq * ts.powi(3),
        ]);
        (j1, j2)
    }

    /// The point torsion obstructions (K1pt, K2pt), upper sign branch.
    pub fn torsion_obstructions(&self) -> (Expr, Expr) {
        let (rss, tss) = (self.rs.diff("s"), self.ts.diff("s"));
        let w = self.one_minus_rsts().sqrt();
        let tail = &tss * self.rs.powi(2);
        let k1 = &rss * (1 - &w).powi(2) + &tail;
        let k2 = &rss * (1 + &w).powi(2) + &tail;
        (k1, k2)
    }

    /// The contact Weyl obstructions (K1ct, K2ct).
    pub fn contact_weyl_invariants(&self) -> (Expr, Expr) {
        let rss = self.rs.diff("s");
        let tss = self.ts.diff("s");
        let om = self.one_minus_rsts();
        let d_rsts = self.rsts().diff("s");
        let k1 = 2 * rss.diff("s") * &om + 3 * &rss * &d_rsts;
        let k2 = 2 * tss.diff("s") * &om + 3 * &tss * &d_rsts;
        (k1, k2)
    }

    /// Plug z = ψ(x, y, a0..a3) into both equations and report the largest residual.
    pub fn check_solution(&self, psi: &Expr, dom: &SampleDomain, tol: f64) -> Result<Report, JetError> {
        let [rr, rt] = self.solution_residuals(psi);
        let s = dom.sample(&[rr, rt])?;
        let mut rep = Report::new();
        for (i, name) in ["solution-residual-zxx", "solution-residual-zyy"].into_iter().enumerate() {
            let mut check = Check::bound(name, s.max_abs(i), tol, s.points.len());
            if let Some(worst) = s
                .points
                .iter()
                .max_by(|a, b| a.values[i].abs().total_cmp(&b.values[i].abs()))
            {
                if !check.passed() {
                    check = check.with_witness(worst.point.clone());
                }
            }
            if s.starved() {
                check.status = Status::Inconclusive;
            }
            rep.push(check);
        }
        Ok(rep)
    }

    /// [ψ_xx − R, ψ_yy − T] with the jet variables replaced by derivatives of ψ.
    pub fn solution_residuals(&self, psi: &Expr) -> [Expr; 2] {
        let px = psi.diff("x");
        let py = psi.diff("y");
        let mut b = HashMap::new();
        b.insert("z".to_string(), psi.clone());
        b.insert("s".to_string(), px.diff("y"));
        b.insert("p".to_string(), px.clone());
        b.insert("q".to_string(), py.clone());
        [
            px.diff("x") - self.r.substitute(&b),
            py.diff("y") - self.t.substitute(&b),
        ]
    }
}

/// Exchange x↔y and p↔q.
pub fn swap(e: &Expr) -> Expr {
    e.rename(&[("x", "y"), ("y", "x"), ("p", "q"), ("q", "p")])
}

fn unit_box() -> SampleDomain {
    SampleDomain::new(&JET_COORDS.map(|c| (c, -1.0, 1.0)))
}

/// Default sample box on the jet chart with the nondegeneracy guard 1 − R_sT_s.
pub fn jet_domain(pp: &PdePair, half_width: f64) -> SampleDomain {
    SampleDomain::new(&JET_COORDS.map(|c| (c, -half_width, half_width))).guard(pp.one_minus_rsts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::expr::EvalPoint;

    fn pair(r: &str, t: &str) -> PdePair {
        PdePair::new(parse_expr(r).unwrap(), parse_expr(t).unwrap()).unwrap()
    }

    fn at(pairs: &[(&str, f64)]) -> EvalPoint {
        pairs.iter().copied().collect()
    }

    fn zero(e: &Expr, dom: &SampleDomain) -> Verdict {
        zero_test(std::slice::from_ref(e), dom).unwrap().verdict
    }

    #[test]
    fn flat_pair_total_derivatives() {
        let pp = pair("0", "0");
        let td = pp.total_derivatives();
        assert!(td.dxt.is_zero() && td.dyr.is_zero());
        let c = td.dx.components();
        assert_eq!(c[2], v("p"));
        assert!(c[3].is_zero());
        assert_eq!(c[4], v("s"));
        assert_eq!(pp.dx(&v("z")), v("p"));
        assert_eq!(pp.dy(&v("p")), v("s"));
    }

    #[test]
    fn hand_solved_implicit_pair() {
        let pp = pair("p*q + s^2", "0");
        let td = pp.total_derivatives();
        let dom = jet_domain(&pp, 1.0);
        assert_eq!(zero(&td.dxt, &dom), Verdict::Zero);
        assert_eq!(zero(&(&td.dyr - v("s") * v("q")), &dom), Verdict::Zero);
        for rel in pp.defining_relations() {
            assert_eq!(zero(&rel, &dom), Verdict::Zero);
        }
        assert!(pp.commutator_residual(&dom).unwrap().all_pass());
    }

    #[test]
    fn degenerate_pair_is_rejected() {
        let r = parse_expr("s").unwrap();
        assert_eq!(PdePair::new(r.clone(), r).unwrap_err(), JetError::Degenerate);
        assert!(matches!(
            PdePair::new(parse_expr("w").unwrap(), Expr::zero()),
            Err(JetError::ForeignVariable(_))
        ));
    }

    #[test]
    fn integrability() {
        // z_xx = z, z_yy = 0 is integrable: z = A(y)e^x + B(y)e^-x, A and B linear.
        let pp = pair("z", "0");
        let dom = jet_domain(&pp, 1.0);
        assert_eq!(zero(&pp.integrability_residual(), &dom), Verdict::Zero);
        // With T = z^2 the residual is 2p^2 + z^2.
        let pp = pair("z", "z^2");
        let res = pp.integrability_residual();
        let z = zero_test(std::slice::from_ref(&res), &dom).unwrap();
        assert_eq!(z.verdict, Verdict::Nonzero);
        assert!(z.witness.is_some());
        assert_eq!(zero(&(res - parse_expr("2*p^2 + z^2").unwrap()), &dom), Verdict::Zero);
    }

    #[test]
    fn j1_for_ps() {
        let pp = pair("p*s", "0");
        let (j1, j2) = pp.point_metricity_invariants();
        let pt = at(&[("x", 0.3), ("y", 0.1), ("z", 0.2), ("p", 1.0), ("q", 0.4), ("s", 1.0)]);
        assert!((j1.evaluate(&pt).unwrap() - 2.0).abs() < 1e-12);
        let dom = jet_domain(&pp, 1.0);
        assert_eq!(zero(&(j1 - 2 * v("p") * v("s")), &dom), Verdict::Zero);
        assert_eq!(zero(&j2, &dom), Verdict::Zero);
    }

    #[test]
    fn functions_of_s_alone() {
        let pp = pair("s^3", "s");
        let td = pp.total_derivatives();
        assert!(td.dxt.is_zero() && td.dyr.is_zero());
        let dom = jet_domain(&pp, 0.4);
        let f = parse_expr("sin(s) + s^5").unwrap();
        assert_eq!(zero(&pp.dx(&f), &dom), Verdict::Zero);
        let (j1, j2) = pp.point_metricity_invariants();
        assert_eq!(zero_test(&[j1, j2], &dom).unwrap().verdict, Verdict::Zero);
    }

    #[test]
    fn torsion_and_contact_values() {
        let pp = pair("s^2", "0");
        let (k1, k2) = pp.torsion_obstructions();
        let pt = at(&[("s", 0.7)]);
        assert_eq!(k1.evaluate(&pt).unwrap(), 0.0);
        assert_eq!(k2.evaluate(&pt).unwrap(), 8.0);
        assert!(pp.contact_weyl_invariants().0.evaluate(&pt).unwrap().abs() < 1e-15);
        let (k1ct, _) = pair("s^3", "0").contact_weyl_invariants();
        assert_eq!(k1ct.evaluate(&pt).unwrap(), 12.0);
        let (a, b) = pair("2*s + p", "3*s").torsion_obstructions();
        let dom = SampleDomain::new(&[("s", -1.0, 1.0), ("p", -1.0, 1.0)]);
        assert_eq!(zero_test(&[a, b], &dom).unwrap().verdict, Verdict::Zero);
    }

    #[test]
    fn bilinear_solution_of_flat_pair() {
        let pp = pair("0", "0");
        let dom = SampleDomain::new(&[
            ("x", -1.0, 1.0),
            ("y", -1.0, 1.0),
            ("a0", -1.0, 1.0),
            ("a1", -1.0, 1.0),
            ("a2", -1.0, 1.0),
            ("a3", -1.0, 1.0),
        ]);
        let psi = parse_expr("a0 + a1*x + a2*y + a3*x*y").unwrap();
        assert!(pp.check_solution(&psi, &dom, 1e-12).unwrap().all_pass());
        let rep = pp.check_solution(&parse_expr("x^2").unwrap(), &dom, 1e-12).unwrap();
        let c = rep.get("solution-residual-zxx").unwrap();
        assert_eq!(c.status, Status::Fail);
        assert_eq!(c.residual, Some(2.0));
        assert!(c.witness.is_some());
    }
}
