//! Invariants of para-CR structures coming from ODEs: the (1,1,2) relative
//! invariant I and its reduction to a third-order ODE, the (1,1,1) J/K
//! numerators, and solution checks.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::expr::sample::{zero_test, SampleDomain, Verdict, ZeroTest};
use crate::expr::{parse_expr, EvalError, EvalPoint, Expr, Program};
use crate::par::{self, Exec};
use crate::report::{Check, Report, Status};

pub const COORDS_112: [&str; 4] = ["x", "y", "a1", "a2"];
pub const COORDS_111: [&str; 3] = ["x", "y", "a1"];

/// Newton/bisection stops once |residual| falls below this.
pub const ROOT_TOL: f64 = 1e-12;
/// Smallest admissible |∂p/∂a1| or |∂y2/∂a2| at a solve point.
pub const PIVOT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("variable {0} is not a coordinate of this datum")]
    ForeignVariable(String),
    #[error("p does not depend on a1")]
    NoA1Dependence,
    #[error("root finder for {0} did not converge")]
    Divergence(&'static str),
    #[error("pivot {which} = {value:e} is below {PIVOT_FLOOR:e}")]
    Degenerate { which: &'static str, value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn check_vars(e: &Expr, allowed: &[&str]) -> Result<(), OdeError> {
    match e.free_vars().into_iter().find(|v| !allowed.contains(&v.as_str())) {
        Some(v) => Err(OdeError::ForeignVariable(v)),
        None => Ok(()),
    }
}

fn depends_on_a1(p: &Expr, coords: &[&str]) -> Result<bool, OdeError> {
    let dom = SampleDomain::new(&coords.iter().map(|c| (*c, -1.0, 1.0)).collect::<Vec<_>>());
    Ok(zero_test(&[p.diff("a1")], &dom)?.verdict != Verdict::Zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Generic,
    Degenerate,
    Mixed,
}

/// λ = dy − p(x, y, a1, a2) dx.
#[derive(Debug, Clone)]
pub struct Datum112 {
    p: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetPoint3 {
    pub x: f64,
    pub y: f64,
    pub y1: f64,
    pub y2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub f: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Datum112 {
    pub fn new(p: Expr) -> Result<Datum112, OdeError> {
        check_vars(&p, &COORDS_112)?;
        if !depends_on_a1(&p, &COORDS_112)? {
            return Err(OdeError::NoA1Dependence);
        }
        Ok(Datum112 { p })
    }

    pub fn p(&self) -> &Expr {
        &self.p
    }

    /// I = p_1(p_x2 + p p_y2) − p_2(p_x1 + p p_y1).
    pub fn invariant_i(&self) -> Expr {
        let p = &self.p;
        let (p1, p2) = (p.diff("a1"), p.diff("a2"));
        let d = |f: &Expr| f.diff("x") + p * f.diff("y");
        &p1 * d(&p2) - &p2 * d(&p1)
    }

    /// Generic if I is nonzero at every accepted sample, degenerate if it is
    /// semantically zero, mixed otherwise.
    pub fn classify(&self, dom: &SampleDomain) -> Result<(Expr, Branch, ZeroTest), OdeError> {
        let i = self.invariant_i();
        let z = zero_test(std::slice::from_ref(&i), dom)?;
        let branch = match z.verdict {
            Verdict::Zero => Branch::Degenerate,
            _ => {
                let s = dom.sample(std::slice::from_ref(&i))?;
                if s.points.iter().all(|pt| pt.values[0].abs() > dom.tol_zero) {
                    Branch::Generic
                } else {
                    Branch::Mixed
                }
            }
        };
        Ok((i, branch, z))
    }

    /// y2 and y3 along a fixed solution, as functions of (x, y, a1, a2).
    fn prolongation(&self) -> (Expr, Expr) {
        let p = &self.p;
        let q = p.diff("x") + p * p.diff("y");
        let r = q.diff("x") + p * q.diff("y");
        (q, r)
    }

    pub fn reducer(&self) -> Reducer {
        let (q, r) = self.prolongation();
        let p = &self.p;
        let exprs = [
            p.clone(),
            p.diff("a1"),
            p.diff("a2"),
            q.clone(),
            q.diff("a1"),
            q.diff("a2"),
            r,
        ];
        Reducer {
            prog: Program::compile(&exprs),
        }
    }

    /// Value of F in the point-equivalent ODE y''' = F(x, y, y', y'') at `pt`.
    pub fn reduce_to_third_order(&self, pt: JetPoint3, a2_seed: f64) -> Result<Reduction, OdeError> {
        self.reducer().reduce(pt, a2_seed)
    }
}

/// Compiled evaluator for [`Datum112::reduce_to_third_order`].
pub struct Reducer {
    prog: Program,
}

struct Fiber {
    p: f64,
    p1: f64,
    p2: f64,
    q: f64,
    q1: f64,
    q2: f64,
    r: f64,
}

impl Reducer {
    fn fiber(&self, x: f64, y: f64, a1: f64, a2: f64) -> Result<Fiber, OdeError> {
        let pt = EvalPoint::new().with("x", x).with("y", y).with("a1", a1).with("a2", a2);
        let v = self.prog.run_point(&pt)?.outputs;
        Ok(Fiber {
            p: v[0],
            p1: v[1],
            p2: v[2],
            q: v[3],
            q1: v[4],
            q2: v[5],
            r: v[6],
        })
    }

    /// a1 with p(x, y, a1, a2) = y1.
    fn solve_a1(&self, x: f64, y: f64, y1: f64, a2: f64, seed: f64) -> Result<(f64, Fiber), OdeError> {
        let a1 = newton(
            |a1| {
                let f = self.fiber(x, y, a1, a2)?;
                if f.p1.abs() < PIVOT_FLOOR {
                    return Err(OdeError::Degenerate { which: "p_1", value: f.p1 });
                }
                Ok((f.p - y1, f.p1))
            },
            seed,
            "a1",
        )?;
        Ok((a1, self.fiber(x, y, a1, a2)?))
    }

    pub fn reduce(&self, pt: JetPoint3, a2_seed: f64) -> Result<Reduction, OdeError> {
        let JetPoint3 { x, y, y1, y2 } = pt;
        let mut a1 = 0.0;
        let a2 = newton(
            |a2| {
                let (s, f) = self.solve_a1(x, y, y1, a2, a1)?;
                a1 = s;
                // d/da2 of q along the fiber p = y1.
                let slope = f.q2 - f.q1 * f.p2 / f.p1;
                if slope.abs() < PIVOT_FLOOR {
                    return Err(OdeError::Degenerate { which: "dy2/da2", value: slope });
                }
                Ok((f.q - y2, slope))
            },
            a2_seed,
            "a2",
        )?;
        let (a1, f) = self.solve_a1(x, y, y1, a2, a1)?;
        Ok(Reduction { f: f.r, a1, a2 })
    }
}

/// Safeguarded Newton: full steps, halved until |f| decreases.
fn newton(
    mut f: impl FnMut(f64) -> Result<(f64, f64), OdeError>,
    seed: f64,
    name: &'static str,
) -> Result<f64, OdeError> {
    let mut x = seed;
    let (mut fx, mut dfx) = f(x)?;
    for _ in 0..100 {
        if fx.abs() < ROOT_TOL {
            return Ok(x);
        }
        let step = fx / dfx;
        let mut t = 1.0;
        loop {
            let cand = x - t * step;
            match f(cand) {
                Ok((fc, dfc)) if fc.is_finite() && fc.abs() < fx.abs() => {
                    x = cand;
                    fx = fc;
                    dfx = dfc;
                    break;
                }
                _ => {
                    t *= 0.5;
                    if t < 1e-12 {
                        return if fx.abs() < 1e3 * ROOT_TOL { Ok(x) } else { Err(OdeError::Divergence(name)) };
                    }
                }
            }
        }
    }
    if fx.abs() < ROOT_TOL {
        Ok(x)
    } else {
        Err(OdeError::Divergence(name))
    }
}

/// Bisection on a bracket with a sign change, for callers that have one.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < ROOT_TOL || hi - lo < 1e-15 {
            return Some(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// λ = dy − p(x, y, a1) dx, i.e. the second-order ODE whose solutions have slope p.
#[derive(Debug, Clone)]
pub struct Datum111 {
    p: Expr,
}

// Numerators of J and K with f = h11 = 1, in the notation p_{xy1} -> pxy1.
const J_NUMERATOR: &str = concat!(
    "-15*p11^3*px1 + 10*p1*p11*p111*px1 + 15*p1*p11^2*px11 - 4*p1^2*p111*px11",
    " + 12*p1^2*p11^2*py1 - 15*p*p11^3*py1 - 4*p1^3*p111*py1 + 10*p*p1*p11*p111*py1",
    " - 12*p1^3*p11*py11 + 15*p*p1*p11^2*py11 - 4*p*p1^2*p111*py11 - 6*p1^2*p11*px111",
    " + 4*p1^2*(p1^2 - (3/2)*p*p11)*py111 - p1^2*(px1 + p*py1)*p1111 + p1^3*(px1111 + p*py1111)",
);

const K_NUMERATOR: &str = concat!(
    "-15*p11*px1^3+15*p1*px1^2*px11+10*p1*p11*px1*pxx1-4*p1^2*px11*pxx1-6*p1^2*px1*pxx11",
    "-p1^2*p11*pxxx1+p1^3*pxxx11-2*p1^4*pxxy1-3*p*p1^2*p11*pxxy1+3*p*p1^3*pxxy11",
    "-p1^2*p11*px1*pxy+p1^3*px11*pxy-3*p1^2*p11*px*pxy1+6*p1^3*px1*pxy1+20*p*p1*p11*px1*pxy1",
    "-8*p*p1^2*px11*pxy1+3*p1^3*px*pxy11-12*p*p1^2*px1*pxy11+2*p1^5*pxyy-4*p*p1^4*pxyy1",
    "-3*p^2*p1^2*p11*pxyy1+3*p^2*p1^3*pxyy11+10*p1*p11*px1^2*py-10*p1^2*px1*px11*py",
    "-3*p1^2*p11*pxx1*py+3*p1^3*pxx11*py-6*p1^4*pxy1*py-9*p*p1^2*p11*pxy1*py",
    "+9*p*p1^3*pxy11*py-2*p1^2*p11*px1*py^2+2*p1^3*px11*py^2+10*p1*p11*px*px1*py1",
    "-6*p1^2*px1^2*py1-45*p*p11*px1^2*py1-4*p1^2*px*px11*py1+30*p*p1*px1*px11*py1",
    "-p1^2*p11*pxx*py1+2*p1^3*pxx1*py1+10*p*p1*p11*pxx1*py1-6*p*p1^2*pxx11*py1-2*p1^4*pxy*py1",
    "-3*p*p1^2*p11*pxy*py1+10*p*p1^3*pxy1*py1+20*p^2*p1*p11*pxy1*py1-12*p^2*p1^2*pxy11*py1",
    "-4*p1^2*p11*px*py*py1+8*p1^3*px1*py*py1+30*p*p1*p11*px1*py*py1-14*p*p1^2*px11*py*py1",
    "-4*p1^4*py^2*py1-6*p*p1^2*p11*py^2*py1+2*p1^3*px*py1^2+10*p*p1*p11*px*py1^2",
    "-12*p*p1^2*px1*py1^2-45*p^2*p11*px1*py1^2+15*p^2*p1*px11*py1^2+10*p*p1^3*py*py1^2",
    "+20*p^2*p1*p11*py*py1^2-6*p^2*p1^2*py1^3-15*p^3*p11*py1^3-6*p1^2*px*px1*py11",
    "+15*p*p1*px1^2*py11+p1^3*pxx*py11-4*p*p1^2*pxx1*py11+3*p*p1^3*pxy*py11",
    "-8*p^2*p1^2*pxy1*py11+4*p1^3*px*py*py11-16*p*p1^2*px1*py*py11+6*p*p1^3*py^2*py11",
    "-10*p*p1^2*px*py1*py11+30*p^2*p1*px1*py1*py11-20*p^2*p1^2*py*py1*py11",
    "+15*p^3*p1*py1^2*py11-2*p1^4*px1*pyy-p*p1^2*p11*px1*pyy+p*p1^3*px11*pyy+4*p1^5*py*pyy",
    "-4*p*p1^4*py1*pyy-2*p^2*p1^2*p11*py1*pyy+2*p^2*p1^3*py11*pyy-2*p1^4*px*pyy1",
    "-3*p*p1^2*p11*px*pyy1+6*p*p1^3*px1*pyy1+10*p^2*p1*p11*px1*pyy1-4*p^2*p1^2*px11*pyy1",
    "-8*p*p1^4*py*pyy1-6*p^2*p1^2*p11*py*pyy1+8*p^2*p1^3*py1*pyy1+10*p^3*p1*p11*py1*pyy1",
    "-4*p^3*p1^2*py11*pyy1+3*p*p1^3*px*pyy11-6*p^2*p1^2*px1*pyy11+6*p^2*p1^3*py*pyy11",
    "-6*p^3*p1^2*py1*pyy11+2*p*p1^5*pyyy-2*p^2*p1^4*pyyy1-p^3*p1^2*p11*pyyy1+p^3*p1^3*pyyy11",
);

/// Decode `p`, `px1`, `pyy11`, ... into derivative orders (x, y, a1).
fn derivative_orders(name: &str) -> Option<(usize, usize, usize)> {
    let rest = name.strip_prefix('p')?;
    let mut n = (0, 0, 0);
    for c in rest.chars() {
        match c {
            'x' => n.0 += 1,
            'y' => n.1 += 1,
            '1' => n.2 += 1,
            _ => return None,
        }
    }
    Some(n)
}

/// Expand a polynomial in derivative names of p into an expression in p.
fn expand(template: &str, p: &Expr) -> Expr {
    let poly = parse_expr(template).expect("built-in polynomial parses");
    let mut cache: HashMap<(usize, usize, usize), Expr> = HashMap::new();
    let mut bind = HashMap::new();
    for name in poly.free_vars() {
        let (nx, ny, n1) = derivative_orders(&name).expect("derivative name");
        let d = cache
            .entry((nx, ny, n1))
            .or_insert_with(|| {
                let mut d = p.clone();
                for (v, k) in [("x", nx), ("y", ny), ("a1", n1)] {
                    for _ in 0..k {
                        d = d.diff(v);
                    }
                }
                d
            })
            .clone();
        bind.insert(name, d);
    }
    poly.substitute(&bind)
}

impl Datum111 {
    pub fn new(p: Expr) -> Result<Datum111, OdeError> {
        check_vars(&p, &COORDS_111)?;
        if !depends_on_a1(&p, &COORDS_111)? {
            return Err(OdeError::NoA1Dependence);
        }
        Ok(Datum111 { p })
    }

    pub fn p(&self) -> &Expr {
        &self.p
    }

    /// (6p_1⁴·J, 6p_1⁴·K) with the gauge factors f = h11 = 1. Only their
    /// vanishing is invariant.
    pub fn second_order_invariants(&self) -> (Expr, Expr) {
        (expand(J_NUMERATOR, &self.p), expand(K_NUMERATOR, &self.p))
    }

    /// Zero tests of Jnum and Knum.
    pub fn invariant_report(&self, dom: &SampleDomain) -> Result<Report, OdeError> {
        let (j, k) = self.second_order_invariants();
        let mut rep = Report::new();
        for (name, e) in [("Jnum-Proposition-psss", j), ("Knum-Proposition-psss", k)] {
            let z = zero_test(&[e], dom)?;
            let status = match z.verdict {
                Verdict::Inconclusive => Status::Inconclusive,
                _ => Status::Pass,
            };
            let mut c = Check::new(name, status);
            c.residual = Some(z.max_abs);
            c.tolerance = Some(dom.tol_zero);
            c.samples = z.accepted;
            c.witness = z.witness.map(|w| w.point);
            let vanishes = z.verdict == Verdict::Zero;
            rep.push(c.with_value("vanishes", if vanishes { 1.0 } else { 0.0 }));
        }
        Ok(rep)
    }
}

/// ψ_xxx − F(x, ψ, ψ_x, ψ_xx) for F over (x, y, y1, y2) and ψ over (x, a0, a1, a2).
pub fn ode_solution_residual(f: &Expr, psi: &Expr) -> Expr {
    let p1 = psi.diff("x");
    let p2 = p1.diff("x");
    let p3 = p2.diff("x");
    let mut b = HashMap::new();
    b.insert("y".to_string(), psi.clone());
    b.insert("y1".to_string(), p1);
    b.insert("y2".to_string(), p2);
    p3 - f.substitute(&b)
}

pub fn check_solution_ode(f: &Expr, psi: &Expr, dom: &SampleDomain, tol: f64) -> Result<Report, OdeError> {
    let res = ode_solution_residual(f, psi);
    let s = dom.sample(&[res])?;
    let mut c = Check::bound("ode-solution-residual", s.max_abs(0), tol, s.points.len());
    if !c.passed() {
        if let Some(w) = s.points.iter().max_by(|a, b| a.values[0].abs().total_cmp(&b.values[0].abs())) {
            c = c.with_witness(w.point.clone());
        }
    }
    if s.starved() {
        c.status = Status::Inconclusive;
    }
    let mut rep = Report::new();
    rep.push(c);
    Ok(rep)
}

/// Reduce at many jet points and compare with a closed-form F, relative error.
pub fn compare_reduction(
    d: &Datum112,
    f: &Expr,
    pts: &[JetPoint3],
    a2_seed: f64,
    tol: f64,
    exec: Exec,
) -> Result<Check, OdeError> {
    let red = d.reducer();
    let fprog = Program::compile(std::slice::from_ref(f));
    let errs = par::map(exec, pts, |pt| -> Result<f64, OdeError> {
        let got = red.reduce(*pt, a2_seed)?.f;
        let ep = EvalPoint::new().with("x", pt.x).with("y", pt.y).with("y1", pt.y1).with("y2", pt.y2);
        let want = fprog.run_point(&ep)?.outputs[0];
        Ok((got - want).abs() / want.abs().max(1.0))
    });
    let mut worst: f64 = 0.0;
    for e in errs {
        worst = worst.max(e?);
    }
    Ok(Check::bound("reduced-F-vs-closed-form", worst, tol, pts.len()))
}
