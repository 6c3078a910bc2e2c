//! The family R = r(s), T = t(s): Z-invariants, conformal flatness, the
//! Ricci-flat gauge h(s) and curvature verification of the slice metric
//! e^{2h}(2(1 − r't') dz ds + t' dp² − 2 dp dq + r' dq²).

use std::sync::Arc;

use thiserror::Error;

use crate::curvature::{
    curvature_field, Conformal, CurvError, CurvatureAt, Metric4, ScalarField, ScalarJet, N, T4,
};
use crate::expr::sample::SampleDomain;
use crate::expr::{EvalError, Expr, Program};
use crate::jet::{JetError, PdePair};
use crate::par::Exec;
use crate::report::{Check, Report, Status};

/// Slice chart order.
pub const SLICE_COORDS: [&str; N] = ["z", "p", "q", "s"];
/// |1 − r't'| must stay above this on the working interval.
pub const GUARD_FLOOR: f64 = 1e-4;
/// |h'| beyond this is treated as blow-up.
pub const BLOWUP: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PpWaveError {
    #[error("r and t may depend on s only, found {0}")]
    ForeignVariable(String),
    #[error("interval [{0}, {1}] is empty")]
    EmptyRange(f64, f64),
    #[error("|1 - r't'| = {value:e} at s = {at} is below the guard")]
    Guard { at: f64, value: f64 },
    #[error("gauge solution blows up near s = {0}")]
    BlowUp(f64),
    #[error("step must be positive")]
    BadStep,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Curv(#[from] CurvError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// Derivatives of r, t at one s.
#[derive(Debug, Clone, Copy)]
struct Derivs {
    r1: f64,
    r2: f64,
    r3: f64,
    t1: f64,
    t2: f64,
    t3: f64,
}

impl Derivs {
    fn guard(&self) -> f64 {
        1.0 - self.r1 * self.t1
    }

    /// Right-hand side of the gauge equation h'' = F(s, h').
    fn gauge_rhs(&self, hp: f64) -> f64 {
        let Derivs { r1, r2, r3, t1, t2, t3 } = *self;
        let g = self.guard();
        let rt_prime = r2 * t1 + r1 * t2;
        let forcing = (2.0 * (r3 * t1 + t3 * r1) * g
            + 2.0 * r2 * t2
            + 4.0 * r1 * t1 * r2 * t2
            + 3.0 * t1 * t1 * r2 * r2
            + 3.0 * r1 * r1 * t2 * t2)
            / (8.0 * g * g);
        hp * hp - rt_prime / g * hp + forcing
    }
}

#[derive(Debug, Clone)]
struct DerivProgram(Arc<Program>);

impl DerivProgram {
    fn at(&self, s: f64) -> Result<Derivs, EvalError> {
        let v = self.0.run(&[s])?.outputs;
        Ok(Derivs {
            r1: v[0],
            r2: v[1],
            r3: v[2],
            t1: v[3],
            t2: v[4],
            t3: v[5],
        })
    }
}

#[derive(Debug, Clone)]
pub struct PpWaveFamily {
    r: Expr,
    t: Expr,
    range: (f64, f64),
    derivs: DerivProgram,
}

fn nth(e: &Expr, n: usize) -> Expr {
    (0..n).fold(e.clone(), |d, _| d.diff("s"))
}

impl PpWaveFamily {
    /// Checks that r, t are functions of s and that the guard holds on a
    /// 1001-point grid of `range`.
    pub fn new(r: Expr, t: Expr, range: (f64, f64)) -> Result<PpWaveFamily, PpWaveError> {
        for e in [&r, &t] {
            if let Some(v) = e.free_vars().into_iter().find(|v| v != "s") {
                return Err(PpWaveError::ForeignVariable(v));
            }
        }
        if !(range.0 < range.1) {
            return Err(PpWaveError::EmptyRange(range.0, range.1));
        }
        let mut exprs: Vec<Expr> = (1..=3).map(|n| nth(&r, n)).collect();
        exprs.extend((1..=3).map(|n| nth(&t, n)));
        // Pad with s so that the program always takes exactly one input.
        exprs.push(Expr::var("s"));
        let derivs = DerivProgram(Arc::new(Program::compile(&exprs)));
        let fam = PpWaveFamily { r, t, range, derivs };
        for i in 0..=1000 {
            let s = range.0 + (range.1 - range.0) * i as f64 / 1000.0;
            let g = fam.derivs.at(s)?.guard();
            if !(g.abs() > GUARD_FLOOR) {
                return Err(PpWaveError::Guard { at: s, value: g });
            }
        }
        Ok(fam)
    }

    pub fn r(&self) -> &Expr {
        &self.r
    }

    pub fn t(&self) -> &Expr {
        &self.t
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    /// The PDE pair z_xx = r(s), z_yy = t(s).
    pub fn pair(&self) -> Result<PdePair, PpWaveError> {
        Ok(PdePair::new(self.r.clone(), self.t.clone())?)
    }

    fn one_minus_rt(&self) -> Expr {
        1 - self.r.diff("s") * self.t.diff("s")
    }

    /// (Z1, Z2).
    pub fn z_invariants(&self) -> (Expr, Expr) {
        let (r1, t1) = (nth(&self.r, 1), nth(&self.t, 1));
        let rt_prime = (&t1 * &r1).diff("s");
        let g = self.one_minus_rt();
        let den = 4 * g.powi(2);
        let z = |f: &Expr| (2 * (&r1 * &t1 - 1) * nth(f, 3) - 3 * nth(f, 2) * &rt_prime) / &den;
        (z(&self.r), z(&self.t))
    }

    /// r''' + 3r''(r't')'/(2(1 − r't')) and the same with t.
    pub fn conformal_flatness_residuals(&self) -> (Expr, Expr) {
        let rt_prime = (nth(&self.r, 1) * nth(&self.t, 1)).diff("s");
        let g = self.one_minus_rt();
        let res = |f: &Expr| nth(f, 3) + 3 * nth(f, 2) * &rt_prime / (2 * &g);
        (res(&self.r), res(&self.t))
    }

    /// The ungauged slice metric on (z, p, q, s).
    pub fn slice_metric(&self) -> Metric4 {
        let (r1, t1) = (nth(&self.r, 1), nth(&self.t, 1));
        let g = self.one_minus_rt();
        Metric4::from_fn(SLICE_COORDS, |i, j| match (i, j) {
            (0, 3) => g.clone(),
            (1, 1) => t1.clone(),
            (1, 2) => Expr::int(-1),
            (2, 2) => r1.clone(),
            _ => Expr::zero(),
        })
    }

    /// Classical RK4 for h'' = F(s, h') from (s0, h0, hp0) across `range`
    /// with the given step (both directions when s0 is interior).
    pub fn ricci_flat_gauge(
        &self,
        s0: f64,
        h0: f64,
        hp0: f64,
        range: (f64, f64),
        step: f64,
    ) -> Result<GaugeSolution, PpWaveError> {
        if !(step > 0.0) {
            return Err(PpWaveError::BadStep);
        }
        if !(range.0 <= s0 && s0 <= range.1 && range.0 < range.1) {
            return Err(PpWaveError::EmptyRange(range.0, range.1));
        }
        let back = self.integrate(s0, h0, hp0, range.0, step)?;
        let fwd = self.integrate(s0, h0, hp0, range.1, step)?;
        let mut nodes: Vec<[f64; 3]> = back.into_iter().rev().collect();
        nodes.pop();
        nodes.extend(fwd);
        Ok(GaugeSolution {
            s: nodes.iter().map(|n| n[0]).collect(),
            h: nodes.iter().map(|n| n[1]).collect(),
            hp: nodes.iter().map(|n| n[2]).collect(),
            step,
            s0,
            h0,
            hp0,
            derivs: self.derivs.clone(),
        })
    }

    /// Nodes from s0 to `end`, the last step shortened to land on `end`.
    fn integrate(&self, s0: f64, h0: f64, hp0: f64, end: f64, step: f64) -> Result<Vec<[f64; 3]>, PpWaveError> {
        let dir = if end >= s0 { 1.0 } else { -1.0 };
        let n = ((end - s0).abs() / step - 1e-9).ceil().max(0.0) as usize;
        let f = |s: f64, y: [f64; 2]| -> Result<[f64; 2], PpWaveError> {
            let d = self.derivs.at(s)?;
            if !(d.guard().abs() > GUARD_FLOOR) {
                return Err(PpWaveError::Guard { at: s, value: d.guard() });
            }
            Ok([y[1], d.gauge_rhs(y[1])])
        };
        let mut out = vec![[s0, h0, hp0]];
        let (mut s, mut y) = (s0, [h0, hp0]);
        for i in 0..n {
            let next = if i + 1 == n { end } else { s0 + dir * step * (i + 1) as f64 };
            let h = next - s;
            let k1 = f(s, y)?;
            let k2 = f(s + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]])?;
            let k3 = f(s + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]])?;
            let k4 = f(next, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
            for c in 0..2 {
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            s = next;
            if !(y[1].abs() <= BLOWUP) {
                return Err(PpWaveError::BlowUp(s));
            }
            out.push([s, y[0], y[1]]);
        }
        Ok(out)
    }
}

/// RK4 grid of (s, h, h'); h'' is recovered from the equation itself.
#[derive(Debug, Clone)]
pub struct GaugeSolution {
    pub s: Vec<f64>,
    pub h: Vec<f64>,
    pub hp: Vec<f64>,
    pub step: f64,
    pub s0: f64,
    pub h0: f64,
    pub hp0: f64,
    derivs: DerivProgram,
}

impl GaugeSolution {
    pub fn range(&self) -> (f64, f64) {
        (self.s[0], *self.s.last().expect("grid is nonempty"))
    }

    /// (h, h', h'') at s by cubic Hermite interpolation of h with node slopes h'.
    pub fn eval(&self, s: f64) -> Result<(f64, f64, f64), CurvError> {
        let (lo, hi) = self.range();
        if !(lo <= s && s <= hi) {
            return Err(CurvError::OutOfRange);
        }
        let i = match self.s.partition_point(|&x| x <= s) {
            0 => 0,
            k if k >= self.s.len() => self.s.len() - 2,
            k => k - 1,
        };
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let w = s1 - s0;
        let u = (s - s0) / w;
        let (h0, h1, m0, m1) = (self.h[i], self.h[i + 1], self.hp[i] * w, self.hp[i + 1] * w);
        let (u2, u3) = (u * u, u * u * u);
        let h = (2.0 * u3 - 3.0 * u2 + 1.0) * h0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * h1
            + (u3 - u2) * m1;
        let hp = ((6.0 * u2 - 6.0 * u) * h0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * h1
            + (3.0 * u2 - 2.0 * u) * m1)
            / w;
        let hpp = self.derivs.at(s)?.gauge_rhs(hp);
        Ok((h, hp, hpp))
    }

    pub fn end_value(&self) -> f64 {
        *self.h.last().expect("grid is nonempty")
    }
}

impl ScalarField for GaugeSolution {
    fn jet(&self, x: &[f64; N]) -> Result<ScalarJet, CurvError> {
        let (h, hp, hpp) = self.eval(x[3])?;
        let mut dd = [[0.0; N]; N];
        dd[3][3] = hpp;
        Ok((h, [0.0, 0.0, 0.0, hp], dd))
    }
}

/// h ≡ 0.
struct NoGauge;

impl ScalarField for NoGauge {
    fn jet(&self, _: &[f64; N]) -> Result<ScalarJet, CurvError> {
        Ok((0.0, [0.0; N], [[0.0; N]; N]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpWaveTolerances {
    pub ricci: f64,
    pub weyl_relative: f64,
    pub type_n: f64,
    pub nabla: f64,
    pub flat_weyl: f64,
}

impl Default for PpWaveTolerances {
    fn default() -> Self {
        PpWaveTolerances {
            ricci: 1e-6,
            weyl_relative: 1e-6,
            type_n: 1e-7,
            nabla: 1e-6,
            flat_weyl: 1e-7,
        }
    }
}

/// Frame (ω1, ω2, ω3, ω4) = (dq, ds, dz, dp) as slice-coordinate indices.
const FRAME: [usize; 4] = [2, 3, 0, 1];

/// Mixed Weyl tensor C^a_{bcd} predicted by the normal conformal curvature,
/// in slice coordinates, from Z1, Z2 and r', t' at one point.
pub fn predicted_weyl(z1: f64, z2: f64, r1: f64, t1: f64) -> T4 {
    let d = 2.0 * (1.0 - r1 * t1);
    // Entries (i, j) of the 2-form coefficients, frame indices from 1.
    let on_24 = [
        (1, 2, z2),
        (3, 1, (-z2 * r1 - z1 * t1) / d),
        (3, 4, (2.0 * z2 + z1 * t1 * t1 - z2 * r1 * t1) / d),
        (4, 2, 0.5 * (z2 * r1 - z1 * t1)),
    ];
    let on_12 = [
        (1, 2, 0.5 * (z2 * r1 - z1 * t1)),
        (3, 1, (z1 * r1 * t1 - 2.0 * z1 - z2 * r1 * r1) / d),
        (3, 4, (z2 * r1 + z1 * t1) / d),
        (4, 2, -z1),
    ];
    let mut c = [[[[0.0; N]; N]; N]; N];
    for (entries, (k, l)) in [(on_24, (2, 4)), (on_12, (1, 2))] {
        let (k, l) = (FRAME[k - 1], FRAME[l - 1]);
        for (i, j, v) in entries {
            let (i, j) = (FRAME[i - 1], FRAME[j - 1]);
            c[i][j][k][l] += v;
            c[i][j][l][k] -= v;
        }
    }
    c
}

/// Sample points of the slice chart with s inside `range`.
pub fn slice_points(range: (f64, f64), count: usize, seed: u64) -> Vec<[f64; N]> {
    SampleDomain::new(&[("z", -1.0, 1.0), ("p", -1.0, 1.0), ("q", -1.0, 1.0), ("s", range.0, range.1)])
        .seed(seed)
        .candidates(count)
        .iter()
        .map(|p| SLICE_COORDS.map(|c| p.get(c).unwrap_or(0.0)))
        .collect()
}

/// Curvature of e^{2h} g0 at `points`, h from `gauge` or zero.
pub fn slice_curvature(
    fam: &PpWaveFamily,
    gauge: Option<&GaugeSolution>,
    points: &[[f64; N]],
    exec: Exec,
) -> Result<Vec<CurvatureAt>, PpWaveError> {
    let g0 = fam.slice_metric();
    let out = match gauge {
        Some(h) => curvature_field(&Conformal { field: &g0, phi: h }, points, exec)?,
        None => curvature_field(&Conformal { field: &g0, phi: &NoGauge }, points, exec)?,
    };
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylFit {
    /// Least-squares constant c in C ≈ c·prediction.
    pub c: f64,
    /// max |C − c·P| over max |P|.
    pub relative_error: f64,
    pub max_predicted: f64,
    pub max_weyl: f64,
}

pub fn fit_weyl_pattern(fam: &PpWaveFamily, curv: &[CurvatureAt]) -> Result<WeylFit, PpWaveError> {
    let (z1, z2) = fam.z_invariants();
    let prog = Program::compile(&[z1, z2, Expr::var("s")]);
    let mut preds = Vec::with_capacity(curv.len());
    for c in curv {
        let s = c.point[3];
        let v = prog.run(&[s])?.outputs;
        let d = fam.derivs.at(s)?;
        preds.push(predicted_weyl(v[0], v[1], d.r1, d.t1));
    }
    let flat = |t: &T4| t.iter().flatten().flatten().flatten().copied().collect::<Vec<f64>>();
    let (mut num, mut den, mut max_p, mut max_c) = (0.0, 0.0, 0.0f64, 0.0f64);
    for (c, p) in curv.iter().zip(&preds) {
        for (a, b) in flat(&c.weyl_mixed).into_iter().zip(flat(p)) {
            num += a * b;
            den += b * b;
            max_p = max_p.max(b.abs());
            max_c = max_c.max(a.abs());
        }
    }
    let c = if den > 0.0 { num / den } else { 0.0 };
    let mut worst: f64 = 0.0;
    for (cu, p) in curv.iter().zip(&preds) {
        for (a, b) in flat(&cu.weyl_mixed).into_iter().zip(flat(p)) {
            worst = worst.max((a - c * b).abs());
        }
    }
    let relative_error = if max_p > 0.0 { worst / max_p } else { f64::INFINITY };
    Ok(WeylFit {
        c,
        relative_error,
        max_predicted: max_p,
        max_weyl: max_c,
    })
}

/// Ricci, Weyl pattern, type-N and ∇∂z checks at `points`.
pub fn verify_ppwave(
    fam: &PpWaveFamily,
    gauge: Option<&GaugeSolution>,
    points: &[[f64; N]],
    tol: &PpWaveTolerances,
    exec: Exec,
) -> Result<Report, PpWaveError> {
    let curv = slice_curvature(fam, gauge, points, exec)?;
    let n = curv.len();
    let max_of = |f: &dyn Fn(&CurvatureAt) -> f64| curv.iter().map(f).fold(0.0, f64::max);
    let ricci = max_of(&|c| c.max_ricci());
    let weyl = max_of(&|c| c.max_weyl_mixed());
    let square = max_of(&|c| c.weyl_square.abs());
    let nabla = max_of(&|c| c.nabla_coordinate(0));

    let mut rep = Report::new();
    match gauge {
        Some(g) => rep.push(
            Check::bound("Ricci-flat-Theorem-blu", ricci, tol.ricci, n)
                .with_value("step", g.step)
                .with_value("h-at-range-end", g.end_value()),
        ),
        None => {
            let mut c = Check::new("Ricci-ungauged", Status::Pass).with_note("informational: h = 0");
            c.residual = Some(ricci);
            c.samples = n;
            rep.push(c);
        }
    }

    if weyl < tol.flat_weyl {
        let mut c = Check::bound("Weyl-vanishes-Z1-Z2-Theorem-blu1", weyl, tol.flat_weyl, n);
        let (z1, z2) = fam.z_invariants();
        let prog = Program::compile(&[z1, z2, Expr::var("s")]);
        let mut zmax: f64 = 0.0;
        for p in points {
            let v = prog.run(&[p[3]])?.outputs;
            zmax = zmax.max(v[0].abs()).max(v[1].abs());
        }
        if zmax >= tol.flat_weyl {
            c.status = Status::Fail;
            c.note = Some(format!("Weyl vanishes but max |Z| = {zmax:e}"));
        }
        rep.push(c.with_value("max-abs-Z", zmax));
    } else {
        let fit = fit_weyl_pattern(fam, &curv)?;
        let mut c = Check::bound("Weyl-pattern-Z1-Z2-Theorem-blu1", fit.relative_error, tol.weyl_relative, n)
            .with_value("fitted-constant", fit.c)
            .with_value("max-abs-prediction", fit.max_predicted)
            .with_value("max-abs-weyl", fit.max_weyl);
        if (fit.c.abs() - 1.0).abs() >= tol.weyl_relative {
            c.status = Status::Fail;
            c.note = Some(format!("fitted constant {} is not +-1", fit.c));
        }
        rep.push(c);
    }

    let mut tn = Check::bound("Weyl-square-type-N-Theorem-blu1", square, tol.type_n * weyl * weyl, n)
        .with_value("max-abs-weyl", weyl);
    if weyl < tol.flat_weyl {
        tn.status = Status::Pass;
        tn.note = Some("Weyl tensor vanishes".into());
    }
    rep.push(tn);
    rep.push(Check::bound("nabla-dz-null-direction", nabla, tol.nabla, n));
    Ok(rep)
}

/// End values of h for steps `step`, `step/2`, `step/4` and the observed order.
pub fn refinement_order(
    fam: &PpWaveFamily,
    s0: f64,
    range: (f64, f64),
    step: f64,
) -> Result<(f64, [f64; 3]), PpWaveError> {
    let mut ends = [0.0; 3];
    for (k, e) in ends.iter_mut().enumerate() {
        *e = fam.ricci_flat_gauge(s0, 0.0, 0.0, range, step / f64::powi(2.0, k as i32))?.end_value();
    }
    let order = ((ends[0] - ends[1]) / (ends[1] - ends[2])).abs().log2();
    Ok((order, ends))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::expr::sample::{zero_test, Verdict};

    fn fam(r: &str, t: &str) -> PpWaveFamily {
        PpWaveFamily::new(parse_expr(r).unwrap(), parse_expr(t).unwrap(), (-0.4, 0.4)).unwrap()
    }

    fn at(e: &Expr, s: f64) -> f64 {
        e.evaluate(&[("s", s)].into_iter().collect()).unwrap()
    }

    #[test]
    fn z_invariants_examples() {
        let (z1, z2) = fam("s^2", "0").z_invariants();
        assert_eq!((at(&z1, 0.3), at(&z2, 0.3)), (0.0, 0.0));
        let (z1, _) = fam("s^3", "0").z_invariants();
        assert!((at(&z1, 0.2) + 3.0).abs() < 1e-14);
        let (z1, z2) = fam("0", "0").z_invariants();
        assert!(z1.is_zero() && z2.is_zero());
    }

    #[test]
    fn conformal_flatness_residual_examples() {
        let (a, b) = fam("1 + 2*s", "3 - s").conformal_flatness_residuals();
        assert_eq!((at(&a, 0.1), at(&b, 0.1)), (0.0, 0.0));
        let (a, _) = fam("s^3", "s").conformal_flatness_residuals();
        assert!((at(&a, 0.0) - 6.0).abs() < 1e-14);
        let s = 0.3f64;
        let want = 6.0 + 3.0 * 6.0 * s * (6.0 * s) / (2.0 * (1.0 - 3.0 * s * s));
        assert!((at(&a, s) - want).abs() < 1e-12);
    }

    #[test]
    fn guard_is_enforced() {
        let err = PpWaveFamily::new(parse_expr("s^2").unwrap(), parse_expr("s^2").unwrap(), (0.0, 1.0)).unwrap_err();
        assert!(matches!(err, PpWaveError::Guard { .. }), "{err:?}");
        let err = PpWaveFamily::new(parse_expr("x").unwrap(), Expr::zero(), (0.0, 1.0)).unwrap_err();
        assert_eq!(err, PpWaveError::ForeignVariable("x".into()));
    }

    #[test]
    fn trivial_gauges_vanish() {
        for (r, t) in [("0", "0"), ("s^2", "0")] {
            let g = fam(r, t).ricci_flat_gauge(0.0, 0.0, 0.0, (-0.4, 0.4), 1e-2).unwrap();
            assert!(g.h.iter().chain(&g.hp).all(|v| *v == 0.0));
        }
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let (order, _) = refinement_order(&fam("s^3", "s"), 0.0, (-0.4, 0.4), 0.05).unwrap();
        assert!(order >= 3.7, "{order}");
    }

    #[test]
    fn hermite_interpolation_reproduces_nodes() {
        let g = fam("s^3", "s").ricci_flat_gauge(0.0, 0.0, 0.0, (-0.4, 0.4), 1e-2).unwrap();
        for i in [0, 17, g.s.len() - 1] {
            let (h, hp, _) = g.eval(g.s[i]).unwrap();
            assert!((h - g.h[i]).abs() < 1e-15 && (hp - g.hp[i]).abs() < 1e-12);
        }
        assert_eq!(g.eval(0.5), Err(CurvError::OutOfRange));
    }

    #[test]
    fn total_derivatives_annihilate_functions_of_s() {
        let f = fam("s^3", "s");
        let pp = f.pair().unwrap();
        let (z1, z2) = f.z_invariants();
        let dom = crate::jet::jet_domain(&pp, 0.4);
        let mut exprs = Vec::new();
        for e in [f.r(), f.t(), &z1, &z2] {
            exprs.push(pp.dx(e));
            exprs.push(pp.dy(e));
        }
        assert_eq!(zero_test(&exprs, &dom).unwrap().verdict, Verdict::Zero);
    }

    #[test]
    fn flat_family_passes_everything() {
        let f = fam("0", "0");
        let pts = slice_points(f.range(), 10, 1);
        let rep = verify_ppwave(&f, None, &pts, &PpWaveTolerances::default(), Exec::default()).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
    }

    #[test]
    fn cubic_family_weyl_pattern_and_gauge() {
        let f = fam("s^3", "s");
        let pts = slice_points(f.range(), 20, 2);
        let tol = PpWaveTolerances::default();
        let rep = verify_ppwave(&f, None, &pts, &tol, Exec::default()).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
        assert!(rep.get("Ricci-ungauged").unwrap().residual.unwrap() > 1e-3);
        let g = f.ricci_flat_gauge(0.0, 0.0, 0.0, f.range(), 1e-3).unwrap();
        let rep = verify_ppwave(&f, Some(&g), &pts, &tol, Exec::default()).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
    }

    #[test]
    fn conformally_flat_families() {
        for (r, t) in [("1 + 2*s", "3 - s"), ("sqrt(1 + s^2)", "sqrt(1 + s^2)")] {
            let f = fam(r, t);
            let pts = slice_points(f.range(), 10, 3);
            let curv = slice_curvature(&f, None, &pts, Exec::default()).unwrap();
            let w = curv.iter().map(|c| c.max_weyl()).fold(0.0, f64::max);
            assert!(w < 1e-7, "{r}, {t}: {w}");
        }
    }
}
