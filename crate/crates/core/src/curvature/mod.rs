//! Levi-Civita curvature of 4-metrics, with symbolic and numeric routes.
//!
//! Conventions used throughout:
//!
//! ```text
//! Γ^a_bc   = ½ g^ad (∂_b g_dc + ∂_c g_db − ∂_d g_bc)
//! R^a_bcd  = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
//! Ric_bd   = R^a_bad
//! C_abcd   = R_abcd − ½(g_ac Ric_bd − g_ad Ric_bc − g_bc Ric_ad + g_bd Ric_ac)
//!            + (Scal/6)(g_ac g_bd − g_ad g_bc)
//! ```
//!
//! The symbolic route differentiates Christoffel symbols as expressions; the
//! jet route evaluates the 2-jet of g and contracts numerically, which keeps
//! expression sizes bounded for large metrics.

mod degenerate;

use std::sync::OnceLock;

use nalgebra::{Matrix4, SymmetricEigen};
use thiserror::Error;

pub use degenerate::{build_metric, contact_forms, lie_factors, ContactForms, DegenerateMetric, MetricKind};

use crate::expr::{count_nodes, EvalError, EvalPoint, Expr, Program};
use crate::forms::{Chart, FormError, SymmetricForm};
use crate::par::{self, Exec};

pub const N: usize = 4;
pub type M4 = [[f64; N]; N];
pub type T3 = [[[f64; N]; N]; N];
pub type T4 = [[[[f64; N]; N]; N]; N];

/// Default symbolic node budget before switching to the jet route.
pub const NODE_BUDGET: usize = 200_000;

/// |det g| below this is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvError {
    #[error("metric is singular at the sample point")]
    Singular,
    #[error("guard of {0} vanishes identically")]
    GuardViolated(&'static str),
    #[error("symbolic curvature exceeded the node budget ({0} nodes)")]
    Budget(usize),
    #[error("point lies outside the range of the gauge solution")]
    OutOfRange,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Value, first and second partial derivatives of a metric at a point.
/// `dg[c][a][b] = ∂_c g_ab`, `ddg[c][d][a][b] = ∂_c ∂_d g_ab`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub g: M4,
    pub dg: T3,
    pub ddg: T4,
}

/// Anything that can supply the 2-jet of a metric in four coordinates.
pub trait MetricField: Sync {
    fn jet(&self, x: &[f64; N]) -> Result<MetricJet, CurvError>;

    fn value(&self, x: &[f64; N]) -> Result<M4, CurvError> {
        Ok(self.jet(x)?.g)
    }
}

/// Value, gradient and Hessian of a scalar at a point.
pub type ScalarJet = (f64, [f64; N], M4);

pub trait ScalarField: Sync {
    fn jet(&self, x: &[f64; N]) -> Result<ScalarJet, CurvError>;
}

/// Symmetric 4×4 symbolic metric on a named chart.
#[derive(Debug, Clone)]
pub struct Metric4 {
    g: SymmetricForm,
    /// Conformal exponents φ applied so far (g → e^{2φ} g).
    pub history: Vec<Expr>,
    compiled: OnceLock<Program>,
}

fn pairs() -> impl Iterator<Item = (usize, usize)> {
    (0..N).flat_map(|i| (i..N).map(move |j| (i, j)))
}

impl Metric4 {
    pub fn from_form(g: SymmetricForm) -> Metric4 {
        assert_eq!(g.chart().dim(), N, "Metric4 needs a 4-dimensional chart");
        Metric4 {
            g,
            history: Vec::new(),
            compiled: OnceLock::new(),
        }
    }

    /// Build from the upper triangle `f(i, j)`, i ≤ j.
    pub fn from_fn(coords: [&str; N], f: impl FnMut(usize, usize) -> Expr) -> Metric4 {
        Metric4::from_form(SymmetricForm::from_fn(&Chart::new(&coords), f))
    }

    pub fn chart(&self) -> &Chart {
        self.g.chart()
    }

    pub fn form(&self) -> &SymmetricForm {
        &self.g
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        self.g.entry(i, j)
    }

    /// e^{2φ} g, recording φ.
    pub fn conformal_rescale(&self, phi: &Expr) -> Metric4 {
        let f = (2 * phi).exp();
        let mut out = Metric4::from_form(self.g.scale(&f));
        out.history = self.history.clone();
        out.history.push(phi.clone());
        out
    }

    pub fn point(&self, x: &[f64; N]) -> EvalPoint {
        self.chart().names().iter().map(|n| n.as_str()).zip(x.iter().copied()).collect()
    }

    fn program(&self) -> &Program {
        self.compiled.get_or_init(|| {
            let names = self.chart().names();
            let mut out = Vec::with_capacity(150);
            for (i, j) in pairs() {
                out.push(self.g.entry(i, j).clone());
            }
            for c in 0..N {
                for (i, j) in pairs() {
                    out.push(self.g.entry(i, j).diff(&names[c]));
                }
            }
            for (c, d) in pairs() {
                for (i, j) in pairs() {
                    out.push(self.g.entry(i, j).diff(&names[c]).diff(&names[d]));
                }
            }
            Program::compile(&out)
        })
    }

    /// Symbolic Christoffel symbols and Riemann tensor, or `Budget` if the
    /// expressions grow beyond `budget` nodes.
    pub fn symbolic_curvature(&self, budget: usize) -> Result<SymbolicCurvature, CurvError> {
        let names = self.chart().names();
        let g: Vec<Vec<Expr>> = (0..N).map(|i| (0..N).map(|j| self.entry(i, j).clone()).collect()).collect();
        let ginv = symbolic_inverse(&g);
        let dg = |c: usize, a: usize, b: usize| g[a][b].diff(&names[c]);
        let mut gamma = vec![Expr::zero(); N * N * N];
        for a in 0..N {
            for b in 0..N {
                for c in b..N {
                    let terms = (0..N).filter(|&d| !ginv[a][d].is_zero()).map(|d| {
                        &ginv[a][d] * (dg(b, d, c) + dg(c, d, b) - dg(d, b, c))
                    });
                    let e = Expr::rational(1, 2) * Expr::add_all(terms);
                    gamma[idx3(a, b, c)] = e.clone();
                    gamma[idx3(a, c, b)] = e;
                }
            }
        }
        let used = count_nodes(&gamma);
        if used > budget {
            return Err(CurvError::Budget(used));
        }
        let gam = |a: usize, b: usize, c: usize| &gamma[idx3(a, b, c)];
        let mut riemann = vec![Expr::zero(); N * N * N * N];
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in (c + 1)..N {
                        let mut terms = vec![gam(a, d, b).diff(&names[c]), -gam(a, c, b).diff(&names[d])];
                        for e in 0..N {
                            terms.push(gam(a, c, e) * gam(e, d, b));
                            terms.push(-(gam(a, d, e) * gam(e, c, b)));
                        }
                        let r = Expr::add_all(terms);
                        riemann[idx4(a, b, d, c)] = -r.clone();
                        riemann[idx4(a, b, c, d)] = r;
                    }
                }
            }
            let used = count_nodes(&riemann);
            if used > budget {
                return Err(CurvError::Budget(used));
            }
        }
        Ok(SymbolicCurvature {
            coords: names.to_vec(),
            metric: g.into_iter().flatten().collect(),
            christoffel: gamma,
            riemann,
            compiled: OnceLock::new(),
        })
    }

    /// Curvature at each point by the requested route (in input order).
    pub fn curvature(&self, points: &[[f64; N]], route: Route, exec: Exec) -> Result<Vec<CurvatureAt>, CurvError> {
        match route {
            Route::Jet => curvature_field(self, points, exec),
            Route::FiniteDifference { step } => {
                let fd = FiniteDifference { field: self, step };
                curvature_field(&fd, points, exec)
            }
            Route::Symbolic { budget } => {
                let s = self.symbolic_curvature(budget)?;
                par::map(exec, points, |x| s.at(x)).into_iter().collect()
            }
            Route::Auto => match self.symbolic_curvature(NODE_BUDGET) {
                Ok(s) => par::map(exec, points, |x| s.at(x)).into_iter().collect(),
                Err(CurvError::Budget(_)) => curvature_field(self, points, exec),
                Err(e) => Err(e),
            },
        }
    }
}

impl MetricField for Metric4 {
    fn jet(&self, x: &[f64; N]) -> Result<MetricJet, CurvError> {
        let out = self.program().run_point(&self.point(x))?.outputs;
        let mut jet = MetricJet {
            g: [[0.0; N]; N],
            dg: [[[0.0; N]; N]; N],
            ddg: [[[[0.0; N]; N]; N]; N],
        };
        let mut k = 0;
        for (i, j) in pairs() {
            jet.g[i][j] = out[k];
            jet.g[j][i] = out[k];
            k += 1;
        }
        for c in 0..N {
            for (i, j) in pairs() {
                jet.dg[c][i][j] = out[k];
                jet.dg[c][j][i] = out[k];
                k += 1;
            }
        }
        for (c, d) in pairs() {
            for (i, j) in pairs() {
                for (u, w) in [(c, d), (d, c)] {
                    jet.ddg[u][w][i][j] = out[k];
                    jet.ddg[u][w][j][i] = out[k];
                }
                k += 1;
            }
        }
        Ok(jet)
    }

    fn value(&self, x: &[f64; N]) -> Result<M4, CurvError> {
        let pt = self.point(x);
        let mut g = [[0.0; N]; N];
        for (i, j) in pairs() {
            let v = self.entry(i, j).evaluate(&pt)?;
            g[i][j] = v;
            g[j][i] = v;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Route {
    /// Symbolic Christoffel/Riemann, with the given node budget.
    Symbolic { budget: usize },
    /// Numeric contraction of the exact 2-jet.
    Jet,
    /// Central differences of metric values only (oracle).
    FiniteDifference { step: f64 },
    /// Symbolic within [`NODE_BUDGET`], else jet.
    Auto,
}

fn idx3(a: usize, b: usize, c: usize) -> usize {
    (a * N + b) * N + c
}

fn idx4(a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * N + b) * N + c) * N + d
}

fn symbolic_det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut terms = Vec::new();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor = minor(m, 0, j);
        let t = &m[0][j] * symbolic_det(&minor);
        terms.push(if j % 2 == 1 { -t } else { t });
    }
    Expr::add_all(terms)
}

fn minor(m: &[Vec<Expr>], row: usize, col: usize) -> Vec<Vec<Expr>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// Inverse by cofactors; entries share the determinant node.
fn symbolic_inverse(m: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = m.len();
    let det = symbolic_det(m);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = symbolic_det(&minor(m, j, i));
                    let c = if (i + j) % 2 == 1 { -c } else { c };
                    c / &det
                })
                .collect()
        })
        .collect()
}

/// Symbolic Christoffel symbols and Riemann tensor of a [`Metric4`].
#[derive(Debug, Clone)]
pub struct SymbolicCurvature {
    coords: Vec<String>,
    metric: Vec<Expr>,
    /// Γ^a_bc at `(a*4 + b)*4 + c`.
    pub christoffel: Vec<Expr>,
    /// R^a_bcd at `((a*4 + b)*4 + c)*4 + d`.
    pub riemann: Vec<Expr>,
    compiled: OnceLock<Program>,
}

impl SymbolicCurvature {
    pub fn christoffel(&self, a: usize, b: usize, c: usize) -> &Expr {
        &self.christoffel[idx3(a, b, c)]
    }

    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> &Expr {
        &self.riemann[idx4(a, b, c, d)]
    }

    /// Every Riemann component is the literal zero.
    pub fn riemann_structurally_zero(&self) -> bool {
        self.riemann.iter().all(Expr::is_zero)
    }

    pub fn node_count(&self) -> usize {
        count_nodes(&self.riemann)
    }

    /// Evaluate and finish the remaining tensors numerically.
    pub fn at(&self, x: &[f64; N]) -> Result<CurvatureAt, CurvError> {
        let prog = self.compiled.get_or_init(|| {
            let mut all = self.metric.clone();
            all.extend(self.christoffel.iter().cloned());
            all.extend(self.riemann.iter().cloned());
            Program::compile(&all)
        });
        let pt: EvalPoint = self.coords.iter().map(|n| n.as_str()).zip(x.iter().copied()).collect();
        let out = prog.run_point(&pt)?.outputs;
        let mut g = [[0.0; N]; N];
        let mut gamma = [[[0.0; N]; N]; N];
        let mut riem = [[[[0.0; N]; N]; N]; N];
        for a in 0..N {
            for b in 0..N {
                g[a][b] = out[a * N + b];
                for c in 0..N {
                    gamma[a][b][c] = out[16 + idx3(a, b, c)];
                    for d in 0..N {
                        riem[a][b][c][d] = out[80 + idx4(a, b, c, d)];
                    }
                }
            }
        }
        finish(*x, g, gamma, riem)
    }
}

/// Every curvature tensor at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureAt {
    pub point: [f64; N],
    pub g: M4,
    pub ginv: M4,
    /// Γ^a_bc as `gamma[a][b][c]`.
    pub gamma: T3,
    /// R^a_bcd.
    pub riemann: T4,
    /// R_abcd.
    pub riemann_lower: T4,
    pub ricci: M4,
    pub scalar: f64,
    /// C_abcd.
    pub weyl: T4,
    /// C^a_bcd.
    pub weyl_mixed: T4,
    /// C_abcd C^abcd.
    pub weyl_square: f64,
}

fn inverse(g: &M4) -> Result<M4, CurvError> {
    let m = Matrix4::from_fn(|i, j| g[i][j]);
    if !(m.determinant().abs() > SINGULAR_DET) {
        return Err(CurvError::Singular);
    }
    let inv = m.try_inverse().ok_or(CurvError::Singular)?;
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)])))
}

fn max_abs4(t: &T4) -> f64 {
    t.iter().flatten().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

fn max_abs2(t: &M4) -> f64 {
    t.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

fn finish(point: [f64; N], g: M4, gamma: T3, riemann: T4) -> Result<CurvatureAt, CurvError> {
    let ginv = inverse(&g)?;
    let r = 0..N;
    let mut riemann_lower = [[[[0.0; N]; N]; N]; N];
    let mut ricci = [[0.0; N]; N];
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    riemann_lower[a][b][c][d] = (0..N).map(|e| g[a][e] * riemann[e][b][c][d]).sum();
                }
            }
        }
    }
    for b in r.clone() {
        for d in r.clone() {
            ricci[b][d] = (0..N).map(|a| riemann[a][b][a][d]).sum();
        }
    }
    let scalar: f64 = (0..N).flat_map(|b| (0..N).map(move |d| (b, d))).map(|(b, d)| ginv[b][d] * ricci[b][d]).sum();
    let mut weyl = [[[[0.0; N]; N]; N]; N];
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    let ric = g[a][c] * ricci[b][d] - g[a][d] * ricci[b][c] - g[b][c] * ricci[a][d]
                        + g[b][d] * ricci[a][c];
                    let gg = g[a][c] * g[b][d] - g[a][d] * g[b][c];
                    weyl[a][b][c][d] = riemann_lower[a][b][c][d] - 0.5 * ric + scalar / 6.0 * gg;
                }
            }
        }
    }
    let mut weyl_mixed = [[[[0.0; N]; N]; N]; N];
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    weyl_mixed[a][b][c][d] = (0..N).map(|e| ginv[a][e] * weyl[e][b][c][d]).sum();
                }
            }
        }
    }
    let up = raise_trailing(&weyl_mixed, &ginv);
    let mut weyl_square = 0.0;
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    weyl_square += weyl[a][b][c][d] * up[a][b][c][d];
                }
            }
        }
    }
    Ok(CurvatureAt {
        point,
        g,
        ginv,
        gamma,
        riemann,
        riemann_lower,
        ricci,
        scalar,
        weyl,
        weyl_mixed,
        weyl_square,
    })
}

/// Raise indices 1..4 of a tensor whose first index is already up.
fn raise_trailing(mixed: &T4, ginv: &M4) -> T4 {
    let mut t1 = *mixed;
    for slot in 1..N {
        let src = t1;
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        let idx = [a, b, c, d];
                        t1[a][b][c][d] = (0..N)
                            .map(|e| {
                                let mut j = idx;
                                j[slot] = e;
                                ginv[idx[slot]][e] * src[j[0]][j[1]][j[2]][j[3]]
                            })
                            .sum();
                    }
                }
            }
        }
    }
    t1
}

/// Curvature from an exact 2-jet of the metric.
pub fn curvature_from_jet(point: [f64; N], j: &MetricJet) -> Result<CurvatureAt, CurvError> {
    let ginv = inverse(&j.g)?;
    // Γ_dbc and its derivatives, index-lowered.
    let mut low = [[[0.0; N]; N]; N];
    let mut dlow = [[[[0.0; N]; N]; N]; N];
    for d in 0..N {
        for b in 0..N {
            for c in 0..N {
                low[d][b][c] = 0.5 * (j.dg[b][d][c] + j.dg[c][d][b] - j.dg[d][b][c]);
                for e in 0..N {
                    dlow[e][d][b][c] = 0.5 * (j.ddg[e][b][d][c] + j.ddg[e][c][d][b] - j.ddg[e][d][b][c]);
                }
            }
        }
    }
    // ∂_e g^ad = −g^af ∂_e g_fh g^hd
    let mut dginv = [[[0.0; N]; N]; N];
    for e in 0..N {
        for a in 0..N {
            for d in 0..N {
                let mut s = 0.0;
                for f in 0..N {
                    for h in 0..N {
                        s += ginv[a][f] * j.dg[e][f][h] * ginv[h][d];
                    }
                }
                dginv[e][a][d] = -s;
            }
        }
    }
    let mut gamma = [[[0.0; N]; N]; N];
    let mut dgamma = [[[[0.0; N]; N]; N]; N]; // dgamma[e][a][b][c] = ∂_e Γ^a_bc
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                gamma[a][b][c] = (0..N).map(|d| ginv[a][d] * low[d][b][c]).sum();
                for e in 0..N {
                    dgamma[e][a][b][c] = (0..N)
                        .map(|d| dginv[e][a][d] * low[d][b][c] + ginv[a][d] * dlow[e][d][b][c])
                        .sum();
                }
            }
        }
    }
    let mut riem = [[[[0.0; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut v = dgamma[c][a][d][b] - dgamma[d][a][c][b];
                    for e in 0..N {
                        v += gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b];
                    }
                    riem[a][b][c][d] = v;
                }
            }
        }
    }
    finish(point, j.g, gamma, riem)
}

/// Curvature of any metric field at each point, in input order.
pub fn curvature_field<F: MetricField + ?Sized>(
    field: &F,
    points: &[[f64; N]],
    exec: Exec,
) -> Result<Vec<CurvatureAt>, CurvError> {
    par::map(exec, points, |x| curvature_from_jet(*x, &field.jet(x)?))
        .into_iter()
        .collect()
}

/// Metric jets from central differences of metric values alone.
pub struct FiniteDifference<'a, F: MetricField + ?Sized> {
    pub field: &'a F,
    pub step: f64,
}

impl<F: MetricField + ?Sized> MetricField for FiniteDifference<'_, F> {
    fn jet(&self, x: &[f64; N]) -> Result<MetricJet, CurvError> {
        let h = self.step;
        let at = |dx: &[(usize, f64)]| {
            let mut y = *x;
            for &(i, d) in dx {
                y[i] += d;
            }
            self.field.value(&y)
        };
        let g0 = at(&[])?;
        let mut jet = MetricJet {
            g: g0,
            dg: [[[0.0; N]; N]; N],
            ddg: [[[[0.0; N]; N]; N]; N],
        };
        let mut plus = [[[0.0; N]; N]; N];
        let mut minus = [[[0.0; N]; N]; N];
        for c in 0..N {
            plus[c] = at(&[(c, h)])?;
            minus[c] = at(&[(c, -h)])?;
        }
        for c in 0..N {
            for a in 0..N {
                for b in 0..N {
                    jet.dg[c][a][b] = (plus[c][a][b] - minus[c][a][b]) / (2.0 * h);
                    jet.ddg[c][c][a][b] = (plus[c][a][b] - 2.0 * g0[a][b] + minus[c][a][b]) / (h * h);
                }
            }
            for d in (c + 1)..N {
                let pp = at(&[(c, h), (d, h)])?;
                let pm = at(&[(c, h), (d, -h)])?;
                let mp = at(&[(c, -h), (d, h)])?;
                let mm = at(&[(c, -h), (d, -h)])?;
                for a in 0..N {
                    for b in 0..N {
                        let v = (pp[a][b] - pm[a][b] - mp[a][b] + mm[a][b]) / (4.0 * h * h);
                        jet.ddg[c][d][a][b] = v;
                        jet.ddg[d][c][a][b] = v;
                    }
                }
            }
        }
        Ok(jet)
    }

    fn value(&self, x: &[f64; N]) -> Result<M4, CurvError> {
        self.field.value(x)
    }
}

/// g → e^{2φ} g with φ supplied as a scalar jet.
pub struct Conformal<'a, F: MetricField + ?Sized, S: ScalarField + ?Sized> {
    pub field: &'a F,
    pub phi: &'a S,
}

impl<F: MetricField + ?Sized, S: ScalarField + ?Sized> MetricField for Conformal<'_, F, S> {
    fn jet(&self, x: &[f64; N]) -> Result<MetricJet, CurvError> {
        let j = self.field.jet(x)?;
        let (phi, dphi, ddphi) = self.phi.jet(x)?;
        let e = (2.0 * phi).exp();
        let mut out = j;
        for a in 0..N {
            for b in 0..N {
                out.g[a][b] = e * j.g[a][b];
                for c in 0..N {
                    out.dg[c][a][b] = e * (2.0 * dphi[c] * j.g[a][b] + j.dg[c][a][b]);
                    for d in 0..N {
                        out.ddg[c][d][a][b] = e
                            * ((4.0 * dphi[c] * dphi[d] + 2.0 * ddphi[c][d]) * j.g[a][b]
                                + 2.0 * dphi[c] * j.dg[d][a][b]
                                + 2.0 * dphi[d] * j.dg[c][a][b]
                                + j.ddg[c][d][a][b]);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// A symbolic scalar on a 4-chart, usable as a conformal exponent.
pub struct ExprScalar {
    coords: Vec<String>,
    prog: Program,
}

impl ExprScalar {
    pub fn new(coords: &Chart, phi: &Expr) -> ExprScalar {
        let names = coords.names();
        let mut out = vec![phi.clone()];
        let d1: Vec<Expr> = names.iter().map(|n| phi.diff(n)).collect();
        out.extend(d1.iter().cloned());
        for c in 0..N {
            for d in 0..N {
                out.push(d1[c].diff(&names[d]));
            }
        }
        ExprScalar {
            coords: names.to_vec(),
            prog: Program::compile(&out),
        }
    }
}

impl ScalarField for ExprScalar {
    fn jet(&self, x: &[f64; N]) -> Result<ScalarJet, CurvError> {
        let pt: EvalPoint = self.coords.iter().map(|n| n.as_str()).zip(x.iter().copied()).collect();
        let o = self.prog.run_point(&pt)?.outputs;
        Ok((
            o[0],
            [o[1], o[2], o[3], o[4]],
            std::array::from_fn(|c| std::array::from_fn(|d| o[5 + c * N + d])),
        ))
    }
}

/// (positive, negative) eigenvalue counts; eigenvalues within `tol` count as neither.
pub fn signature(g: &M4, tol: f64) -> (usize, usize) {
    let m = Matrix4::from_fn(|i, j| g[i][j]);
    let eig = SymmetricEigen::new(m);
    let pos = eig.eigenvalues.iter().filter(|&&l| l > tol).count();
    let neg = eig.eigenvalues.iter().filter(|&&l| l < -tol).count();
    (pos, neg)
}

/// Largest violations of the algebraic identities of the curvature tensors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentityResiduals {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub first_bianchi: f64,
    pub ricci_symmetry: f64,
    pub weyl_trace: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [self.antisymmetry, self.pair_symmetry, self.first_bianchi, self.ricci_symmetry, self.weyl_trace]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

impl CurvatureAt {
    pub fn max_riemann(&self) -> f64 {
        max_abs4(&self.riemann)
    }

    pub fn max_ricci(&self) -> f64 {
        max_abs2(&self.ricci)
    }

    pub fn max_weyl(&self) -> f64 {
        max_abs4(&self.weyl)
    }

    pub fn max_weyl_mixed(&self) -> f64 {
        max_abs4(&self.weyl_mixed)
    }

    /// max |Γ^a_{b k}| for the coordinate field ∂_k, i.e. |∇ ∂_k|.
    pub fn nabla_coordinate(&self, k: usize) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..N {
            for b in 0..N {
                m = m.max(self.gamma[a][b][k].abs());
            }
        }
        m
    }

    pub fn identity_residuals(&self) -> IdentityResiduals {
        let r = &self.riemann_lower;
        let c = &self.weyl;
        let mut out = IdentityResiduals::default();
        for a in 0..N {
            for b in 0..N {
                out.ricci_symmetry = out.ricci_symmetry.max((self.ricci[a][b] - self.ricci[b][a]).abs());
                for k in 0..N {
                    for l in 0..N {
                        out.antisymmetry = out
                            .antisymmetry
                            .max((r[a][b][k][l] + r[b][a][k][l]).abs())
                            .max((r[a][b][k][l] + r[a][b][l][k]).abs());
                        out.pair_symmetry = out.pair_symmetry.max((r[a][b][k][l] - r[k][l][a][b]).abs());
                        out.first_bianchi = out
                            .first_bianchi
                            .max((r[a][b][k][l] + r[a][k][l][b] + r[a][l][b][k]).abs());
                    }
                }
            }
        }
        // Every single trace of C, over each pair of slots.
        for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let free: Vec<usize> = (0..4).filter(|s| *s != i && *s != j).collect();
            for b in 0..N {
                for k in 0..N {
                    let mut tr = 0.0;
                    for u in 0..N {
                        for w in 0..N {
                            let mut idx = [0usize; 4];
                            idx[i] = u;
                            idx[j] = w;
                            idx[free[0]] = b;
                            idx[free[1]] = k;
                            tr += self.ginv[u][w] * c[idx[0]][idx[1]][idx[2]][idx[3]];
                        }
                    }
                    out.weyl_trace = out.weyl_trace.max(tr.abs());
                }
            }
        }
        out
    }
}

/// Summary statistics of curvature samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureStats {
    pub samples: usize,
    pub max_riemann: f64,
    pub max_ricci: f64,
    pub scalar_mean: f64,
    pub scalar_std: f64,
    pub max_weyl: f64,
    pub max_weyl_square: f64,
    pub max_identity_residual: f64,
}

impl CurvatureStats {
    pub fn from_samples(s: &[CurvatureAt]) -> CurvatureStats {
        let n = s.len().max(1) as f64;
        let mean = s.iter().map(|c| c.scalar).sum::<f64>() / n;
        let var = s.iter().map(|c| (c.scalar - mean).powi(2)).sum::<f64>() / n;
        let mx = |f: &dyn Fn(&CurvatureAt) -> f64| s.iter().map(f).fold(0.0, f64::max);
        CurvatureStats {
            samples: s.len(),
            max_riemann: mx(&|c| c.max_riemann()),
            max_ricci: mx(&|c| c.max_ricci()),
            scalar_mean: mean,
            scalar_std: var.sqrt(),
            max_weyl: mx(&|c| c.max_weyl()),
            max_weyl_square: mx(&|c| c.weyl_square.abs()),
            max_identity_residual: mx(&|c| c.identity_residuals().max()),
        }
    }
}

#[cfg(test)]
mod tests;
