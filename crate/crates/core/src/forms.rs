//! Exterior algebra over a coordinate chart with symbolic coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{EvalError, EvalPoint, Expr, Program};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("forms live on different charts")]
    ChartMismatch,
    #[error("`{0}` is not a coordinate of the chart")]
    UnknownCoordinate(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Ordered list of coordinate names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart(Arc<[String]>);

impl Chart {
    pub fn new(names: &[&str]) -> Chart {
        assert!(!names.is_empty(), "chart needs at least one coordinate");
        for (i, n) in names.iter().enumerate() {
            assert!(!names[..i].contains(n), "duplicate coordinate `{n}`");
        }
        Chart(names.iter().map(|s| s.to_string()).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn coord(&self, i: usize) -> Expr {
        Expr::var(&self.0[i])
    }

    fn require(&self, name: &str) -> Result<usize, FormError> {
        self.index(name)
            .ok_or_else(|| FormError::UnknownCoordinate(name.to_string()))
    }
}

/// A k-form stored sparsely by strictly increasing index tuples.
#[derive(Debug, Clone)]
pub struct DiffForm {
    chart: Chart,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl DiffForm {
    pub fn zero(chart: &Chart, degree: usize) -> DiffForm {
        DiffForm {
            chart: chart.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: &Chart, f: Expr) -> DiffForm {
        let mut z = DiffForm::zero(chart, 0);
        z.insert(vec![], f);
        z
    }

    /// The coordinate differential `d(name)`.
    pub fn d_coord(chart: &Chart, name: &str) -> Result<DiffForm, FormError> {
        let i = chart.require(name)?;
        let mut z = DiffForm::zero(chart, 1);
        z.insert(vec![i], Expr::one());
        Ok(z)
    }

    /// Σ f_i d(name_i).
    pub fn one_form(chart: &Chart, parts: &[(&str, Expr)]) -> Result<DiffForm, FormError> {
        let mut z = DiffForm::zero(chart, 1);
        for (name, f) in parts {
            let i = chart.require(name)?;
            z.accumulate(vec![i], f.clone());
        }
        Ok(z)
    }

    /// 1-form from a dense coefficient vector.
    pub fn from_components(chart: &Chart, comps: Vec<Expr>) -> DiffForm {
        assert_eq!(comps.len(), chart.dim());
        let mut z = DiffForm::zero(chart, 1);
        for (i, c) in comps.into_iter().enumerate() {
            z.insert(vec![i], c);
        }
        z
    }

    fn insert(&mut self, key: Vec<usize>, f: Expr) {
        if !f.is_zero() {
            self.terms.insert(key, f);
        }
    }

    fn accumulate(&mut self, key: Vec<usize>, f: Expr) {
        if f.is_zero() {
            return;
        }
        let v = match self.terms.remove(&key) {
            Some(old) => old + f,
            None => f,
        };
        self.insert(key, v);
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Expr)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn coefficients(&self) -> Vec<Expr> {
        self.terms.values().cloned().collect()
    }

    /// Coefficient of d(names[0])∧d(names[1])∧…, with the sign of the reordering.
    pub fn coefficient(&self, names: &[&str]) -> Result<Expr, FormError> {
        let mut idx = names
            .iter()
            .map(|n| self.chart.require(n))
            .collect::<Result<Vec<_>, _>>()?;
        let Some(sign) = sort_with_sign(&mut idx) else {
            return Ok(Expr::zero());
        };
        let c = self.terms.get(&idx).cloned().unwrap_or_else(Expr::zero);
        Ok(if sign < 0 { -c } else { c })
    }

    /// Dense component vector of a 1-form.
    pub fn components(&self) -> Vec<Expr> {
        assert_eq!(self.degree, 1);
        (0..self.chart.dim())
            .map(|i| self.terms.get(&vec![i]).cloned().unwrap_or_else(Expr::zero))
            .collect()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, other: &DiffForm) -> Result<(), FormError> {
        if self.chart != other.chart {
            return Err(FormError::ChartMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &DiffForm) -> Result<DiffForm, FormError> {
        self.check(other)?;
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.accumulate(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<DiffForm, FormError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffForm {
        self.map_coefficients(|c| -c)
    }

    /// f·a for a function f.
    pub fn scale(&self, f: &Expr) -> DiffForm {
        self.map_coefficients(|c| f * c)
    }

    pub fn map_coefficients(&self, mut op: impl FnMut(&Expr) -> Expr) -> DiffForm {
        let mut out = DiffForm::zero(&self.chart, self.degree);
        for (k, v) in &self.terms {
            out.insert(k.clone(), op(v));
        }
        out
    }

    pub fn substitute(&self, bindings: &HashMap<String, Expr>) -> DiffForm {
        self.map_coefficients(|c| c.substitute(bindings))
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm, FormError> {
        self.check(other)?;
        let degree = self.degree + other.degree;
        let mut out = DiffForm::zero(&self.chart, degree);
        if degree > self.chart.dim() {
            return Ok(out);
        }
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let mut key: Vec<usize> = ka.iter().chain(kb).copied().collect();
                if let Some(sign) = sort_with_sign(&mut key) {
                    let c = va * vb;
                    out.accumulate(key, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self) -> DiffForm {
        let mut out = DiffForm::zero(&self.chart, self.degree + 1);
        for (key, f) in &self.terms {
            for j in 0..self.chart.dim() {
                if key.contains(&j) {
                    continue;
                }
                let df = f.diff(self.chart.name(j));
                if df.is_zero() {
                    continue;
                }
                // dx_j moved past every index in `key` smaller than j.
                let pos = key.iter().filter(|&&i| i < j).count();
                let mut k = key.clone();
                k.insert(pos, j);
                out.accumulate(k, if pos % 2 == 1 { -df } else { df });
            }
        }
        out
    }

    /// Pull back to the slice where the `fixed` coordinates are constant.
    pub fn restrict_to_slice(&self, fixed: &[(&str, f64)]) -> Result<DiffForm, FormError> {
        let (sub, keep, bindings) = slice_setup(&self.chart, fixed)?;
        let mut out = DiffForm::zero(&sub, self.degree);
        for (k, v) in &self.terms {
            let Some(nk) = k.iter().map(|i| keep[*i]).collect::<Option<Vec<_>>>() else {
                continue;
            };
            out.insert(nk, v.substitute(&bindings));
        }
        Ok(out)
    }

    /// Max |symbolic d − central-difference d| over all coefficients at `pt`.
    pub fn numeric_d_check(&self, pt: &EvalPoint) -> Result<f64, FormError> {
        const H: f64 = 1e-5;
        let keys: Vec<&Vec<usize>> = self.terms.keys().collect();
        let prog = Program::compile(&self.coefficients());
        let base = self.chart_values(pt)?;
        let eval_at = |x: &[f64]| -> Result<Vec<f64>, FormError> {
            let p = self.point_from(x);
            Ok(prog.run_point(&p)?.outputs)
        };
        let mut fd: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for j in 0..self.chart.dim() {
            let mut xp = base.clone();
            let mut xm = base.clone();
            xp[j] += H;
            xm[j] -= H;
            let (fp, fm) = (eval_at(&xp)?, eval_at(&xm)?);
            for (n, key) in keys.iter().enumerate() {
                if key.contains(&j) {
                    continue;
                }
                let pos = key.iter().filter(|&&i| i < j).count();
                let mut k = (*key).clone();
                k.insert(pos, j);
                let deriv = (fp[n] - fm[n]) / (2.0 * H);
                *fd.entry(k).or_insert(0.0) += if pos % 2 == 1 { -deriv } else { deriv };
            }
        }
        let d = self.d();
        let symbolic = Program::compile(&d.coefficients()).run_point(&self.point_from(&base))?;
        let mut worst: f64 = 0.0;
        for (key, s) in d.terms.keys().zip(&symbolic.outputs) {
            worst = worst.max((s - fd.get(key).copied().unwrap_or(0.0)).abs());
        }
        for (key, v) in &fd {
            if !d.terms.contains_key(key) {
                worst = worst.max(v.abs());
            }
        }
        // Guard against coefficients that are singular at pt.
        eval_at(&base)?;
        Ok(worst)
    }

    fn chart_values(&self, pt: &EvalPoint) -> Result<Vec<f64>, FormError> {
        self.chart
            .names()
            .iter()
            .map(|n| pt.get(n).ok_or_else(|| EvalError::Unbound(n.clone()).into()))
            .collect()
    }

    fn point_from(&self, x: &[f64]) -> EvalPoint {
        self.chart.names().iter().map(|n| n.as_str()).zip(x.iter().copied()).collect()
    }
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, v)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({v})")?;
            for (m, i) in k.iter().enumerate() {
                write!(f, "{}d{}", if m == 0 { " " } else { "^" }, self.chart.name(*i))?;
            }
        }
        Ok(())
    }
}

/// Sort in place; returns the permutation sign, or None on a repeated index.
fn sort_with_sign(v: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return None;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

type SliceSetup = (Chart, Vec<Option<usize>>, HashMap<String, Expr>);

fn slice_setup(chart: &Chart, fixed: &[(&str, f64)]) -> Result<SliceSetup, FormError> {
    let mut bindings = HashMap::new();
    for (name, v) in fixed {
        chart.require(name)?;
        bindings.insert(name.to_string(), Expr::from_f64(*v));
    }
    let mut keep = vec![None; chart.dim()];
    let mut names = Vec::new();
    for (i, n) in chart.names().iter().enumerate() {
        if !bindings.contains_key(n) {
            keep[i] = Some(names.len());
            names.push(n.as_str());
        }
    }
    Ok((Chart::new(&names), keep, bindings))
}

/// Vector field as a dense component list over a chart.
#[derive(Debug, Clone)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &Chart, comps: Vec<Expr>) -> VectorField {
        assert_eq!(comps.len(), chart.dim());
        VectorField {
            chart: chart.clone(),
            comps,
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// Directional derivative V(f).
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::add_all(
            self.comps
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| c * f.diff(self.chart.name(i))),
        )
    }

    /// Components of [self, other].
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let comps = (0..self.chart.dim())
            .map(|k| self.apply(&other.comps[k]) - other.apply(&self.comps[k]))
            .collect();
        VectorField::new(&self.chart, comps)
    }
}

/// Symmetric covariant 2-tensor, dense n×n.
#[derive(Debug, Clone)]
pub struct SymmetricForm {
    chart: Chart,
    m: Vec<Vec<Expr>>,
}

impl SymmetricForm {
    pub fn zero(chart: &Chart) -> SymmetricForm {
        let n = chart.dim();
        SymmetricForm {
            chart: chart.clone(),
            m: vec![vec![Expr::zero(); n]; n],
        }
    }

    /// Build from the upper triangle given by `f(i, j)` for i ≤ j.
    pub fn from_fn(chart: &Chart, mut f: impl FnMut(usize, usize) -> Expr) -> SymmetricForm {
        let mut g = SymmetricForm::zero(chart);
        for i in 0..chart.dim() {
            for j in i..chart.dim() {
                let v = f(i, j);
                g.m[i][j] = v.clone();
                g.m[j][i] = v;
            }
        }
        g
    }

    /// Symmetric product ab = ½(a⊗b + b⊗a) of two 1-forms.
    pub fn product(a: &DiffForm, b: &DiffForm) -> Result<SymmetricForm, FormError> {
        a.check(b)?;
        let (ca, cb) = (a.components(), b.components());
        let half = Expr::rational(1, 2);
        Ok(SymmetricForm::from_fn(a.chart(), |i, j| {
            if i == j {
                &ca[i] * &cb[i]
            } else {
                &half * (&ca[i] * &cb[j] + &ca[j] * &cb[i])
            }
        }))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.m[i][j]
    }

    pub fn rows(&self) -> &[Vec<Expr>] {
        &self.m
    }

    pub fn add(&self, other: &SymmetricForm) -> SymmetricForm {
        assert_eq!(self.chart, other.chart);
        SymmetricForm::from_fn(&self.chart, |i, j| &self.m[i][j] + &other.m[i][j])
    }

    pub fn scale(&self, f: &Expr) -> SymmetricForm {
        SymmetricForm::from_fn(&self.chart, |i, j| f * &self.m[i][j])
    }

    /// Upper-triangle entries in row-major order.
    pub fn upper(&self) -> Vec<Expr> {
        let n = self.chart.dim();
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                out.push(self.m[i][j].clone());
            }
        }
        out
    }

    /// The covector g(V, ·).
    pub fn contract(&self, v: &VectorField) -> Vec<Expr> {
        (0..self.chart.dim())
            .map(|j| {
                Expr::add_all(
                    v.components()
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(i, c)| c * &self.m[i][j]),
                )
            })
            .collect()
    }

    /// Lie derivative along `v`.
    pub fn lie_derivative(&self, v: &VectorField) -> SymmetricForm {
        let n = self.chart.dim();
        let dv: Vec<Vec<Expr>> = (0..n)
            .map(|k| (0..n).map(|i| v.components()[k].diff(self.chart.name(i))).collect())
            .collect();
        SymmetricForm::from_fn(&self.chart, |i, j| {
            let mut terms = vec![v.apply(&self.m[i][j])];
            for k in 0..n {
                if !dv[k][i].is_zero() {
                    terms.push(&self.m[k][j] * &dv[k][i]);
                }
                if !dv[k][j].is_zero() {
                    terms.push(&self.m[i][k] * &dv[k][j]);
                }
            }
            Expr::add_all(terms)
        })
    }

    pub fn restrict_to_slice(&self, fixed: &[(&str, f64)]) -> Result<SymmetricForm, FormError> {
        let (sub, keep, bindings) = slice_setup(&self.chart, fixed)?;
        let idx: Vec<usize> = (0..self.chart.dim()).filter(|&i| keep[i].is_some()).collect();
        Ok(SymmetricForm::from_fn(&sub, |i, j| {
            self.m[idx[i]][idx[j]].substitute(&bindings)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use crate::expr::sample::{zero_test, SampleDomain, Verdict};

    fn jet() -> Chart {
        Chart::new(&["x", "y", "z", "p", "q", "s"])
    }

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn d(c: &Chart, n: &str) -> DiffForm {
        DiffForm::d_coord(c, n).unwrap()
    }

    #[test]
    fn wedge_is_alternating() {
        let c = jet();
        assert!(d(&c, "x").wedge(&d(&c, "x")).unwrap().is_structurally_zero());
        let xy = d(&c, "x").wedge(&d(&c, "y")).unwrap();
        let yx = d(&c, "y").wedge(&d(&c, "x")).unwrap();
        assert_eq!(xy.coefficient(&["x", "y"]).unwrap(), Expr::one());
        assert_eq!(yx.coefficient(&["x", "y"]).unwrap(), Expr::int(-1));
        assert_eq!(yx.coefficient(&["y", "x"]).unwrap(), Expr::one());
    }

    #[test]
    fn contact_volume_form_of_flat_pair() {
        let c = jet();
        let of = |parts: &[(&str, &str)]| {
            let v: Vec<(&str, Expr)> = parts.iter().map(|(n, s)| (*n, e(s))).collect();
            DiffForm::one_form(&c, &v).unwrap()
        };
        let lambda = of(&[("z", "1"), ("x", "-p"), ("y", "-q")]);
        let forms = [
            lambda,
            d(&c, "x"),
            d(&c, "y"),
            of(&[("p", "1"), ("y", "-s")]),
            of(&[("q", "1"), ("x", "-s")]),
            d(&c, "s"),
        ];
        let mut vol = DiffForm::scalar(&c, Expr::one());
        for f in &forms {
            vol = vol.wedge(f).unwrap();
        }
        let coeff = vol.coefficient(&["z", "x", "y", "p", "q", "s"]).unwrap();
        let dom = SampleDomain::new(&[("p", -1.0, 1.0), ("q", -1.0, 1.0), ("s", -1.0, 1.0)]);
        let diff = coeff - 1;
        assert_eq!(zero_test(&[diff], &dom).unwrap().verdict, Verdict::Zero);
    }

    #[test]
    fn derivative_of_contact_form() {
        let c = jet();
        let lambda = DiffForm::one_form(&c, &[("z", e("1")), ("x", e("-p")), ("y", e("-q"))]).unwrap();
        let dl = lambda.d();
        assert_eq!(dl.coefficient(&["p", "x"]).unwrap(), Expr::int(-1));
        assert_eq!(dl.coefficient(&["q", "y"]).unwrap(), Expr::int(-1));
        assert_eq!(dl.terms().count(), 2);
        assert!(d(&c, "s").d().is_structurally_zero());
    }

    #[test]
    fn slice_restriction() {
        let c = jet();
        let lambda = DiffForm::one_form(&c, &[("z", e("1")), ("x", e("-p")), ("y", e("-q"))]).unwrap();
        let r = lambda.restrict_to_slice(&[("x", 0.0), ("y", 0.0)]).unwrap();
        assert_eq!(r.chart().names(), ["z", "p", "q", "s"]);
        assert_eq!(r.terms().count(), 1);
        assert_eq!(r.coefficient(&["z"]).unwrap(), Expr::one());
    }

    #[test]
    fn numeric_d_oracle() {
        let c = jet();
        let a = DiffForm::one_form(&c, &[("z", e("1")), ("x", e("-p"))]).unwrap();
        let pt: EvalPoint = c.names().iter().map(|n| (n.as_str(), 0.3)).collect();
        assert!(a.numeric_d_check(&pt).unwrap() < 1e-6);
        let b = DiffForm::one_form(&c, &[("x", e("exp(p*s)/(1+z^2)")), ("q", e("sin(x*y)*s"))]).unwrap();
        assert!(b.numeric_d_check(&pt).unwrap() < 1e-6);
        let singular = DiffForm::one_form(&c, &[("x", e("1/(p - 0.3)"))]).unwrap();
        assert!(singular.numeric_d_check(&pt).is_err());
    }

    #[test]
    fn chart_mismatch_is_an_error() {
        let a = d(&jet(), "x");
        let b = d(&Chart::new(&["x", "y"]), "y");
        assert_eq!(a.wedge(&b).unwrap_err(), FormError::ChartMismatch);
    }

    #[test]
    fn symmetric_product_convention() {
        let c = Chart::new(&["a", "b"]);
        let g = SymmetricForm::product(&d(&c, "a"), &d(&c, "b")).unwrap();
        assert_eq!(*g.entry(0, 1), Expr::rational(1, 2));
        assert!(g.entry(0, 0).is_zero());
    }
}
