use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Expr, Func, Kind};

/// Denominators smaller than this in magnitude are treated as zero.
pub const DIVISION_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("division by (numerically) zero")]
    DivisionByZero,
    #[error("non-finite value from {0}")]
    Domain(&'static str),
}

/// Variable assignment used for evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvalPoint(BTreeMap<String, f64>);

impl EvalPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<'a> FromIterator<(&'a str, f64)> for EvalPoint {
    fn from_iter<I: IntoIterator<Item = (&'a str, f64)>>(iter: I) -> Self {
        EvalPoint(iter.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Var(usize),
    Add(Vec<usize>),
    Mul(Vec<usize>),
    Div(usize, usize),
    Pow(usize, i32),
    Neg(usize),
    Func(Func, usize),
}

/// A set of expressions flattened into one instruction list, with
/// structurally identical subtrees evaluated once.
#[derive(Debug, Clone)]
pub struct Program {
    ops: Vec<Op>,
    vars: Vec<String>,
    outputs: Vec<usize>,
}

/// Output of one program run.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub outputs: Vec<f64>,
    /// Largest magnitude of any intermediate value.
    pub max_abs: f64,
}

struct Compiler {
    ops: Vec<Op>,
    vars: Vec<String>,
    var_index: HashMap<String, usize>,
    by_ptr: HashMap<*const (), usize>,
    by_structure: HashMap<Expr, usize>,
}

impl Compiler {
    fn emit(&mut self, e: &Expr) -> usize {
        if let Some(&i) = self.by_ptr.get(&e.ptr()) {
            return i;
        }
        if let Some(&i) = self.by_structure.get(e) {
            self.by_ptr.insert(e.ptr(), i);
            return i;
        }
        let op = match e.kind() {
            Kind::Const(c) => Op::Const(c.to_f64()),
            Kind::Var(name) => {
                let next = self.vars.len();
                let idx = *self.var_index.entry(name.to_string()).or_insert(next);
                if idx == next {
                    self.vars.push(name.to_string());
                }
                Op::Var(idx)
            }
            Kind::Add(xs) => Op::Add(xs.iter().map(|x| self.emit(x)).collect()),
            Kind::Mul(xs) => Op::Mul(xs.iter().map(|x| self.emit(x)).collect()),
            Kind::Div(a, b) => {
                let a = self.emit(a);
                let b = self.emit(b);
                Op::Div(a, b)
            }
            Kind::Pow(a, n) => Op::Pow(self.emit(a), *n),
            Kind::Neg(a) => Op::Neg(self.emit(a)),
            Kind::Func(f, a) => Op::Func(*f, self.emit(a)),
        };
        let i = self.ops.len();
        self.ops.push(op);
        self.by_ptr.insert(e.ptr(), i);
        self.by_structure.insert(e.clone(), i);
        i
    }
}

impl Program {
    pub fn compile(exprs: &[Expr]) -> Program {
        let mut c = Compiler {
            ops: Vec::new(),
            vars: Vec::new(),
            var_index: HashMap::new(),
            by_ptr: HashMap::new(),
            by_structure: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| c.emit(e)).collect();
        Program {
            ops: c.ops,
            vars: c.vars,
            outputs,
        }
    }

    /// Variables in input order for [`Program::run`].
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluate with inputs aligned to [`Program::vars`].
    pub fn run(&self, inputs: &[f64]) -> Result<Evaluation, EvalError> {
        let mut slots = vec![0.0f64; self.ops.len()];
        let mut max_abs = 0.0f64;
        for (i, op) in self.ops.iter().enumerate() {
            let v = match op {
                Op::Const(c) => *c,
                Op::Var(k) => inputs[*k],
                Op::Add(xs) => xs.iter().map(|&x| slots[x]).sum(),
                Op::Mul(xs) => xs.iter().map(|&x| slots[x]).product(),
                Op::Div(a, b) => {
                    let den = slots[*b];
                    if den.abs() < DIVISION_FLOOR {
                        return Err(EvalError::DivisionByZero);
                    }
                    slots[*a] / den
                }
                Op::Pow(a, n) => {
                    let base = slots[*a];
                    if *n < 0 && base.abs() < DIVISION_FLOOR {
                        return Err(EvalError::DivisionByZero);
                    }
                    base.powi(*n)
                }
                Op::Neg(a) => -slots[*a],
                Op::Func(f, a) => {
                    let r = f.apply(slots[*a]);
                    if !r.is_finite() {
                        return Err(EvalError::Domain(f.name()));
                    }
                    r
                }
            };
            if !v.is_finite() {
                return Err(EvalError::Domain("arithmetic overflow"));
            }
            max_abs = max_abs.max(v.abs());
            slots[i] = v;
        }
        Ok(Evaluation {
            outputs: self.outputs.iter().map(|&o| slots[o]).collect(),
            max_abs,
        })
    }

    /// Bind inputs by name from `pt`.
    pub fn inputs_for(&self, pt: &EvalPoint) -> Result<Vec<f64>, EvalError> {
        self.vars
            .iter()
            .map(|v| pt.get(v).ok_or_else(|| EvalError::Unbound(v.clone())))
            .collect()
    }

    pub fn run_point(&self, pt: &EvalPoint) -> Result<Evaluation, EvalError> {
        self.run(&self.inputs_for(pt)?)
    }
}

impl Expr {
    /// Double-precision value at `pt`.
    pub fn evaluate(&self, pt: &EvalPoint) -> Result<f64, EvalError> {
        Ok(Program::compile(std::slice::from_ref(self)).run_point(pt)?.outputs[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn pt(pairs: &[(&str, f64)]) -> EvalPoint {
        pairs.iter().copied().collect()
    }

    #[test]
    fn product_at_point() {
        let e = parse_expr("p*s").unwrap();
        assert_eq!(e.evaluate(&pt(&[("p", 2.0), ("s", 3.0)])).unwrap(), 6.0);
    }

    #[test]
    fn zero_guard_case_evaluates_to_zero() {
        let e = parse_expr("y1*x - y").unwrap();
        assert_eq!(e.evaluate(&pt(&[("x", 1.0), ("y1", 1.0), ("y", 1.0)])).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let e = parse_expr("1/(y1*x - y)").unwrap();
        assert_eq!(
            e.evaluate(&pt(&[("x", 1.0), ("y1", 1.0), ("y", 1.0)])),
            Err(EvalError::DivisionByZero)
        );
        assert_eq!(
            parse_expr("x + w").unwrap().evaluate(&pt(&[("x", 1.0)])),
            Err(EvalError::Unbound("w".into()))
        );
        assert!(matches!(
            parse_expr("log(x)").unwrap().evaluate(&pt(&[("x", -1.0)])),
            Err(EvalError::Domain(_))
        ));
    }

    #[test]
    fn shared_structure_compiles_once() {
        let a = parse_expr("(x + y)^2").unwrap();
        let b = parse_expr("(x + y)^2 + 1").unwrap();
        let prog = Program::compile(&[a, b]);
        // x, y, x+y, (x+y)^2, 1, sum
        assert_eq!(prog.len(), 6);
        let out = prog.run_point(&pt(&[("x", 1.0), ("y", 2.0)])).unwrap();
        assert_eq!(out.outputs, vec![9.0, 10.0]);
        assert_eq!(out.max_abs, 10.0);
    }
}
