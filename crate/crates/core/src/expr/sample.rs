//! Guarded random sampling and the semantic zero test.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{EvalError, EvalPoint, Evaluation, Expr, Program};
use crate::par::{self, Exec};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOL_ZERO: f64 = 1e-9;
pub const DEFAULT_SCALE_BOUND: f64 = 1e6;

/// Box of sample points plus the nonvanishing conditions they must satisfy.
#[derive(Debug, Clone)]
pub struct SampleDomain {
    pub intervals: BTreeMap<String, (f64, f64)>,
    pub samples: usize,
    pub seed: u64,
    pub guards: Vec<Expr>,
    pub guard_floor: f64,
    /// Points where any intermediate value exceeds this are redrawn.
    pub scale_bound: f64,
    pub tol_zero: f64,
    pub exec: Exec,
}

impl SampleDomain {
    pub fn new(intervals: &[(&str, f64, f64)]) -> Self {
        let intervals = intervals
            .iter()
            .map(|&(v, lo, hi)| {
                assert!(lo <= hi, "empty interval for {v}");
                (v.to_string(), (lo, hi))
            })
            .collect();
        SampleDomain {
            intervals,
            samples: 20,
            seed: DEFAULT_SEED,
            guards: Vec::new(),
            guard_floor: 1e-4,
            scale_bound: DEFAULT_SCALE_BOUND,
            tol_zero: DEFAULT_TOL_ZERO,
            exec: Exec::default(),
        }
    }

    pub fn samples(mut self, n: usize) -> Self {
        assert!(n >= 1, "sample count must be positive");
        self.samples = n;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn guard(mut self, g: Expr) -> Self {
        self.guards.push(g);
        self
    }

    pub fn guards(mut self, gs: impl IntoIterator<Item = Expr>) -> Self {
        self.guards.extend(gs);
        self
    }

    pub fn guard_floor(mut self, floor: f64) -> Self {
        assert!(floor > 0.0);
        self.guard_floor = floor;
        self
    }

    pub fn tol_zero(mut self, tol: f64) -> Self {
        self.tol_zero = tol;
        self
    }

    pub fn scale_bound(mut self, bound: f64) -> Self {
        self.scale_bound = bound;
        self
    }

    pub fn exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_interval(mut self, var: &str, lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval for {var}");
        self.intervals.insert(var.to_string(), (lo, hi));
        self
    }

    /// `count` uniformly drawn candidate points; identical for identical seeds.
    pub fn candidates(&self, count: usize) -> Vec<EvalPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|_| {
                let mut pt = EvalPoint::new();
                for (v, &(lo, hi)) in &self.intervals {
                    let x = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
                    pt.insert(v, x);
                }
                pt
            })
            .collect()
    }

    /// Evaluate `exprs` at up to `2·samples` candidates and keep the first
    /// `samples` that pass the guards, the scale bound and evaluation.
    pub fn sample(&self, exprs: &[Expr]) -> Result<Sampled, EvalError> {
        let mut all = self.guards.clone();
        all.extend_from_slice(exprs);
        let prog = Program::compile(&all);
        if let Some(v) = prog.vars().iter().find(|v| !self.intervals.contains_key(*v)) {
            return Err(EvalError::Unbound(v.clone()));
        }
        let drawn = 2 * self.samples;
        let cands = self.candidates(drawn);
        let ng = self.guards.len();
        let runs = par::map(self.exec, &cands, |pt| {
            let ev = prog.run_point(pt).ok()?;
            if ev.max_abs > self.scale_bound {
                return None;
            }
            if ev.outputs[..ng].iter().any(|g| g.abs() <= self.guard_floor) {
                return None;
            }
            Some(ev)
        });
        let mut points = Vec::with_capacity(self.samples);
        for (pt, run) in cands.into_iter().zip(runs) {
            if points.len() == self.samples {
                break;
            }
            if let Some(Evaluation { outputs, max_abs }) = run {
                points.push(SampledPoint {
                    point: pt,
                    values: outputs[ng..].to_vec(),
                    max_abs,
                });
            }
        }
        Ok(Sampled {
            points,
            drawn,
            wanted: self.samples,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SampledPoint {
    pub point: EvalPoint,
    pub values: Vec<f64>,
    pub max_abs: f64,
}

#[derive(Debug, Clone)]
pub struct Sampled {
    pub points: Vec<SampledPoint>,
    pub drawn: usize,
    pub wanted: usize,
}

impl Sampled {
    /// Fewer than half of the drawn candidates survived.
    pub fn starved(&self) -> bool {
        self.points.len() < self.wanted
    }

    /// Largest |value| of output `i` over accepted points.
    pub fn max_abs(&self, i: usize) -> f64 {
        self.points.iter().map(|p| p.values[i].abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Zero,
    Nonzero,
    Inconclusive,
}

/// A point where an expression was found to be nonzero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Index of the offending expression in the tested list.
    pub index: usize,
    pub point: EvalPoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroTest {
    pub verdict: Verdict,
    pub accepted: usize,
    pub drawn: usize,
    pub max_abs: f64,
    pub witness: Option<Witness>,
}

/// Semantic zero test of every expression in `exprs` on `dom`.
pub fn zero_test(exprs: &[Expr], dom: &SampleDomain) -> Result<ZeroTest, EvalError> {
    let s = dom.sample(exprs)?;
    let mut max_abs: f64 = 0.0;
    for sp in &s.points {
        for (i, &v) in sp.values.iter().enumerate() {
            max_abs = max_abs.max(v.abs());
            if v.abs() >= dom.tol_zero {
                return Ok(ZeroTest {
                    verdict: Verdict::Nonzero,
                    accepted: s.points.len(),
                    drawn: s.drawn,
                    max_abs,
                    witness: Some(Witness {
                        index: i,
                        point: sp.point.clone(),
                        value: v,
                    }),
                });
            }
        }
    }
    let verdict = if s.starved() {
        Verdict::Inconclusive
    } else {
        Verdict::Zero
    };
    Ok(ZeroTest {
        verdict,
        accepted: s.points.len(),
        drawn: s.drawn,
        max_abs,
        witness: None,
    })
}

/// Convenience wrapper for a single expression.
pub fn is_identically_zero(e: &Expr, dom: &SampleDomain) -> Result<ZeroTest, EvalError> {
    zero_test(std::slice::from_ref(e), dom)
}
