//! `paracr check-expr`: parse, print and differentiate one expression.

use std::fmt::Write as _;

use paracr::expr::{parse_expr, EvalPoint, ParseError};

/// Relative disagreement above which a derivative is flagged.
const FD_TOL: f64 = 1e-6;

pub struct ExprCheck {
    pub text: String,
    /// False when some derivative disagrees with its finite difference.
    pub ok: bool,
}

/// Each free variable is set to a distinct value in [0.3, 0.7] so that
/// common poles at 0 and 1 are avoided.
pub fn check_expr(src: &str) -> Result<ExprCheck, ParseError> {
    let e = parse_expr(src)?;
    let vars: Vec<String> = e.free_vars().into_iter().collect();
    let pt = vars
        .iter()
        .enumerate()
        .fold(EvalPoint::new(), |p, (i, v)| p.with(v, 0.3 + 0.4 * (i as f64 + 1.0) / (vars.len() as f64 + 1.0)));
    let mut out = String::new();
    let mut ok = true;
    let _ = writeln!(out, "parsed:    {e}");
    let _ = writeln!(out, "variables: {}", vars.join(", "));
    match e.evaluate(&pt) {
        Ok(v) => {
            let at: Vec<String> = pt.iter().map(|(k, x)| format!("{k}={x:.4}")).collect();
            let _ = writeln!(out, "value at ({}): {v}", at.join(", "));
        }
        Err(err) => {
            let _ = writeln!(out, "value: {err}");
        }
    }
    for v in &vars {
        let d = e.diff(v);
        let _ = writeln!(out, "d/d{v}: {d}");
        let at = |x: f64| {
            let mut q = pt.clone();
            q.insert(v, x);
            e.evaluate(&q)
        };
        let h = 1e-4;
        let x0 = pt.get(v).unwrap_or(0.0);
        let fd = (|| -> Result<f64, paracr::expr::EvalError> {
            Ok((-at(x0 + 2.0 * h)? + 8.0 * at(x0 + h)? - 8.0 * at(x0 - h)? + at(x0 - 2.0 * h)?) / (12.0 * h))
        })();
        match (d.evaluate(&pt), fd) {
            (Ok(exact), Ok(fd)) => {
                let rel = (exact - fd).abs() / exact.abs().max(1.0);
                let verdict = if rel < FD_TOL { "ok" } else { "MISMATCH" };
                ok &= rel < FD_TOL;
                let _ = writeln!(out, "  finite-difference check: {verdict} (rel err {rel:.1e})");
            }
            (Err(err), _) | (_, Err(err)) => {
                let _ = writeln!(out, "  finite-difference check skipped: {err}");
            }
        }
    }
    Ok(ExprCheck { text: out, ok })
}
