use std::collections::HashMap;

use super::{Expr, Func, Kind};

impl Expr {
    /// Exact partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        let mut memo = HashMap::new();
        self.diff_memo(var, &mut memo)
    }

    /// Repeated partial derivative, applied left to right.
    pub fn diff_many(&self, vars: &[&str]) -> Expr {
        vars.iter().fold(self.clone(), |e, v| e.diff(v))
    }

    fn diff_memo(&self, var: &str, memo: &mut HashMap<*const (), Expr>) -> Expr {
        if let Some(d) = memo.get(&self.ptr()) {
            return d.clone();
        }
        let d = match self.kind() {
            Kind::Const(_) => Expr::zero(),
            Kind::Var(v) => {
                if v.as_ref() == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Add(xs) => Expr::add_all(xs.iter().map(|x| x.diff_memo(var, memo))),
            Kind::Mul(xs) => {
                let ds: Vec<Expr> = xs.iter().map(|x| x.diff_memo(var, memo)).collect();
                let mut terms = Vec::new();
                for (i, di) in ds.iter().enumerate() {
                    if di.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = Vec::with_capacity(xs.len());
                    for (j, x) in xs.iter().enumerate() {
                        factors.push(if i == j { di.clone() } else { x.clone() });
                    }
                    terms.push(Expr::mul_all(factors));
                }
                Expr::add_all(terms)
            }
            Kind::Div(a, b) => {
                let da = a.diff_memo(var, memo);
                let db = b.diff_memo(var, memo);
                if db.is_zero() {
                    Expr::div(da, b.clone())
                } else if let Kind::Pow(c, k) = b.kind() {
                    // a / c^k: raise the exponent by one instead of squaring.
                    let dc = c.diff_memo(var, memo);
                    let num = if da.is_zero() {
                        -(Expr::int(*k as i64) * a * dc)
                    } else {
                        da * c - Expr::int(*k as i64) * a * dc
                    };
                    Expr::div(num, Expr::pow(c.clone(), k + 1))
                } else if da.is_zero() {
                    -(Expr::div(a * db, b.powi(2)))
                } else {
                    Expr::div(da * b - a * db, b.powi(2))
                }
            }
            Kind::Pow(a, n) => {
                let da = a.diff_memo(var, memo);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    Expr::mul_all([Expr::int(*n as i64), Expr::pow(a.clone(), n - 1), da])
                }
            }
            Kind::Neg(a) => Expr::neg(a.diff_memo(var, memo)),
            Kind::Func(f, a) => {
                let da = a.diff_memo(var, memo);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    let outer = match f {
                        Func::Exp => self.clone(),
                        Func::Log => Expr::div(Expr::one(), a.clone()),
                        Func::Sqrt => Expr::div(Expr::one(), 2 * self),
                        Func::Sin => a.cos(),
                        Func::Cos => -a.sin(),
                    };
                    outer * da
                }
            }
        };
        memo.insert(self.ptr(), d.clone());
        d
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse_expr;

    fn d(src: &str, v: &str) -> String {
        parse_expr(src).unwrap().diff(v).to_string()
    }

    #[test]
    fn power_rule() {
        assert_eq!(d("s^3", "s"), "3*s^2");
    }

    #[test]
    fn product_rule_drops_zero_terms() {
        assert_eq!(d("p*q + s^2", "p"), "q");
    }

    #[test]
    fn second_derivative_of_square_is_two() {
        let r = parse_expr("s^2").unwrap();
        assert_eq!(r.diff("s").diff("s").to_string(), "2");
    }

    #[test]
    fn derivative_of_unrelated_expression_is_zero() {
        assert_eq!(d("exp(x)*sin(y)/(1+x^2)", "z"), "0");
    }
}
