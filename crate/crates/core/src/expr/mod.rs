//! Immutable expression trees over named real variables.
//!
//! Nodes are reference counted and never mutated, so large derived
//! expressions (total derivatives, curvature components) share structure
//! freely across threads. Construction goes through smart constructors that
//! fold constants and strip neutral elements; there is no canonical
//! simplifier, identities are checked by sampling (see [`sample`]).

mod diff;
mod eval;
mod parse;
pub mod sample;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, Zero};

pub use eval::{EvalError, EvalPoint, Evaluation, Program, DIVISION_FLOOR};
pub use parse::{parse_expr, ParseError};

pub type Rational = Ratio<i64>;

/// Numeric leaf value. Integer and `a/b` literals stay exact; decimal
/// literals are kept as doubles.
#[derive(Clone, Copy, Debug)]
pub enum Constant {
    Rational(Rational),
    Decimal(f64),
}

impl Constant {
    pub fn to_f64(self) -> f64 {
        match self {
            Constant::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Constant::Decimal(d) => d,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Constant::Rational(r) => r.is_zero(),
            Constant::Decimal(d) => d == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Constant::Rational(r) => r.is_one(),
            Constant::Decimal(d) => d == 1.0,
        }
    }

    fn is_negative(self) -> bool {
        match self {
            Constant::Rational(r) => r.is_negative(),
            Constant::Decimal(d) => d.is_sign_negative() && d != 0.0,
        }
    }

    fn add(self, other: Constant) -> Constant {
        if let (Constant::Rational(a), Constant::Rational(b)) = (self, other) {
            if let Some(c) = a.checked_add(&b) {
                return Constant::Rational(c);
            }
        }
        Constant::Decimal(self.to_f64() + other.to_f64())
    }

    fn mul(self, other: Constant) -> Constant {
        if let (Constant::Rational(a), Constant::Rational(b)) = (self, other) {
            if let Some(c) = a.checked_mul(&b) {
                return Constant::Rational(c);
            }
        }
        Constant::Decimal(self.to_f64() * other.to_f64())
    }

    fn neg(self) -> Constant {
        match self {
            Constant::Rational(r) if *r.numer() != i64::MIN => Constant::Rational(-r),
            c => Constant::Decimal(-c.to_f64()),
        }
    }

    fn div(self, other: Constant) -> Option<Constant> {
        if other.is_zero() {
            return None;
        }
        if let (Constant::Rational(a), Constant::Rational(b)) = (self, other) {
            if let Some(inv) = checked_recip(b) {
                if let Some(c) = a.checked_mul(&inv) {
                    return Some(Constant::Rational(c));
                }
            }
        }
        Some(Constant::Decimal(self.to_f64() / other.to_f64()))
    }

    fn powi(self, n: i32) -> Option<Constant> {
        if self.is_zero() && n < 0 {
            return None;
        }
        if let Constant::Rational(r) = self {
            let mut acc = Rational::one();
            let base = if n < 0 { checked_recip(r) } else { Some(r) };
            if let Some(base) = base {
                let mut ok = true;
                for _ in 0..n.unsigned_abs() {
                    match acc.checked_mul(&base) {
                        Some(v) => acc = v,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    return Some(Constant::Rational(acc));
                }
            }
        }
        let v = self.to_f64().powi(n);
        v.is_finite().then_some(Constant::Decimal(v))
    }

    fn bits_eq(self, other: Constant) -> bool {
        match (self, other) {
            (Constant::Rational(a), Constant::Rational(b)) => a == b,
            (Constant::Decimal(a), Constant::Decimal(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

fn checked_recip(r: Rational) -> Option<Rational> {
    if r.is_zero() || *r.numer() == i64::MIN {
        return None;
    }
    Some(r.recip())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Kind {
    Const(Constant),
    Var(Arc<str>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Neg(Expr),
    Func(Func, Expr),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
}

/// Shared, immutable expression.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn structural_hash(kind: &Kind) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    match kind {
        Kind::Const(c) => {
            0u8.hash(&mut h);
            match c {
                Constant::Rational(r) => {
                    r.numer().hash(&mut h);
                    r.denom().hash(&mut h);
                }
                Constant::Decimal(d) => d.to_bits().hash(&mut h),
            }
        }
        Kind::Var(v) => {
            1u8.hash(&mut h);
            v.hash(&mut h);
        }
        Kind::Add(xs) => {
            2u8.hash(&mut h);
            xs.iter().for_each(|x| x.0.hash.hash(&mut h));
        }
        Kind::Mul(xs) => {
            3u8.hash(&mut h);
            xs.iter().for_each(|x| x.0.hash.hash(&mut h));
        }
        Kind::Div(a, b) => {
            4u8.hash(&mut h);
            a.0.hash.hash(&mut h);
            b.0.hash.hash(&mut h);
        }
        Kind::Pow(a, n) => {
            5u8.hash(&mut h);
            a.0.hash.hash(&mut h);
            n.hash(&mut h);
        }
        Kind::Neg(a) => {
            6u8.hash(&mut h);
            a.0.hash.hash(&mut h);
        }
        Kind::Func(f, a) => {
            7u8.hash(&mut h);
            f.hash(&mut h);
            a.0.hash.hash(&mut h);
        }
    }
    h.finish()
}

impl Expr {
    fn raw(kind: Kind) -> Expr {
        let hash = structural_hash(&kind);
        Expr(Arc::new(Node { kind, hash }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub(crate) fn ptr(&self) -> *const () {
        Arc::as_ptr(&self.0) as *const ()
    }

    pub fn constant(c: Constant) -> Expr {
        Expr::raw(Kind::Const(c))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Constant::Rational(Rational::from_integer(n)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    /// Exact rational `n/d`. Panics if `d == 0`.
    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::constant(Constant::Rational(Rational::new(n, d)))
    }

    pub fn decimal(v: f64) -> Expr {
        Expr::constant(Constant::Decimal(v))
    }

    pub fn var(name: &str) -> Expr {
        assert!(!name.is_empty(), "variable names must be nonempty");
        Expr::raw(Kind::Var(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<Constant> {
        match self.kind() {
            Kind::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Structurally the constant zero (not a semantic test).
    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Constant::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(Constant::is_one)
    }

    pub fn add_all<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut out = Vec::new();
        let mut konst: Option<Constant> = None;
        for t in terms {
            match t.kind() {
                Kind::Add(inner) => {
                    for u in inner {
                        match u.as_const() {
                            Some(c) => konst = Some(konst.map_or(c, |k| k.add(c))),
                            None => out.push(u.clone()),
                        }
                    }
                }
                Kind::Const(c) => konst = Some(konst.map_or(*c, |k| k.add(*c))),
                _ => out.push(t),
            }
        }
        if let Some(c) = konst {
            if !c.is_zero() || out.is_empty() {
                out.insert(0, Expr::constant(c));
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::raw(Kind::Add(out)),
        }
    }

    pub fn mul_all<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut out = Vec::new();
        let mut konst: Option<Constant> = None;
        for f in factors {
            match f.kind() {
                Kind::Mul(inner) => {
                    for u in inner {
                        match u.as_const() {
                            Some(c) => konst = Some(konst.map_or(c, |k| k.mul(c))),
                            None => out.push(u.clone()),
                        }
                    }
                }
                Kind::Const(c) => konst = Some(konst.map_or(*c, |k| k.mul(*c))),
                _ => out.push(f),
            }
        }
        if let Some(c) = konst {
            if c.is_zero() {
                return Expr::constant(c);
            }
            if !c.is_one() || out.is_empty() {
                out.insert(0, Expr::constant(c));
            }
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::raw(Kind::Mul(out)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if let Some(cb) = b.as_const() {
            if cb.is_one() {
                return a;
            }
            if let Some(ca) = a.as_const() {
                if let Some(c) = ca.div(cb) {
                    return Expr::constant(c);
                }
            }
        }
        if a.is_zero() && !b.is_zero() {
            return a;
        }
        Expr::raw(Kind::Div(a, b))
    }

    pub fn pow(base: Expr, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return base;
        }
        if let Some(c) = base.as_const() {
            if let Some(v) = c.powi(n) {
                return Expr::constant(v);
            }
        }
        // (a^m)^n = a^(mn) except when both are negative (0 is then a removable point).
        if let Kind::Pow(a, m) = base.kind() {
            if *m > 0 || n > 0 {
                if let Some(mn) = i32::checked_mul(*m, n) {
                    return Expr::pow(a.clone(), mn);
                }
            }
        }
        Expr::raw(Kind::Pow(base, n))
    }

    pub fn neg(a: Expr) -> Expr {
        match a.kind() {
            Kind::Const(c) => Expr::constant(c.neg()),
            Kind::Neg(inner) => inner.clone(),
            _ => Expr::raw(Kind::Neg(a)),
        }
    }

    pub fn func(f: Func, a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            let folded = match (f, c.is_zero(), c.is_one()) {
                (Func::Exp, true, _) | (Func::Cos, true, _) => Some(Expr::one()),
                (Func::Sin, true, _) | (Func::Sqrt, true, _) => Some(Expr::zero()),
                (Func::Log, _, true) | (Func::Sqrt, _, true) => Some(if f == Func::Log {
                    Expr::zero()
                } else {
                    Expr::one()
                }),
                _ => None,
            };
            if let Some(e) = folded {
                return e;
            }
        }
        Expr::raw(Kind::Func(f, a))
    }

    pub fn exp(&self) -> Expr {
        Expr::func(Func::Exp, self.clone())
    }

    pub fn log(&self) -> Expr {
        Expr::func(Func::Log, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Expr::func(Func::Sqrt, self.clone())
    }

    pub fn sin(&self) -> Expr {
        Expr::func(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::func(Func::Cos, self.clone())
    }

    pub fn powi(&self, n: i32) -> Expr {
        Expr::pow(self.clone(), n)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.kind() {
            Kind::Const(_) | Kind::Var(_) => vec![],
            Kind::Add(xs) | Kind::Mul(xs) => xs.iter().collect(),
            Kind::Div(a, b) => vec![a, b],
            Kind::Pow(a, _) | Kind::Neg(a) | Kind::Func(_, a) => vec![a],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut seen = std::collections::HashSet::new();
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr()) {
                continue;
            }
            if let Kind::Var(v) = e.kind() {
                out.insert(v.to_string());
            }
            stack.extend(e.children());
        }
        out
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn node_count(&self) -> usize {
        count_nodes(std::slice::from_ref(self))
    }

    /// Simultaneous substitution of variables by expressions.
    pub fn substitute(&self, bindings: &HashMap<String, Expr>) -> Expr {
        let mut memo = HashMap::new();
        self.subst_memo(bindings, &mut memo)
    }

    pub(crate) fn subst_memo(
        &self,
        bindings: &HashMap<String, Expr>,
        memo: &mut HashMap<*const (), Expr>,
    ) -> Expr {
        if let Some(e) = memo.get(&self.ptr()) {
            return e.clone();
        }
        let out = match self.kind() {
            Kind::Const(_) => self.clone(),
            Kind::Var(v) => bindings.get(v.as_ref()).cloned().unwrap_or_else(|| self.clone()),
            Kind::Add(xs) => Expr::add_all(xs.iter().map(|x| x.subst_memo(bindings, memo))),
            Kind::Mul(xs) => Expr::mul_all(xs.iter().map(|x| x.subst_memo(bindings, memo))),
            Kind::Div(a, b) => Expr::div(a.subst_memo(bindings, memo), b.subst_memo(bindings, memo)),
            Kind::Pow(a, n) => Expr::pow(a.subst_memo(bindings, memo), *n),
            Kind::Neg(a) => Expr::neg(a.subst_memo(bindings, memo)),
            Kind::Func(f, a) => Expr::func(*f, a.subst_memo(bindings, memo)),
        };
        memo.insert(self.ptr(), out.clone());
        out
    }

    /// Substitute numeric values for some variables.
    pub fn substitute_values(&self, values: &[(&str, f64)]) -> Expr {
        let bindings = values
            .iter()
            .map(|(k, v)| (k.to_string(), Expr::from_f64(*v)))
            .collect();
        self.substitute(&bindings)
    }

    /// Constant for `v`: exact when `v` is an integer, decimal otherwise.
    pub fn from_f64(v: f64) -> Expr {
        if v.fract() == 0.0 && v.abs() < 1e15 {
            Expr::int(v as i64)
        } else {
            Expr::decimal(v)
        }
    }

    /// Rename variables (substitution by variables).
    pub fn rename(&self, pairs: &[(&str, &str)]) -> Expr {
        let bindings = pairs
            .iter()
            .map(|(a, b)| (a.to_string(), Expr::var(b)))
            .collect();
        self.substitute(&bindings)
    }
}

pub(crate) fn count_nodes(roots: &[Expr]) -> usize {
    let mut seen = std::collections::HashSet::new();
    let mut stack: Vec<&Expr> = roots.iter().collect();
    while let Some(e) = stack.pop() {
        if seen.insert(e.ptr()) {
            stack.extend(e.children());
        }
    }
    seen.len()
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.kind(), other.kind()) {
            (Kind::Const(a), Kind::Const(b)) => a.bits_eq(*b),
            (Kind::Var(a), Kind::Var(b)) => a == b,
            (Kind::Add(a), Kind::Add(b)) | (Kind::Mul(a), Kind::Mul(b)) => a == b,
            (Kind::Div(a1, b1), Kind::Div(a2, b2)) => a1 == a2 && b1 == b2,
            (Kind::Pow(a, n), Kind::Pow(b, m)) => n == m && a == b,
            (Kind::Neg(a), Kind::Neg(b)) => a == b,
            (Kind::Func(f, a), Kind::Func(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<&Expr> for Expr {
    fn from(e: &Expr) -> Self {
        e.clone()
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<R: Into<Expr>> ops::$tr<R> for Expr {
            type Output = Expr;
            fn $method(self, rhs: R) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.into())
            }
        }
        impl<R: Into<Expr>> ops::$tr<R> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: R) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.into())
            }
        }
        impl ops::$tr<Expr> for i64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(Expr::int(self), rhs)
            }
        }
        impl ops::$tr<&Expr> for i64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(Expr::int(self), rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add_all([a, b]));
binop!(Sub, sub, |a, b| Expr::add_all([a, Expr::neg(b)]));
binop!(Mul, mul, |a, b| Expr::mul_all([a, b]));
binop!(Div, div, Expr::div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self.clone())
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::add_all(iter)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::mul_all(iter)
    }
}

// Printing. Precedence levels: 1 sum, 2 product/quotient, 3 unary minus,
// 4 power, 5 atom. The printer parenthesizes so that parsing the output
// rebuilds the identical tree.

fn const_level(c: Constant) -> u8 {
    match c {
        Constant::Rational(r) if r.is_integer() => {
            if r.is_negative() {
                3
            } else {
                5
            }
        }
        Constant::Rational(_) => 2,
        Constant::Decimal(_) => {
            if c.is_negative() {
                3
            } else {
                5
            }
        }
    }
}

fn level(e: &Expr) -> u8 {
    match e.kind() {
        Kind::Const(c) => const_level(*c),
        Kind::Var(_) | Kind::Func(..) => 5,
        Kind::Add(_) => 1,
        Kind::Mul(_) | Kind::Div(..) => 2,
        Kind::Neg(_) => 3,
        Kind::Pow(..) => 4,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Constant) -> fmt::Result {
    match c {
        Constant::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
        Constant::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        // `{:?}` keeps a '.' or exponent, so decimals re-lex as decimals.
        Constant::Decimal(d) => write!(f, "{d:?}"),
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min_level: u8) -> fmt::Result {
    if level(e) < min_level {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.kind() {
        Kind::Const(c) => write_const(f, *c),
        Kind::Var(v) => write!(f, "{v}"),
        Kind::Add(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i == 0 {
                    write_at(f, x, 2)?;
                } else if let Kind::Neg(inner) = x.kind() {
                    write!(f, " - ")?;
                    write_at(f, inner, 2)?;
                } else {
                    write!(f, " + ")?;
                    write_at(f, x, 2)?;
                }
            }
            Ok(())
        }
        Kind::Mul(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if i == 0 {
                    write_at(f, x, 2)?;
                } else {
                    write!(f, "*")?;
                    write_at(f, x, 4)?;
                }
            }
            Ok(())
        }
        Kind::Div(a, b) => {
            write_at(f, a, 2)?;
            write!(f, "/")?;
            write_at(f, b, 4)
        }
        Kind::Pow(a, n) => {
            write_at(f, a, 5)?;
            if *n < 0 {
                write!(f, "^({n})")
            } else {
                write!(f, "^{n}")
            }
        }
        Kind::Neg(a) => {
            write!(f, "-")?;
            write_at(f, a, 4)
        }
        Kind::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Expr {
        Expr::var(n)
    }

    #[test]
    #[allow(clippy::erasing_op)]
    fn constants_fold_and_neutral_elements_vanish() {
        assert_eq!(Expr::int(2) + 3, Expr::int(5));
        assert_eq!(v("x") * 0, Expr::zero());
        assert_eq!(v("x") * 1, v("x"));
        assert_eq!(v("x") + 0, v("x"));
        assert_eq!(Expr::int(1) / 2 + Expr::rational(1, 2), Expr::one());
        assert_eq!(Expr::pow(Expr::rational(2, 3), -2), Expr::rational(9, 4));
        assert_eq!(-(-v("x")), v("x"));
    }

    #[test]
    fn sums_and_products_flatten() {
        let e = (v("a") + v("b")) + (v("c") + 1);
        match e.kind() {
            Kind::Add(xs) => assert_eq!(xs.len(), 4),
            _ => panic!("expected sum"),
        }
        let e = v("a") * (v("b") * 2) * 3;
        assert_eq!(e.to_string(), "6*a*b");
    }

    #[test]
    fn structural_equality_is_not_semantic() {
        assert_ne!(v("a") + v("b"), v("b") + v("a"));
        assert_eq!(v("a") + v("b"), v("a") + v("b"));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let e = v("x") - v("y");
        let mut b = HashMap::new();
        b.insert("x".to_string(), v("y"));
        b.insert("y".to_string(), v("x"));
        assert_eq!(e.substitute(&b).to_string(), "y - x");
    }

    #[test]
    fn node_count_counts_shared_nodes_once() {
        let s = v("x") + v("y");
        let e = &s * &s;
        assert_eq!(e.node_count(), 4);
    }
}
