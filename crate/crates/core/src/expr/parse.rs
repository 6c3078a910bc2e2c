//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          (right associative, integer exponent)
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```

use thiserror::Error;

use super::{Constant, Expr, Func, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownFunction { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Dec(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn syntax(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        if c.is_ascii_digit() || (c == b'.' && self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit)) {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            return Ok((start, Tok::Ident(name)));
        }
        self.pos += 1;
        match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Ok((start, Tok::Op(c as char))),
            b'(' => Ok((start, Tok::LParen)),
            b')' => Ok((start, Tok::RParen)),
            _ => Err(self.syntax(start, format!("unexpected character `{}`", c as char))),
        }
    }

    fn number(&mut self, start: usize) -> Result<(usize, Tok), ParseError> {
        let digits = |lx: &mut Self| {
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_digit() {
                lx.pos += 1;
            }
        };
        digits(self);
        let mut decimal = false;
        if self.src.get(self.pos) == Some(&b'.') {
            decimal = true;
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                decimal = true;
                digits(self);
            } else {
                self.pos = save;
            }
        }
        if self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphabetic() || *c == b'_') {
            return Err(self.syntax(self.pos, "identifier cannot follow a number"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if decimal {
            text.parse::<f64>()
                .map(|v| (start, Tok::Dec(v)))
                .map_err(|_| self.syntax(start, format!("bad number `{text}`")))
        } else {
            text.parse::<i64>()
                .map(|v| (start, Tok::Int(v)))
                .map_err(|_| self.syntax(start, format!("integer literal `{text}` out of range")))
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok),
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(usize, Tok), ParseError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.peeked.0,
            message: message.into(),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.product()?];
        loop {
            match self.peeked.1 {
                Tok::Op('+') => {
                    self.bump()?;
                    terms.push(self.product()?);
                }
                Tok::Op('-') => {
                    self.bump()?;
                    terms.push(Expr::neg(self.product()?));
                }
                _ => break,
            }
        }
        Ok(Expr::add_all(terms))
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peeked.1 {
                Tok::Op('*') => {
                    self.bump()?;
                    let rhs = self.unary()?;
                    acc = Expr::mul_all([acc, rhs]);
                }
                Tok::Op('/') => {
                    self.bump()?;
                    let rhs = self.unary()?;
                    acc = Expr::div(acc, rhs);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peeked.1 == Tok::Op('-') {
            self.bump()?;
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peeked.1 != Tok::Op('^') {
            return Ok(base);
        }
        self.bump()?;
        let at = self.peeked.0;
        let exponent = self.unary()?;
        let n = match exponent.as_const() {
            Some(Constant::Rational(r)) if r.is_integer() && r.numer().abs() <= i32::MAX as i64 => {
                *r.numer() as i32
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: at,
                    message: "exponent must be an integer constant".into(),
                })
            }
        };
        Ok(Expr::pow(base, n))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (at, tok) = self.bump()?;
        match tok {
            Tok::Int(n) => Ok(Expr::constant(Constant::Rational(Rational::from_integer(n)))),
            Tok::Dec(v) => Ok(Expr::decimal(v)),
            Tok::Ident(name) => {
                if self.peeked.1 == Tok::LParen {
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
                        offset: at,
                        name: name.clone(),
                    })?;
                    self.bump()?;
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    Ok(Expr::func(func, arg))
                } else {
                    Ok(Expr::var(&name))
                }
            }
            Tok::LParen => {
                let inner = self.sum()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::End => Err(ParseError::Syntax {
                offset: at,
                message: "unexpected end of input".into(),
            }),
            other => Err(ParseError::Syntax {
                offset: at,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peeked.1 != Tok::RParen {
            return Err(self.err("expected `)`"));
        }
        self.bump()?;
        Ok(())
    }
}

/// Parse `text` into an expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut lexer = Lexer {
        src: text.as_bytes(),
        pos: 0,
    };
    let first = lexer.next()?;
    let mut p = Parser { lexer, peeked: first };
    let e = p.sum()?;
    if p.peeked.1 != Tok::End {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Kind;

    #[test]
    fn product_of_variables() {
        let e = parse_expr("p*s").unwrap();
        assert_eq!(e, Expr::var("p") * Expr::var("s"));
    }

    #[test]
    fn integer_constants_stay_exact() {
        let e = parse_expr("2*(d0*d3 - d1*d2)").unwrap();
        match e.kind() {
            Kind::Mul(xs) => {
                assert!(matches!(xs[0].as_const(), Some(Constant::Rational(r)) if r == Rational::from_integer(2)));
                assert!(matches!(xs[1].kind(), Kind::Add(_)));
            }
            _ => panic!("expected product, got {e}"),
        }
    }

    #[test]
    fn third_order_ode_rhs_is_a_quotient() {
        let e = parse_expr("(y2*(y2*x-y1))/(y1*x-y)").unwrap();
        assert!(matches!(e.kind(), Kind::Div(..)));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse_expr("2^3^2").unwrap(), Expr::int(512));
        assert_eq!(parse_expr("-x^2").unwrap(), -Expr::var("x").powi(2));
        assert_eq!(parse_expr("a/b/c").unwrap(), Expr::var("a") / Expr::var("b") / Expr::var("c"));
        assert_eq!(parse_expr("1 - 2 - 3").unwrap(), Expr::int(-4));
        assert_eq!(parse_expr("3/6").unwrap(), Expr::rational(1, 2));
        assert_eq!(parse_expr("x^-2").unwrap(), Expr::var("x").powi(-2));
    }

    #[test]
    fn decimals_and_exponent_notation() {
        assert_eq!(parse_expr("0.25").unwrap().as_const().unwrap().to_f64(), 0.25);
        assert_eq!(parse_expr("1e-5").unwrap().as_const().unwrap().to_f64(), 1e-5);
        assert_eq!(parse_expr(".5").unwrap().as_const().unwrap().to_f64(), 0.5);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_expr("x + * y").unwrap_err();
        assert_eq!(err.offset(), 4);
        let err = parse_expr("(x + y").unwrap_err();
        assert_eq!(err.offset(), 6);
        let err = parse_expr("x^y").unwrap_err();
        assert_eq!(err.offset(), 2);
        assert!(parse_expr("x $ y").is_err());
        assert!(parse_expr("").is_err());
        assert!(parse_expr("2x").is_err());
    }

    #[test]
    fn unknown_functions_are_rejected() {
        let err = parse_expr("1 + tan(x)").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownFunction {
                offset: 4,
                name: "tan".into()
            }
        );
    }

    #[test]
    fn print_parse_round_trip_on_fixed_cases() {
        for src in [
            "-x + y",
            "a - (b + c)",
            "x*(-2)",
            "-1/2*x",
            "x/(y*z)",
            "(x^2)^3",
            "exp(-x)*sin(y^2)/sqrt(1 + x)",
            "-(a*b) - c/d",
            "x^(-3) + 0.1*y - 1e-7",
            "a/b*c",
            "a*(b/c)",
            "2 - x*-y",
        ] {
            let e = parse_expr(src).unwrap();
            let again = parse_expr(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }
}
