//! Textual forms of field elements, scalars, matrices and group-ring
//! elements.
//!
//! One whitespace-insensitive expression grammar covers all of them:
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ['^' ['-'] digits]
//! atom   := digits | 'sqrt(' digits ')' | 'a2' | 'a3' | 'e'
//!         | '(' expr ')' | '[[' expr ',' expr '],[' expr ',' expr ']]'
//! ```
//!
//! Products of group-ring elements multiply in the ring, so factored forms
//! like `(1 - [[3,-1],[13,-4]])*(1 + [[5,-2],[13,-5]])` are accepted and
//! normalized. Printers only ever emit expanded sums.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::exactnum::{QuadElem, ScalarPoly};
use crate::groupring::RingElem;
use crate::projmat::{Mat2, ProjMat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Ident(s) => f.write_str(s),
            Tok::Sym(c) => write!(f, "'{c}'"),
        }
    }
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = s[start..i].parse().expect("digits");
            out.push((start, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(s[start..i].to_string())));
        } else if "+-*/^()[],".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError { pos: i, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Val {
    Scalar(ScalarPoly),
    Ring(RingElem),
}

impl Val {
    fn into_ring(self) -> RingElem {
        match self {
            Val::Scalar(s) => RingElem::scalar(s),
            Val::Ring(r) => r,
        }
    }
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    i: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.1)
    }

    fn peek_sym(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Sym(c))
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek_sym(c) {
            self.i += 1;
            Ok(())
        } else {
            match self.peek() {
                Some(t) => self.err(format!("expected '{c}', found {t}")),
                None => self.err(format!("expected '{c}', found end of input")),
            }
        }
    }

    fn expect_int(&mut self) -> Result<BigInt, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.i += 1;
                Ok(n)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn expr(&mut self) -> Result<Val, ParseError> {
        let mut neg = false;
        if self.peek_sym('-') {
            neg = true;
            self.i += 1;
        } else if self.peek_sym('+') {
            self.i += 1;
        }
        let mut acc = self.term()?;
        if neg {
            acc = negate(acc);
        }
        loop {
            if self.peek_sym('+') {
                self.i += 1;
                let t = self.term()?;
                acc = add(acc, t);
            } else if self.peek_sym('-') {
                self.i += 1;
                let t = self.term()?;
                acc = add(acc, negate(t));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Val, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.peek_sym('*') {
                self.i += 1;
                let f = self.factor()?;
                acc = self.mul(acc, f)?;
            } else if self.peek_sym('/') {
                self.i += 1;
                let pos = self.pos();
                let f = self.factor()?;
                let inv = match f {
                    Val::Scalar(s) => s.as_constant().and_then(|c| c.inv().ok()),
                    Val::Ring(_) => None,
                };
                let Some(inv) = inv else {
                    return Err(ParseError { pos, msg: "divisor must be a nonzero constant".into() });
                };
                acc = self.mul(acc, Val::Scalar(ScalarPoly::constant(inv)))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn mul(&self, x: Val, y: Val) -> Result<Val, ParseError> {
        let r = match (x, y) {
            (Val::Scalar(a), Val::Scalar(b)) => a.checked_mul(&b).map(Val::Scalar),
            (Val::Scalar(s), Val::Ring(r)) | (Val::Ring(r), Val::Scalar(s)) => r.checked_scale(&s).map(Val::Ring),
            (Val::Ring(a), Val::Ring(b)) => a.checked_right_mul(&b).map(Val::Ring),
        };
        r.or_else(|e| self.err(e.to_string()))
    }

    fn factor(&mut self) -> Result<Val, ParseError> {
        let base = self.atom()?;
        if !self.peek_sym('^') {
            return Ok(base);
        }
        self.i += 1;
        let pos = self.pos();
        let neg = if self.peek_sym('-') {
            self.i += 1;
            true
        } else {
            false
        };
        let e = self.expect_int()?.to_i64().filter(|e| *e <= u16::MAX as i64);
        let Some(e) = e else {
            return Err(ParseError { pos, msg: "exponent out of range".into() });
        };
        let e = if neg { -e } else { e };
        let bad = |msg: &str| Err(ParseError { pos, msg: msg.into() });
        match base {
            Val::Scalar(s) => {
                if e >= 0 {
                    match s.pow(e as u32) {
                        Ok(p) => Ok(Val::Scalar(p)),
                        Err(err) => bad(&err.to_string()),
                    }
                } else {
                    match s.as_constant().and_then(|c| c.pow(e).ok()) {
                        Some(c) => Ok(Val::Scalar(ScalarPoly::constant(c))),
                        None => bad("negative power of a non-invertible scalar"),
                    }
                }
            }
            Val::Ring(r) => match r.pow(e) {
                Some(p) => Ok(Val::Ring(p)),
                None => bad("negative power of a group-ring element with several terms"),
            },
        }
    }

    fn atom(&mut self) -> Result<Val, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of input");
        };
        match tok {
            Tok::Int(n) => {
                self.i += 1;
                Ok(Val::Scalar(ScalarPoly::constant(QuadElem::from_rational(BigRational::from_integer(n)))))
            }
            Tok::Ident(name) => {
                let pos = self.pos();
                self.i += 1;
                match name.as_str() {
                    "a2" => Ok(Val::Scalar(ScalarPoly::alpha2())),
                    "a3" => Ok(Val::Scalar(ScalarPoly::alpha3())),
                    "e" => Ok(Val::Scalar(ScalarPoly::eps())),
                    "sqrt" => {
                        self.expect_sym('(')?;
                        let dpos = self.pos();
                        let d = self.expect_int()?;
                        self.expect_sym(')')?;
                        let q = d.to_u32().ok_or(()).and_then(|d| QuadElem::sqrt_d(d).map_err(|_| ()));
                        match q {
                            Ok(q) => Ok(Val::Scalar(ScalarPoly::constant(q))),
                            Err(()) => Err(ParseError { pos: dpos, msg: format!("bad radicand {d}") }),
                        }
                    }
                    _ => Err(ParseError { pos, msg: format!("unknown symbol {name:?}") }),
                }
            }
            Tok::Sym('(') => {
                self.i += 1;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Sym('[') => {
                let pos = self.pos();
                let m = self.raw_matrix()?;
                match ProjMat::canonicalize(&m) {
                    Ok(p) => Ok(Val::Ring(RingElem::from_mat(p))),
                    Err(e) => Err(ParseError { pos, msg: e.to_string() }),
                }
            }
            t => self.err(format!("unexpected {t}")),
        }
    }

    fn entry(&mut self) -> Result<QuadElem, ParseError> {
        let pos = self.pos();
        match self.expr()? {
            Val::Scalar(s) => match s.as_constant() {
                Some(c) => Ok(c),
                None => Err(ParseError { pos, msg: "matrix entries must be constants".into() }),
            },
            Val::Ring(_) => Err(ParseError { pos, msg: "matrix entries must be constants".into() }),
        }
    }

    fn raw_matrix(&mut self) -> Result<Mat2, ParseError> {
        self.expect_sym('[')?;
        self.expect_sym('[')?;
        let a = self.entry()?;
        self.expect_sym(',')?;
        let b = self.entry()?;
        self.expect_sym(']')?;
        self.expect_sym(',')?;
        self.expect_sym('[')?;
        let c = self.entry()?;
        self.expect_sym(',')?;
        let d = self.entry()?;
        self.expect_sym(']')?;
        self.expect_sym(']')?;
        Ok(Mat2::new(a, b, c, d))
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => self.err(format!("trailing input starting at {t}")),
        }
    }
}

fn negate(v: Val) -> Val {
    match v {
        Val::Scalar(s) => Val::Scalar(-s),
        Val::Ring(r) => Val::Ring(-r),
    }
}

fn add(x: Val, y: Val) -> Val {
    match (x, y) {
        (Val::Scalar(a), Val::Scalar(b)) => Val::Scalar(a + b),
        (x, y) => Val::Ring(x.into_ring() + y.into_ring()),
    }
}

fn run<T>(s: &str, f: impl FnOnce(&mut Parser) -> Result<T, ParseError>) -> Result<T, ParseError> {
    let toks = lex(s)?;
    let mut p = Parser { toks: &toks, i: 0, end: s.len() };
    let v = f(&mut p)?;
    p.finish()?;
    Ok(v)
}

pub fn parse_scalar(s: &str) -> Result<ScalarPoly, ParseError> {
    match run(s, |p| p.expr())? {
        Val::Scalar(x) => Ok(x),
        Val::Ring(_) => Err(ParseError { pos: 0, msg: "expected a scalar, found a group-ring element".into() }),
    }
}

pub fn parse_quad(s: &str) -> Result<QuadElem, ParseError> {
    parse_scalar(s)?
        .as_constant()
        .ok_or_else(|| ParseError { pos: 0, msg: "expected a field element, found symbols".into() })
}

pub fn parse_ring(s: &str) -> Result<RingElem, ParseError> {
    Ok(run(s, |p| p.expr())?.into_ring())
}

/// A raw matrix literal, without canonicalization.
pub fn parse_mat2(s: &str) -> Result<Mat2, ParseError> {
    run(s, |p| p.raw_matrix())
}

pub fn parse_matrix(s: &str) -> Result<ProjMat, ParseError> {
    let m = parse_mat2(s)?;
    ProjMat::canonicalize(&m).map_err(|e| ParseError { pos: 0, msg: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::Monomial;

    #[test]
    fn quad_literals() {
        assert_eq!(parse_quad("4+1*sqrt(13)").unwrap(), QuadElem::from_parts((4, 1), (1, 1), 13));
        assert_eq!(parse_quad(" -2/9 + 1/9 * sqrt( 13 ) ").unwrap(), QuadElem::from_parts((-2, 9), (1, 9), 13));
        assert_eq!(parse_quad("-14/39*sqrt(13)").unwrap(), QuadElem::from_parts((0, 1), (-14, 39), 13));
        assert_eq!(parse_quad("3").unwrap(), QuadElem::from_int(3));
        assert_eq!(parse_quad("-3/6").unwrap(), QuadElem::from_ratio(-1, 2));
    }

    #[test]
    fn quad_errors_have_positions() {
        let e = parse_quad("1 + sqrt(12)").unwrap_err();
        assert_eq!(e.pos, 9);
        let e = parse_quad("1 +").unwrap_err();
        assert_eq!(e.pos, 3);
        assert!(parse_quad("a2").is_err());
        assert!(parse_quad("1/0").is_err());
    }

    #[test]
    fn scalar_monomials() {
        let p = parse_scalar("3/2*e*a2^2 - a3").unwrap();
        let expected = ScalarPoly::from_terms([
            (Monomial { a2: 2, a3: 0, eps: true }, QuadElem::from_ratio(3, 2)),
            (Monomial { a2: 0, a3: 1, eps: false }, QuadElem::from_int(-1)),
        ]);
        assert_eq!(p, expected);
        assert_eq!(parse_scalar("e^3").unwrap(), ScalarPoly::eps());
    }

    #[test]
    fn ring_with_factored_product() {
        let r = parse_ring("(1 - [[3,-1],[13,-4]])*(1 - e*[[39,-14],[117,-39]])").unwrap();
        let s = parse_ring("1 - e*[[39,-14],[117,-39]] - [[3,-1],[13,-4]] + e*[[0,-3],[39,-26]]").unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn matrix_inverse_power() {
        let r = parse_ring("[[2,0],[-13,1]]*[[1,1],[0,2]]^-1").unwrap();
        assert_eq!(r, parse_ring("[[2,-1],[-13,7]]").unwrap());
    }

    #[test]
    fn negative_determinant_rejected() {
        let e = parse_ring("1 + [[0,1],[1,0]]").unwrap_err();
        assert_eq!(e.pos, 4);
    }

    #[test]
    fn trailing_garbage() {
        assert!(parse_ring("[[1,0],[0,1]] ]").is_err());
        assert!(parse_matrix("[[1,0],[0,1]").is_err());
    }
}
