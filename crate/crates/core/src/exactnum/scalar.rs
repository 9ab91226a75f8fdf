//! The coefficient ring `ℚ(√D)[α₂, α₃, ε] / (ε² − 1)`.
//!
//! `α₂`, `α₃` stand for the normalized Hecke eigenvalues `p^{1−k/2}·a_p` at
//! 2 and 3 and `ε` for the root number. Representation is a sparse map from
//! monomials to nonzero coefficients, so structural equality is ring equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

use super::quad::{fmt_rational, QuadElem};
use super::ExactError;

/// `α₂^a2 · α₃^a3 · ε^eps`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    pub a2: u16,
    pub a3: u16,
    pub eps: bool,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { a2: 0, a3: 0, eps: false };
    pub const EPS: Monomial = Monomial { a2: 0, a3: 0, eps: true };

    fn key(&self) -> (u32, u16, u16, bool) {
        (self.a2 as u32 + self.a3 as u32, self.a2, self.a3, self.eps)
    }

    pub fn checked_mul(&self, other: &Monomial) -> Result<Monomial, ExactError> {
        Ok(Monomial {
            a2: self.a2.checked_add(other.a2).ok_or(ExactError::ExponentOverflow)?,
            a3: self.a3.checked_add(other.a3).ok_or(ExactError::ExponentOverflow)?,
            eps: self.eps ^ other.eps,
        })
    }

    pub fn is_one(&self) -> bool {
        *self == Monomial::ONE
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.eps {
            parts.push("e".to_string());
        }
        for (name, exp) in [("a2", self.a2), ("a3", self.a3)] {
            match exp {
                0 => {}
                1 => parts.push(name.to_string()),
                n => parts.push(format!("{name}^{n}")),
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct ScalarPoly {
    terms: BTreeMap<Monomial, QuadElem>,
}

impl ScalarPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(QuadElem::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(QuadElem::from_int(n))
    }

    pub fn constant(c: QuadElem) -> Self {
        Self::monomial(Monomial::ONE, c)
    }

    pub fn monomial(m: Monomial, c: QuadElem) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ScalarPoly { terms }
    }

    pub fn alpha2() -> Self {
        Self::monomial(Monomial { a2: 1, ..Monomial::ONE }, QuadElem::one())
    }

    pub fn alpha3() -> Self {
        Self::monomial(Monomial { a3: 1, ..Monomial::ONE }, QuadElem::one())
    }

    pub fn eps() -> Self {
        Self::monomial(Monomial::EPS, QuadElem::one())
    }

    /// Builds a polynomial from arbitrary (possibly repeated, possibly zero)
    /// terms, merging and dropping as needed.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, QuadElem)>>(it: I) -> Self {
        let mut p = ScalarPoly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: QuadElem) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Rebuilds the canonical form. The stored form is always canonical, so
    /// this is the identity on values; it exists to state idempotence.
    pub fn normalize(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (*m, c.clone())))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &QuadElem)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value, if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<QuadElem> {
        match self.terms.len() {
            0 => Some(QuadElem::zero()),
            1 => self.terms.get(&Monomial::ONE).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &QuadElem) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, x)| (*m, x * c)))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ExactError> {
        let mut out = ScalarPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.checked_mul(m2)?, c1.checked_mul(c2)?);
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ExactError> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            if let Some(old) = out.terms.remove(m) {
                let s = old.checked_add(c)?;
                if !s.is_zero() {
                    out.terms.insert(*m, s);
                }
            } else {
                out.terms.insert(*m, c.clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self, ExactError> {
        let mut acc = ScalarPoly::one();
        for _ in 0..e {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    /// Leading sign for display purposes: true if the expression should be
    /// printed with a leading minus.
    pub(crate) fn prints_negative(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .values()
                .next()
                .is_some_and(leads_with_minus)
    }
}

/// Whether a coefficient prints as a single negative factor.
fn leads_with_minus(c: &QuadElem) -> bool {
    if c.rational_part().is_zero() {
        c.surd_part().is_negative()
    } else {
        c.is_rational() && c.rational_part().is_negative()
    }
}

fn fmt_coeff_factor(c: &QuadElem, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.is_rational() {
        fmt_rational(c.rational_part(), f)
    } else if c.rational_part().is_zero() {
        write!(f, "{c}")
    } else {
        write!(f, "({c})")
    }
}

impl fmt::Display for ScalarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = leads_with_minus(c);
            let mag = if neg { -c } else { c.clone() };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                fmt_coeff_factor(&mag, f)?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                fmt_coeff_factor(&mag, f)?;
                write!(f, "*{m}")?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for ScalarPoly {
    type Err = crate::text::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::text::parse_scalar(s)
    }
}

impl Add<&ScalarPoly> for &ScalarPoly {
    type Output = ScalarPoly;
    fn add(self, rhs: &ScalarPoly) -> ScalarPoly {
        self.checked_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Add for ScalarPoly {
    type Output = ScalarPoly;
    fn add(self, rhs: ScalarPoly) -> ScalarPoly {
        &self + &rhs
    }
}

impl Neg for &ScalarPoly {
    type Output = ScalarPoly;
    fn neg(self) -> ScalarPoly {
        ScalarPoly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }
}

impl Neg for ScalarPoly {
    type Output = ScalarPoly;
    fn neg(self) -> ScalarPoly {
        -&self
    }
}

impl Sub<&ScalarPoly> for &ScalarPoly {
    type Output = ScalarPoly;
    fn sub(self, rhs: &ScalarPoly) -> ScalarPoly {
        self + &(-rhs)
    }
}

impl Sub for ScalarPoly {
    type Output = ScalarPoly;
    fn sub(self, rhs: ScalarPoly) -> ScalarPoly {
        &self - &rhs
    }
}

impl Mul<&ScalarPoly> for &ScalarPoly {
    type Output = ScalarPoly;
    fn mul(self, rhs: &ScalarPoly) -> ScalarPoly {
        self.checked_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for ScalarPoly {
    type Output = ScalarPoly;
    fn mul(self, rhs: ScalarPoly) -> ScalarPoly {
        &self * &rhs
    }
}

impl From<QuadElem> for ScalarPoly {
    fn from(c: QuadElem) -> Self {
        ScalarPoly::constant(c)
    }
}

impl From<i64> for ScalarPoly {
    fn from(n: i64) -> Self {
        ScalarPoly::from_int(n)
    }
}
