//! Elements `a + b·√D` of a real quadratic field with exact rational parts.
//!
//! The surd radicand travels with each element. A purely rational element
//! (`b = 0`) carries no radicand at all, so it combines freely with elements
//! of any field; combining two irrational elements with different radicands
//! is a programming error and panics (the `checked_*` methods report it as
//! [`ExactError::FieldMismatch`] instead).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ExactError;

/// Radicand used by every shipped computation.
pub const DEFAULT_D: u32 = 13;

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct QuadElem {
    a: BigRational,
    b: BigRational,
    // Invariant: `d.is_some()` iff `b != 0`.
    d: Option<u32>,
}

pub(crate) fn is_squarefree(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u32;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        if n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

fn rat_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    (&sn * &sn == *n && &sd * &sd == *d).then(|| BigRational::new(sn, sd))
}

impl QuadElem {
    pub fn new(a: BigRational, b: BigRational, d: u32) -> Result<Self, ExactError> {
        if !is_squarefree(d) {
            return Err(ExactError::BadRadicand(d));
        }
        Ok(Self::build(a, b, Some(d)))
    }

    fn build(a: BigRational, b: BigRational, d: Option<u32>) -> Self {
        if b.is_zero() {
            QuadElem { a, b, d: None }
        } else {
            QuadElem { a, b, d }
        }
    }

    pub fn from_rational(a: BigRational) -> Self {
        QuadElem { a, b: BigRational::zero(), d: None }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_rational(BigRational::new(n.into(), d.into()))
    }

    /// `p/q + (r/s)·√D` from machine integers, mostly for tests and tables.
    pub fn from_parts(a: (i64, i64), b: (i64, i64), d: u32) -> Self {
        Self::new(
            BigRational::new(a.0.into(), a.1.into()),
            BigRational::new(b.0.into(), b.1.into()),
            d,
        )
        .expect("radicand must be squarefree")
    }

    /// `√D` itself.
    pub fn sqrt_d(d: u32) -> Result<Self, ExactError> {
        Self::new(BigRational::zero(), BigRational::one(), d)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.b
    }

    /// Radicand, or `None` for a rational element.
    pub fn radicand(&self) -> Option<u32> {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    fn join(&self, other: &Self) -> Result<Option<u32>, ExactError> {
        match (self.d, other.d) {
            (Some(x), Some(y)) if x != y => Err(ExactError::FieldMismatch(x, y)),
            (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
            (None, None) => Ok(None),
        }
    }

    fn d_big(d: Option<u32>) -> BigRational {
        BigRational::from_integer(d.unwrap_or(0).into())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ExactError> {
        let d = self.join(other)?;
        Ok(Self::build(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ExactError> {
        let d = self.join(other)?;
        Ok(Self::build(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ExactError> {
        let d = self.join(other)?;
        let dd = Self::d_big(d);
        let a = &self.a * &other.a + &self.b * &other.b * dd;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::build(a, b, d))
    }

    /// Field norm `a² − D·b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * Self::d_big(self.d)
    }

    /// Galois conjugate `a − b·√D`.
    pub fn conj(&self) -> Self {
        Self::build(self.a.clone(), -&self.b, self.d)
    }

    pub fn inv(&self) -> Result<Self, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let n = self.norm();
        Ok(Self::build(&self.a / &n, -&self.b / &n, self.d))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ExactError> {
        self.checked_mul(&other.inv()?)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::build(&self.a * r, &self.b * r, self.d)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<Self, ExactError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut exp = e.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &sq;
            }
            exp >>= 1;
            if exp > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Sign of the real embedding with `√D > 0`. No floating point involved.
    pub fn sign(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // Opposite signs: the larger of a² and D·b² wins.
        let a2 = &self.a * &self.a;
        let db2 = &self.b * &self.b * Self::d_big(self.d);
        match a2.cmp(&db2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => unreachable!("D is not a rational square"),
        }
    }

    /// Compare under the real embedding.
    pub fn cmp_real(&self, other: &Self) -> Ordering {
        match (self - other).sign() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }

    /// Non-negative square root inside `ℚ(√d)`, if one exists.
    pub fn sqrt_in(&self, d: u32) -> Option<Self> {
        if let Some(own) = self.d {
            if own != d {
                return None;
            }
        }
        if self.sign() < 0 {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let dd = BigRational::from_integer(d.into());
        let root = if self.b.is_zero() {
            if let Some(r) = rat_sqrt(&self.a) {
                Self::from_rational(r)
            } else {
                // a = D·s² gives √a = s·√D.
                let s = rat_sqrt(&(&self.a / &dd))?;
                Self::new(BigRational::zero(), s, d).ok()?
            }
        } else {
            // (x + y√D)² = x² + D y² + 2xy√D.
            let n = rat_sqrt(&self.norm())?;
            let two = BigRational::from_integer(2.into());
            let mut found = None;
            for cand in [(&self.a + &n) / &two, (&self.a - &n) / &two] {
                if let Some(x) = rat_sqrt(&cand) {
                    if x.is_zero() {
                        continue;
                    }
                    let y = &self.b / (&two * &x);
                    found = Some(Self::new(x, y, d).ok()?);
                    break;
                }
            }
            found?
        };
        Some(if root.sign() < 0 { -root } else { root })
    }

    pub fn to_f64(&self) -> f64 {
        let d = self.d.unwrap_or(0) as f64;
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * d.sqrt()
    }

    /// Value of the real embedding at `prec` bits.
    pub fn to_float(&self, prec: u32) -> rug::Float {
        let a = rug::Float::with_val(prec, &rat_to_rug(&self.a));
        if self.b.is_zero() {
            return a;
        }
        let root = rug::Float::with_val(prec, self.d.unwrap_or(0)).sqrt();
        a + rug::Float::with_val(prec, &rat_to_rug(&self.b)) * root
    }
}

pub(crate) fn sign_of(r: &BigRational) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

pub(crate) fn big_to_rug(n: &BigInt) -> rug::Integer {
    rug::Integer::from_str_radix(&n.to_str_radix(16), 16).expect("valid hex")
}

pub(crate) fn rat_to_rug(r: &BigRational) -> rug::Rational {
    rug::Rational::from((big_to_rug(r.numer()), big_to_rug(r.denom())))
}

pub(crate) fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.d else {
            return fmt_rational(&self.a, f);
        };
        if !self.a.is_zero() {
            fmt_rational(&self.a, f)?;
            f.write_str(if self.b.is_negative() { "-" } else { "+" })?;
            fmt_rational(&self.b.abs(), f)?;
        } else {
            fmt_rational(&self.b, f)?;
        }
        write!(f, "*sqrt({d})")
    }
}

impl FromStr for QuadElem {
    type Err = crate::text::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::text::parse_quad(s)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&QuadElem> for &QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: &QuadElem) -> QuadElem {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<QuadElem> for QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: QuadElem) -> QuadElem {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&QuadElem> for QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: &QuadElem) -> QuadElem {
                (&self).$method(rhs)
            }
        }
        impl $tr<QuadElem> for &QuadElem {
            type Output = QuadElem;
            fn $method(self, rhs: QuadElem) -> QuadElem {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        QuadElem::build(-self.a, -self.b, self.d)
    }
}

impl Neg for &QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        -self.clone()
    }
}

impl Zero for QuadElem {
    fn zero() -> Self {
        QuadElem::zero()
    }
    fn is_zero(&self) -> bool {
        QuadElem::is_zero(self)
    }
}

impl One for QuadElem {
    fn one() -> Self {
        QuadElem::one()
    }
}

impl From<i64> for QuadElem {
    fn from(n: i64) -> Self {
        QuadElem::from_int(n)
    }
}

impl From<BigRational> for QuadElem {
    fn from(r: BigRational) -> Self {
        QuadElem::from_rational(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: (i64, i64), b: (i64, i64)) -> QuadElem {
        QuadElem::from_parts(a, b, 13)
    }

    #[test]
    fn add_componentwise() {
        assert_eq!(q((1, 1), (2, 1)) + q((3, 1), (-1, 1)), q((4, 1), (1, 1)));
    }

    #[test]
    fn inverse_of_two_plus_root13() {
        let x = q((2, 1), (1, 1));
        let inv = x.inv().unwrap();
        assert_eq!(inv, q((-2, 9), (1, 9)));
        assert!((&inv * &x).is_one());
    }

    #[test]
    fn inverse_of_zero_is_an_error() {
        assert_eq!(QuadElem::zero().inv(), Err(ExactError::DivisionByZero));
    }

    #[test]
    fn signs() {
        assert_eq!(q((2, 1), (-1, 1)).sign(), -1);
        assert_eq!(q((2, 3), (1, 3)).sign(), 1);
        assert_eq!(QuadElem::zero().sign(), 0);
        assert_eq!(q((-4, 1), (1, 1)).sign(), -1);
        assert_eq!(q((-3, 1), (1, 1)).sign(), 1);
    }

    #[test]
    fn conj_is_involution() {
        let x = q((5, 7), (-3, 11));
        assert_eq!(x.conj().conj(), x);
        assert_eq!((&x * &x.conj()).as_rational().cloned(), Some(x.norm()));
    }

    #[test]
    fn rational_results_drop_the_radicand() {
        let r = QuadElem::sqrt_d(13).unwrap();
        let sq = &r * &r;
        assert_eq!(sq, QuadElem::from_int(13));
        assert_eq!(sq.radicand(), None);
        // and therefore mix with any field
        let s5 = QuadElem::sqrt_d(5).unwrap();
        assert_eq!((&sq * &s5).radicand(), Some(5));
    }

    #[test]
    #[should_panic(expected = "mixed quadratic fields")]
    fn mixing_fields_panics() {
        let _ = QuadElem::sqrt_d(13).unwrap() + QuadElem::sqrt_d(5).unwrap();
    }

    #[test]
    fn checked_mix_reports() {
        let r = QuadElem::sqrt_d(13).unwrap().checked_mul(&QuadElem::sqrt_d(5).unwrap());
        assert_eq!(r, Err(ExactError::FieldMismatch(13, 5)));
    }

    #[test]
    fn radicand_must_be_squarefree() {
        assert!(QuadElem::sqrt_d(12).is_err());
        assert!(QuadElem::sqrt_d(1).is_err());
        assert!(QuadElem::sqrt_d(30).is_ok());
    }

    #[test]
    fn square_roots_in_field() {
        assert_eq!(QuadElem::from_ratio(16, 9).sqrt_in(13), Some(QuadElem::from_ratio(4, 3)));
        assert_eq!(QuadElem::from_ratio(13, 9).sqrt_in(13), Some(q((0, 1), (1, 3))));
        // (2 + √13)² = 17 + 4√13
        assert_eq!(q((17, 1), (4, 1)).sqrt_in(13), Some(q((2, 1), (1, 1))));
        assert_eq!(QuadElem::from_int(2).sqrt_in(13), None);
        assert_eq!(QuadElem::from_int(-4).sqrt_in(13), None);
    }

    #[test]
    fn display_follows_grammar() {
        assert_eq!(q((4, 1), (1, 1)).to_string(), "4+1*sqrt(13)");
        assert_eq!(q((-2, 9), (1, 9)).to_string(), "-2/9+1/9*sqrt(13)");
        assert_eq!(q((1, 2), (-3, 1)).to_string(), "1/2-3*sqrt(13)");
        assert_eq!(q((0, 1), (-14, 39)).to_string(), "-14/39*sqrt(13)");
        assert_eq!(QuadElem::from_int(-7).to_string(), "-7");
    }

    #[test]
    fn pow_with_negative_exponent() {
        let y = q((2, 3), (1, 3));
        assert!((&y.pow(5).unwrap() * &y.pow(-5).unwrap()).is_one());
        assert_eq!(y.pow(0).unwrap(), QuadElem::one());
    }
}
