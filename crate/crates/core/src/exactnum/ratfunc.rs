//! Univariate polynomials and reduced rational functions in `z` over `ℚ(√D)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::quad::QuadElem;
use super::ExactError;

/// Dense polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    coeffs: Vec<QuadElem>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<QuadElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: QuadElem) -> Self {
        Poly::new(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(QuadElem::one())
    }

    /// `c·z^n`.
    pub fn monomial(c: QuadElem, n: usize) -> Self {
        let mut v = vec![QuadElem::zero(); n + 1];
        v[n] = c;
        Poly::new(v)
    }

    /// `a·z + b`.
    pub fn linear(a: QuadElem, b: QuadElem) -> Self {
        Poly::new(vec![b, a])
    }

    pub fn coeffs(&self) -> &[QuadElem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&QuadElem> {
        self.coeffs.last()
    }

    /// Multiplicity of the root `z = 0`; `None` for the zero polynomial.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &QuadElem) -> Poly {
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn eval(&self, x: &QuadElem) -> QuadElem {
        self.coeffs.iter().rev().fold(QuadElem::zero(), |acc, c| &acc * x + c)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut sq = self.clone();
        let mut exp = e;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &sq;
            }
            exp >>= 1;
            if exp > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    /// Euclidean division; `divisor` must be nonzero.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly), ExactError> {
        let dlead = divisor.lead().ok_or(ExactError::DivisionByZero)?;
        let dlead_inv = dlead.inv()?;
        let ddeg = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= ddeg {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![QuadElem::zero(); rem.len() - ddeg];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + ddeg] * &dlead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] = &rem[i + j] - &(&c * dc);
            }
            quot[i] = c;
        }
        rem.truncate(ddeg);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn monic(&self) -> Poly {
        match self.lead() {
            Some(l) => self.scale(&l.inv().expect("nonzero lead")),
            None => Poly::zero(),
        }
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self(z)` after substituting `z → (a z + b)/(c z + d)` and clearing
    /// the denominator `(cz + d)^n` where `n = deg self`:
    /// returns `Σ pᵢ (az+b)^i (cz+d)^{n−i}`.
    pub fn homogenized_substitute(&self, a: &QuadElem, b: &QuadElem, c: &QuadElem, d: &QuadElem, n: usize) -> Poly {
        let num = Poly::linear(a.clone(), b.clone());
        let den = Poly::linear(c.clone(), d.clone());
        let mut out = Poly::zero();
        for (i, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let term = &num.pow(i as u32) * &den.pow((n - i) as u32);
            out = &out + &term.scale(p);
        }
        out
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = QuadElem::zero();
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![QuadElem::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        Poly::new(v)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*z")?,
                _ => write!(f, "({c})*z^{i}")?,
            }
        }
        Ok(())
    }
}

/// Reduced quotient `num/den` with `gcd(num, den) = 1` and `den` monic.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc::zero());
        }
        let g = num.gcd(&den);
        let (n, _) = num.div_rem(&g)?;
        let (d, _) = den.div_rem(&g)?;
        let l = d.lead().expect("nonzero").inv()?;
        Ok(RatFunc { num: n.scale(&l), den: d.scale(&l) })
    }

    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn constant(c: QuadElem) -> Self {
        RatFunc { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    /// `z^n` for any integer `n`.
    pub fn z_pow(n: i64) -> Self {
        let m = Poly::monomial(QuadElem::one(), n.unsigned_abs() as usize);
        if n >= 0 {
            RatFunc::from_poly(m)
        } else {
            RatFunc { num: Poly::one(), den: m }
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<QuadElem> {
        (self.den.degree() == Some(0) && self.num.degree().unwrap_or(0) == 0)
            .then(|| self.num.coeffs().first().cloned().unwrap_or_else(QuadElem::zero))
    }

    pub fn inv(&self) -> Result<Self, ExactError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: i64) -> Result<Self, ExactError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs() as u32;
        // Powers of coprime polynomials stay coprime.
        Ok(RatFunc { num: base.num.pow(k), den: base.den.pow(k) })
    }

    pub fn scale(&self, c: &QuadElem) -> Self {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Order of vanishing at `z = 0` (negative for a pole); `None` for zero.
    pub fn order_at_zero(&self) -> Option<i64> {
        let vn = self.num.valuation()? as i64;
        let vd = self.den.valuation().expect("nonzero denominator") as i64;
        Some(vn - vd)
    }

    /// `n ≥ 1` for a pole of order `n` at the origin, otherwise 0.
    pub fn pole_order_at_zero(&self) -> u64 {
        self.order_at_zero().map_or(0, |o| if o < 0 { o.unsigned_abs() } else { 0 })
    }

    /// Coefficient of `z^{order}` in the Laurent expansion at 0.
    pub fn leading_laurent_coeff(&self) -> Option<QuadElem> {
        let vn = self.num.valuation()?;
        let vd = self.den.valuation().expect("nonzero denominator");
        Some(&self.num.coeffs()[vn] / &self.den.coeffs()[vd])
    }

    pub fn eval_at(&self, x: &QuadElem) -> Result<QuadElem, ExactError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(ExactError::Pole(x.to_string()));
        }
        Ok(self.num.eval(x) / d)
    }

    /// `F((az + b)/(cz + d))` as a reduced rational function.
    pub fn compose_mobius(&self, a: &QuadElem, b: &QuadElem, c: &QuadElem, d: &QuadElem) -> Result<Self, ExactError> {
        let dn = self.num.degree().unwrap_or(0);
        let dd = self.den.degree().unwrap_or(0);
        let n = dn.max(dd);
        let num = self.num.homogenized_substitute(a, b, c, d, n);
        let den = self.den.homogenized_substitute(a, b, c, d, n);
        RatFunc::new(num, den)
    }
}

impl Add<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFunc::new(num, &self.den * &rhs.den).expect("nonzero denominators")
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: RatFunc) -> RatFunc {
        &self + &rhs
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Sub<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominators")
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: RatFunc) -> RatFunc {
        &self * &rhs
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "[{}] / [{}]", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: (i64, i64), b: (i64, i64)) -> QuadElem {
        QuadElem::from_parts(a, b, 13)
    }

    #[test]
    fn inverse_powers_cancel() {
        let z1 = RatFunc::z_pow(-1);
        let s = &z1 + &(-&z1);
        assert!(s.is_zero());
    }

    #[test]
    fn pole_order_of_power() {
        let k = 4;
        assert_eq!(RatFunc::z_pow(-k / 2).pole_order_at_zero(), 2);
        assert_eq!(RatFunc::z_pow(3).pole_order_at_zero(), 0);
        assert_eq!(RatFunc::z_pow(3).order_at_zero(), Some(3));
        assert_eq!(RatFunc::zero().order_at_zero(), None);
    }

    #[test]
    fn weight_minus_two_sum_vanishes() {
        // z + 6⁻²(−3z + 5 − 2√13)((5+2√13)z − 3) + 6⁻²(3z + 5 − 2√13)((5+2√13)z + 3)
        let c = q((5, 1), (2, 1));
        let s = q((5, 1), (-2, 1));
        let t1 = &Poly::linear(QuadElem::from_int(-3), s.clone()) * &Poly::linear(c.clone(), QuadElem::from_int(-3));
        let t2 = &Poly::linear(QuadElem::from_int(3), s) * &Poly::linear(c, QuadElem::from_int(3));
        let inv36 = QuadElem::from_ratio(1, 36);
        let total = &(&Poly::monomial(QuadElem::one(), 1) + &t1.scale(&inv36)) + &t2.scale(&inv36);
        assert!(RatFunc::from_poly(total).is_zero());
    }

    #[test]
    fn reduction_cancels_common_factors() {
        // (z² − 1)/(z − 1) = z + 1
        let num = Poly::new(vec![QuadElem::from_int(-1), QuadElem::zero(), QuadElem::one()]);
        let den = Poly::linear(QuadElem::one(), QuadElem::from_int(-1));
        let f = RatFunc::new(num, den).unwrap();
        assert_eq!(f, RatFunc::from_poly(Poly::linear(QuadElem::one(), QuadElem::one())));
    }

    #[test]
    fn evaluation_at_pole_is_error() {
        let f = RatFunc::z_pow(-2);
        assert!(matches!(f.eval_at(&QuadElem::zero()), Err(ExactError::Pole(_))));
        assert_eq!(f.eval_at(&QuadElem::from_int(2)).unwrap(), QuadElem::from_ratio(1, 4));
    }

    #[test]
    fn denominator_is_monic() {
        let f = RatFunc::new(Poly::one(), Poly::linear(QuadElem::from_int(3), q((0, 1), (1, 1)))).unwrap();
        assert!(f.denom().lead().unwrap().is_one());
    }

    #[test]
    fn mobius_composition_of_identity() {
        let f = RatFunc::new(Poly::linear(QuadElem::one(), QuadElem::from_int(2)), Poly::monomial(QuadElem::one(), 3)).unwrap();
        let one = QuadElem::one();
        let zero = QuadElem::zero();
        assert_eq!(f.compose_mobius(&one, &zero, &zero, &one).unwrap(), f);
    }

    #[test]
    fn leading_laurent_coefficient() {
        // 3/z² + 1
        let f = &RatFunc::z_pow(-2).scale(&QuadElem::from_int(3)) + &RatFunc::constant(QuadElem::one());
        assert_eq!(f.pole_order_at_zero(), 2);
        assert_eq!(f.leading_laurent_coeff(), Some(QuadElem::from_int(3)));
    }
}
