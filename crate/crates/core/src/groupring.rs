//! Finite formal sums `Σ cᵢ·Mᵢ` of projective matrix classes with
//! coefficients in the symbolic scalar ring, and the exact stroke of the
//! power function `z^{−k/2}` by a single matrix.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

use crate::exactnum::{ExactError, Poly, QuadElem, RatFunc, ScalarPoly};
use crate::projmat::{Mat2, MatError, ProjMat};

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct RingElem {
    terms: BTreeMap<ProjMat, ScalarPoly>,
}

impl RingElem {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_mat(ProjMat::identity())
    }

    pub fn from_mat(m: ProjMat) -> Self {
        Self::term(ScalarPoly::one(), m)
    }

    pub fn term(c: ScalarPoly, m: ProjMat) -> Self {
        let mut r = RingElem::zero();
        r.add_term(m, c);
        r
    }

    /// Scalar `s` as `s·I`.
    pub fn scalar(s: ScalarPoly) -> Self {
        Self::term(s, ProjMat::identity())
    }

    pub fn from_terms<I: IntoIterator<Item = (ScalarPoly, ProjMat)>>(it: I) -> Self {
        let mut r = RingElem::zero();
        for (c, m) in it {
            r.add_term(m, c);
        }
        r
    }

    /// Sum of the given matrices, each with coefficient 1.
    pub fn sum_of(mats: &[ProjMat]) -> Self {
        Self::from_terms(mats.iter().map(|m| (ScalarPoly::one(), m.clone())))
    }

    fn add_term(&mut self, m: ProjMat, c: ScalarPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = &old + &c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ProjMat, &ScalarPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &ProjMat) -> ScalarPoly {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn matrices(&self) -> impl Iterator<Item = &ProjMat> {
        self.terms.keys()
    }

    /// The scalar `s` if this element is `s·I`.
    pub fn as_scalar(&self) -> Option<ScalarPoly> {
        match self.terms.len() {
            0 => Some(ScalarPoly::zero()),
            1 => self.terms.get(&ProjMat::identity()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, s: &ScalarPoly) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (c * s, m.clone())))
    }

    pub fn checked_scale(&self, s: &ScalarPoly) -> Result<Self, ExactError> {
        let mut out = RingElem::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.checked_mul(s)?);
        }
        Ok(out)
    }

    /// `(Σ cᵢ Mᵢ)(Σ dⱼ Nⱼ) = Σ cᵢ dⱼ (Mᵢ Nⱼ)`.
    pub fn checked_right_mul(&self, w: &RingElem) -> Result<Self, ExactError> {
        let mut out = RingElem::zero();
        for (m, c) in &self.terms {
            for (n, d) in &w.terms {
                out.add_term(m.mul(n), c.checked_mul(d)?);
            }
        }
        Ok(out)
    }

    pub fn right_mul(&self, w: &RingElem) -> Self {
        self.checked_right_mul(w).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Right multiplication by a single matrix.
    pub fn right_mul_mat(&self, n: &ProjMat) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (c.clone(), m.mul(n))))
    }

    /// Termwise `H·M·H`.
    pub fn conjugate_by_h(&self, level: u32) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (c.clone(), m.conjugate_by_h(level))))
    }

    /// Inverse of a single-term element `c·M` with `c` an invertible constant.
    pub fn inverse_monomial(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        let c = c.as_constant()?;
        let ci = c.inv().ok()?;
        Some(Self::term(ScalarPoly::constant(ci), m.inv()))
    }

    pub fn pow(&self, e: i64) -> Option<Self> {
        let base = if e < 0 { self.inverse_monomial()? } else { self.clone() };
        let mut acc = RingElem::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.right_mul(&base);
        }
        Some(acc)
    }
}

impl Add<&RingElem> for &RingElem {
    type Output = RingElem;
    fn add(self, rhs: &RingElem) -> RingElem {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Add for RingElem {
    type Output = RingElem;
    fn add(self, rhs: RingElem) -> RingElem {
        &self + &rhs
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        -&self
    }
}

impl Sub<&RingElem> for &RingElem {
    type Output = RingElem;
    fn sub(self, rhs: &RingElem) -> RingElem {
        self + &(-rhs)
    }
}

impl Sub for RingElem {
    type Output = RingElem;
    fn sub(self, rhs: RingElem) -> RingElem {
        &self - &rhs
    }
}

impl Mul<&RingElem> for &RingElem {
    type Output = RingElem;
    fn mul(self, rhs: &RingElem) -> RingElem {
        self.right_mul(rhs)
    }
}

impl Mul for RingElem {
    type Output = RingElem;
    fn mul(self, rhs: RingElem) -> RingElem {
        self.right_mul(&rhs)
    }
}

impl From<ProjMat> for RingElem {
    fn from(m: ProjMat) -> Self {
        RingElem::from_mat(m)
    }
}

impl From<ScalarPoly> for RingElem {
    fn from(s: ScalarPoly) -> Self {
        RingElem::scalar(s)
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.prints_negative();
            let mag = if neg { -c } else { c.clone() };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_identity() {
                if mag.len() == 1 {
                    write!(f, "{mag}")?;
                } else {
                    write!(f, "({mag})")?;
                }
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else if mag.len() == 1 {
                write!(f, "{mag}*{m}")?;
            } else {
                write!(f, "({mag})*{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for RingElem {
    type Err = crate::text::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::text::parse_ring(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrokeError {
    #[error("weight {0} is odd; only even weights have single-valued powers")]
    OddWeight(i64),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// `z^{−k/2} | M` for the representative `raw_scale · M` (canonical `M`):
/// `det^{k/2} (az + b)^{−k/2} (cz + d)^{−k/2}` as an exact rational function.
pub fn stroke_of_power(k: i64, m: &ProjMat, raw_scale: &QuadElem) -> Result<RatFunc, StrokeError> {
    stroke_of_power_raw(k, &m.rep().scale(raw_scale))
}

/// As [`stroke_of_power`] for an explicit representative.
pub fn stroke_of_power_raw(k: i64, m: &Mat2) -> Result<RatFunc, StrokeError> {
    if k % 2 != 0 {
        return Err(StrokeError::OddWeight(k));
    }
    let det = m.det();
    if det.sign() <= 0 {
        return Err(MatError::NegativeDeterminant(det.to_string()).into());
    }
    let h = k / 2;
    let lin1 = RatFunc::from_poly(Poly::linear(m.a.clone(), m.b.clone()));
    let lin2 = RatFunc::from_poly(Poly::linear(m.c.clone(), m.d.clone()));
    let prod = &lin1 * &lin2;
    Ok(prod.pow(-h)?.scale(&det.pow(h)?))
}

/// General weight-`k` stroke of a rational function: `det^{k/2}(cz+d)^{−k}F(Mz)`.
pub fn stroke_ratfunc(k: i64, f: &RatFunc, m: &Mat2) -> Result<RatFunc, StrokeError> {
    if k % 2 != 0 {
        return Err(StrokeError::OddWeight(k));
    }
    let det = m.det();
    let composed = f.compose_mobius(&m.a, &m.b, &m.c, &m.d)?;
    let factor = RatFunc::from_poly(Poly::linear(m.c.clone(), m.d.clone())).pow(-k)?;
    Ok((&composed * &factor).scale(&det.pow(k / 2)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(a: i64, b: i64, c: i64, d: i64) -> ProjMat {
        ProjMat::from_ints(a, b, c, d).unwrap()
    }

    #[test]
    fn delta1_factorization_expands() {
        let g3 = RingElem::from_mat(pm(3, -1, 13, -4));
        let d1 = RingElem::term(ScalarPoly::eps(), pm(39, -14, 117, -39));
        let lhs = (RingElem::one() - g3.clone()).right_mul(&(RingElem::one() - d1.clone()));
        let expected = &(&(&RingElem::one() - &d1) - &g3) + &RingElem::term(ScalarPoly::eps(), pm(0, -3, 39, -26));
        assert_eq!(lhs, expected);
    }

    #[test]
    fn same_class_merges() {
        let x = RingElem::term(ScalarPoly::from_int(2), pm(4, -2, 26, -12));
        let y = RingElem::term(ScalarPoly::from_int(3), pm(2, -1, 13, -6));
        assert_eq!(&x + &y, RingElem::term(ScalarPoly::from_int(5), pm(2, -1, 13, -6)));
        assert_eq!((&x + &y).len(), 1);
    }

    #[test]
    fn right_identity() {
        let x = RingElem::from_terms([
            (ScalarPoly::alpha2(), pm(2, 0, 0, 1)),
            (ScalarPoly::eps(), pm(1, 1, 0, 2)),
        ]);
        assert_eq!(x.right_mul(&RingElem::one()), x);
    }

    #[test]
    fn g3_cube_relation_vanishes() {
        let g3 = RingElem::from_mat(pm(3, -1, 13, -4));
        let g3sq = g3.right_mul(&g3);
        let prod = (RingElem::one() - g3.clone()).right_mul(&(&(&RingElem::one() + &g3) + &g3sq));
        assert!(prod.is_zero());
    }

    #[test]
    fn stroke_of_identity() {
        for k in [-4, -2, 2, 4, 12] {
            let f = stroke_of_power(k, &ProjMat::identity(), &QuadElem::one()).unwrap();
            assert_eq!(f, RatFunc::z_pow(-k / 2));
        }
    }

    #[test]
    fn diagonal_invariance() {
        let x = QuadElem::from_ratio(7, 3);
        let m = Mat2::diag(x.clone(), x.inv().unwrap());
        let f = stroke_of_power_raw(2, &m).unwrap();
        assert_eq!(f, RatFunc::z_pow(-1));
    }

    #[test]
    fn odd_weight_rejected() {
        assert_eq!(stroke_of_power(3, &ProjMat::identity(), &QuadElem::one()), Err(StrokeError::OddWeight(3)));
    }

    #[test]
    fn printing() {
        let x = RingElem::from_terms([
            (ScalarPoly::one(), ProjMat::identity()),
            (-ScalarPoly::eps(), pm(39, -14, 117, -39)),
            (&ScalarPoly::alpha2() + &ScalarPoly::one(), pm(2, 0, 0, 1)),
        ]);
        let s = x.to_string();
        assert_eq!(s.parse::<RingElem>().unwrap(), x);
        assert_eq!(RingElem::zero().to_string(), "0");
    }
}
