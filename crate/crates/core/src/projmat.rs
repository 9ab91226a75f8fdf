//! 2×2 matrices over `ℚ(√D)` with positive determinant, taken up to nonzero
//! scalar multiples.
//!
//! [`Mat2`] is a plain matrix (used wherever the actual representative
//! matters, e.g. for eigenvalues); [`ProjMat`] is its projective class,
//! stored in the canonical form whose first nonzero entry (row-major) is 1.
//! Weight-`k` stroke with even `k` cannot tell two representatives apart,
//! which is why the group ring is built on classes.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use thiserror::Error;

use crate::exactnum::{ExactError, QuadElem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatError {
    #[error("determinant is zero")]
    Singular,
    #[error("determinant {0} is negative")]
    NegativeDeterminant(String),
    #[error("eigenvalues of {0} do not lie in Q(sqrt({1}))")]
    UnsupportedField(String, u32),
    #[error("matrix {0} is not diagonalizable")]
    NotDiagonalizable(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A raw 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat2 {
    pub a: QuadElem,
    pub b: QuadElem,
    pub c: QuadElem,
    pub d: QuadElem,
}

impl Mat2 {
    pub fn new(a: QuadElem, b: QuadElem, c: QuadElem, d: QuadElem) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Mat2::from_ints(1, 0, 0, 1)
    }

    pub fn diag(x: QuadElem, y: QuadElem) -> Self {
        Mat2::new(x, QuadElem::zero(), QuadElem::zero(), y)
    }

    pub fn entries(&self) -> [&QuadElem; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn det(&self) -> QuadElem {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> QuadElem {
        &self.a + &self.d
    }

    pub fn scale(&self, r: &QuadElem) -> Mat2 {
        Mat2::new(&self.a * r, &self.b * r, &self.c * r, &self.d * r)
    }

    /// Adjugate `[[d, −b], [−c, a]]`, the inverse up to the factor `det`.
    pub fn adjugate(&self) -> Mat2 {
        Mat2::new(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn inverse(&self) -> Result<Mat2, MatError> {
        let det = self.det();
        if det.is_zero() {
            return Err(MatError::Singular);
        }
        Ok(self.adjugate().scale(&det.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Mat2, MatError> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Mat2::identity();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn is_diagonal(&self) -> bool {
        self.b.is_zero() && self.c.is_zero()
    }

    pub fn is_scalar(&self) -> bool {
        self.is_diagonal() && self.a == self.d
    }
}

impl Mul<&Mat2> for &Mat2 {
    type Output = Mat2;
    fn mul(self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        &self * &o
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// Projective class of a positive-determinant matrix.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct ProjMat {
    // Canonical representative; the first nonzero entry is 1.
    a: QuadElem,
    b: QuadElem,
    c: QuadElem,
    d: QuadElem,
}

impl ProjMat {
    /// Canonical class of `m`; rejects zero and negative determinants.
    pub fn canonicalize(m: &Mat2) -> Result<ProjMat, MatError> {
        let det = m.det();
        match det.sign() {
            0 => return Err(MatError::Singular),
            -1 => return Err(MatError::NegativeDeterminant(det.to_string())),
            _ => {}
        }
        let pivot = m.entries().into_iter().find(|e| !e.is_zero()).expect("nonsingular");
        let s = pivot.inv()?;
        let n = m.scale(&s);
        Ok(ProjMat { a: n.a, b: n.b, c: n.c, d: n.d })
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<ProjMat, MatError> {
        ProjMat::canonicalize(&Mat2::from_ints(a, b, c, d))
    }

    pub fn identity() -> ProjMat {
        ProjMat::from_ints(1, 0, 0, 1).expect("identity")
    }

    /// The canonical representative as a raw matrix.
    pub fn rep(&self) -> Mat2 {
        Mat2::new(self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone())
    }

    pub fn is_identity(&self) -> bool {
        self.rep().is_scalar()
    }

    pub fn mul(&self, other: &ProjMat) -> ProjMat {
        ProjMat::canonicalize(&(&self.rep() * &other.rep())).expect("positive determinants multiply")
    }

    pub fn inv(&self) -> ProjMat {
        // The adjugate is a positive multiple of the inverse.
        ProjMat::canonicalize(&self.rep().adjugate()).expect("adjugate keeps det")
    }

    pub fn pow(&self, e: i64) -> ProjMat {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut acc = ProjMat::identity();
        let mut sq = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq);
            }
            n >>= 1;
            if n > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    /// Class of `H·M·H` with `H = [[0, −1], [N, 0]]`; as a class this is
    /// `[[d, −c/N], [−N·b, a]]`.
    pub fn conjugate_by_h(&self, level: u32) -> ProjMat {
        let h = fricke(level);
        ProjMat::canonicalize(&(&(&h * &self.rep()) * &h)).expect("H has positive determinant")
    }

    pub fn classify(&self) -> MatClass {
        let m = self.rep();
        let t = m.trace();
        let disc = &t * &t - &m.det() * &QuadElem::from_int(4);
        let kind = match disc.sign() {
            -1 => MatKind::Elliptic,
            0 => MatKind::Parabolic,
            _ => MatKind::Hyperbolic,
        };
        let elliptic_order = match kind {
            MatKind::Elliptic => {
                let mut acc = self.clone();
                (1..=ELLIPTIC_ORDER_BOUND).find(|_| {
                    let hit = acc.is_identity();
                    acc = acc.mul(self);
                    hit
                })
            }
            _ => None,
        };
        MatClass { kind, elliptic_order }
    }
}

impl Mul<&ProjMat> for &ProjMat {
    type Output = ProjMat;
    fn mul(self, o: &ProjMat) -> ProjMat {
        ProjMat::mul(self, o)
    }
}

impl fmt::Display for ProjMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rep())
    }
}

impl FromStr for ProjMat {
    type Err = crate::text::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::text::parse_matrix(s)
    }
}

/// Search bound for the projective order of elliptic elements.
pub const ELLIPTIC_ORDER_BOUND: u32 = 12;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MatKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MatClass {
    pub kind: MatKind,
    pub elliptic_order: Option<u32>,
}

/// The Fricke matrix `[[0, −1], [N, 0]]`.
pub fn fricke(level: u32) -> Mat2 {
    Mat2::from_ints(0, -1, level as i64, 0)
}

/// Result of [`diagonalize`]: `basis⁻¹ · M · basis = diag(eigenvalues)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diagonalization {
    pub basis: Mat2,
    pub eigenvalues: (QuadElem, QuadElem),
}

fn eigenvector(m: &Mat2, lambda: &QuadElem) -> Result<(QuadElem, QuadElem), MatError> {
    if !m.c.is_zero() {
        // Second coordinate normalized to 1.
        return Ok(((lambda - &m.d) / &m.c, QuadElem::one()));
    }
    if *lambda == m.a {
        if m.a == m.d && !m.b.is_zero() {
            return Err(MatError::NotDiagonalizable(m.to_string()));
        }
        return Ok((QuadElem::one(), QuadElem::zero()));
    }
    Ok((&m.b / &(lambda - &m.a), QuadElem::one()))
}

/// Diagonalizes `m` over `ℚ(√d)`. Eigenvalues come larger first under the
/// real embedding; each basis column is scaled so its last nonzero
/// coordinate is 1. Scalar matrices return the identity basis.
pub fn diagonalize(m: &Mat2, d: u32) -> Result<Diagonalization, MatError> {
    if m.is_scalar() {
        return Ok(Diagonalization { basis: Mat2::identity(), eigenvalues: (m.a.clone(), m.a.clone()) });
    }
    let t = m.trace();
    let disc = &t * &t - &m.det() * &QuadElem::from_int(4);
    let root = disc.sqrt_in(d).ok_or_else(|| MatError::UnsupportedField(m.to_string(), d))?;
    if root.is_zero() {
        return Err(MatError::NotDiagonalizable(m.to_string()));
    }
    let half = QuadElem::from_ratio(1, 2);
    let l1 = &(&t + &root) * &half;
    let l2 = &(&t - &root) * &half;
    let (x1, y1) = eigenvector(m, &l1)?;
    let (x2, y2) = eigenvector(m, &l2)?;
    let basis = if m.is_diagonal() {
        // Keep the standard basis, reordered.
        if l1 == m.a {
            Mat2::identity()
        } else {
            Mat2::from_ints(0, 1, 1, 0)
        }
    } else {
        Mat2::new(x1, x2, y1, y2)
    };
    let check = &(&basis.inverse()? * m) * &basis;
    debug_assert!(check.is_diagonal() && check.a == l1 && check.d == l2);
    if !(check.is_diagonal() && check.a == l1 && check.d == l2) {
        return Err(MatError::NotDiagonalizable(m.to_string()));
    }
    Ok(Diagonalization { basis, eigenvalues: (l1, l2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: (i64, i64), b: (i64, i64)) -> QuadElem {
        QuadElem::from_parts(a, b, 13)
    }

    fn pm(a: i64, b: i64, c: i64, d: i64) -> ProjMat {
        ProjMat::from_ints(a, b, c, d).unwrap()
    }

    #[test]
    fn fricke_relation_gives_w() {
        let h = ProjMat::canonicalize(&fricke(13)).unwrap();
        let p = pm(1, 1, 0, 1);
        let w = h.mul(&p.inv()).mul(&h);
        assert_eq!(w, pm(1, 0, 13, 1));
        assert_eq!(pm(-13, 0, -169, -13), w);
    }

    #[test]
    fn g3_has_order_three() {
        let g3 = pm(3, -1, 13, -4);
        assert!(g3.pow(3).is_identity());
        assert!(!g3.pow(2).is_identity());
        assert_eq!(g3.classify(), MatClass { kind: MatKind::Elliptic, elliptic_order: Some(3) });
    }

    #[test]
    fn delta2_is_order_two() {
        let g2 = pm(2, -1, 13, -6);
        let g3 = pm(3, -1, 13, -4);
        let d2 = g3.inv().mul(&g2);
        assert_eq!(d2, pm(5, -2, 13, -5));
        assert_eq!(d2.classify(), MatClass { kind: MatKind::Elliptic, elliptic_order: Some(2) });
    }

    #[test]
    fn parabolic_and_hyperbolic() {
        assert_eq!(pm(1, 1, 0, 1).classify().kind, MatKind::Parabolic);
        assert_eq!(pm(2, -1, 13, -6).classify().kind, MatKind::Hyperbolic);
        assert_eq!(pm(2, -1, 13, -6).classify().elliptic_order, None);
    }

    #[test]
    fn canonicalize_rejects_bad_determinants() {
        assert_eq!(ProjMat::from_ints(1, 2, 2, 4), Err(MatError::Singular));
        assert!(matches!(ProjMat::from_ints(0, 1, 1, 0), Err(MatError::NegativeDeterminant(_))));
    }

    #[test]
    fn delta1_scales_to_integer_form() {
        let r = q((0, 1), (1, 1));
        let d1 = Mat2::new(r.clone(), q((0, 1), (-14, 39)), q((0, 1), (3, 1)), -&r);
        assert!(d1.det().is_one());
        assert_eq!(ProjMat::canonicalize(&d1).unwrap(), pm(39, -14, 117, -39));
        // explicit rescale by 3√13
        let s = q((0, 1), (3, 1));
        assert_eq!(d1.scale(&s), Mat2::from_ints(39, -14, 117, -39));
    }

    #[test]
    fn identity_canonical() {
        assert_eq!(ProjMat::canonicalize(&Mat2::from_ints(5, 0, 0, 5)).unwrap(), ProjMat::identity());
    }

    #[test]
    fn conjugation_rule() {
        assert_eq!(pm(2, 0, 0, 1).conjugate_by_h(13), pm(1, 0, 0, 2));
        assert_eq!(pm(1, 1, 0, 2).conjugate_by_h(13), pm(2, 0, -13, 1));
        assert_eq!(ProjMat::identity().conjugate_by_h(13), ProjMat::identity());
    }

    #[test]
    fn diagonal_input() {
        let dz = diagonalize(&Mat2::from_ints(2, 0, 0, 1), 13).unwrap();
        assert_eq!(dz.basis, Mat2::identity());
        assert_eq!(dz.eigenvalues, (QuadElem::from_int(2), QuadElem::from_int(1)));
        let dz = diagonalize(&Mat2::from_ints(1, 0, 0, 2), 13).unwrap();
        assert_eq!(dz.eigenvalues, (QuadElem::from_int(2), QuadElem::from_int(1)));
    }

    #[test]
    fn eigenvalues_outside_field() {
        // x² − x − 1: eigenvalues in Q(√5)
        let m = Mat2::from_ints(1, 1, 1, 0);
        assert!(matches!(diagonalize(&m, 13), Err(MatError::UnsupportedField(_, 13))));
        assert!(diagonalize(&m, 5).is_ok());
    }

    #[test]
    fn jordan_block_is_rejected() {
        assert!(matches!(diagonalize(&Mat2::from_ints(1, 1, 0, 1), 13), Err(MatError::NotDiagonalizable(_))));
    }
}
