//! Exact computations behind invariance under `g₃`: the `h₂`, `h₃` word
//! signs, the blow-up of `z^{−k/2}|(1 + A⁻¹g₃A + A⁻¹g₃²A)` at 0, and the
//! eigen-signs of the obstruction `z^{−k/2}|A⁻¹`.

use super::builder::{g_base_steps, h_letters, h_word_class, t2_square_steps, Builder};
use super::{verify_certificate, CertError, Congruence, CongruenceContext};
use crate::exactnum::{QuadElem, RatFunc, ScalarPoly};
use crate::groupring::{stroke_of_power_raw, stroke_ratfunc, RingElem, StrokeError};
use crate::projmat::{Mat2, ProjMat};

fn q(a: (i64, i64), b: (i64, i64)) -> QuadElem {
    QuadElem::from_parts(a, b, 13)
}

/// `δ₁, δ₂, δ₃` with the √13 normalization (`det δ₁ = det δ₃ = 1/3`, up
/// to the scale shown).
pub fn paper_deltas() -> [Mat2; 3] {
    let d1 = Mat2::new(q((0, 1), (1, 1)), q((0, 1), (-14, 39)), q((0, 1), (3, 1)), q((0, 1), (-1, 1)));
    let d2 = Mat2::from_ints(5, -2, 13, -5);
    let d3 = Mat2::new(q((0, 1), (-1, 1)), q((0, 1), (4, 13)), q((0, 1), (-7, 2)), q((0, 1), (1, 1)));
    [d1, d2, d3]
}

/// Integer-scaled classes `δ̂ᵢ` used as g-context axioms.
pub fn delta_hats() -> [ProjMat; 3] {
    [super::delta_hat(1), super::delta_hat(2), super::delta_hat(3)]
}

/// `h₂ = δ₂δ₁` as a raw matrix.
pub fn h2_raw() -> Mat2 {
    let [d1, d2, _] = paper_deltas();
    &d2 * &d1
}

/// `h₃ = δ₃δ₁` as a raw matrix.
pub fn h3_raw() -> Mat2 {
    let [d1, _, d3] = paper_deltas();
    &d3 * &d1
}

/// `A = [[(13+√13)/39, (13−√13)/39], [1, 1]]`, which diagonalizes `h₂`
/// and `h₃` simultaneously.
pub fn diagonalizer() -> Mat2 {
    Mat2::new(q((1, 3), (1, 39)), q((1, 3), (-1, 39)), QuadElem::one(), QuadElem::one())
}

fn g3_raw() -> Mat2 {
    Mat2::from_ints(3, -1, 13, -4)
}

fn conjugate_by_a(m: &Mat2) -> Mat2 {
    let a = diagonalizer();
    let a_inv = a.inverse().expect("A is invertible");
    &(&a_inv * m) * &a
}

/// `A⁻¹g₃A`.
pub fn conjugated_g3() -> Mat2 {
    conjugate_by_a(&g3_raw())
}

/// `A⁻¹g₃²A`.
pub fn conjugated_g3_squared() -> Mat2 {
    conjugate_by_a(&(&g3_raw() * &g3_raw()))
}

/// Squares `T₂ ≡ α₂` in the level-13 f-context and returns
/// `[[1,1],[0,4]] + [[1,3],[0,4]] ≡ α₂² − P − α₂[[2,0],[0,1]] − α₂[[1,0],[0,2]]`.
pub fn square_t2_derivation() -> Result<Congruence, CertError> {
    let mut b = Builder::new(CongruenceContext::f(13));
    b.derive("T2", super::Rule::Axiom("axiom-T2".into()))?;
    t2_square_steps(&mut b)?;
    let out = b.get("H4-rhs").clone();
    let cert = b.finish();
    let report = verify_certificate(&CongruenceContext::f(13), &cert)?;
    if !report.ok() {
        return Err(CertError::Authoring { step: "H4-rhs".into(), detail: report.to_string() });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SignCheck {
    pub m: i64,
    pub n: i64,
    /// Derived `s` with `h₂^m h₃^n ≡ s`.
    pub sign: ScalarPoly,
    /// Derived `s'` with `h₂^{2m} h₃^n ≡ s'`.
    pub doubled: ScalarPoly,
    /// The derivation certificate re-verified independently.
    pub verified: bool,
}

impl SignCheck {
    pub fn expected(&self) -> ScalarPoly {
        (-ScalarPoly::eps()).pow(self.m.unsigned_abs() as u32).expect("degree stays small")
    }

    pub fn ok(&self) -> bool {
        self.verified && self.sign == self.expected() && self.doubled.is_one()
    }
}

/// Derives `h₂^m h₃^n ≡ (−ε)^m` and `h₂^{2m} h₃^n ≡ 1` in the g-context,
/// letter by letter, then re-verifies the resulting certificate.
pub fn sign_exponent_check(m: i64, n: i64) -> Result<SignCheck, CertError> {
    let mut b = Builder::new(CongruenceContext::g(13)?);
    g_base_steps(&mut b)?;
    b.word("word", &h_letters(m, n))?;
    b.word("word-even", &h_letters(2 * m, n))?;
    let word = b.get("word").clone();
    let even = b.get("word-even").clone();
    let lhs_ok = word.lhs == RingElem::from_mat(h_word_class(m, n))
        && even.lhs == RingElem::from_mat(h_word_class(2 * m, n));
    let sign = word.rhs.as_scalar().unwrap_or_default();
    let doubled = even.rhs.as_scalar().unwrap_or_default();
    let cert = b.finish();
    let verified = lhs_ok && verify_certificate(&CongruenceContext::g(13)?, &cert)?.ok();
    Ok(SignCheck { m, n, sign, doubled, verified })
}

#[derive(Clone, Debug)]
pub struct BlowupReport {
    pub k: i64,
    pub sum: RatFunc,
    pub pole_order: u64,
    pub identically_zero: bool,
    pub leading_coeff_nonzero: bool,
}

/// `S(z) = z^{−k/2} + z^{−k/2}|A⁻¹g₃A + z^{−k/2}|A⁻¹g₃²A` as an exact
/// rational function, with its behaviour at `z = 0`.
pub fn blowup_check(k: i64) -> Result<BlowupReport, StrokeError> {
    if k % 2 != 0 {
        return Err(StrokeError::OddWeight(k));
    }
    let base = RatFunc::z_pow(-k / 2);
    let s1 = stroke_of_power_raw(k, &conjugated_g3())?;
    let s2 = stroke_of_power_raw(k, &conjugated_g3_squared())?;
    let sum = &(&base + &s1) + &s2;
    let identically_zero = sum.is_zero();
    let leading_coeff_nonzero = sum.leading_laurent_coeff().is_some_and(|c| !c.is_zero());
    Ok(BlowupReport { k, pole_order: sum.pole_order_at_zero(), identically_zero, leading_coeff_nonzero, sum })
}

#[derive(Clone, Debug)]
pub struct TildeGReport {
    pub k: i64,
    /// `sᵢ` with `g̃|δᵢ = sᵢ·g̃`, or 0 where the ratio is not a constant ±1.
    pub signs: [i32; 3],
}

impl TildeGReport {
    pub fn exact(&self) -> bool {
        self.signs.iter().all(|s| *s != 0)
    }
}

/// Eigen-signs of `g̃ = z^{−k/2}|A⁻¹` under the three `δᵢ`.
pub fn tilde_g_check(k: i64) -> Result<TildeGReport, StrokeError> {
    let a_inv = diagonalizer().inverse()?;
    let g = stroke_of_power_raw(k, &a_inv)?;
    let mut signs = [0; 3];
    for (s, d) in signs.iter_mut().zip(paper_deltas()) {
        let image = stroke_ratfunc(k, &g, &d)?;
        *s = if image == g {
            1
        } else if image == -&g {
            -1
        } else {
            0
        };
    }
    Ok(TildeGReport { k, signs })
}
