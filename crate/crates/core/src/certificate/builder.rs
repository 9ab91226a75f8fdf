//! Authoring side: the derivations shipped as certificate files.
//!
//! Every step is verified as it is appended, so a builder that returns
//! `Ok` has produced a certificate the verifier accepts.

use super::{apply_rule, verify_step, CertError, Certificate, Congruence, CongruenceContext, Known, Rule, Step, Verdict};
use crate::exactnum::ScalarPoly;
use crate::groupring::RingElem;
use crate::projmat::ProjMat;

pub(crate) struct Builder {
    ctx: CongruenceContext,
    known: Known,
    steps: Vec<Step>,
}

pub(crate) fn lit(s: &str) -> RingElem {
    s.parse().unwrap_or_else(|e| panic!("bad literal {s:?}: {e}"))
}

fn scalar(s: &str) -> ScalarPoly {
    s.parse().unwrap_or_else(|e| panic!("bad scalar {s:?}: {e}"))
}

fn right_mul(prior: &str, w: &str) -> Rule {
    Rule::RightMul(prior.into(), lit(w))
}

fn scale(prior: &str, s: &str) -> Rule {
    Rule::Scale(prior.into(), scalar(s))
}

fn add(a: &str, b: &str) -> Rule {
    Rule::Add(a.into(), b.into())
}

fn trans(a: &str, b: &str) -> Rule {
    Rule::Trans(a.into(), b.into())
}

impl Builder {
    pub(crate) fn new(ctx: CongruenceContext) -> Self {
        let mut known = Known::default();
        for a in &ctx.axioms {
            known.insert(a.clone()).expect("axiom ids are distinct");
        }
        Builder { ctx, known, steps: Vec::new() }
    }

    pub(crate) fn get(&self, id: &str) -> &Congruence {
        self.known.get(id).unwrap_or_else(|| panic!("unknown id {id}"))
    }

    fn push(&mut self, step: Step) -> Result<(), CertError> {
        match verify_step(&self.ctx, &self.known, &step)? {
            Verdict::Ok => {}
            Verdict::Mismatch(d) => {
                return Err(CertError::Authoring { step: step.id().into(), detail: format!("off by {d}") });
            }
            Verdict::Malformed(why) => return Err(CertError::Authoring { step: step.id().into(), detail: why }),
        }
        self.known.insert(step.result.clone())?;
        self.steps.push(step);
        Ok(())
    }

    /// Appends a step whose claim is exactly the rule's output.
    pub(crate) fn derive(&mut self, id: &str, rule: Rule) -> Result<(), CertError> {
        let (lhs, rhs) = apply_rule(&self.ctx, &self.known, id, &rule)?
            .map_err(|detail| CertError::Authoring { step: id.into(), detail })?;
        self.push(Step::new(rule, Congruence::new(id, lhs, rhs)))
    }

    /// Appends a step with a claim written out by hand; the text is kept
    /// verbatim in the certificate file.
    pub(crate) fn claim(&mut self, id: &str, rule: Rule, lhs: &str, rhs: &str) -> Result<(), CertError> {
        let result = Congruence::new(id, lit(lhs), lit(rhs));
        self.push(Step { rule, result, text: (lhs.to_string(), rhs.to_string()) })
    }

    pub(crate) fn claim_elem(&mut self, id: &str, rule: Rule, lhs: RingElem, rhs: RingElem) -> Result<(), CertError> {
        self.push(Step::new(rule, Congruence::new(id, lhs, rhs)))
    }

    /// From `X ≡ Y` derives `H·X·H ≡ H·Y·H` using right multiplications of
    /// the premise and of `H ≡ ε`:
    /// `HXH − HYH = (HXH − εXH) − (HYH − εYH) + ε(XH − YH)`.
    fn conjugate(&mut self, id: &str, prior: &str) -> Result<(), CertError> {
        let n = self.ctx.level;
        let h = lit(&format!("[[0,-1],[{n},0]]"));
        let c = self.get(prior).clone();
        let (xh, yh) = (c.lhs.right_mul(&h), c.rhs.right_mul(&h));
        self.derive(&format!("{id}-a"), Rule::RightMul(prior.into(), h.clone()))?;
        self.derive(&format!("{id}-b"), Rule::RightMul("H".into(), xh))?;
        self.derive(&format!("{id}-c"), Rule::RightMul("H".into(), yh))?;
        self.derive(&format!("{id}-d"), scale(&format!("{id}-a"), "e"))?;
        self.derive(&format!("{id}-e"), scale(&format!("{id}-c"), "-1"))?;
        self.derive(&format!("{id}-f"), add(&format!("{id}-b"), &format!("{id}-d")))?;
        self.claim_elem(
            id,
            add(&format!("{id}-f"), &format!("{id}-e")),
            c.lhs.conjugate_by_h(n),
            c.rhs.conjugate_by_h(n),
        )
    }

    /// Rewrites `prior` (difference `A + B − C − D`) with the replacements
    /// `D → W·D`, `B → εHP⁻¹B`, `C → εHC`, each justified by right
    /// multiplication of `W ≡ 1`, `H ≡ ε` or `P⁻¹ ≡ 1`.
    #[allow(clippy::too_many_arguments)]
    fn replace_three(
        &mut self,
        tag: &str,
        prior: &str,
        (b, b_new): (&str, &str),
        (c, c_new): (&str, &str),
        d: &str,
        result: (&str, &str),
    ) -> Result<(), CertError> {
        let id = |s: &str| format!("{s}{tag}");
        self.derive(&id("rep-D"), right_mul("W", d))?;
        self.derive(&id("rep-B-a"), right_mul("H", &format!("[[1,-1],[0,1]]*{b}")))?;
        self.derive(&id("rep-B-b"), scale(&id("rep-B-a"), "e"))?;
        self.derive(&id("rep-B-c"), right_mul("Pinv", b))?;
        self.claim(&id("rep-B"), trans(&id("rep-B-b"), &id("rep-B-c")), b_new, b)?;
        self.derive(&id("rep-C-a"), right_mul("H", c))?;
        self.claim(&id("rep-C"), scale(&id("rep-C-a"), "e"), c_new, c)?;
        self.derive(&id("replace-a"), add(prior, &id("rep-B")))?;
        self.derive(&id("replace-b"), scale(&id("rep-C"), "-1"))?;
        self.derive(&id("replace-c"), add(&id("replace-a"), &id("replace-b")))?;
        self.derive(&id("replace-d"), scale(&id("rep-D"), "-1"))?;
        self.claim(&id("replace"), add(&id("replace-c"), &id("replace-d")), result.0, result.1)
    }

    /// From `x ≡ s` with `s² = 1` derives `x⁻¹ ≡ s`.
    fn inverse(&mut self, id: &str, prior: &str) -> Result<(), CertError> {
        let c = self.get(prior).clone();
        let s = c.rhs.as_scalar().expect("scalar right side");
        let inv = c.lhs.inverse_monomial().expect("single matrix");
        self.derive(&format!("{id}-a"), Rule::RightMul(prior.into(), inv))?;
        self.derive(&format!("{id}-b"), Rule::Scale(format!("{id}-a"), s))?;
        self.derive(id, Rule::Sym(format!("{id}-b")))
    }

    /// `x₁x₂⋯x_r ≡ s₁s₂⋯s_r` from letters `xᵢ ≡ sᵢ`, one right
    /// multiplication and one scaling per letter.
    pub(crate) fn word(&mut self, id: &str, letters: &[&str]) -> Result<(), CertError> {
        let Some((first, rest)) = letters.split_first() else {
            let any = self.ctx.axioms[0].id.clone();
            return self.claim_elem(id, Rule::Scale(any, ScalarPoly::zero()), RingElem::one(), RingElem::one());
        };
        let mut prefix = first.to_string();
        for (k, x) in rest.iter().enumerate() {
            let cx = self.get(x).clone();
            let su = self.get(&prefix).rhs.as_scalar().expect("scalar right side");
            let (a, b, t) = (format!("{id}-{k}a"), format!("{id}-{k}b"), format!("{id}-{k}"));
            self.derive(&a, Rule::RightMul(prefix.clone(), cx.lhs.clone()))?;
            self.derive(&b, Rule::Scale(x.to_string(), su))?;
            self.derive(&t, trans(&a, &b))?;
            prefix = t;
        }
        let c = self.get(&prefix).clone();
        self.claim_elem(id, Rule::Rescale(prefix), c.lhs, c.rhs)
    }

    pub(crate) fn finish(self) -> Certificate {
        Certificate { level: self.ctx.level, context: self.ctx.kind, axioms: self.ctx.axioms, steps: self.steps }
    }
}

/// Squares `T₂ ≡ α₂` and removes the `[[2,1],[0,2]]`, `[[1,2],[0,4]]`
/// terms with `T₂` multiplied by `[[1,0],[0,2]]` and `[[2,0],[0,1]]`.
/// Ends at `H4-rhs`.
pub(crate) fn t2_square_steps(b: &mut Builder) -> Result<(), CertError> {
    b.derive("T2sq-a", Rule::RightMul("T2".into(), super::hecke_sum(2)))?;
    b.derive("T2sq-b", scale("T2", "a2"))?;
    b.claim(
        "T2-squared",
        add("T2sq-a", "T2sq-b"),
        "2 + [[1,1],[0,1]] + [[4,0],[0,1]] + [[1,0],[0,4]] + [[1,1],[0,4]] + [[2,1],[0,2]] + [[1,2],[0,4]] + [[1,3],[0,4]]",
        "a2^2",
    )?;
    b.derive("T2-M2", right_mul("T2", "[[1,0],[0,2]]"))?;
    b.derive("T2-M1", right_mul("T2", "[[2,0],[0,1]]"))?;
    b.derive("H4-rhs-a", scale("T2-M2", "-1"))?;
    b.derive("H4-rhs-b", scale("T2-M1", "-1"))?;
    b.derive("H4-rhs-c", add("T2-squared", "H4-rhs-a"))?;
    b.claim(
        "H4-rhs",
        add("H4-rhs-c", "H4-rhs-b"),
        "[[1,1],[0,4]] + [[1,3],[0,4]]",
        "a2^2 - [[1,1],[0,1]] - a2*[[2,0],[0,1]] - a2*[[1,0],[0,2]]",
    )
}

/// Steps valid at every level `N`: `P⁻¹`, `W`, `W⁻¹`, the conjugated Hecke
/// relations, `g₂`, and the `T₂²` chain through `H5`.
fn generic_f_steps(b: &mut Builder, n: u32) -> Result<(), CertError> {
    let h = format!("[[0,-1],[{n},0]]");
    for (id, ax) in [("P", "axiom-P"), ("H", "axiom-H"), ("T2", "axiom-T2"), ("T3", "axiom-T3")] {
        b.derive(id, Rule::Axiom(ax.into()))?;
    }
    b.derive("Pinv-a", right_mul("P", "[[1,-1],[0,1]]"))?;
    b.claim("Pinv", Rule::Sym("Pinv-a".into()), "[[1,-1],[0,1]]", "1")?;

    b.derive("W-a", right_mul("H", &format!("[[1,-1],[0,1]]*{h}")))?;
    b.derive("W-b", right_mul("Pinv", &h))?;
    b.derive("W-c", scale("W-b", "e"))?;
    b.derive("W-d", scale("H", "e"))?;
    b.derive("W-e", trans("W-a", "W-c"))?;
    let raw_w = format!("[[-{n},0],[-{},-{n}]]", n * n);
    b.claim("W-f", trans("W-e", "W-d"), &raw_w, "1")?;
    let w = format!("[[1,0],[{n},1]]");
    b.claim("W", Rule::Rescale("W-f".into()), &w, "1")?;
    b.derive("Winv-a", right_mul("W", &format!("{w}^-1")))?;
    b.claim("Winv", Rule::Sym("Winv-a".into()), &format!("[[1,0],[-{n},1]]"), "1")?;

    b.conjugate("HT2", "T2")?;
    b.conjugate("HT3", "T3")?;

    let x = format!("[[2,0],[-{n},1]]");
    let y = "[[1,1],[0,2]]";
    b.derive("T2-neg", scale("T2", "-1"))?;
    b.claim("g2-pre", add("HT2", "T2-neg"), &x, y)?;
    b.derive("g2-a", right_mul("g2-pre", &format!("{y}^-1")))?;
    b.derive("g2-b", right_mul("W", &format!("{x}*{y}^-1")))?;
    b.derive("g2", trans("g2-b", "g2-a"))?;

    t2_square_steps(b)?;
    b.conjugate("H4-conj", "H4-rhs")?;
    // H·RHS·H = RHS + P − W⁻¹, which vanishes modulo P ≡ 1 and W⁻¹ ≡ 1.
    b.derive("H4-a", scale("H4-rhs", "-1"))?;
    b.derive("H4-b", add("H4-conj", "H4-a"))?;
    b.derive("H4-c", add("H4-b", "P"))?;
    b.derive("H4-d", scale("Winv", "-1"))?;
    let x4 = "[[1,1],[0,4]] + [[1,3],[0,4]]";
    b.claim("H4", add("H4-c", "H4-d"), &format!("{h}*({x4})*{h}"), x4)?;
    b.claim(
        "H5",
        Rule::Sym("H4".into()),
        &format!("{x4} - [[4,0],[-{n},1]] - [[4,0],[-{},1]]", 3 * n),
        "0",
    )
}

fn level13_f_steps(b: &mut Builder) -> Result<(), CertError> {
    let g3 = "[[3,-1],[13,-4]]";
    b.derive("T3-neg", scale("T3", "-1"))?;
    b.derive("R3-a", add("HT3", "T3-neg"))?;
    b.claim(
        "R3",
        Rule::Sym("R3-a".into()),
        "[[1,1],[0,3]] + [[1,2],[0,3]]",
        "[[3,0],[-13,1]] + [[3,0],[-26,1]]",
    )?;
    b.replace_three(
        "3",
        "R3",
        ("[[1,2],[0,3]]", "e*[[0,-3],[13,-13]]"),
        ("[[3,0],[-13,1]]", "e*[[13,-1],[39,0]]"),
        "[[3,0],[-26,1]]",
        ("[[1,1],[0,3]] + e*[[0,-3],[13,-13]] - e*[[13,-1],[39,0]] - [[3,0],[13,1]]", "0"),
    )?;
    b.claim(
        "S3",
        right_mul("replace3", "[[1,1],[0,3]]^-1"),
        &format!("1 + e*[[0,-3],[39,-26]] - e*[[39,-14],[117,-39]] - {g3}"),
        "0",
    )?;
    b.claim("delta1", Rule::Rescale("S3".into()), &format!("(1 - {g3})*(1 - e*[[39,-14],[117,-39]])"), "0")?;

    b.replace_three(
        "4",
        "H5",
        ("[[1,3],[0,4]]", "e*[[0,-4],[13,-13]]"),
        ("[[4,0],[-13,1]]", "e*[[13,-1],[52,0]]"),
        "[[4,0],[-39,1]]",
        ("[[1,1],[0,4]] + e*[[0,-4],[13,-13]] - e*[[13,-1],[52,0]] - [[4,0],[13,1]]", "0"),
    )?;
    b.claim(
        "H6",
        Rule::Rescale("replace4".into()),
        "[[1,1],[0,4]] + e*[[0,4],[-13,13]] - e*[[13,-1],[52,0]] - [[4,0],[13,1]]",
        "0",
    )?;
    b.claim(
        "H7",
        right_mul("H6", "[[1,0],[-13,4]]"),
        &format!("{g3} + e*[[-26,8],[-91,26]] - e*[[13,-2],[26,0]] - 1"),
        "0",
    )?;
    b.claim("delta3", Rule::Rescale("H7".into()), &format!("-(1 - {g3})*(1 - e*[[-26,8],[-91,26]])"), "0")?;

    // g₂·(g₃⁻¹g₂) = g₃ because g₃⁻¹g₂ has order 2.
    b.claim("g3-via-g2", right_mul("g2", "[[5,-2],[13,-5]]"), g3, "[[5,-2],[13,-5]]")?;
    b.derive("delta2-a", scale("g3-via-g2", "-1"))?;
    b.derive("delta2-b", scale("g2", "-1"))?;
    b.claim("delta2", add("delta2-a", "delta2-b"), &format!("(1 - {g3})*(1 + [[5,-2],[13,-5]])"), "0")?;

    b.claim(
        "threedeltas-1",
        scale("delta1", "-e"),
        &format!("(1 - {g3})*[[39,-14],[117,-39]]"),
        &format!("e*(1 - {g3})"),
    )?;
    b.claim(
        "threedeltas-2",
        Rule::Rescale("delta2".into()),
        &format!("(1 - {g3})*[[5,-2],[13,-5]]"),
        &format!("-(1 - {g3})"),
    )?;
    b.claim(
        "threedeltas-3",
        scale("delta3", "e"),
        &format!("(1 - {g3})*[[-26,8],[-91,26]]"),
        &format!("e*(1 - {g3})"),
    )?;
    b.claim("g3-cube", scale("P", "0"), &format!("(1 - {g3})*(1 + {g3} + {g3}^2)"), "0")
}

/// The f-context derivation at level `N`. At level 13 it runs through the
/// three factorizations of `1 − g₃`; at other levels it stops after the
/// level-independent part.
pub fn build_f_certificate(level: u32) -> Result<Certificate, CertError> {
    let mut b = Builder::new(CongruenceContext::f(level));
    generic_f_steps(&mut b, level)?;
    if level == 13 {
        level13_f_steps(&mut b)?;
    }
    Ok(b.finish())
}

/// `h₂ ≡ −ε`, `h₃ ≡ 1` and their inverses in the g-context.
pub(crate) fn g_base_steps(b: &mut Builder) -> Result<(), CertError> {
    for i in 1..=3 {
        b.derive(&format!("delta{i}"), Rule::Axiom(format!("axiom-delta{i}")))?;
    }
    let d1 = RingElem::from_mat(super::delta_hat(1));
    b.derive("h2-a", Rule::RightMul("delta2".into(), d1.clone()))?;
    b.derive("h2-b", scale("delta1", "-1"))?;
    b.derive("h2", trans("h2-a", "h2-b"))?;
    b.derive("h3-a", Rule::RightMul("delta3".into(), d1))?;
    b.derive("h3-b", scale("delta1", "e"))?;
    b.derive("h3", trans("h3-a", "h3-b"))?;
    b.inverse("h2-inv", "h2")?;
    b.inverse("h3-inv", "h3")
}

/// Letters spelling `h₂^m h₃^n`.
pub(crate) fn h_letters(m: i64, n: i64) -> Vec<&'static str> {
    let l2 = if m >= 0 { "h2" } else { "h2-inv" };
    let l3 = if n >= 0 { "h3" } else { "h3-inv" };
    let mut out = vec![l2; m.unsigned_abs() as usize];
    out.extend(std::iter::repeat_n(l3, n.unsigned_abs() as usize));
    out
}

/// The g-context derivation: `h₂ ≡ −ε`, `h₃ ≡ 1`, `h₂²h₃ ≡ 1`.
pub fn build_g_certificate() -> Result<Certificate, CertError> {
    let mut b = Builder::new(CongruenceContext::g(13)?);
    g_base_steps(&mut b)?;
    b.word("h-power-sign", &h_letters(2, 1))?;
    Ok(b.finish())
}

/// Class of `h₂^m h₃^n` computed directly.
pub(crate) fn h_word_class(m: i64, n: i64) -> ProjMat {
    let h2 = super::delta_hat(2).mul(&super::delta_hat(1));
    let h3 = super::delta_hat(3).mul(&super::delta_hat(1));
    h2.pow(m).mul(&h3.pow(n))
}

#[cfg(test)]
mod tests {
    use super::super::{verify_certificate, CongruenceContext, SHIPPED_F, SHIPPED_G};
    use super::*;

    fn check_shipped(built: &Certificate, shipped: &str, name: &str) {
        let json = built.to_json();
        if std::env::var_os("REGENERATE_CERTS").is_some() {
            let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("certificates").join(name);
            std::fs::write(path, &json).unwrap();
            return;
        }
        assert!(json == shipped, "{name} is stale; rerun with REGENERATE_CERTS=1");
    }

    #[test]
    fn shipped_f_matches_builder() {
        let cert = build_f_certificate(13).unwrap();
        check_shipped(&cert, SHIPPED_F, "gamma0_13_f.json");
    }

    #[test]
    fn shipped_g_matches_builder() {
        let cert = build_g_certificate().unwrap();
        check_shipped(&cert, SHIPPED_G, "gamma0_13_g.json");
    }

    #[test]
    fn level_one_certificate_verifies() {
        let cert = build_f_certificate(1).unwrap();
        let report = verify_certificate(&CongruenceContext::f(1), &cert).unwrap();
        assert!(report.ok(), "{report}");
        assert_eq!(cert.step("W").unwrap().result.lhs, lit("[[1,0],[1,1]]"));
    }

    #[test]
    fn paper_h6_sign_variant_is_the_same_class() {
        assert_eq!(lit("[[0,4],[-13,13]]"), lit("[[0,-4],[13,-13]]"));
    }

    #[test]
    fn word_class_matches_derivation() {
        let cert = build_g_certificate().unwrap();
        let step = cert.step("h-power-sign").unwrap();
        assert_eq!(step.result.lhs, RingElem::from_mat(h_word_class(2, 1)));
        assert_eq!(step.result.rhs, RingElem::one());
    }
}
