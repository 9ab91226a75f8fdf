//! Congruence certificates: derivations modulo the right ideal
//! `Ω_f = {ω : f|ω = 0}`, and their verifier.
//!
//! A congruence `lhs ≡ rhs` asserts `lhs − rhs ∈ Ω_f`. A certificate is an
//! ordered list of steps, each naming a rule and its premises together with
//! the congruence it claims. The verifier recomputes every rule exactly and
//! accepts a claim iff its difference `lhs − rhs` equals the recomputed
//! difference, so a claim may rearrange terms between the two sides or
//! present a product in factored form. Failed steps report the exact
//! difference `claimed − recomputed`.
//!
//! All rules are sound for a right ideal: right multiplication by any
//! group-ring element, sums, scalar multiples, symmetry, transitivity and
//! projective rescaling (implicit in [`ProjMat`] canonical forms).

mod analysis;
mod builder;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{ExactError, ScalarPoly};
use crate::groupring::RingElem;
use crate::projmat::{fricke, ProjMat};
use crate::text::ParseError;

pub use analysis::{
    blowup_check, conjugated_g3, conjugated_g3_squared, delta_hats, diagonalizer, h2_raw, h3_raw, paper_deltas,
    sign_exponent_check, square_t2_derivation, tilde_g_check, BlowupReport, SignCheck, TildeGReport,
};
pub use builder::{build_f_certificate, build_g_certificate};

pub const FORMAT_VERSION: u32 = 1;

/// The level-13 certificate for the form itself.
pub const SHIPPED_F: &str = include_str!("../../certificates/gamma0_13_f.json");
/// The level-13 certificate for `g = f|(1 − g₃)`.
pub const SHIPPED_G: &str = include_str!("../../certificates/gamma0_13_g.json");

#[derive(Debug, Error)]
pub enum CertError {
    #[error("malformed certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported certificate version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("unknown context {0:?} (expected \"f\" or \"g\")")]
    UnknownContext(String),
    #[error("certificate is for context {file} but context {requested} was requested")]
    ContextMismatch { file: ContextKind, requested: ContextKind },
    #[error("certificate level {file} does not match context level {context}")]
    LevelMismatch { file: u32, context: u32 },
    #[error("the g-context is only defined at level 13, not {0}")]
    NoGContext(u32),
    #[error("step {step}: unknown rule {rule:?}")]
    UnknownRule { step: String, rule: String },
    #[error("step {step}: rule {rule} takes {expected} arguments, found {found}")]
    Arity { step: String, rule: &'static str, expected: usize, found: usize },
    #[error("{place}: {source}")]
    Literal { place: String, source: ParseError },
    #[error("step {step}: reference to unknown id {reference:?}")]
    Dangling { step: String, reference: String },
    #[error("duplicate id {0:?}")]
    Duplicate(String),
    #[error("axiom {0:?} is not implied by the context")]
    ForeignAxiom(String),
    #[error("step {step}: {source}")]
    Arithmetic { step: String, source: ExactError },
    #[error("derivation step {step} does not verify: {detail}")]
    Authoring { step: String, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ContextKind {
    /// Axioms on the form `f` itself.
    #[default]
    F,
    /// Axioms on `g = f|(1 − g₃)`.
    G,
}

impl fmt::Display for ContextKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContextKind::F => "f",
            ContextKind::G => "g",
        })
    }
}

impl FromStr for ContextKind {
    type Err = CertError;

    fn from_str(s: &str) -> Result<Self, CertError> {
        match s {
            "f" => Ok(ContextKind::F),
            "g" => Ok(ContextKind::G),
            other => Err(CertError::UnknownContext(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence {
    pub id: String,
    pub lhs: RingElem,
    pub rhs: RingElem,
}

impl Congruence {
    pub fn new(id: impl Into<String>, lhs: RingElem, rhs: RingElem) -> Self {
        Congruence { id: id.into(), lhs, rhs }
    }

    /// `lhs − rhs`, the element asserted to lie in the ideal.
    pub fn difference(&self) -> RingElem {
        &self.lhs - &self.rhs
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ≡ {}", self.lhs, self.rhs)
    }
}

/// `T_p` as a group-ring element: `[[p,0],[0,1]] + Σ_{a<p} [[1,a],[0,p]]`.
pub fn hecke_sum(p: i64) -> RingElem {
    let mut mats = vec![ProjMat::from_ints(p, 0, 0, 1).expect("positive det")];
    mats.extend((0..p).map(|a| ProjMat::from_ints(1, a, 0, p).expect("positive det")));
    RingElem::sum_of(&mats)
}

pub(crate) fn delta_hat(i: usize) -> ProjMat {
    let (a, b, c, d) = match i {
        1 => (39, -14, 117, -39),
        2 => (5, -2, 13, -5),
        3 => (-26, 8, -91, 26),
        _ => unreachable!("delta index {i}"),
    };
    ProjMat::from_ints(a, b, c, d).expect("positive det")
}

/// Axioms generating the ideal, for one level and context.
#[derive(Clone, Debug)]
pub struct CongruenceContext {
    pub level: u32,
    pub kind: ContextKind,
    pub axioms: Vec<Congruence>,
}

impl CongruenceContext {
    /// `P ≡ 1`, `H ≡ ε`, `T₂ ≡ α₂`, `T₃ ≡ α₃` at level `N`.
    pub fn f(level: u32) -> Self {
        let h = ProjMat::canonicalize(&fricke(level)).expect("Fricke matrix has det N");
        let axioms = vec![
            Congruence::new("axiom-P", RingElem::from_mat(ProjMat::from_ints(1, 1, 0, 1).expect("P")), RingElem::one()),
            Congruence::new("axiom-H", RingElem::from_mat(h), RingElem::scalar(ScalarPoly::eps())),
            Congruence::new("axiom-T2", hecke_sum(2), RingElem::scalar(ScalarPoly::alpha2())),
            Congruence::new("axiom-T3", hecke_sum(3), RingElem::scalar(ScalarPoly::alpha3())),
        ];
        CongruenceContext { level, kind: ContextKind::F, axioms }
    }

    /// `δ̂₁ ≡ ε`, `δ̂₂ ≡ −1`, `δ̂₃ ≡ ε` for `g = f|(1 − g₃)` at level 13.
    pub fn g(level: u32) -> Result<Self, CertError> {
        if level != 13 {
            return Err(CertError::NoGContext(level));
        }
        let eps = RingElem::scalar(ScalarPoly::eps());
        let axioms = vec![
            Congruence::new("axiom-delta1", RingElem::from_mat(delta_hat(1)), eps.clone()),
            Congruence::new("axiom-delta2", RingElem::from_mat(delta_hat(2)), -RingElem::one()),
            Congruence::new("axiom-delta3", RingElem::from_mat(delta_hat(3)), eps),
        ];
        Ok(CongruenceContext { level, kind: ContextKind::G, axioms })
    }

    pub fn new(kind: ContextKind, level: u32) -> Result<Self, CertError> {
        match kind {
            ContextKind::F => Ok(Self::f(level)),
            ContextKind::G => Self::g(level),
        }
    }

    /// Whether `c` is one of the axioms, up to orientation.
    fn implies(&self, c: &Congruence) -> bool {
        let d = c.difference();
        self.axioms.iter().any(|a| {
            let ad = a.difference();
            ad == d || ad == -&d
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Axiom(String),
    RightMul(String, RingElem),
    Add(String, String),
    Scale(String, ScalarPoly),
    Sym(String),
    Trans(String, String),
    Rescale(String),
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Axiom(_) => "AXIOM",
            Rule::RightMul(..) => "RIGHT_MUL",
            Rule::Add(..) => "ADD",
            Rule::Scale(..) => "SCALE",
            Rule::Sym(_) => "SYM",
            Rule::Trans(..) => "TRANS",
            Rule::Rescale(_) => "RESCALE",
        }
    }

    fn references(&self) -> Vec<&str> {
        match self {
            Rule::Axiom(a) | Rule::RightMul(a, _) | Rule::Scale(a, _) | Rule::Sym(a) | Rule::Rescale(a) => vec![a],
            Rule::Add(a, b) | Rule::Trans(a, b) => vec![a, b],
        }
    }

    fn args(&self) -> Vec<String> {
        match self {
            Rule::Axiom(a) | Rule::Sym(a) | Rule::Rescale(a) => vec![a.clone()],
            Rule::RightMul(a, w) => vec![a.clone(), w.to_string()],
            Rule::Scale(a, s) => vec![a.clone(), s.to_string()],
            Rule::Add(a, b) | Rule::Trans(a, b) => vec![a.clone(), b.clone()],
        }
    }

    fn parse(step: &str, name: &str, args: &[String]) -> Result<Rule, CertError> {
        let (rule, arity): (&'static str, usize) = match name {
            "AXIOM" => ("AXIOM", 1),
            "RIGHT_MUL" => ("RIGHT_MUL", 2),
            "ADD" => ("ADD", 2),
            "SCALE" => ("SCALE", 2),
            "SYM" => ("SYM", 1),
            "TRANS" => ("TRANS", 2),
            "RESCALE" => ("RESCALE", 1),
            _ => return Err(CertError::UnknownRule { step: step.into(), rule: name.into() }),
        };
        if args.len() != arity {
            return Err(CertError::Arity { step: step.into(), rule, expected: arity, found: args.len() });
        }
        let lit = |e: ParseError| CertError::Literal { place: format!("step {step}, argument 2"), source: e };
        let a = args[0].clone();
        Ok(match rule {
            "AXIOM" => Rule::Axiom(a),
            "RIGHT_MUL" => Rule::RightMul(a, args[1].parse().map_err(lit)?),
            "ADD" => Rule::Add(a, args[1].clone()),
            "SCALE" => Rule::Scale(a, args[1].parse().map_err(lit)?),
            "SYM" => Rule::Sym(a),
            "TRANS" => Rule::Trans(a, args[1].clone()),
            _ => Rule::Rescale(a),
        })
    }
}

/// One derivation step. `text` keeps the claimed sides as written.
#[derive(Clone, Debug)]
pub struct Step {
    pub rule: Rule,
    pub result: Congruence,
    text: (String, String),
}

impl Step {
    pub fn new(rule: Rule, result: Congruence) -> Self {
        let text = (result.lhs.to_string(), result.rhs.to_string());
        Step { rule, result, text }
    }

    pub fn id(&self) -> &str {
        &self.result.id
    }
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub level: u32,
    pub context: ContextKind,
    pub axioms: Vec<Congruence>,
    pub steps: Vec<Step>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificate {
    version: u32,
    level: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    context: Option<String>,
    axioms: Vec<RawAxiom>,
    steps: Vec<RawStep>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxiom {
    id: String,
    lhs: String,
    rhs: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    id: String,
    rule: String,
    args: Vec<String>,
    result: RawSides,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSides {
    lhs: String,
    rhs: String,
}

fn parse_side(place: String, s: &str) -> Result<RingElem, CertError> {
    s.parse().map_err(|source| CertError::Literal { place, source })
}

impl Certificate {
    pub fn from_json(s: &str) -> Result<Certificate, CertError> {
        let raw: RawCertificate = serde_json::from_str(s)?;
        if raw.version != FORMAT_VERSION {
            return Err(CertError::Version(raw.version));
        }
        let context = raw.context.as_deref().map(str::parse).transpose()?.unwrap_or_default();
        let axioms = raw
            .axioms
            .into_iter()
            .map(|a| {
                let lhs = parse_side(format!("axiom {}, lhs", a.id), &a.lhs)?;
                let rhs = parse_side(format!("axiom {}, rhs", a.id), &a.rhs)?;
                Ok(Congruence::new(a.id, lhs, rhs))
            })
            .collect::<Result<_, CertError>>()?;
        let steps = raw
            .steps
            .into_iter()
            .map(|s| {
                let rule = Rule::parse(&s.id, &s.rule, &s.args)?;
                let lhs = parse_side(format!("step {}, lhs", s.id), &s.result.lhs)?;
                let rhs = parse_side(format!("step {}, rhs", s.id), &s.result.rhs)?;
                Ok(Step { rule, result: Congruence::new(s.id, lhs, rhs), text: (s.result.lhs, s.result.rhs) })
            })
            .collect::<Result<_, CertError>>()?;
        Ok(Certificate { level: raw.level, context, axioms, steps })
    }

    pub fn to_json(&self) -> String {
        let raw = RawCertificate {
            version: FORMAT_VERSION,
            level: self.level,
            context: Some(self.context.to_string()),
            axioms: self
                .axioms
                .iter()
                .map(|a| RawAxiom { id: a.id.clone(), lhs: a.lhs.to_string(), rhs: a.rhs.to_string() })
                .collect(),
            steps: self
                .steps
                .iter()
                .map(|s| RawStep {
                    id: s.id().to_string(),
                    rule: s.rule.name().to_string(),
                    args: s.rule.args(),
                    result: RawSides { lhs: s.text.0.clone(), rhs: s.text.1.clone() },
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&raw).expect("plain data serializes");
        out.push('\n');
        out
    }

    pub fn step(&self, id: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.id() == id)
    }
}

/// Congruences established so far, by id.
#[derive(Clone, Debug, Default)]
pub struct Known {
    map: HashMap<String, Congruence>,
}

impl Known {
    pub fn get(&self, id: &str) -> Option<&Congruence> {
        self.map.get(id)
    }

    fn insert(&mut self, c: Congruence) -> Result<(), CertError> {
        if self.map.contains_key(&c.id) {
            return Err(CertError::Duplicate(c.id));
        }
        self.map.insert(c.id.clone(), c);
        Ok(())
    }

    fn fetch(&self, step: &str, id: &str) -> Result<&Congruence, CertError> {
        self.map.get(id).ok_or_else(|| CertError::Dangling { step: step.into(), reference: id.into() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// Claimed minus recomputed difference.
    Mismatch(RingElem),
    /// Premises of the wrong shape (TRANS with unequal middle terms, an
    /// AXIOM step naming a derived step).
    Malformed(String),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub id: String,
    pub rule: &'static str,
    pub verdict: Verdict,
}

impl fmt::Display for StepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Ok => write!(f, "STEP {} OK rule={}", self.id, self.rule),
            Verdict::Mismatch(d) => write!(f, "STEP {} FAIL rule={} diff={}", self.id, self.rule, d),
            Verdict::Malformed(why) => write!(f, "STEP {} FAIL rule={} reason={}", self.id, self.rule, why),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub steps: Vec<StepReport>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.steps.iter().all(|s| s.verdict.is_ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &StepReport> {
        self.steps.iter().filter(|s| !s.verdict.is_ok())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        write!(f, "CERTIFICATE {}", if self.ok() { "OK" } else { "FAIL" })
    }
}

/// The congruence a rule produces from its premises, as `(lhs, rhs)`, or a
/// reason the premises do not fit the rule.
fn apply_rule(
    ctx: &CongruenceContext,
    known: &Known,
    id: &str,
    rule: &Rule,
) -> Result<Result<(RingElem, RingElem), String>, CertError> {
    let arith = |source: ExactError| CertError::Arithmetic { step: id.into(), source };
    Ok(Ok(match rule {
        Rule::Axiom(a) => {
            let c = known.fetch(id, a)?;
            if !ctx.axioms.iter().any(|ax| ax.id == *a) {
                return Ok(Err(format!("{a} is not an axiom")));
            }
            (c.lhs.clone(), c.rhs.clone())
        }
        Rule::RightMul(a, w) => {
            let c = known.fetch(id, a)?;
            (c.lhs.checked_right_mul(w).map_err(arith)?, c.rhs.checked_right_mul(w).map_err(arith)?)
        }
        Rule::Add(a, b) => {
            let (x, y) = (known.fetch(id, a)?, known.fetch(id, b)?);
            (&x.lhs + &y.lhs, &x.rhs + &y.rhs)
        }
        Rule::Scale(a, s) => {
            let c = known.fetch(id, a)?;
            (c.lhs.checked_scale(s).map_err(arith)?, c.rhs.checked_scale(s).map_err(arith)?)
        }
        Rule::Sym(a) => {
            let c = known.fetch(id, a)?;
            (c.rhs.clone(), c.lhs.clone())
        }
        Rule::Trans(a, b) => {
            let (x, y) = (known.fetch(id, a)?, known.fetch(id, b)?);
            if x.rhs != y.lhs {
                return Ok(Err(format!("right side of {a} differs from left side of {b}")));
            }
            (x.lhs.clone(), y.rhs.clone())
        }
        Rule::Rescale(a) => {
            let c = known.fetch(id, a)?;
            (c.lhs.clone(), c.rhs.clone())
        }
    }))
}

/// Checks one step against the congruences established so far.
pub fn verify_step(ctx: &CongruenceContext, known: &Known, step: &Step) -> Result<Verdict, CertError> {
    let id = step.id();
    Ok(match apply_rule(ctx, known, id, &step.rule)? {
        Err(why) => Verdict::Malformed(why),
        Ok((lhs, rhs)) => {
            let diff = &step.result.difference() - &(&lhs - &rhs);
            if diff.is_zero() {
                Verdict::Ok
            } else {
                Verdict::Mismatch(diff)
            }
        }
    })
}

/// Verifies every step in order. Failed steps still enter scope with their
/// claimed result so that later failures are reported independently.
/// Structural problems (dangling references, duplicate ids, foreign axioms,
/// level mismatch) are errors rather than verdicts.
pub fn verify_certificate(ctx: &CongruenceContext, cert: &Certificate) -> Result<Report, CertError> {
    if cert.level != ctx.level {
        return Err(CertError::LevelMismatch { file: cert.level, context: ctx.level });
    }
    if cert.context != ctx.kind {
        return Err(CertError::ContextMismatch { file: cert.context, requested: ctx.kind });
    }
    let mut known = Known::default();
    for a in &cert.axioms {
        if !ctx.implies(a) {
            return Err(CertError::ForeignAxiom(a.id.clone()));
        }
        known.insert(a.clone())?;
    }
    let mut steps = Vec::with_capacity(cert.steps.len());
    for step in &cert.steps {
        for r in step.rule.references() {
            known.fetch(step.id(), r)?;
        }
        let verdict = verify_step(ctx, &known, step)?;
        steps.push(StepReport { id: step.id().to_string(), rule: step.rule.name(), verdict });
        known.insert(step.result.clone())?;
    }
    Ok(Report { steps })
}

/// Parses and verifies a certificate in its declared context (or the given
/// one, which must agree with any declaration in the file).
pub fn verify_json(json: &str, requested: Option<ContextKind>) -> Result<(Certificate, Report), CertError> {
    let mut cert = Certificate::from_json(json)?;
    let declared = serde_json::from_str::<serde_json::Value>(json)?.get("context").is_some();
    if let Some(kind) = requested {
        if declared && kind != cert.context {
            return Err(CertError::ContextMismatch { file: cert.context, requested: kind });
        }
        cert.context = kind;
    }
    let ctx = CongruenceContext::new(cert.context, cert.level)?;
    let report = verify_certificate(&ctx, &cert)?;
    Ok((cert, report))
}
