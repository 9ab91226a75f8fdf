//! `Γ₀(N)`: membership, words in the level-13 generators `P, W, g₂, g₃`,
//! decomposition of group elements into such words, and cusps.
//!
//! Decomposition peels generators off either end of the matrix while that
//! lowers its height, falling back to a bounded breadth-first search when no
//! single move helps. Only words that re-evaluate to the input are returned.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::QuadElem;
use crate::projmat::{Mat2, ProjMat};

/// Default node budget for the breadth-first fallback.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gamma0Error {
    #[error("{0} is not in Gamma0({1})")]
    NotMember(String, u32),
    #[error("search budget of {0} nodes exhausted")]
    BudgetExhausted(usize),
    #[error("integer overflow while multiplying matrices")]
    Overflow,
    #[error("cusps are only implemented for prime level, not {0}")]
    Unsupported(u32),
    #[error("bad word at token {token:?}: {msg}")]
    BadWord { token: String, msg: String },
}

/// Integer 2×2 matrix with overflow-checked products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntMat {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

impl IntMat {
    pub const IDENTITY: IntMat = IntMat { a: 1, b: 0, c: 0, d: 1 };

    pub const fn new(a: i128, b: i128, c: i128, d: i128) -> Self {
        IntMat { a, b, c, d }
    }

    pub fn det(&self) -> Option<i128> {
        self.a.checked_mul(self.d)?.checked_sub(self.b.checked_mul(self.c)?)
    }

    pub fn mul(&self, o: &IntMat) -> Result<IntMat, Gamma0Error> {
        let dot = |x: i128, y: i128, z: i128, w: i128| {
            x.checked_mul(y).and_then(|p| z.checked_mul(w).and_then(|q| p.checked_add(q))).ok_or(Gamma0Error::Overflow)
        };
        Ok(IntMat {
            a: dot(self.a, o.a, self.b, o.c)?,
            b: dot(self.a, o.b, self.b, o.d)?,
            c: dot(self.c, o.a, self.d, o.c)?,
            d: dot(self.c, o.b, self.d, o.d)?,
        })
    }

    /// Inverse of a determinant-one matrix.
    pub fn inv_sl2(&self) -> IntMat {
        IntMat { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn pow(&self, e: i64) -> Result<IntMat, Gamma0Error> {
        let base = if e < 0 { self.inv_sl2() } else { *self };
        let mut acc = IntMat::IDENTITY;
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Representative of `±M` with `c > 0`, or `c = 0` and `d > 0`.
    pub fn sign_normalized(&self) -> IntMat {
        if self.c < 0 || (self.c == 0 && self.d < 0) {
            IntMat { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            *self
        }
    }

    pub fn is_plus_minus_identity(&self) -> bool {
        self.b == 0 && self.c == 0 && self.a == self.d && self.a.abs() == 1
    }

    /// `(max |entry|, Σ |entry|)`.
    fn height(&self) -> (u128, u128) {
        let e = [self.a, self.b, self.c, self.d].map(i128::unsigned_abs);
        (e.into_iter().max().unwrap_or(0), e.into_iter().fold(0u128, u128::saturating_add))
    }

    pub fn to_mat2(&self) -> Mat2 {
        let q = |x: i128| QuadElem::from_rational(BigInt::from(x).into());
        Mat2::new(q(self.a), q(self.b), q(self.c), q(self.d))
    }

    pub fn to_projmat(&self) -> ProjMat {
        ProjMat::canonicalize(&self.to_mat2()).expect("determinant one")
    }

    /// The primitive integer representative of a class with rational
    /// entries, if any.
    pub fn primitive_of(m: &ProjMat) -> Option<IntMat> {
        let rep = m.rep();
        let entries: Vec<_> = rep.entries().into_iter().map(|e| e.as_rational().cloned()).collect::<Option<_>>()?;
        let lcm = entries.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let ints: Vec<BigInt> = entries.iter().map(|r| (r * &lcm).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        let v: Vec<i128> = ints.iter().map(|x| (x / &g).to_i128()).collect::<Option<_>>()?;
        Some(IntMat::new(v[0], v[1], v[2], v[3]))
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// Whether the class of `m` has an integer representative of determinant 1
/// with `N | c`.
pub fn is_member(m: &ProjMat, level: u32) -> bool {
    member_rep(m, level).is_some()
}

fn member_rep(m: &ProjMat, level: u32) -> Option<IntMat> {
    let p = IntMat::primitive_of(m)?;
    (p.det() == Some(1) && p.c % level as i128 == 0).then_some(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    P,
    W,
    G2,
    G3,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::P, Gen::W, Gen::G2, Gen::G3];

    pub fn matrix(self) -> IntMat {
        match self {
            Gen::P => IntMat::new(1, 1, 0, 1),
            Gen::W => IntMat::new(1, 0, 13, 1),
            Gen::G2 => IntMat::new(2, -1, 13, -6),
            Gen::G3 => IntMat::new(3, -1, 13, -4),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gen::P => "P",
            Gen::W => "W",
            Gen::G2 => "g2",
            Gen::G3 => "g3",
        }
    }

    /// Projective order, if finite.
    fn order(self) -> Option<i64> {
        (self == Gen::G3).then_some(3)
    }
}

/// A reduced word: adjacent generators differ, exponents are nonzero, and
/// `g₃` exponents lie in `{−1, 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Word {
    letters: Vec<(Gen, i64)>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I: IntoIterator<Item = (Gen, i64)>>(letters: I) -> Self {
        let mut w = Word::empty();
        for (g, e) in letters {
            w.push(g, e);
        }
        w
    }

    pub fn letters(&self) -> &[(Gen, i64)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn reduce_exp(g: Gen, e: i64) -> i64 {
        match g.order() {
            Some(n) => {
                let r = e.rem_euclid(n);
                if r * 2 > n {
                    r - n
                } else {
                    r
                }
            }
            None => e,
        }
    }

    pub fn push(&mut self, g: Gen, e: i64) {
        let e = Self::reduce_exp(g, e);
        if e == 0 {
            return;
        }
        match self.letters.last_mut() {
            Some((h, f)) if *h == g => {
                let s = Self::reduce_exp(g, *f + e);
                if s == 0 {
                    self.letters.pop();
                } else {
                    *f = s;
                }
            }
            _ => self.letters.push((g, e)),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &(g, e) in &other.letters {
            w.push(g, e);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word::new(self.letters.iter().rev().map(|&(g, e)| (g, -e)))
    }

    pub fn evaluate_int(&self) -> Result<IntMat, Gamma0Error> {
        self.letters.iter().try_fold(IntMat::IDENTITY, |acc, &(g, e)| acc.mul(&g.matrix().pow(e)?))
    }

    pub fn evaluate(&self) -> Result<ProjMat, Gamma0Error> {
        Ok(self.evaluate_int()?.to_projmat())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (i, (g, e)) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(g.name())?;
            if *e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Gamma0Error;

    fn from_str(s: &str) -> Result<Word, Gamma0Error> {
        let mut w = Word::empty();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let bad = |msg: &str| Gamma0Error::BadWord { token: tok.to_string(), msg: msg.to_string() };
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (n, e.parse::<i64>().map_err(|_| bad("exponent is not an integer"))?),
                None => (tok, 1),
            };
            let g = Gen::ALL.into_iter().find(|g| g.name() == name).ok_or_else(|| bad("unknown generator"))?;
            w.push(g, exp);
        }
        Ok(w)
    }
}

/// A move `cur ← X⁻¹·cur` (left) or `cur ← cur·X⁻¹` (right), with `X = g^e`.
#[derive(Clone, Copy, Debug)]
struct Move {
    left: bool,
    gen: Gen,
    exp: i64,
}

fn apply(cur: &IntMat, mv: Move) -> Result<IntMat, Gamma0Error> {
    let x_inv = mv.gen.matrix().pow(-mv.exp)?;
    let out = if mv.left { x_inv.mul(cur)? } else { cur.mul(&x_inv)? };
    Ok(out.sign_normalized())
}

fn rounded_quotients(num: &[i128], den: &[i128]) -> Vec<i64> {
    let mut out = Vec::new();
    for (&n, &d) in num.iter().zip(den) {
        if d != 0 {
            let q = n.div_euclid(d);
            for e in [q - 1, q, q + 1] {
                if let Ok(e) = i64::try_from(e) {
                    out.push(e);
                }
            }
        }
    }
    out
}

/// Candidate moves: single steps of every generator on either side, plus
/// the best powers of the parabolic generators.
fn candidate_moves(cur: &IntMat) -> Vec<Move> {
    let mut moves = Vec::new();
    for left in [true, false] {
        for gen in Gen::ALL {
            for exp in [1, -1] {
                moves.push(Move { left, gen, exp });
            }
        }
    }
    let IntMat { a, b, c, d } = *cur;
    let mut push_powers = |left: bool, gen: Gen, es: Vec<i64>| {
        for exp in es {
            if exp.abs() > 1 {
                moves.push(Move { left, gen, exp });
            }
        }
    };
    // P^{−e}·M = [[a − ec, b − ed], [c, d]].
    push_powers(true, Gen::P, rounded_quotients(&[a, b], &[c, d]));
    // M·P^{−e} = [[a, b − ea], [c, d − ec]].
    push_powers(false, Gen::P, rounded_quotients(&[b, d], &[a, c]));
    // W^{−e}·M = [[a, b], [c − 13ea, d − 13eb]].
    push_powers(true, Gen::W, rounded_quotients(&[c, d], &[13 * a, 13 * b]));
    // M·W^{−e} = [[a − 13eb, b], [c − 13ed, d]].
    push_powers(false, Gen::W, rounded_quotients(&[a, c], &[13 * b, 13 * d]));
    moves
}

struct Trace {
    left: Word,
    right: Word,
}

impl Trace {
    fn record(&mut self, mv: Move) {
        if mv.left {
            self.left.push(mv.gen, mv.exp);
        } else {
            self.right = Word::new([(mv.gen, mv.exp)]).concat(&self.right);
        }
    }
}

/// Breadth-first search for any sequence of single-generator moves that
/// strictly lowers the height. Returns the move sequence and the new matrix.
fn bfs_lower(start: &IntMat, budget: &mut usize) -> Result<(Vec<Move>, IntMat), Gamma0Error> {
    let target = start.height();
    let mut seen = HashSet::new();
    seen.insert(*start);
    let mut queue = VecDeque::new();
    queue.push_back((*start, Vec::<Move>::new()));
    while let Some((m, path)) = queue.pop_front() {
        for left in [true, false] {
            for gen in Gen::ALL {
                for exp in [1, -1] {
                    if *budget == 0 {
                        return Err(Gamma0Error::BudgetExhausted(DEFAULT_BUDGET));
                    }
                    *budget -= 1;
                    let mv = Move { left, gen, exp };
                    let Ok(next) = apply(&m, mv) else { continue };
                    if !seen.insert(next) {
                        continue;
                    }
                    let mut p = path.clone();
                    p.push(mv);
                    if next.height() < target {
                        return Ok((p, next));
                    }
                    queue.push_back((next, p));
                }
            }
        }
    }
    Err(Gamma0Error::BudgetExhausted(DEFAULT_BUDGET))
}

/// Writes an element of `Γ₀(13)` as a word in `P, W, g₂, g₃`, using at most
/// `budget` search nodes.
pub fn decompose_with_budget(m: &ProjMat, budget: usize) -> Result<Word, Gamma0Error> {
    let start = member_rep(m, 13).ok_or_else(|| Gamma0Error::NotMember(m.to_string(), 13))?;
    let mut cur = start.sign_normalized();
    let mut trace = Trace { left: Word::empty(), right: Word::empty() };
    let mut remaining = budget;
    while !cur.is_plus_minus_identity() {
        let h = cur.height();
        let best = candidate_moves(&cur)
            .into_iter()
            .filter_map(|mv| apply(&cur, mv).ok().map(|n| (n.height(), mv, n)))
            .min_by_key(|(nh, _, _)| *nh);
        match best {
            Some((nh, mv, next)) if nh < h => {
                trace.record(mv);
                cur = next;
            }
            _ => {
                let (path, next) = bfs_lower(&cur, &mut remaining).map_err(|e| match e {
                    Gamma0Error::BudgetExhausted(_) => Gamma0Error::BudgetExhausted(budget),
                    other => other,
                })?;
                for mv in path {
                    trace.record(mv);
                }
                cur = next;
            }
        }
    }
    let word = trace.left.concat(&trace.right);
    if word.evaluate()? != *m {
        unreachable!("decomposition of {m} re-evaluates to a different class");
    }
    Ok(word)
}

pub fn decompose(m: &ProjMat) -> Result<Word, Gamma0Error> {
    decompose_with_budget(m, DEFAULT_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cusp {
    Infinity,
    /// The rational cusp `p/q`.
    Rational(i64, i64),
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cusp::Infinity => f.write_str("∞"),
            Cusp::Rational(p, 1) => write!(f, "{p}"),
            Cusp::Rational(p, q) => write!(f, "{p}/{q}"),
        }
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Cusp representatives of `Γ₀(N)` for prime `N`: `∞` and `0`.
pub fn cusps(level: u32) -> Result<Vec<Cusp>, Gamma0Error> {
    if !is_prime(level) {
        return Err(Gamma0Error::Unsupported(level));
    }
    Ok(vec![Cusp::Infinity, Cusp::Rational(0, 1)])
}
