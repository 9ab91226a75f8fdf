//! Truncated q-expansions `Σ cᵢ q^{o+i}` with exact rational coefficients.
//!
//! Each series carries its truncation: `coeffs[i]` is the exact
//! coefficient of `q^{offset+i}` for `i < len`, and nothing is known past
//! that. Products keep only coefficients that the inputs determine.

use std::fmt;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("offsets {0} and {1} differ by a non-integer")]
    IncompatibleOffsets(String, String),
    #[error("series has non-integer leading exponent {0}")]
    NonIntegerOffset(String),
    #[error("leading coefficient is zero; series is not invertible")]
    NotInvertible,
    #[error("coefficient of q^{0} lies beyond the truncation")]
    Truncated(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad eta specification {0:?}: {1}")]
    BadEtaSpec(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    offset: BigRational,
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl QSeries {
    pub fn new(offset: BigRational, coeffs: Vec<BigRational>) -> Self {
        QSeries { offset, coeffs }
    }

    pub fn from_ints(offset: i64, coeffs: &[i64]) -> Self {
        QSeries { offset: rat(offset), coeffs: coeffs.iter().map(|&c| rat(c)).collect() }
    }

    /// The constant 1 known to `len` terms.
    pub fn one(len: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); len];
        if len > 0 {
            coeffs[0] = BigRational::one();
        }
        QSeries { offset: BigRational::zero(), coeffs }
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Number of known coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn truncate(&self, len: usize) -> Self {
        QSeries { offset: self.offset.clone(), coeffs: self.coeffs[..len.min(self.len())].to_vec() }
    }

    /// Exponent of the last known coefficient.
    pub fn top_exponent(&self) -> BigRational {
        &self.offset + rat(self.len() as i64 - 1)
    }

    /// Coefficient of `q^x` with the convention that it is zero whenever
    /// `x − offset` is not a nonnegative integer (in particular for
    /// non-integral `x` when the offset is integral).
    pub fn coeff(&self, x: &BigRational) -> Result<BigRational, SeriesError> {
        let rel = x - &self.offset;
        if !rel.is_integer() || rel.is_negative() {
            return Ok(BigRational::zero());
        }
        rel.to_integer()
            .to_usize()
            .and_then(|i| self.coeffs.get(i).cloned())
            .ok_or_else(|| SeriesError::Truncated(fmt_rat(x)))
    }

    /// `a_n` for integer `n`.
    pub fn a(&self, n: i64) -> Result<BigRational, SeriesError> {
        self.coeff(&rat(n))
    }

    /// The leading exponent as an integer, if it is one.
    pub fn integer_offset(&self) -> Result<i64, SeriesError> {
        if !self.offset.is_integer() {
            return Err(SeriesError::NonIntegerOffset(fmt_rat(&self.offset)));
        }
        self.offset.to_integer().to_i64().ok_or_else(|| SeriesError::NonIntegerOffset(fmt_rat(&self.offset)))
    }

    pub fn add(&self, other: &QSeries) -> Result<QSeries, SeriesError> {
        let shift = &other.offset - &self.offset;
        if !shift.is_integer() {
            return Err(SeriesError::IncompatibleOffsets(fmt_rat(&self.offset), fmt_rat(&other.offset)));
        }
        let shift = shift.to_integer().to_i64().expect("small offsets");
        let (lo, hi) = if shift >= 0 { (self, other) } else { (other, self) };
        let hi_shift = shift.unsigned_abs() as usize;
        let len = lo.len().min(hi.len() + hi_shift);
        let coeffs = (0..len)
            .map(|i| {
                let mut c = lo.coeffs[i].clone();
                if i >= hi_shift {
                    c += &hi.coeffs[i - hi_shift];
                }
                c
            })
            .collect();
        Ok(QSeries { offset: lo.offset.clone(), coeffs })
    }

    pub fn scale(&self, c: &BigRational) -> QSeries {
        QSeries { offset: self.offset.clone(), coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn neg(&self) -> QSeries {
        self.scale(&rat(-1))
    }

    fn to_common(&self, len: usize) -> (Vec<BigInt>, BigInt) {
        let den = self.coeffs[..len].iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let nums = self.coeffs[..len].iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
        (nums, den)
    }

    /// Product; offsets add and the length is the shorter input length.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let len = self.len().min(other.len());
        let offset = &self.offset + &other.offset;
        if len == 0 {
            return QSeries { offset, coeffs: Vec::new() };
        }
        let (f, df) = self.to_common(len);
        let (g, dg) = other.to_common(len);
        let den = df * dg;
        let coeffs = (0..len)
            .into_par_iter()
            .map(|i| {
                let mut s = BigInt::zero();
                for j in 0..=i {
                    if !f[j].is_zero() && !g[i - j].is_zero() {
                        s += &f[j] * &g[i - j];
                    }
                }
                BigRational::new(s, den.clone())
            })
            .collect();
        QSeries { offset, coeffs }
    }

    pub fn pow(&self, e: u32) -> QSeries {
        let mut acc = QSeries::one(self.len());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse; the leading coefficient must be nonzero.
    pub fn inverse(&self) -> Result<QSeries, SeriesError> {
        let a0 = self.coeffs.first().filter(|c| !c.is_zero()).ok_or(SeriesError::NotInvertible)?;
        let inv0 = a0.recip();
        let mut b: Vec<BigRational> = Vec::with_capacity(self.len());
        b.push(inv0.clone());
        for n in 1..self.len() {
            let mut s = BigRational::zero();
            for j in 1..=n {
                if !self.coeffs[j].is_zero() {
                    s += &self.coeffs[j] * &b[n - j];
                }
            }
            b.push(-(s * &inv0));
        }
        Ok(QSeries { offset: -&self.offset, coeffs: b })
    }

    /// `f(q) ↦ f(q^p)`.
    pub fn v(&self, p: usize) -> QSeries {
        if self.is_empty() {
            return QSeries { offset: &self.offset * rat(p as i64), coeffs: Vec::new() };
        }
        let len = p * (self.len() - 1) + 1;
        let mut coeffs = vec![BigRational::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[p * i] = c.clone();
        }
        QSeries { offset: &self.offset * rat(p as i64), coeffs }
    }

    /// `Σ aₙ qⁿ ↦ Σ a_{pn} qⁿ` for an integer offset.
    pub fn u(&self, p: usize) -> Result<QSeries, SeriesError> {
        let o = self.integer_offset()?;
        let first = Integer::div_ceil(&o, &(p as i64));
        let top = o + self.len() as i64 - 1;
        let last = top.div_euclid(p as i64);
        let coeffs = (first..=last).map(|n| self.a(p as i64 * n)).collect::<Result<_, _>>()?;
        Ok(QSeries { offset: rat(first), coeffs })
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = &self.offset + rat(i as i64);
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{}*q^{}", fmt_rat(c), fmt_rat(&e))?;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(q^{})", fmt_rat(&(&self.offset + rat(self.len() as i64))))
    }
}

/// `∏_{n≥1} (1 − q^{mn})` to `len` terms via Euler's pentagonal numbers.
fn euler_product(m: usize, len: usize) -> QSeries {
    let mut coeffs = vec![BigRational::zero(); len];
    for k in 0i64.. {
        let mut hit = false;
        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
            let e = (kk * (3 * kk - 1) / 2) as usize * m;
            if e < len {
                coeffs[e] = rat(if kk % 2 == 0 { 1 } else { -1 });
                hit = true;
            }
        }
        if !hit {
            break;
        }
    }
    QSeries { offset: BigRational::zero(), coeffs }
}

/// `∏ η(m z)^r` with `η(z) = q^{1/24} ∏ (1 − qⁿ)`, to `len` terms.
pub fn eta_product(spec: &[(u32, i64)], len: usize) -> QSeries {
    let mut acc = QSeries::one(len);
    let mut offset = BigRational::zero();
    for &(m, r) in spec {
        offset += BigRational::new(BigInt::from(m as i64 * r), BigInt::from(24));
        let factor = euler_product(m as usize, len);
        let factor = if r < 0 { factor.inverse().expect("constant term 1") } else { factor };
        acc = acc.mul(&factor.pow(r.unsigned_abs() as u32));
    }
    QSeries { offset, coeffs: acc.coeffs }
}

/// Parses `"1^24"` or `"1^2,13^2"` into `(multiplier, exponent)` pairs.
pub fn parse_eta_spec(s: &str) -> Result<Vec<(u32, i64)>, SeriesError> {
    let bad = |msg: &str| SeriesError::BadEtaSpec(s.to_string(), msg.to_string());
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (m, r) = t.trim().split_once('^').ok_or_else(|| bad("expected m^r"))?;
            let m: u32 = m.trim().parse().map_err(|_| bad("multiplier is not a positive integer"))?;
            let r: i64 = r.trim().parse().map_err(|_| bad("exponent is not an integer"))?;
            if m == 0 {
                return Err(bad("multiplier must be at least 1"));
            }
            Ok((m, r))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeVerdict {
    /// Number of `n` checked.
    pub checked: usize,
    /// First `n` at which the identity fails.
    pub first_failure: Option<i64>,
}

impl HeckeVerdict {
    /// Largest coefficient index `pn` involved in the first failure.
    pub fn failing_coefficient(&self, p: i64) -> Option<i64> {
        self.first_failure.map(|n| p * n)
    }
}

impl HeckeVerdict {
    pub fn ok(&self) -> bool {
        self.first_failure.is_none()
    }
}

fn pow_rat(p: i64, e: i64) -> BigRational {
    let base = rat(p);
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base.recip(), e.unsigned_abs() as usize)
    }
}

/// `a_{pn} − a_p a_n + p^{k−1} a_{n/p} = 0` for every `n ≥ 1` with `pn`
/// inside the truncation.
pub fn hecke_check(f: &QSeries, p: i64, k: i64, a_p: &BigRational) -> Result<HeckeVerdict, SeriesError> {
    let o = f.integer_offset()?;
    let top = o + f.len() as i64 - 1;
    let pk1 = pow_rat(p, k - 1);
    let mut checked = 0;
    for n in 1..=top / p {
        let n_over_p = BigRational::new(BigInt::from(n), BigInt::from(p));
        let lhs = f.a(p * n)? - a_p * f.a(n)? + &pk1 * f.coeff(&n_over_p)?;
        checked += 1;
        if !lhs.is_zero() {
            return Ok(HeckeVerdict { checked, first_failure: Some(n) });
        }
    }
    Ok(HeckeVerdict { checked, first_failure: None })
}

/// Compares the expansion of `f | ([[p,0],[0,1]] + Σ_a [[1,a],[0,p]])`,
/// namely `p^{k/2} f(pz) + p^{1−k/2} Σ a_{np} qⁿ`, with `a_p p^{1−k/2} f`,
/// coefficient by coefficient for `1 ≤ n ≤ L/p`.
pub fn hecke_stroke_identity(f: &QSeries, p: i64, k: i64, a_p: &BigRational) -> Result<HeckeVerdict, SeriesError> {
    if k % 2 != 0 {
        return Err(SeriesError::NonIntegerOffset(format!("p^({k}/2)")));
    }
    let o = f.integer_offset()?;
    let top = o + f.len() as i64 - 1;
    let up = f.u(p as usize)?;
    let vp = f.v(p as usize);
    let c_v = pow_rat(p, k / 2);
    let c_u = pow_rat(p, 1 - k / 2);
    let target = a_p * &c_u;
    let mut checked = 0;
    for n in 1..=top / p {
        let x = rat(n);
        let lhs = &c_v * vp.coeff(&x)? + &c_u * up.coeff(&x)?;
        let rhs = &target * f.coeff(&x)?;
        checked += 1;
        if lhs != rhs {
            return Ok(HeckeVerdict { checked, first_failure: Some(n) });
        }
    }
    Ok(HeckeVerdict { checked, first_failure: None })
}

/// Header data of a coefficient file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FormHeader {
    pub k: i64,
    pub level: u32,
    pub eps: i32,
}

/// Writes `# k=<k> N=<N> eps=<±1>` followed by `n a_n` for every known
/// `n ≥ 1`. Series with a non-integer leading exponent, or with nonzero
/// coefficients at exponents `≤ 0`, have no such representation.
pub fn write_coefficients(h: &FormHeader, f: &QSeries) -> Result<String, SeriesError> {
    let o = f.integer_offset()?;
    for n in o..=0 {
        if !f.a(n)?.is_zero() {
            return Err(SeriesError::NonIntegerOffset(format!("nonzero coefficient at q^{n}")));
        }
    }
    let top = o + f.len() as i64 - 1;
    let mut out = format!("# k={} N={} eps={}\n", h.k, h.level, if h.eps >= 0 { "+1" } else { "-1" });
    for n in 1..=top {
        writeln!(out, "{n} {}", fmt_rat(&f.a(n)?)).expect("writing to a string");
    }
    Ok(out)
}

/// Parses the coefficient file format into a header and a series with
/// offset 1.
pub fn parse_coefficients(text: &str) -> Result<(FormHeader, QSeries), SeriesError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or(SeriesError::Parse { line: 1, msg: "empty file".into() })?;
    let bad = |line: usize, msg: String| SeriesError::Parse { line: line + 1, msg };
    let fields = head.strip_prefix('#').ok_or_else(|| bad(0, "missing '# k=.. N=.. eps=..' header".into()))?;
    let (mut k, mut level, mut eps) = (None, None, None);
    for field in fields.split_whitespace() {
        let (key, val) = field.split_once('=').ok_or_else(|| bad(0, format!("bad header field {field:?}")))?;
        match key {
            "k" => k = val.parse::<i64>().ok(),
            "N" => level = val.parse::<u32>().ok(),
            "eps" => {
                eps = match val {
                    "+1" | "1" => Some(1),
                    "-1" => Some(-1),
                    _ => None,
                }
            }
            _ => return Err(bad(0, format!("unknown header field {key:?}"))),
        }
    }
    let header = match (k, level, eps) {
        (Some(k), Some(level), Some(eps)) => FormHeader { k, level, eps },
        _ => return Err(bad(0, "header needs integer k, N and eps=+1|-1".into())),
    };
    let mut coeffs = Vec::new();
    for (i, line) in lines {
        let mut parts = line.split_whitespace();
        let (Some(n), Some(a), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(i, "expected 'n a_n'".into()));
        };
        let n: usize = n.parse().map_err(|_| bad(i, format!("bad index {n:?}")))?;
        if n != coeffs.len() + 1 {
            return Err(bad(i, format!("expected index {}, found {n}", coeffs.len() + 1)));
        }
        let a: BigRational = a.parse().map_err(|_| bad(i, format!("bad coefficient {a:?}")))?;
        coeffs.push(a);
    }
    Ok((header, QSeries { offset: BigRational::one(), coeffs }))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `q ∏ (1 − qⁿ)^24` by repeated multiplication with `(1 − qⁿ)` as
    /// plain integer polynomials.
    fn brute_delta(len: usize) -> Vec<i64> {
        let mut p = vec![0i64; len];
        p[0] = 1;
        for n in 1..len {
            for _ in 0..24 {
                for i in (n..len).rev() {
                    p[i] -= p[i - n];
                }
            }
        }
        p
    }

    #[test]
    fn finite_products() {
        let a = QSeries::from_ints(0, &[1, -1, 0, 0, 0]);
        let b = QSeries::from_ints(0, &[1, 1, 1, 0, 0]);
        assert_eq!(a.mul(&b), QSeries::from_ints(0, &[1, 0, 0, -1, 0]));
        let eta = eta_product(&[(1, 1)], 4);
        assert_eq!(eta.mul(&eta).offset(), &BigRational::new(1.into(), 12.into()));
        let f = QSeries::from_ints(0, &[2, 3, 5, 7, 11]);
        assert_eq!(f.pow(2).mul(&f), f.pow(3));
    }

    #[test]
    fn delta_matches_brute_force() {
        let d = eta_product(&[(1, 24)], 30);
        assert_eq!(d.integer_offset().unwrap(), 1);
        let brute = brute_delta(30);
        for (i, c) in d.coeffs().iter().enumerate() {
            assert_eq!(c, &rat(brute[i]));
        }
        assert_eq!(d.a(2).unwrap(), rat(-24));
        assert_eq!(d.a(3).unwrap(), rat(252));
        assert_eq!(d.a(6).unwrap(), d.a(2).unwrap() * d.a(3).unwrap());
    }

    #[test]
    fn level13_eta_quotient_offset() {
        let f = eta_product(&[(1, 2), (13, 2)], 20);
        assert_eq!(f.offset(), &BigRational::new(7.into(), 6.into()));
        assert!(f.integer_offset().is_err());
        assert_eq!(f.coeffs()[0], rat(1));
    }

    #[test]
    fn empty_spec_is_one() {
        assert_eq!(eta_product(&[], 5), QSeries::one(5));
    }

    #[test]
    fn negative_exponents_invert() {
        let e = eta_product(&[(1, 3)], 12);
        let inv = eta_product(&[(1, -3)], 12);
        assert_eq!(e.mul(&inv), QSeries::one(12));
    }

    #[test]
    fn hecke_recursion_for_delta() {
        let d = eta_product(&[(1, 24)], 64);
        let v = hecke_check(&d, 2, 12, &rat(-24)).unwrap();
        assert!(v.ok());
        assert_eq!(d.a(4).unwrap(), rat(-1472));
        assert!(hecke_stroke_identity(&d, 3, 12, &rat(252)).unwrap().ok());
    }

    #[test]
    fn corrupted_tau4_is_caught() {
        let d = eta_product(&[(1, 24)], 64);
        let mut c = d.coeffs().to_vec();
        c[3] += rat(1);
        let bad = QSeries::new(d.offset().clone(), c);
        assert_eq!(hecke_check(&bad, 2, 12, &rat(-24)).unwrap().first_failure, Some(2));
    }

    #[test]
    fn corrupted_a6_fails_stroke_identity_at_6() {
        let d = eta_product(&[(1, 24)], 64);
        let mut c = d.coeffs().to_vec();
        c[5] += rat(1);
        let bad = QSeries::new(d.offset().clone(), c);
        let v2 = hecke_stroke_identity(&bad, 2, 12, &rat(-24)).unwrap();
        assert_eq!((v2.first_failure, v2.failing_coefficient(2)), (Some(3), Some(6)));
        let v3 = hecke_stroke_identity(&bad, 3, 12, &rat(252)).unwrap();
        assert_eq!(v3.failing_coefficient(3), Some(6));
    }

    #[test]
    fn zero_series_is_vacuous() {
        let z = QSeries::new(rat(1), vec![BigRational::zero(); 20]);
        assert!(hecke_stroke_identity(&z, 2, 12, &rat(5)).unwrap().ok());
    }

    #[test]
    fn u_and_v() {
        let f = QSeries::from_ints(1, &[1, 2, 3, 4, 5, 6]);
        assert_eq!(f.u(2).unwrap(), QSeries::from_ints(1, &[2, 4, 6]));
        assert_eq!(f.v(2).coeff(&rat(4)).unwrap(), rat(2));
        assert_eq!(f.v(2).coeff(&rat(3)).unwrap(), rat(0));
    }

    #[test]
    fn coefficient_file_round_trip() {
        let d = eta_product(&[(1, 24)], 20);
        let h = FormHeader { k: 12, level: 1, eps: 1 };
        let text = write_coefficients(&h, &d).unwrap();
        assert!(text.starts_with("# k=12 N=1 eps=+1\n1 1\n2 -24\n3 252\n"));
        let (h2, d2) = parse_coefficients(&text).unwrap();
        assert_eq!((h2, &d2), (h, &d));
        assert_eq!(write_coefficients(&h2, &d2).unwrap(), text);
        let f = eta_product(&[(1, 2), (13, 2)], 20);
        assert!(write_coefficients(&h, &f).is_err());
    }

    #[test]
    fn coefficient_file_errors() {
        assert!(parse_coefficients("1 1\n").is_err());
        let e = parse_coefficients("# k=2 N=13 eps=-1\n1 1\n3 0\n").unwrap_err();
        assert_eq!(e, SeriesError::Parse { line: 3, msg: "expected index 2, found 3".into() });
    }

    #[test]
    fn eta_spec_parsing() {
        assert_eq!(parse_eta_spec("1^24").unwrap(), vec![(1, 24)]);
        assert_eq!(parse_eta_spec("1^2, 13^2").unwrap(), vec![(1, 2), (13, 2)]);
        assert!(parse_eta_spec("0^2").is_err());
        assert!(parse_eta_spec("13").is_err());
    }
}
