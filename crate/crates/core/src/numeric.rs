//! High-precision evaluation of q-series in the upper half-plane, stroke
//! residuals of congruences, the exponent `λ`, and the search for
//! `Y^{2m+nλ}` near a target.
//!
//! Evaluation truncates the q-series and bounds the discarded tail with
//! `|aₙ| ≤ nᵏ`; every result carries that bound.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};
use thiserror::Error;

use crate::certificate::{Certificate, Congruence, CongruenceContext};
use crate::exactnum::{rat_to_rug, QuadElem, ScalarPoly};
use crate::groupring::RingElem;
use crate::projmat::{fricke, Mat2, ProjMat};
use crate::qseries::{hecke_check, hecke_stroke_identity, HeckeVerdict, QSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("tail bound {tail:.3e} exceeds tolerance {tol:.3e} at Im z = {im}; raise the truncation or move the point")]
    Precision { tail: f64, tol: f64, im: f64 },
    #[error("image of {point} under {matrix} has Im = {im:.4} below y_min = {y_min}")]
    LowImage { point: String, matrix: String, im: f64, y_min: f64 },
    #[error("no sample point keeps every image of congruence {0} above y_min")]
    NoPoints(String),
    #[error("invalid form: {0}")]
    BadForm(String),
    #[error("matrix {0} does not have positive determinant")]
    Determinant(String),
    #[error("no (m, n) with |m|, |n| <= {0} meets the tolerance")]
    BoundExhausted(i64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Evaluation settings. Points are `(x, y)` with `z = x + iy`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub prec: u32,
    pub points: Vec<(f64, f64)>,
    pub y_min: f64,
    pub tol: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig::for_level(1)
    }
}

impl EvalConfig {
    /// Level 1 uses eight points with `Im z ≥ 0.8`. Higher levels place
    /// the points on the circle `|z| = 1/√N` fixed by the Fricke involution,
    /// so that `z` and `Hz` have the same height, and lower `y_min` to
    /// `0.6/N` since `Γ₀(N)` elements with `c = N` cannot keep both `z` and
    /// `γz` above `1/N`.
    pub fn for_level(level: u32) -> Self {
        let (points, y_min) = if level <= 1 {
            let pts = vec![
                (-0.43, 0.91),
                (-0.29, 0.83),
                (-0.17, 1.07),
                (-0.05, 0.88),
                (0.08, 1.21),
                (0.19, 0.95),
                (0.31, 0.84),
                (0.44, 1.13),
            ];
            (pts, 0.15)
        } else {
            let r = 1.0 / (level as f64).sqrt();
            let pts = (0..8)
                .map(|i| {
                    let theta = (55.0 + 10.0 * i as f64).to_radians();
                    (r * theta.cos(), r * theta.sin())
                })
                .collect();
            (pts, (0.6 / level as f64).min(0.15))
        };
        EvalConfig { prec: 256, points, y_min, tol: 1e-20 }
    }

    pub fn with_prec(mut self, prec: u32) -> Self {
        self.prec = prec;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// A q-expansion together with the data of a putative cusp form.
#[derive(Clone, Debug, PartialEq)]
pub struct FormData {
    pub series: QSeries,
    pub k: i64,
    pub level: u32,
    pub eps: i32,
}

impl FormData {
    pub fn new(series: QSeries, k: i64, level: u32, eps: i32) -> Result<Self, NumericError> {
        if k <= 0 || k % 2 != 0 {
            return Err(NumericError::BadForm(format!("weight {k} is not a positive even integer")));
        }
        if level == 0 {
            return Err(NumericError::BadForm("level must be positive".into()));
        }
        if eps != 1 && eps != -1 {
            return Err(NumericError::BadForm(format!("sign {eps} is not +1 or -1")));
        }
        Ok(FormData { series, k, level, eps })
    }

    /// `α_p = p^{1−k/2} a_p`.
    pub fn alpha(&self, p: i64) -> Result<BigRational, NumericError> {
        let a_p = self.series.a(p)?;
        let e = 1 - self.k / 2;
        let pe = if e >= 0 {
            num_traits::pow(BigRational::from_integer(BigInt::from(p)), e as usize)
        } else {
            num_traits::pow(BigRational::new(BigInt::one(), BigInt::from(p)), e.unsigned_abs() as usize)
        };
        Ok(a_p * pe)
    }
}

/// Value at a point with the truncation tail bound.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub value: Complex,
    pub tail: f64,
}

fn two_pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi) * 2u32
}

fn point(prec: u32, (x, y): (f64, f64)) -> Complex {
    Complex::with_val(prec, (x, y))
}

/// `Σ_{n ≥ n0} nᵏ e^{−2πyn}` bounded by a geometric series.
fn tail_bound(n0: f64, k: i64, y: f64) -> f64 {
    if n0 <= 0.0 {
        return f64::INFINITY;
    }
    let log_r = -2.0 * std::f64::consts::PI * y;
    let ratio = (log_r + k as f64 * (1.0 / n0).ln_1p()).exp();
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    (k as f64 * n0.ln() + log_r * n0).exp() / (1.0 - ratio)
}

/// Precomputed coefficients of a form at a fixed precision.
pub struct Evaluator<'a> {
    form: &'a FormData,
    prec: u32,
    coeffs: Vec<Float>,
    offset: Float,
    offset_f64: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(form: &'a FormData, prec: u32) -> Self {
        let coeffs = form.series.coeffs().iter().map(|c| Float::with_val(prec, &rat_to_rug(c))).collect();
        let offset = Float::with_val(prec, &rat_to_rug(form.series.offset()));
        let offset_f64 = offset.to_f64();
        Evaluator { form, prec, coeffs, offset, offset_f64 }
    }

    pub fn form(&self) -> &FormData {
        self.form
    }

    /// `f(z)` by Horner's rule in `q = e^{2πiz}`.
    pub fn eval(&self, z: &Complex) -> Evaluated {
        let prec = self.prec;
        let iz = Complex::with_val(prec, z * Complex::with_val(prec, (0, 1)));
        let q = Complex::with_val(prec, &iz * two_pi(prec)).exp();
        let mut s = Complex::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            s *= &q;
            s += c;
        }
        let lead = (Complex::with_val(prec, &iz * two_pi(prec)) * &self.offset).exp();
        let y = z.imag().to_f64();
        let n0 = self.offset_f64 + self.coeffs.len() as f64;
        Evaluated { value: s * lead, tail: tail_bound(n0, self.form.k, y) }
    }

    /// `(f|γ)(z) = det^{k/2} (cz+d)^{−k} f(γz)`; also returns `Im γz`.
    pub fn stroke(&self, m: &Mat2, z: &Complex) -> Result<(Evaluated, f64), NumericError> {
        let prec = self.prec;
        let det = m.det();
        if det.sign() <= 0 {
            return Err(NumericError::Determinant(m.to_string()));
        }
        let [a, b, c, d] = m.entries().map(|e| e.to_float(prec));
        let num = Complex::with_val(prec, z * &a) + &b;
        let den = Complex::with_val(prec, z * &c) + &d;
        let w = Complex::with_val(prec, &num / &den);
        let im = w.imag().to_f64();
        let inner = self.eval(&w);
        let k = self.form.k;
        let scale = det.pow(k / 2).expect("positive determinant").to_float(prec);
        let factor = Complex::with_val(prec, den.pow(-(k as i32))) * scale;
        let tail = inner.tail * Complex::with_val(53, factor.abs_ref()).real().to_f64();
        Ok((Evaluated { value: inner.value * factor, tail }, im))
    }

    /// `f|ω` at `z`, symbols instantiated from the form.
    pub fn stroke_elem(&self, w: &RingElem, z: &Complex, symbols: &Symbols) -> Result<Evaluated, NumericError> {
        let mut acc = Complex::with_val(self.prec, 0);
        let mut tail = 0.0;
        for (m, s) in w.terms() {
            let coeff = symbols.instantiate(s, self.prec);
            let (v, _) = self.stroke(&m.rep(), z)?;
            tail += v.tail * coeff.to_f64().abs();
            acc += v.value * coeff;
        }
        Ok(Evaluated { value: acc, tail })
    }
}

/// Values substituted for `α₂`, `α₃` and `ε`.
#[derive(Clone, Debug)]
pub struct Symbols {
    pub alpha2: BigRational,
    pub alpha3: BigRational,
    pub eps: i32,
}

impl Symbols {
    pub fn from_form(form: &FormData) -> Result<Self, NumericError> {
        Ok(Symbols { alpha2: form.alpha(2)?, alpha3: form.alpha(3)?, eps: form.eps })
    }

    pub fn instantiate(&self, s: &ScalarPoly, prec: u32) -> Float {
        let a2 = Float::with_val(prec, &rat_to_rug(&self.alpha2));
        let a3 = Float::with_val(prec, &rat_to_rug(&self.alpha3));
        let mut acc = Float::with_val(prec, 0);
        for (mono, c) in s.terms() {
            let mut t = c.to_float(prec);
            t *= a2.clone().pow(mono.a2 as u32);
            t *= a3.clone().pow(mono.a3 as u32);
            if mono.eps && self.eps < 0 {
                t = -t;
            }
            acc += t;
        }
        acc
    }
}

fn image_im(m: &Mat2, (x, y): (f64, f64)) -> f64 {
    let [_, _, c, d] = m.entries().map(|e| e.to_f64());
    let det = m.det().to_f64();
    det * y / ((c * x + d).powi(2) + (c * y).powi(2))
}

/// Sample points for a set of matrices: the configured points whose
/// images all stay above `y_min`, topped up with points on the isometric
/// circles `|cz + d|² = det` of the matrices themselves, then with the
/// grid points of the strip `|x| ≤ 1/2` whose lowest image is highest.
pub fn sample_points(cfg: &EvalConfig, mats: &[Mat2]) -> Vec<(f64, f64)> {
    let fits = |p: (f64, f64)| p.1 >= cfg.y_min && mats.iter().all(|m| image_im(m, p) >= cfg.y_min);
    let mut out: Vec<(f64, f64)> = cfg.points.iter().copied().filter(|p| fits(*p)).collect();
    for m in mats {
        let [_, _, c, d] = m.entries().map(|e| e.to_f64());
        if c == 0.0 {
            continue;
        }
        let radius = m.det().to_f64().sqrt() / c.abs();
        for deg in [90.0f64, 75.0, 105.0, 62.0, 118.0] {
            let t = deg.to_radians();
            let p = (-d / c + radius * t.cos(), radius * t.sin());
            if out.len() < cfg.points.len() && fits(p) && !out.contains(&p) {
                out.push(p);
            }
        }
    }
    if out.len() < cfg.points.len() {
        let worst = |p: (f64, f64)| mats.iter().map(|m| image_im(m, p)).fold(p.1, f64::min);
        let mut grid: Vec<((f64, f64), f64)> = (0..=64)
            .flat_map(|i| (1..=48).map(move |j| (-0.5 + i as f64 / 64.0, j as f64 / 96.0)))
            .filter(|p| fits(*p) && !out.contains(p))
            .map(|p| (p, worst(p)))
            .collect();
        grid.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0 .0.total_cmp(&b.0 .0)));
        for (p, _) in grid {
            if out.len() == cfg.points.len() {
                break;
            }
            if out.iter().all(|q| (q.0 - p.0).abs() + (q.1 - p.1).abs() > 0.02) {
                out.push(p);
            }
        }
    }
    out.truncate(cfg.points.len());
    out
}

/// Largest `|f|lhs − f|rhs|` over the sample points.
#[derive(Clone, Debug)]
pub struct Residual {
    pub id: String,
    pub max: Float,
    pub tail: f64,
    pub points: usize,
}

impl Residual {
    pub fn passes(&self, tol: f64) -> bool {
        self.max.is_finite() && self.max.to_f64() <= tol && self.tail <= tol
    }
}

pub fn congruence_residual(form: &FormData, c: &Congruence, cfg: &EvalConfig) -> Result<Residual, NumericError> {
    let ev = Evaluator::new(form, cfg.prec);
    let symbols = Symbols::from_form(form)?;
    residual_with(&ev, &symbols, c, cfg)
}

fn residual_with(ev: &Evaluator, symbols: &Symbols, c: &Congruence, cfg: &EvalConfig) -> Result<Residual, NumericError> {
    let diff = c.difference();
    let mut mats: Vec<Mat2> = c.lhs.matrices().chain(c.rhs.matrices()).map(ProjMat::rep).collect();
    mats.dedup();
    let points = sample_points(cfg, &mats);
    if points.is_empty() {
        return Err(NumericError::NoPoints(c.id.clone()));
    }
    for p in &points {
        for m in &mats {
            let im = image_im(m, *p);
            if im < cfg.y_min {
                return Err(NumericError::LowImage { point: format!("{p:?}"), matrix: m.to_string(), im, y_min: cfg.y_min });
            }
        }
    }
    let vals: Vec<Evaluated> = points
        .par_iter()
        .map(|p| ev.stroke_elem(&diff, &point(cfg.prec, *p), symbols))
        .collect::<Result<_, _>>()?;
    let mut max = Float::with_val(cfg.prec, 0);
    let mut tail = 0.0f64;
    for v in vals {
        let a = Float::with_val(cfg.prec, v.value.abs_ref());
        if a > max {
            max = a;
        }
        tail = tail.max(v.tail);
    }
    if tail > cfg.tol {
        let im = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        return Err(NumericError::Precision { tail, tol: cfg.tol, im });
    }
    Ok(Residual { id: c.id.clone(), max, tail, points: points.len() })
}

/// `∏ η(mz)^r` evaluated directly from the product, with `terms` factors
/// of each infinite product.
pub fn eval_eta_product(spec: &[(u32, i64)], z: &Complex, terms: usize, prec: u32) -> Complex {
    let iz = Complex::with_val(prec, z * Complex::with_val(prec, (0, 1)));
    let q = Complex::with_val(prec, &iz * two_pi(prec)).exp();
    let mut acc = Complex::with_val(prec, 1);
    let mut offset = BigRational::zero();
    for &(m, r) in spec {
        offset += BigRational::new(BigInt::from(m as i64 * r), BigInt::from(24));
        let qm = q.clone().pow(m);
        let mut qn = qm.clone();
        let mut prod = Complex::with_val(prec, 1);
        for _ in 0..terms {
            prod *= Complex::with_val(prec, 1 - &qn);
            qn *= &qm;
        }
        acc *= prod.pow(r as i32);
    }
    let off = Float::with_val(prec, &rat_to_rug(&offset));
    acc * (Complex::with_val(prec, &iz * two_pi(prec)) * off).exp()
}

/// `Y = (2+√13)/3`.
pub fn y_value() -> QuadElem {
    QuadElem::from_parts((2, 3), (1, 3), 13)
}

/// `(7−√13)/6`, the second eigenvalue ratio.
pub fn z_value() -> QuadElem {
    QuadElem::from_parts((7, 6), (-1, 6), 13)
}

/// `λ = log((7−√13)/6) / log((2+√13)/3)`.
pub fn lambda(prec: u32) -> Float {
    let y = y_value().to_float(prec + 32).ln();
    let z = z_value().to_float(prec + 32).ln();
    Float::with_val(prec, z / y)
}

/// First `(p, q)` with `1 ≤ q ≤ q_max` and `Y^p = ((7−√13)/6)^q` exactly,
/// or `None`. Only `p` next to `λq` can satisfy the equation.
pub fn lambda_rational_witness(q_max: i64) -> Option<(i64, i64)> {
    let lam = lambda(128).to_f64();
    let (y, z) = (y_value(), z_value());
    (1..=q_max).find_map(|q| {
        let zq = z.pow(q).expect("unit");
        let c = (lam * q as f64).floor() as i64;
        (c - 1..=c + 2).find(|&p| y.pow(p).expect("unit") == zq).map(|p| (p, q))
    })
}

#[derive(Clone, Debug)]
pub struct DensityResult {
    pub m: i64,
    pub n: i64,
    /// `|Y^{2m+nλ} − X|`.
    pub err: Float,
}

/// Exact-ish evaluation of `|Y^{2m+nλ} − X|`; `(0, 0)` gives `|1 − X|`.
pub fn density_error(x: &Float, m: i64, n: i64, prec: u32) -> Float {
    let value = if n == 0 {
        y_value().pow(2 * m).expect("unit").to_float(prec)
    } else {
        let s = lambda(prec) * Float::with_val(prec, n) + Float::with_val(prec, 2 * m);
        let ln_y = y_value().to_float(prec).ln();
        (s * ln_y).exp()
    };
    Float::with_val(prec, value - x).abs()
}

/// Finds `|m|, |n| ≤ bound` with `|Y^{2m+nλ} − X| ≤ tol`.
///
/// With `t = log_Y X` this asks for `‖nλ/2 − t/2‖` small. The greedy
/// Ostrowski expansion of `t/2` along the convergents of `λ/2` produces
/// `n`; a nearest-integer scan over `|n| ≤ bound` is the fallback.
pub fn density_search(x: &Float, tol: f64, bound: i64) -> Result<DensityResult, NumericError> {
    const PREC: u32 = 256;
    if !(x.is_finite() && *x > 0) || !(tol > 0.0) {
        return Err(NumericError::BadForm("X and tol must be positive".into()));
    }
    let xf = Float::with_val(PREC, x);
    let accept = |m: i64, n: i64| {
        let err = density_error(&xf, m, n, PREC);
        (m.abs() <= bound && n.abs() <= bound && err.to_f64() <= tol).then_some(DensityResult { m, n, err })
    };
    let ln_y = y_value().to_float(PREC).ln();
    let t = Float::with_val(PREC, xf.ln_ref()) / &ln_y;
    let theta = lambda(PREC) / 2u32;
    let beta = Float::with_val(PREC, &t / 2u32);
    let nearest_m = |n: i64| -> i64 {
        let v = Float::with_val(PREC, &beta - Float::with_val(PREC, &theta * n));
        v.round().to_f64() as i64
    };

    // Greedy Ostrowski digits.
    let mut cf = Float::with_val(PREC, &theta);
    let (mut p_prev, mut q_prev, mut p, mut q) = (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one());
    let mut r = Float::with_val(PREC, &beta - Float::with_val(PREC, beta.round_ref()));
    let mut n = BigInt::zero();
    for _ in 0..64 {
        let a = Float::with_val(PREC, cf.floor_ref());
        let a_int = BigInt::from(a.to_f64() as i64);
        let (p_new, q_new) = (&a_int * &p + &p_prev, &a_int * &q + &q_prev);
        (p_prev, q_prev, p, q) = (p, q, p_new, q_new);
        let dk = Float::with_val(PREC, &theta * Float::with_val(PREC, &rat_to_rug(&BigRational::from_integer(q.clone())).clone()))
            - Float::with_val(PREC, &rat_to_rug(&BigRational::from_integer(p.clone())));
        if dk.is_zero() || q.to_i64().is_none_or(|qq| qq > 4 * bound.max(1)) {
            break;
        }
        let b = Float::with_val(PREC, &r / &dk).round();
        let b_int = BigInt::from(b.to_f64() as i64);
        r -= Float::with_val(PREC, &b * &dk);
        n += &b_int * &q;
        if let Some(ni) = n.to_i64() {
            if let Some(hit) = accept(nearest_m(ni), ni) {
                return Ok(hit);
            }
        }
        let frac = Float::with_val(PREC, &cf - &a);
        if frac.is_zero() {
            break;
        }
        cf = frac.recip();
    }

    // Nearest-integer scan.
    let theta_f = theta.to_f64();
    let beta_f = beta.to_f64();
    let delta = ((1.0 + tol / xf.to_f64()).ln() / ln_y.to_f64()).max(1e-12);
    for i in 0..=2 * bound {
        let n = if i % 2 == 0 { i / 2 } else { -(i + 1) / 2 };
        let v = beta_f - theta_f * n as f64;
        if (v - v.round()).abs() * 2.0 <= delta * 1.5 {
            if let Some(hit) = accept(v.round() as i64, n) {
                return Ok(hit);
            }
        }
    }
    Err(NumericError::BoundExhausted(bound))
}

/// One row of the cusp check: `|value| ≤ bound` at `z = iy`.
#[derive(Clone, Debug)]
pub struct DecayRow {
    pub cusp: &'static str,
    pub y: f64,
    pub value: f64,
    pub bound: f64,
}

impl DecayRow {
    pub fn ok(&self) -> bool {
        self.value <= self.bound
    }
}

/// Checks `|f(iy)| ≤ 2|c₀|e^{−2π·o·y}` for `y ∈ {2,4,8}`, where `c₀q^o` is
/// the leading term, and the same bound for `f|H` (vanishing at 0). At the
/// cusp 0, heights whose image `i/(Ny)` is too low for the truncation are
/// replaced by the largest admissible height among `1, 1/2, 1/4`.
pub fn cusp_decay_check(form: &FormData, cfg: &EvalConfig) -> Result<Vec<DecayRow>, NumericError> {
    let ev = Evaluator::new(form, cfg.prec);
    let series = &form.series;
    let c0 = series.coeffs().first().map(|c| c.to_f64().unwrap_or(f64::INFINITY).abs()).unwrap_or(0.0);
    let o = series.offset().to_f64().unwrap_or(0.0);
    let bound = |y: f64| if o > 0.0 { 2.0 * c0 * (-2.0 * std::f64::consts::PI * o * y).exp() } else { 0.0 };
    let n0 = o + series.len() as f64;
    let mut rows = Vec::new();
    for y in [2.0, 4.0, 8.0] {
        let v = ev.eval(&point(cfg.prec, (0.0, y)));
        rows.push(DecayRow { cusp: "inf", y, value: v.value.abs().real().to_f64(), bound: bound(y) });
    }
    let h = fricke(form.level);
    let n = form.level as f64;
    let admissible = |y: f64| tail_bound(n0, form.k, 1.0 / (n * y)) <= cfg.tol;
    let mut ys: Vec<f64> = [2.0, 4.0, 8.0].into_iter().filter(|&y| admissible(y)).collect();
    if ys.len() < 3 {
        if let Some(y) = [1.0, 0.5, 0.25].into_iter().find(|&y| admissible(y)) {
            ys.push(y);
        }
    }
    if ys.is_empty() {
        return Err(NumericError::Precision { tail: f64::INFINITY, tol: cfg.tol, im: 1.0 / (4.0 * n) });
    }
    for y in ys {
        let (v, _) = ev.stroke(&h, &point(cfg.prec, (0.0, y)))?;
        rows.push(DecayRow { cusp: "0", y, value: v.value.abs().real().to_f64(), bound: bound(y) });
    }
    Ok(rows)
}

/// One line of a form-check report.
#[derive(Clone, Debug)]
pub enum CheckLine {
    Cong(Residual),
    Hecke { name: &'static str, p: i64, verdict: HeckeVerdict },
    Cusp(DecayRow),
}

#[derive(Clone, Debug)]
pub struct FormReport {
    pub tol: f64,
    pub lines: Vec<CheckLine>,
}

impl FormReport {
    pub fn line_ok(&self, l: &CheckLine) -> bool {
        match l {
            CheckLine::Cong(r) => r.passes(self.tol),
            CheckLine::Hecke { verdict, .. } => verdict.ok(),
            CheckLine::Cusp(row) => row.ok(),
        }
    }

    pub fn ok(&self) -> bool {
        self.lines.iter().all(|l| self.line_ok(l))
    }

    pub fn max_residual(&self) -> f64 {
        self.lines
            .iter()
            .filter_map(|l| match l {
                CheckLine::Cong(r) => Some(r.max.to_f64()),
                _ => None,
            })
            .fold(0.0, f64::max)
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

impl fmt::Display for FormReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            let ok = verdict(self.line_ok(l));
            match l {
                CheckLine::Cong(r) => writeln!(f, "CONG {} max_residual={:.2e} verdict={ok}", r.id, r.max.to_f64())?,
                CheckLine::Hecke { name, p, verdict } => match verdict.first_failure {
                    None => writeln!(f, "HECKE {name} p={p} checked={} verdict={ok}", verdict.checked)?,
                    Some(n) => writeln!(f, "HECKE {name} p={p} n={n} verdict={ok}")?,
                },
                CheckLine::Cusp(r) => {
                    writeln!(f, "CUSP {} y={} value={:.2e} bound={:.2e} verdict={ok}", r.cusp, r.y, r.value, r.bound)?
                }
            }
        }
        write!(f, "FORMCHECK {}", verdict(self.ok()))
    }
}

/// The congruences a form of the given level must satisfy: the f-context
/// axioms, plus `W ≡ 1`, `g₂ ≡ 1` from the certificate and `g₃ ≡ 1` at
/// level 13.
pub fn form_congruences(level: u32, cert: Option<&Certificate>) -> Vec<Congruence> {
    let mut out = CongruenceContext::f(level).axioms;
    if let Some(cert) = cert.filter(|c| c.level == level) {
        for id in ["W", "g2"] {
            if let Some(s) = cert.step(id) {
                out.push(s.result.clone());
            }
        }
    }
    if level == 13 {
        let g3 = ProjMat::from_ints(3, -1, 13, -4).expect("nonsingular");
        out.push(Congruence::new("g3", RingElem::from_mat(g3), RingElem::one()));
    }
    out
}

/// Hecke checks at 2 and 3, the congruence residuals and the cusp decay.
pub fn formcheck(form: &FormData, congruences: &[Congruence], cfg: &EvalConfig) -> Result<FormReport, NumericError> {
    let mut lines = Vec::new();
    for p in [2, 3] {
        let a_p = form.series.a(p)?;
        lines.push(CheckLine::Hecke { name: "recursion", p, verdict: hecke_check(&form.series, p, form.k, &a_p)? });
        lines.push(CheckLine::Hecke { name: "stroke", p, verdict: hecke_stroke_identity(&form.series, p, form.k, &a_p)? });
    }
    let ev = Evaluator::new(form, cfg.prec);
    let symbols = Symbols::from_form(form)?;
    for c in congruences {
        lines.push(CheckLine::Cong(residual_with(&ev, &symbols, c, cfg)?));
    }
    lines.extend(cusp_decay_check(form, cfg)?.into_iter().map(CheckLine::Cusp));
    Ok(FormReport { tol: cfg.tol, lines })
}

/// `Δ = η(z)²⁴` to `len` terms.
pub fn delta_form(len: usize) -> FormData {
    FormData::new(crate::qseries::eta_product(&[(1, 24)], len), 12, 1, 1).expect("valid form")
}

/// The oldform `Δ(z) + ε N⁶ Δ(Nz)`, an eigenform of `H` with sign `ε` at level `N`.
pub fn delta_oldform(level: u32, eps: i32, len: usize) -> FormData {
    let d = crate::qseries::eta_product(&[(1, 24)], len);
    let c = BigRational::from_integer(BigInt::from(eps) * num_traits::pow(BigInt::from(level), 6));
    let series = d.add(&d.v(level as usize).scale(&c)).expect("integer offsets");
    FormData::new(series, 12, level, eps).expect("valid form")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::eta_product;

    #[test]
    fn delta_series_matches_product() {
        let d = delta_form(200);
        let ev = Evaluator::new(&d, 256);
        let z = point(256, (0.0, 1.0));
        let series = ev.eval(&z);
        let prod = eval_eta_product(&[(1, 24)], &z, 200, 256);
        let diff = Float::with_val(256, (series.value.clone() - prod).abs_ref());
        assert!(diff.to_f64() < 1e-20, "{diff}");
        assert!(series.value.abs().real().to_f64() > 1e-3);
        assert!(series.tail < 1e-100);
    }

    #[test]
    fn zero_series_evaluates_to_zero() {
        let f = FormData::new(QSeries::new(BigRational::one(), vec![BigRational::zero(); 10]), 12, 1, 1).unwrap();
        let v = Evaluator::new(&f, 128).eval(&point(128, (0.1, 0.9)));
        assert!(v.value.is_zero());
    }

    #[test]
    fn delta_axioms_at_level_one() {
        let d = delta_form(256);
        let cfg = EvalConfig::default();
        for c in form_congruences(1, None) {
            let r = congruence_residual(&d, &c, &cfg).unwrap();
            assert!(r.passes(1e-15), "{} {}", c.id, r.max);
        }
        let mut wrong = d.clone();
        wrong.eps = -1;
        let c = &CongruenceContext::f(1).axioms[1];
        assert!(!congruence_residual(&wrong, c, &cfg).unwrap().passes(1e-15));
    }

    #[test]
    fn level13_eta_quotient_fricke_sign() {
        let f = FormData::new(eta_product(&[(1, 2), (13, 2)], 256), 2, 13, -1).unwrap();
        let cfg = EvalConfig::for_level(13);
        let h = &CongruenceContext::f(13).axioms[1];
        let r = congruence_residual(&f, h, &cfg).unwrap();
        assert!(r.passes(1e-15), "{}", r.max);
    }

    #[test]
    fn level13_oldform_passes_formcheck() {
        let f = delta_oldform(13, 1, 512);
        let cfg = EvalConfig::for_level(13);
        let cert = crate::certificate::build_f_certificate(13).unwrap();
        let report = formcheck(&f, &form_congruences(13, Some(&cert)), &cfg).unwrap();
        assert!(report.ok(), "{report}");
        let mut wrong = f.clone();
        wrong.eps = -1;
        assert!(!formcheck(&wrong, &form_congruences(13, None), &cfg).unwrap().ok());
    }

    #[test]
    fn certificate_steps_hold_numerically() {
        for (level, f) in [(1, delta_form(256)), (13, delta_oldform(13, 1, 512))] {
            let cfg = EvalConfig::for_level(level);
            let cert = crate::certificate::build_f_certificate(level).unwrap();
            let mut unplaced = Vec::new();
            for s in &cert.steps {
                match congruence_residual(&f, &s.result, &cfg) {
                    Ok(r) => assert!(r.passes(1e-15), "level {level} {}: {}", r.id, r.max),
                    Err(NumericError::NoPoints(id)) => unplaced.push(id),
                    Err(e) => panic!("level {level} {}: {e}", s.result.id),
                }
            }
            eprintln!("level {level}: {} steps, no points for {unplaced:?}", cert.steps.len());
        }
    }

    #[test]
    fn lambda_value() {
        let l = lambda(256).to_f64();
        let s13 = 13f64.sqrt();
        let oracle = ((7.0 - s13) / 6.0).ln() / ((2.0 + s13) / 3.0).ln();
        assert!((l - oracle).abs() < 1e-14, "{l}");
        let back = (y_value().to_float(256).ln() * lambda(256)).exp() - z_value().to_float(256);
        assert!(back.abs().to_f64() < 1e-70);
        assert_eq!(lambda_rational_witness(50), None);
    }

    #[test]
    fn density_examples() {
        let r = density_search(&Float::with_val(64, 1), 1e-9, 1_000_000).unwrap();
        assert_eq!((r.m, r.n), (0, 0));
        assert!(r.err.is_zero());
        let y4 = y_value().pow(4).unwrap().to_float(256);
        let r = density_search(&y4, 1e-30, 1_000_000).unwrap();
        assert_eq!((r.m, r.n), (2, 0));
        let r = density_search(&Float::with_val(64, 5), 1e-3, 1_000_000).unwrap();
        assert!(density_error(&Float::with_val(256, 5), r.m, r.n, 256).to_f64() <= 1e-3);
    }

    #[test]
    fn cusp_decay() {
        let cfg = EvalConfig::default();
        assert!(cusp_decay_check(&delta_form(256), &cfg).unwrap().iter().all(DecayRow::ok));
        let one = FormData::new(QSeries::one(10), 12, 1, 1).unwrap();
        assert!(!cusp_decay_check(&one, &cfg).unwrap().iter().all(DecayRow::ok));
    }
}
