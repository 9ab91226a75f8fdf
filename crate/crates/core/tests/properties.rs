use converse_core::exactnum::{BigInt, BigRational, Poly, QuadElem, RatFunc, ScalarPoly};
use converse_core::gamma0::{decompose, Gen, Word};
use converse_core::groupring::{stroke_ratfunc, RingElem};
use converse_core::numeric::{delta_form, Evaluator};
use converse_core::projmat::{Mat2, ProjMat};
use converse_core::qseries::{eta_product, hecke_check, hecke_stroke_identity, QSeries};
use converse_core::text::parse_ring;
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float};

fn quad() -> impl Strategy<Value = QuadElem> {
    (-20i64..20, 1i64..6, -20i64..20, 1i64..6).prop_map(|(a, b, c, d)| QuadElem::from_parts((a, b), (c, d), 13))
}

fn nonzero_quad() -> impl Strategy<Value = QuadElem> {
    quad().prop_filter("nonzero", |q| !q.is_zero())
}

fn int_mat() -> impl Strategy<Value = Mat2> {
    (-6i64..7, -6i64..7, -6i64..7, -6i64..7)
        .prop_filter("positive determinant", |(a, b, c, d)| a * d - b * c > 0)
        .prop_map(|(a, b, c, d)| Mat2::from_ints(a, b, c, d))
}

fn scalar() -> impl Strategy<Value = ScalarPoly> {
    (quad(), quad(), quad(), 0u32..3).prop_map(|(c0, c1, c2, e)| {
        let a2 = ScalarPoly::alpha2().pow(e).unwrap();
        &(&ScalarPoly::constant(c0) + &(&a2 * &ScalarPoly::constant(c1))) + &(&ScalarPoly::eps() * &ScalarPoly::constant(c2))
    })
}

fn ring_elem() -> impl Strategy<Value = RingElem> {
    prop::collection::vec((scalar(), int_mat()), 0..4).prop_map(|terms| {
        RingElem::from_terms(terms.into_iter().map(|(s, m)| (s, ProjMat::canonicalize(&m).unwrap())))
    })
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec((0usize..4, -3i64..4), 0..13).prop_map(|ls| Word::new(ls.into_iter().map(|(g, e)| (Gen::ALL[g], e))))
}

fn ratfunc() -> impl Strategy<Value = RatFunc> {
    (prop::collection::vec(quad(), 1..4), -3i64..4).prop_map(|(cs, e)| {
        &RatFunc::from_poly(Poly::new(cs)) * &RatFunc::z_pow(e)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in quad(), b in quad(), c in quad()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn sign_matches_float(a in quad()) {
        let f = a.to_float(256);
        let s = if f.is_zero() { 0 } else if f.is_sign_negative() { -1 } else { 1 };
        prop_assert_eq!(a.sign(), s);
    }

    #[test]
    fn canonical_class_ignores_scaling(m in int_mat(), r in nonzero_quad()) {
        prop_assert_eq!(ProjMat::canonicalize(&m).unwrap(), ProjMat::canonicalize(&m.scale(&r)).unwrap());
    }

    #[test]
    fn projective_product_is_well_defined(m in int_mat(), n in int_mat()) {
        let pm = ProjMat::canonicalize(&m).unwrap();
        let pn = ProjMat::canonicalize(&n).unwrap();
        prop_assert_eq!(pm.mul(&pn), ProjMat::canonicalize(&(&m * &n)).unwrap());
        prop_assert!(pm.mul(&pm.inv()).is_identity());
    }

    #[test]
    fn ratfunc_identities(f in ratfunc(), g in ratfunc()) {
        prop_assert_eq!(&(&f + &g) - &g, f.clone());
        if !f.is_zero() {
            prop_assert_eq!(&f * &f.inv().unwrap(), RatFunc::constant(QuadElem::one()));
        }
    }

    #[test]
    fn stroke_composes(f in ratfunc(), m in int_mat(), n in int_mat(), half_k in -3i64..4) {
        let k = 2 * half_k;
        let lhs = stroke_ratfunc(k, &stroke_ratfunc(k, &f, &m).unwrap(), &n).unwrap();
        prop_assert_eq!(lhs, stroke_ratfunc(k, &f, &(&m * &n)).unwrap());
    }

    #[test]
    fn ring_distributes(a in ring_elem(), b in ring_elem(), c in ring_elem()) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn ring_text_round_trip(a in ring_elem()) {
        prop_assert_eq!(parse_ring(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn word_evaluation_is_a_homomorphism(u in word(), v in word()) {
        let uv = u.concat(&v).evaluate().unwrap();
        prop_assert_eq!(uv, u.evaluate().unwrap().mul(&v.evaluate().unwrap()));
        prop_assert!(u.concat(&u.inverse()).evaluate().unwrap().is_identity());
        prop_assert_eq!(u.to_string().parse::<Word>().unwrap(), u);
    }

    #[test]
    fn decomposition_round_trips(w in word()) {
        let m = w.evaluate().unwrap();
        prop_assert_eq!(decompose(&m).unwrap().evaluate().unwrap(), m);
    }

    #[test]
    fn series_product_matches_convolution(
        f in prop::collection::vec(-50i64..50, 1..64),
        g in prop::collection::vec(-50i64..50, 1..64),
    ) {
        let len = f.len().min(g.len());
        let mut brute = vec![0i64; len];
        for i in 0..len {
            for j in 0..len - i {
                brute[i + j] += f[i] * g[j];
            }
        }
        prop_assert_eq!(QSeries::from_ints(1, &f).mul(&QSeries::from_ints(2, &g)), QSeries::from_ints(3, &brute));
    }

    #[test]
    fn hecke_checks_agree(corrupt in prop::option::of((1usize..60, -3i64..4)), p in prop::sample::select(vec![2i64, 3])) {
        let d = eta_product(&[(1, 24)], 60);
        let mut c = d.coeffs().to_vec();
        if let Some((i, delta)) = corrupt {
            c[i] += BigRational::from_integer(BigInt::from(delta));
        }
        let f = QSeries::new(d.offset().clone(), c);
        let a_p = f.a(p).unwrap();
        let r = hecke_check(&f, p, 12, &a_p).unwrap();
        let s = hecke_stroke_identity(&f, p, 12, &a_p).unwrap();
        prop_assert_eq!(r, s);
    }
}

fn apply(m: &Mat2, z: &Complex, prec: u32) -> (Complex, Complex) {
    let [a, b, c, d] = m.entries().map(|e| e.to_float(prec));
    let den = Complex::with_val(prec, z * &c) + &d;
    let num = Complex::with_val(prec, z * &a) + &b;
    (Complex::with_val(prec, &num / &den), den)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn numeric_stroke_cocycle(m in int_mat(), n in int_mat(), x in -0.5f64..0.5, y in 0.8f64..1.3) {
        let prec = 256;
        let d = delta_form(256);
        let ev = Evaluator::new(&d, prec);
        let z = Complex::with_val(prec, (x, y));
        let (nz, den) = apply(&n, &z, prec);
        let (inner, _) = ev.stroke(&m, &nz).unwrap();
        let det = n.det().pow(6).unwrap().to_float(prec);
        let lhs = den.pow(-12i32) * det * inner.value;
        let (rhs, _) = ev.stroke(&(&m * &n), &z).unwrap();
        prop_assume!(inner.tail < 1e-30 && rhs.tail < 1e-30);
        let diff = Float::with_val(prec, (lhs - &rhs.value).abs_ref());
        let scale = Float::with_val(prec, rhs.value.abs_ref()).to_f64().max(1.0);
        prop_assert!(diff.to_f64() <= 1e-40 * scale, "{}", diff);
    }

    #[test]
    fn numeric_stroke_ignores_rescaling(m in int_mat(), num in 1i64..9, den in 1i64..9, neg in any::<bool>()) {
        let prec = 256;
        let d = delta_form(256);
        let ev = Evaluator::new(&d, prec);
        let z = Complex::with_val(prec, (0.1, 1.0));
        let r = QuadElem::from_ratio(if neg { -num } else { num }, den);
        let (a, _) = ev.stroke(&m, &z).unwrap();
        let (b, _) = ev.stroke(&m.scale(&r), &z).unwrap();
        prop_assume!(a.tail < 1e-30);
        let diff = Float::with_val(prec, (a.value.clone() - &b.value).abs_ref());
        let scale = Float::with_val(prec, a.value.abs_ref()).to_f64().max(1.0);
        prop_assert!(diff.to_f64() <= 1e-40 * scale);
    }
}

#[test]
fn negative_surd_coefficients_round_trip() {
    let surd = QuadElem::from_parts((0, 1), (-3, 4), 13);
    let r = &RingElem::one() + &RingElem::term(ScalarPoly::constant(surd), ProjMat::from_ints(1, 1, 0, 1).unwrap());
    assert_eq!(r.to_string(), "1 - 3/4*sqrt(13)*[[1,1],[0,1]]");
    assert_eq!(parse_ring(&r.to_string()).unwrap(), r);
}
