//! Property tests: exact ring axioms for the cyclotomic arithmetic, the
//! Galois-action laws, and the structural series invariants.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use fricke::cyclo::{euler_phi, CycloElem};
use fricke::qseries::{FracQSeries, QOrder};

fn small_rat() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=6)
        .prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn cyclo_order() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![1u32, 2, 3, 4, 5, 6, 7, 8, 9, 12, 15, 16, 20, 24])
}

fn cyclo_elem(order: u32) -> impl Strategy<Value = CycloElem> {
    let phi = euler_phi(order) as usize;
    prop::collection::vec(small_rat(), phi)
        .prop_map(move |coeffs| CycloElem::from_poly(order, coeffs))
}

fn unit_mod(order: u32) -> impl Strategy<Value = i64> {
    let m = order as i64;
    (1..=m.max(1)).prop_filter("unit", move |d| num_integer::gcd(*d, m) == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cyclo_ring_axioms((m, seeds) in cyclo_order().prop_flat_map(|m| {
        (Just(m), prop::collection::vec(cyclo_elem(m), 3))
    })) {
        let [a, b, c] = [&seeds[0], &seeds[1], &seeds[2]];
        // associativity and commutativity of multiplication
        let ab_c = a.mul(b).unwrap().mul(c).unwrap();
        let a_bc = a.mul(&b.mul(c).unwrap()).unwrap();
        prop_assert_eq!(&ab_c, &a_bc);
        prop_assert_eq!(a.mul(b).unwrap(), b.mul(a).unwrap());
        // distributivity
        let lhs = a.mul(&b.add(c).unwrap()).unwrap();
        let rhs = a.mul(b).unwrap().add(&a.mul(c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(m, ab_c.order());
    }

    #[test]
    fn cyclo_inverse_law((m, a) in cyclo_order().prop_flat_map(|m| (Just(m), cyclo_elem(m)))) {
        prop_assume!(!a.is_zero());
        let prod = a.mul(&a.inv().unwrap()).unwrap();
        prop_assert_eq!(prod, CycloElem::one(m));
    }

    #[test]
    fn sigma_is_multiplicative_and_composes(
        (m, a, b, d, e) in cyclo_order().prop_flat_map(|m| {
            (Just(m), cyclo_elem(m), cyclo_elem(m), unit_mod(m), unit_mod(m))
        })
    ) {
        let lhs = a.mul(&b).unwrap().galois_sigma(d).unwrap();
        let rhs = a.galois_sigma(d).unwrap().mul(&b.galois_sigma(d).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let sum_l = a.add(&b).unwrap().galois_sigma(d).unwrap();
        let sum_r = a.galois_sigma(d).unwrap().add(&b.galois_sigma(d).unwrap()).unwrap();
        prop_assert_eq!(sum_l, sum_r);
        // composition law sigma_d . sigma_e = sigma_(de mod m)
        let comp = a.galois_sigma(e).unwrap().galois_sigma(d).unwrap();
        let direct = a.galois_sigma(d * e).unwrap();
        prop_assert_eq!(comp, direct);
    }

    #[test]
    fn sigma_minus_one_is_complex_conjugation(
        (m, a) in cyclo_order().prop_flat_map(|m| (Just(m), cyclo_elem(m)))
    ) {
        let prec = 128u32;
        let z = a.embed(prec);
        let zbar = a.galois_sigma(-1).unwrap().embed(prec);
        let (re1, im1) = z.to_f64s();
        let (re2, im2) = zbar.to_f64s();
        prop_assert!((re1 - re2).abs() < 1e-20);
        prop_assert!((im1 + im2).abs() < 1e-20);
    }

    #[test]
    fn lift_round_trips_rationals(r in small_rat(), m in cyclo_order()) {
        let a = CycloElem::from_rational(1, r.clone());
        let lifted = a.lift(m).unwrap();
        prop_assert_eq!(lifted.as_rational(), Some(r));
    }
}

fn sparse_series() -> impl Strategy<Value = FracQSeries> {
    (
        prop::sample::select(vec![1u32, 2, 3, 4, 6]),
        prop::sample::select(vec![1u32, 2, 3, 6]),
        prop::collection::vec(((-12i64..24), small_rat()), 1..8),
    )
        .prop_map(|(m, d, terms)| {
            FracQSeries::from_terms(
                m,
                d,
                30,
                terms
                    .into_iter()
                    .map(|(k, r)| (k, CycloElem::from_rational(m, r))),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn series_ring_laws(a in sparse_series(), b in sparse_series(), c in sparse_series()) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        let ab_c = a.mul(&b).and_then(|p| p.mul(&c));
        let a_bc = b.mul(&c).and_then(|p| a.mul(&p));
        match (ab_c, a_bc) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            // both orders must agree on the zero-to-precision failure too
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "asymmetric results: {:?} vs {:?}", x, y),
        }
    }

    #[test]
    fn series_ord_is_additive(a in sparse_series(), b in sparse_series()) {
        prop_assume!(!a.is_zero_to_precision() && !b.is_zero_to_precision());
        let (QOrder::Value(oa), QOrder::Value(ob)) = (a.ord(), b.ord()) else {
            unreachable!()
        };
        // coefficients live in a field: leading terms cannot cancel
        let QOrder::Value(op) = a.mul(&b).unwrap().ord() else {
            return Err(TestCaseError::fail("product lost its leading term"));
        };
        prop_assert_eq!(op, oa + ob);
    }

    #[test]
    fn series_inverse_round_trip(a in sparse_series()) {
        prop_assume!(!a.is_zero_to_precision());
        let prod = a.mul(&a.inv().unwrap()).unwrap();
        let one = prod.coeff_at(&BigRational::from_integer(BigInt::from(0))).unwrap();
        prop_assert_eq!(one.as_rational(), Some(BigRational::from_integer(BigInt::from(1))));
        prop_assert_eq!(prod.num_terms(), 1);
    }

    #[test]
    fn shift_tau_has_order_dividing_d(a in sparse_series()) {
        let d = a.exp_den();
        let mut t = a.clone();
        for _ in 0..d {
            t = t.shift_tau_plus_one().unwrap();
        }
        let lifted = a.lift(t.cyclo_order(), t.exp_den()).unwrap();
        prop_assert_eq!(t, lifted);
    }

    #[test]
    fn text_and_json_round_trip(a in sparse_series()) {
        let text = a.render();
        let parsed = FracQSeries::parse(&text, a.cyclo_order(), a.exp_den()).unwrap();
        prop_assert_eq!(&parsed, &a);
        let json = a.to_json();
        let s = serde_json::to_string(&json).unwrap();
        let back: fricke::qseries::SeriesJson = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(FracQSeries::from_json(&back).unwrap(), a);
    }

    #[test]
    fn truncation_soundness_under_recompute(
        a in sparse_series(),
        b in sparse_series(),
        extra in 1i64..20
    ) {
        prop_assume!(!a.is_zero_to_precision() && !b.is_zero_to_precision());
        // rebuild the same pipeline with a larger window: previously known
        // coefficients must not change
        let rebuild = |t: i64| -> FracQSeries {
            let aa = FracQSeries::from_terms(
                a.cyclo_order(),
                a.exp_den(),
                t,
                a.term_keys().map(|(k, c)| (k, c.clone())),
            );
            let bb = FracQSeries::from_terms(
                b.cyclo_order(),
                b.exp_den(),
                t,
                b.term_keys().map(|(k, c)| (k, c.clone())),
            );
            aa.mul(&bb).unwrap()
        };
        let lo = rebuild(30);
        let hi = rebuild(30 + extra);
        for (exp, c) in lo.terms() {
            prop_assert_eq!(&hi.coeff_at(&exp).unwrap(), c);
        }
    }
}
