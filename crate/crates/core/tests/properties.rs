use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use modcurves::arith::{modp, rat_frac, QuadRat, Rat};
use modcurves::hyperelliptic::{
    act, clebsch_of_form, count_points, count_points_scan, format_poly, frobenius_poly, frobenius_power, frobenius_power_by_power_sums,
    parse_poly, same_weighted_class, GenusTwoCurve,
};
use modcurves::ingest::bundled_tables;
use modcurves::ingest::fields::{format_element, parse_element};

const FIELDS: [i64; 8] = [-3, -2, -1, 2, 3, 5, 13, 17];

fn quad() -> impl Strategy<Value = (i64, QuadRat)> {
    (prop::sample::select(FIELDS.to_vec()), -30i64..30, 1i64..7, -30i64..30, 1i64..7)
        .prop_map(|(d, a, da, b, db)| (d, QuadRat::new(d, rat_frac(a, da), rat_frac(b, db)).unwrap()))
}

fn pair() -> impl Strategy<Value = (QuadRat, QuadRat)> {
    (quad(), -30i64..30, -30i64..30).prop_map(|((d, x), a, b)| {
        let y = QuadRat::new(d, rat_frac(a, 3), rat_frac(b, 2)).unwrap();
        (x, y)
    })
}

fn curve() -> impl Strategy<Value = GenusTwoCurve> {
    prop::collection::vec(-12i64..=12, 7).prop_filter_map("squarefree of degree 5 or 6", |mut c| {
        if c[6] == 0 && c[5] == 0 {
            c[5] = 1;
        }
        GenusTwoCurve::from_ints(&c).ok()
    })
}

fn odd_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(modp::primes_up_to(50).into_iter().filter(|&p| p > 2).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn norm_and_conjugation_are_multiplicative((x, y) in pair()) {
        let xy = &x * &y;
        prop_assert_eq!(xy.norm(), x.norm() * y.norm());
        prop_assert_eq!(xy.conjugate(), &x.conjugate() * &y.conjugate());
    }

    #[test]
    fn division_inverts_multiplication((x, y) in pair()) {
        prop_assume!(!y.is_zero());
        prop_assert_eq!((&x * &y).checked_div(&y).unwrap(), x);
    }

    #[test]
    fn elements_round_trip((d, x) in quad()) {
        let text = format_element(&x, d);
        prop_assert_eq!(parse_element(&text, d).unwrap(), x);
    }

    #[test]
    fn polynomials_round_trip(c in prop::collection::vec(-1000i64..1000, 1..8)) {
        let c: Vec<BigInt> = c.into_iter().map(BigInt::from).collect();
        let mut trimmed = c.clone();
        while trimmed.len() > 1 && trimmed.last().is_some_and(Zero::is_zero) {
            trimmed.pop();
        }
        let parsed = parse_poly(&format_poly(&c, "x")).unwrap();
        prop_assert_eq!(parsed, trimmed);
    }

    #[test]
    fn point_counts_agree(c in curve(), p in odd_prime()) {
        prop_assume!(c.has_good_reduction(p));
        for k in [1, 2] {
            prop_assert_eq!(count_points(&c, p, k).unwrap(), count_points_scan(&c, p, k).unwrap());
        }
    }

    #[test]
    fn frobenius_powers_compose(c in curve(), p in odd_prime(), a in 1u32..4, b in 1u32..4) {
        prop_assume!(c.has_good_reduction(p));
        let data = frobenius_poly(&c, p).unwrap();
        prop_assert!(data.within_weil_bounds());
        let q = data.quartic();
        prop_assert_eq!(frobenius_power(&frobenius_power(&q, a), b), frobenius_power(&q, a * b));
        prop_assert_eq!(frobenius_power(&q, a), frobenius_power_by_power_sums(&q, a));
    }

    #[test]
    fn clebsch_class_is_moebius_invariant(c in curve(), m in prop::collection::vec((-6i64..=6, 1i64..=4), 4)) {
        let m: Vec<Rat> = m.into_iter().map(|(n, d)| rat_frac(n, d)).collect();
        let m = [[m[0].clone(), m[1].clone()], [m[2].clone(), m[3].clone()]];
        prop_assume!(!(&m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]).is_zero());
        let f = c.form();
        prop_assert!(same_weighted_class(&clebsch_of_form(&f), &clebsch_of_form(&act(&f, &m))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn hecke_coefficients_are_multiplicative(i in 0usize..149, m in 1u64..=16, n in 1u64..=16) {
        prop_assume!(m * n <= 16 && modp::gcd(m, n) == 1);
        let rows = bundled_tables();
        let a = rows[i].newform().unwrap().spec.coefficients(16).unwrap();
        prop_assert_eq!(&a[(m * n) as usize], &(&a[m as usize] * &a[n as usize]));
    }
}
