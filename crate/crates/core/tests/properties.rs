use proptest::prelude::*;

use jetkernel_core::formal::{compose, FormalMorphism, FormalSpace};
use jetkernel_core::groebner::{divide, GroebnerBasis, DEFAULT_PAIR_CAP};
use jetkernel_core::monomial::{Monomial, MonomialOrder};
use jetkernel_core::parse::parse_polynomial;
use jetkernel_core::poly::Polynomial;
use jetkernel_core::rational::{rat_frac, Rational};
use jetkernel_core::weil::WeilAlgebra;

const VARS: [&str; 3] = ["x", "y", "z"];

fn arb_coeff() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=3).prop_map(|(n, d)| rat_frac(n, d))
}

fn arb_monomial(max_degree: u32) -> impl Strategy<Value = Monomial> {
    prop::collection::vec(0..=max_degree, VARS.len()).prop_map(move |mut exps| {
        // clamp the total degree, not just each exponent
        while exps.iter().sum::<u32>() > max_degree {
            let top = exps
                .iter()
                .enumerate()
                .max_by_key(|(_, e)| **e)
                .map(|(i, _)| i)
                .unwrap();
            exps[top] -= 1;
        }
        Monomial::from_exps(
            VARS.iter()
                .zip(exps)
                .filter(|(_, e)| *e > 0)
                .map(|(v, e)| (v.to_string(), e)),
        )
    })
}

fn arb_poly(max_degree: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((arb_monomial(max_degree), arb_coeff()), 0..=max_terms).prop_map(
        |terms| {
            let vars: Vec<String> = VARS.iter().map(|v| v.to_string()).collect();
            Polynomial::from_terms(&vars, terms)
        },
    )
}

proptest! {
    #[test]
    fn addition_is_commutative_and_associative(
        a in arb_poly(4, 6),
        b in arb_poly(4, 6),
        c in arb_poly(4, 6),
    ) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
    }

    #[test]
    fn multiplication_distributes(
        a in arb_poly(3, 5),
        b in arb_poly(3, 5),
        c in arb_poly(3, 5),
    ) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn subtraction_inverts_addition(a in arb_poly(4, 6), b in arb_poly(4, 6)) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn display_parse_round_trip(a in arb_poly(5, 8)) {
        let text = a.to_string();
        let back = parse_polynomial(&text).expect("printed polynomials parse");
        prop_assert_eq!(back, a);
    }

    #[test]
    fn division_recombines_exactly(
        p in arb_poly(5, 8),
        d1 in arb_poly(3, 4),
        d2 in arb_poly(3, 4),
    ) {
        let vars: Vec<String> = VARS.iter().map(|v| v.to_string()).collect();
        let order = MonomialOrder::grevlex(&vars);
        let divisors = vec![d1, d2];
        let div = divide(&p, &divisors, &order);
        prop_assert_eq!(div.recombine(&divisors), p);
    }

    #[test]
    fn remainders_are_stable_under_adding_ideal_elements(
        p in arb_poly(4, 6),
        m1 in arb_poly(2, 3),
        m2 in arb_poly(2, 3),
    ) {
        let vars: Vec<String> = VARS.iter().map(|v| v.to_string()).collect();
        let gens = vec![
            parse_polynomial("x^2 - y").unwrap(),
            parse_polynomial("y^2").unwrap(),
            parse_polynomial("z^2 - z").unwrap(),
        ];
        let gb = GroebnerBasis::new(gens.clone(), vars, DEFAULT_PAIR_CAP).unwrap();
        let shifted = &p + &(&(&m1 * &gens[0]) + &(&m2 * &gens[1]));
        prop_assert_eq!(gb.reduce(&shifted).remainder, gb.reduce(&p).remainder);
    }

    #[test]
    fn normal_form_is_a_ring_homomorphism(a in arb_poly(4, 5), b in arb_poly(4, 5)) {
        let algebra = WeilAlgebra::new(
            "W",
            VARS.iter().map(|v| v.to_string()).collect(),
            vec![
                parse_polynomial("x^2").unwrap(),
                parse_polynomial("y^3").unwrap(),
                parse_polynomial("z^2 - x*y").unwrap(),
            ],
            16,
        )
        .unwrap();
        let sum = algebra.nf(&(&a + &b));
        prop_assert_eq!(sum, algebra.add(&algebra.nf(&a), &algebra.nf(&b)));
        let product = algebra.nf(&(&a * &b));
        prop_assert_eq!(product, algebra.mul(&algebra.nf(&a), &algebra.nf(&b)));
    }

    #[test]
    fn composition_is_associative(
        c1 in arb_poly(2, 3),
        c2 in arb_poly(2, 3),
        d1 in arb_poly(2, 3),
        d2 in arb_poly(2, 3),
        e1 in arb_poly(2, 3),
    ) {
        let space = FormalSpace::cartesian(
            "A",
            VARS.iter().map(|v| v.to_string()).collect(),
        )
        .unwrap();
        let r1 = FormalSpace::standard_r(1);
        let f = FormalMorphism::new(space.clone(), space.clone(), vec![c1, c2.clone(), c2])
            .unwrap();
        let g = FormalMorphism::new(space.clone(), space.clone(), vec![d2.clone(), d1, d2])
            .unwrap();
        let h = FormalMorphism::new(space.clone(), r1, vec![e1]).unwrap();
        let left = compose(&compose(&h, &g).unwrap(), &f).unwrap();
        let right = compose(&h, &compose(&g, &f).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn substituted_coordinates_rename_consistently(a in arb_poly(4, 6)) {
        // renaming x,y,z to fresh names and back is the identity
        let fwd: std::collections::BTreeMap<String, String> = VARS
            .iter()
            .map(|v| (v.to_string(), format!("{v}_tmp")))
            .collect();
        let back: std::collections::BTreeMap<String, String> =
            fwd.iter().map(|(k, v)| (v.clone(), k.clone())).collect();
        prop_assert_eq!(a.rename_vars(&fwd).rename_vars(&back), a);
    }
}
