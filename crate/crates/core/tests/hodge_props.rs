mod common;

use common::{members, metric, rng};
use ghx_core::garding::positive_representer;
use ghx_core::hodge::{gram_matrix, verify_theorem_a, Signature};
use ghx_core::sample::random_hermitian;
use proptest::prelude::*;
use rand::Rng;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=5).prop_flat_map(|n| (Just(n), 2..=n))
}

proptest! {
    #![proptest_config(common::config(500))]

    #[test]
    fn primitive_negativity((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let alphas = members(&mut r, &g, m, m - 1);
        let rep = verify_theorem_a(&alphas, &g, None).unwrap();
        prop_assert_eq!(rep.signature, Signature::lorentzian(n * n));
        prop_assert!(!rep.indeterminate && rep.nonsingular);
        prop_assert_eq!(rep.negative_definite, Some(true));
        prop_assert!(rep.restricted_spectrum.iter().all(|&l| l < 0.0));
        prop_assert!(rep.primitivity_residual <= 1e-10);
    }
}

proptest! {
    #![proptest_config(common::config(200))]

    #[test]
    fn decomposition_is_primitive_plus_multiple((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let alphas = members(&mut r, &g, m, m - 1);
        for _ in 0..5 {
            let gamma = random_hermitian(&mut r, n);
            let rep = verify_theorem_a(&alphas, &g, Some(&gamma)).unwrap();
            let d = rep.decomposition.unwrap();
            prop_assert!(d.primitive && d.residual <= 1e-10, "{d:?}");
        }
    }

    #[test]
    fn functional_is_the_positive_representer((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let alphas = members(&mut r, &g, m, m - 1);
        let rep = verify_theorem_a(&alphas, &g, None).unwrap();
        let h = positive_representer(&alphas, &g).unwrap().h;
        let scale = h.frobenius_norm();
        for (x, y) in rep.functional.iter().zip(h.coords()) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn scaling_the_slots_scales_the_gram((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let alphas = members(&mut r, &g, m, m - 1);
        let factors: Vec<f64> = (0..m - 1).map(|_| r.random_range(0.2..5.0)).collect();
        let scaled: Vec<_> = alphas.iter().zip(&factors).map(|(a, t)| a.scaled(*t)).collect();
        let before = verify_theorem_a(&alphas, &g, None).unwrap();
        let after = verify_theorem_a(&scaled, &g, None).unwrap();
        // the Gram only sees the first m − 2 slots
        let product: f64 = factors[..m - 2].iter().product();
        let expected = &before.gram * product;
        let tol = 1e-10 * expected.abs().max();
        prop_assert!((&after.gram - &expected).abs().max() <= tol);
        prop_assert_eq!(after.signature, before.signature);
        prop_assert_eq!(after.negative_definite, before.negative_definite);
        prop_assert_eq!(after.nonsingular, before.nonsingular);
        let unscaled = gram_matrix(&scaled[..m - 2], &g, m).unwrap();
        prop_assert_eq!(unscaled.signature, before.signature);
    }

    #[test]
    fn classical_specialization((n, m) in dims(), seed in any::<u64>()) {
        let g = metric(&mut rng(seed), n);
        let alphas = vec![g.metric().clone(); m - 1];
        let rep = verify_theorem_a(&alphas, &g, None).unwrap();
        prop_assert_eq!(rep.signature, Signature::lorentzian(n * n));
        prop_assert_eq!(rep.negative_definite, Some(true));
    }
}
