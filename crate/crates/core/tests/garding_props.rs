mod common;

use common::{member, members, metric, rng};
use ghx_core::garding::{garding_gap, linear_representer, positive_representer, surface_inequality, GardingOptions};
use ghx_core::sample::{random_hermitian, random_positive};
use ghx_core::sympoly::MixedContext;
use ghx_core::{inner, MetricPencil};
use proptest::prelude::*;
use rand::Rng;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=6).prop_flat_map(|n| (Just(n), 2..=n))
}

proptest! {
    #![proptest_config(common::config(500))]

    #[test]
    fn garding_inequality_holds((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let bs = members(&mut r, &g, m, m);
        let rep = garding_gap(&bs, &g, &GardingOptions::default()).unwrap();
        prop_assert!(rep.gap >= -1e-9 * rep.rhs, "{rep:?}");
        // near-equality only happens for proportional tuples
        if rep.gap <= 1e-10 * rep.rhs {
            let witness = rep.equality_witness.unwrap();
            prop_assert!(witness.iter().all(|p| p.constant.is_some()));
        }
    }

    #[test]
    fn proportional_tuples_are_equality_cases((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let base = member(&mut r, &g, m);
        let bs: Vec<_> = (0..m).map(|_| base.scaled(r.random_range(0.1..10.0))).collect();
        let rep = garding_gap(&bs, &g, &GardingOptions::default()).unwrap();
        prop_assert!(rep.gap.abs() <= 1e-10 * rep.rhs, "{rep:?}");
        prop_assert!(rep.equality_witness.unwrap().iter().all(|p| p.constant.is_some()));
    }

    #[test]
    fn representer_is_linear_in_its_last_slot((n, m) in dims(), seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let fixed = members(&mut r, &g, m, m - 2);
        let x = random_hermitian(&mut r, n);
        let y = random_hermitian(&mut r, n);
        let rep = |last| {
            let mut slots = fixed.clone();
            slots.push(last);
            linear_representer(&MixedContext::new(m, &g, slots).unwrap()).unwrap()
        };
        let mut combo = x.scaled(a);
        combo.axpy(b, &y);
        let lhs = rep(combo);
        let mut rhs = rep(x).scaled(a);
        rhs.axpy(b, &rep(y));
        let mut diff = lhs.clone();
        diff.axpy(-1.0, &rhs);
        prop_assert!(diff.frobenius_norm() <= 1e-9 * lhs.frobenius_norm().max(rhs.frobenius_norm()).max(1e-300));
    }

    #[test]
    fn representer_pairs_like_the_mixed_form((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let alphas = members(&mut r, &g, m, m - 1);
        let beta = random_hermitian(&mut r, n);
        let h = positive_representer(&alphas, &g).unwrap().h;
        let ctx = MixedContext::new(m, &g, alphas.clone()).unwrap();
        let direct = ghx_core::sympoly::mixed_sigma(&ctx, std::slice::from_ref(&beta)).unwrap();
        let via = inner(&h, &beta).unwrap();
        prop_assert!((direct - via).abs() <= 1e-10 * (h.frobenius_norm() * beta.frobenius_norm()));
    }
}

proptest! {
    #![proptest_config(common::config(2000))]

    #[test]
    fn representer_is_positive_definite((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let alphas = members(&mut r, &g, m, m - 1);
        let rep = positive_representer(&alphas, &g).unwrap();
        prop_assert!(rep.min_eigenvalue > 0.0, "{}", rep.min_eigenvalue);
    }

    #[test]
    fn surface_inequality_holds(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut r = rng(seed);
        let g = MetricPencil::identity(2);
        let a = random_positive(&mut r, &g);
        let b = random_positive(&mut r, &g);
        let rep = surface_inequality(&a, &b, 1e-9).unwrap();
        let scale = rep.mixed * rep.mixed;
        prop_assert!(rep.gap >= -1e-9 * scale, "{rep:?}");
        prop_assert_eq!(rep.gap <= 1e-10 * scale, rep.proportional.is_some());
        let eq = surface_inequality(&a, &a.scaled(c), 1e-9).unwrap();
        prop_assert!(eq.gap.abs() <= 1e-10 * eq.mixed * eq.mixed && eq.proportional.is_some());
    }
}
