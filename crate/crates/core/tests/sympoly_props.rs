mod common;

use common::{member, members, metric, rng};
use ghx_core::herm::DEFAULT_TOL;
use ghx_core::sample::{random_hermitian, random_positive};
use ghx_core::sympoly::{in_gamma_m, mixed_sigma, mixed_sigma_oracle, sigma, MixedContext, PolarForm};
use ghx_core::HermitianForm;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=5).prop_flat_map(|n| (Just(n), 1..=n))
}

proptest! {
    #![proptest_config(common::config(500))]

    #[test]
    fn mixed_sigma_is_symmetric((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let ctx = MixedContext::sigma_m(&g, m).unwrap();
        let args: Vec<HermitianForm> = (0..m).map(|_| random_hermitian(&mut r, n)).collect();
        let mut shuffled = args.clone();
        shuffled.shuffle(&mut r);
        let a = mixed_sigma(&ctx, &args).unwrap();
        let b = mixed_sigma(&ctx, &shuffled).unwrap();
        let scale = ctx.scale(&args).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * scale.max(a.abs()), "{a} vs {b}");
    }

    #[test]
    fn mixed_sigma_is_multilinear((n, m) in dims(), seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let ctx = MixedContext::sigma_m(&g, m).unwrap();
        let rest: Vec<HermitianForm> = (1..m).map(|_| random_hermitian(&mut r, n)).collect();
        let x = random_hermitian(&mut r, n);
        let y = random_hermitian(&mut r, n);
        let mut combo = x.scaled(a);
        combo.axpy(b, &y);
        let with = |first: &HermitianForm| {
            let mut args = vec![first.clone()];
            args.extend(rest.iter().cloned());
            mixed_sigma(&ctx, &args).unwrap()
        };
        let lhs = with(&combo);
        let rhs = a * with(&x) + b * with(&y);
        let mut scale_args = vec![combo.clone()];
        scale_args.extend(rest.iter().cloned());
        let scale = ctx.scale(&scale_args).unwrap() + (a.abs() + b.abs()) * ctx.scale(&[vec![x.clone()], rest.clone()].concat()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale.max(lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn diagonal_of_the_polarization_is_sigma((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let a = random_hermitian(&mut r, n);
        let ctx = MixedContext::sigma_m(&g, m).unwrap();
        let d = mixed_sigma(&ctx, &vec![a.clone(); m]).unwrap();
        let s = sigma(&a, &g, m).unwrap();
        let scale = ctx.scale(&vec![a.clone(); m]).unwrap();
        prop_assert!((d - s).abs() <= 1e-10 * scale.max(s.abs()), "{d} vs {s}");
    }

    #[test]
    fn polarization_agrees_with_oracle((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let ctx = MixedContext::sigma_m(&g, m).unwrap();
        let args: Vec<HermitianForm> = (0..m).map(|_| random_hermitian(&mut r, n)).collect();
        let a = mixed_sigma(&ctx, &args).unwrap();
        let b = mixed_sigma_oracle(&ctx, &args).unwrap();
        let scale = ctx.scale(&args).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * scale.max(a.abs()), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(common::config(2000))]

    #[test]
    fn positive_definite_forms_lie_in_every_cone(n in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let a = random_positive(&mut r, &g);
        // Γ_n ⊂ Γ_{n−1} ⊂ … ⊂ Γ_1, tested at zero tolerance
        for m in 1..=n {
            prop_assert!(in_gamma_m(&a, &g, m, 0.0).unwrap().member, "m = {m}");
        }
    }
}

proptest! {
    #![proptest_config(common::config(1000))]

    #[test]
    fn gamma_m_is_convex((n, m) in dims(), seed in any::<u64>(), t in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let a = member(&mut r, &g, m);
        let b = member(&mut r, &g, m);
        let mut c = a.scaled(t);
        c.axpy(1.0 - t, &b);
        prop_assert!(in_gamma_m(&c, &g, m, 0.0).unwrap().member);
    }
}

proptest! {
    #![proptest_config(common::config(300))]

    #[test]
    fn some_sigma_vanishes_at_the_boundary((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let a = member(&mut r, &g, m);
        // A − t·G leaves Γ_m once t passes the largest pencil eigenvalue
        let direction = g.metric().clone();
        let point = |t: f64| { let mut x = a.clone(); x.axpy(-t, &direction); x };
        let inside = |t: f64| in_gamma_m(&point(t), &g, m, 0.0).unwrap().member;
        let (mut lo, mut hi) = (0.0, 1.0);
        while inside(hi) { lo = hi; hi *= 2.0; }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi { break; }
            if inside(mid) { lo = mid } else { hi = mid }
        }
        let x = point(lo);
        let norm = g.reduce(&x).unwrap().norm().max(g.reduce(&a).unwrap().norm());
        let sigmas = in_gamma_m(&x, &g, m, 0.0).unwrap().sigmas;
        // the smallest σ_l relative to its natural scale C(n, l)·‖x‖^l
        let closest = (1..=m)
            .map(|l| sigmas[l - 1] / (binomial(n, l) * norm.powi(l as i32)))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(closest.abs() <= 1e-6, "closest σ_l ratio {closest}");
    }

    #[test]
    fn mth_root_is_concave_along_the_cone((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let a = member(&mut r, &g, m);
        let b = member(&mut r, &g, m);
        let h = 1e-2;
        let f = |t: f64| { let mut x = a.clone(); x.axpy(t, &b); sigma(&x, &g, m).unwrap().powf(1.0 / m as f64) };
        let values: Vec<f64> = (0..=200).map(|i| f(i as f64 * h)).collect();
        for w in values.windows(3) {
            let second = w[0] - 2.0 * w[1] + w[2];
            prop_assert!(second <= 1e-7, "second difference {second}");
        }
    }

    #[test]
    fn members_stay_members_under_positive_scaling((n, m) in dims(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = metric(&mut r, n);
        let a = members(&mut r, &g, m, 1).pop().unwrap();
        let t: f64 = r.random_range(1e-3..1e3);
        prop_assert!(in_gamma_m(&a.scaled(t), &g, m, DEFAULT_TOL).unwrap().member);
    }
}
