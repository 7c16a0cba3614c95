#![allow(dead_code)]

use ghx_core::herm::DEFAULT_TOL;
use ghx_core::sample::{random_in_gamma, random_metric, stream};
use ghx_core::sympoly::in_gamma_m;
use ghx_core::{HermitianForm, MetricPencil};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream(seed, 0)
}

/// A member of `Γ_m` whose margins clear the default membership tolerance.
pub fn member<R: Rng>(rng: &mut R, g: &MetricPencil, m: usize) -> HermitianForm {
    loop {
        let a = random_in_gamma(rng, g, m);
        if in_gamma_m(&a, g, m, DEFAULT_TOL).unwrap().member {
            return a;
        }
    }
}

pub fn members<R: Rng>(rng: &mut R, g: &MetricPencil, m: usize, count: usize) -> Vec<HermitianForm> {
    (0..count).map(|_| member(rng, g, m)).collect()
}

/// Identity half the time, otherwise a random metric.
pub fn metric<R: Rng>(rng: &mut R, n: usize) -> MetricPencil {
    if rng.random_bool(0.5) {
        MetricPencil::identity(n)
    } else {
        random_metric(rng, n)
    }
}

pub fn rel_close(got: f64, want: f64, tol: f64, scale: f64) -> bool {
    (got - want).abs() <= tol * scale.max(want.abs()).max(f64::MIN_POSITIVE)
}

/// `cases` cases, with failing seeds kept next to the test source.
pub fn config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: Some(Box::new(proptest::test_runner::FileFailurePersistence::WithSource("regressions"))),
        ..Default::default()
    }
}
