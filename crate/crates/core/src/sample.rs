//! Seeded random generation of Hermitian forms, metrics and cone members.
//!
//! Every campaign sample `i` draws from the ChaCha8 stream `(seed, i)`:
//! the generator is seeded from `seed` and its stream id is set to `i`, so
//! samples are independent of scheduling and campaigns can be partitioned.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::herm::{HermitianForm, MetricPencil};
use crate::sympoly::elementary_symmetric;

/// The generator for sample `index` of the campaign seeded by `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Offset (in 32-bit words) of the noise generator within a sample's stream.
const NOISE_WORD_OFFSET: u128 = 1 << 60;

/// A second generator for sample `index`, far enough along the same stream
/// that it never meets the draws of [`stream`]. Torus potentials come from
/// here, so a sample's ψ can be replayed without replaying its matrices.
pub fn noise_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = stream(seed, index);
    rng.set_word_pos(NOISE_WORD_OFFSET);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// `(Z + Z†)/2` for a matrix `Z` of independent standard complex Gaussians.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianForm {
    let z = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    HermitianForm::from_upper(n, |j, k| (z[(j, k)] + z[(k, j)].conj()) * 0.5)
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `diag(R)` folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for j in 0..n {
            q[(j, k)] *= phase;
        }
    }
    q
}

/// A random positive-definite metric with condition number well below the guard.
pub fn random_metric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> MetricPencil {
    let b = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng) * (0.5 / (n as f64).sqrt()));
    let g = &b * b.adjoint() + DMatrix::identity(n, n) * Complex64::new(0.5, 0.0);
    let g = HermitianForm::from_matrix(&g, 1e-10).expect("B·B† + I/2 is Hermitian");
    MetricPencil::new(g).expect("B·B† + I/2 is positive definite and well conditioned")
}

/// True when `e_l(λ) > 0` for all `l = 1..=m`.
pub fn in_gamma_spectrum(lambda: &[f64], m: usize) -> bool {
    let e = elementary_symmetric(lambda);
    e[1..=m].iter().all(|&v| v > 0.0)
}

/// Rejection sampler for eigenvalue vectors of `Γ_m`: proposals are
/// independent `N(0.5, 1)` entries, accepted when `e_1..e_m > 0`.
pub fn gamma_spectrum<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Vec<f64> {
    loop {
        let lambda: Vec<f64> = (0..n).map(|_| gaussian(rng) + 0.5).collect();
        if in_gamma_spectrum(&lambda, m) {
            return lambda;
        }
    }
}

/// `L·U·diag(λ)·U†·L†` with `λ` a given spectrum and `U` Haar-random:
/// a form whose pencil eigenvalues relative to `g` are exactly `λ`.
pub fn with_pencil_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    g: &MetricPencil,
    lambda: &[f64],
) -> Result<HermitianForm> {
    let n = g.dim();
    let u = haar_unitary(rng, n);
    let d = DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            Complex64::new(lambda[j], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    g.unreduce(&(&u * d * u.adjoint()))
}

/// A random member of `Γ_m` relative to `g`, covering its non-definite part.
pub fn random_in_gamma<R: Rng + ?Sized>(rng: &mut R, g: &MetricPencil, m: usize) -> HermitianForm {
    let lambda = gamma_spectrum(rng, g.dim(), m);
    with_pencil_spectrum(rng, g, &lambda).expect("dimensions agree")
}

/// A random positive-definite form (a member of `Γ_n`).
pub fn random_positive<R: Rng + ?Sized>(rng: &mut R, g: &MetricPencil) -> HermitianForm {
    random_in_gamma(rng, g, g.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herm::pencil_eigenvalues;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = gaussian(&mut stream(7, 3));
        let b: f64 = gaussian(&mut stream(7, 3));
        let c: f64 = gaussian(&mut stream(7, 4));
        assert_eq!(a.to_bits(), b.to_bits());
        assert_ne!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(&mut stream(1, 0), 5);
        let err = (&u * u.adjoint() - DMatrix::<Complex64>::identity(5, 5)).norm();
        assert!(err < 1e-12);
    }

    #[test]
    fn gamma_samples_have_requested_spectrum() {
        let mut rng = stream(11, 0);
        let g = random_metric(&mut rng, 4);
        for m in 1..=4 {
            let a = random_in_gamma(&mut rng, &g, m);
            let ev = pencil_eigenvalues(&a, &g).unwrap();
            assert!(in_gamma_spectrum(&ev, m), "m={m} ev={ev:?}");
        }
    }
}
