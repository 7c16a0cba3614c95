//! Elementary symmetric polynomials on metric pencils, their complete
//! polarization, and hyperbolicity / cone tests for homogeneous forms on
//! `Herm(n)`.
//!
//! `sigma(A, G, k)` is `e_k` of the pencil eigenvalues of `(A, G)`. It differs
//! from the wedge expression `A^k ∧ G^{n−k}` by the positive constant
//! `k!(n−k)!/n!` (times the volume of `G`), which affects no sign and no
//! inequality checked here.

mod cone;
mod mixed;
mod polar;

pub use cone::{
    hyperbolic_at, in_cone, in_gamma_m, linearity_dimension, ConeMembership, GammaMembership,
    HyperbolicityReport,
};
pub use mixed::{mixed_sigma, mixed_sigma_oracle, sigma_oracle, MixedContext};
pub use polar::{real_rooted, restrict_line, GramForm, PolarForm, PolyOnLine, TracePowerForm};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{GhxError, Result};
use crate::herm::{hermitian_eigenvalues, HermitianForm, MetricPencil};

/// `e_0, …, e_n` of `values` by the Vieta recurrence on `∏(1 + λ_i t)`.
///
/// Values are folded in increasing magnitude, which keeps the partial
/// products small while the large entries arrive last.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &lam) in sorted.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += lam * e[k - 1];
        }
    }
    e
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, i| acc * i as f64)
}

pub(crate) fn check_degree(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(GhxError::DegreeOutOfRange { degree: k, n });
    }
    Ok(())
}

#[inline]
pub(crate) fn sigma_reduced(reduced: &DMatrix<Complex64>, k: usize) -> f64 {
    elementary_symmetric(&hermitian_eigenvalues(reduced))[k]
}

/// `e_k` of the pencil eigenvalues of `(A, G)`.
pub fn sigma(a: &HermitianForm, g: &MetricPencil, k: usize) -> Result<f64> {
    check_degree(k, g.dim())?;
    let reduced = g.reduce(a)?;
    Ok(sigma_reduced(&reduced, k))
}

/// `e_k(|λ|)`: the natural magnitude against which `sigma(A, G, k)` is compared.
pub fn sigma_scale(a: &HermitianForm, g: &MetricPencil, k: usize) -> Result<f64> {
    check_degree(k, g.dim())?;
    let ev: Vec<f64> = hermitian_eigenvalues(&g.reduce(a)?)
        .into_iter()
        .map(f64::abs)
        .collect();
    Ok(elementary_symmetric(&ev)[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn subset_sum_oracle(values: &[f64], k: usize) -> f64 {
        let n = values.len();
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize == k)
            .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).product::<f64>())
            .sum()
    }

    #[test]
    fn vieta_matches_subset_sums() {
        let v = [3.0, -1.5, 0.25, 2.0, -4.0];
        let e = elementary_symmetric(&v);
        for k in 0..=5 {
            assert_relative_eq!(e[k], subset_sum_oracle(&v, k), epsilon = 1e-12);
        }
    }

    #[test]
    fn sigma_examples() {
        let i3 = MetricPencil::identity(3);
        assert_relative_eq!(sigma(&HermitianForm::diag(&[1.0, 2.0, 3.0]), &i3, 2).unwrap(), 11.0, epsilon = 1e-12);
        assert_relative_eq!(sigma(&HermitianForm::identity(3), &i3, 2).unwrap(), 3.0, epsilon = 1e-13);
        let a = HermitianForm::diag(&[3.0, 3.0, -1.0]);
        assert_relative_eq!(sigma(&a, &i3, 2).unwrap(), 3.0, epsilon = 1e-12);
        assert_relative_eq!(sigma(&a, &i3, 3).unwrap(), -9.0, epsilon = 1e-12);
    }

    #[test]
    fn sigma_degree_out_of_range() {
        let i3 = MetricPencil::identity(3);
        let a = HermitianForm::identity(3);
        assert!(matches!(sigma(&a, &i3, 0), Err(GhxError::DegreeOutOfRange { .. })));
        assert!(matches!(sigma(&a, &i3, 4), Err(GhxError::DegreeOutOfRange { .. })));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(6, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(factorial(5), 120.0);
    }
}
