use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{check_degree, elementary_symmetric, restrict_line, real_rooted, PolarForm};
use crate::error::{GhxError, Result};
use crate::herm::{expect_dim, hermitian_eigenvalues, HermitianForm, MetricPencil, RealBasis};
use crate::sample::{random_hermitian, stream};

/// `|P(a)|` at or below this fraction of its scale counts as zero.
const ZERO_VALUE_TOL: f64 = 1e-12;

/// Singular values below this fraction of the largest count as kernel.
const KERNEL_TOL: f64 = 1e-8;

/// Outcome of a Monte-Carlo hyperbolicity probe. A positive answer means
/// "no violation found in `samples_checked` random lines", never a proof.
#[derive(Clone, Debug)]
pub struct HyperbolicityReport {
    pub hyperbolic: bool,
    pub samples_checked: usize,
    pub witness: Option<HermitianForm>,
    pub witness_index: Option<u64>,
    pub witness_roots: Vec<Complex64>,
}

/// Draws `samples` Gaussian Hermitian directions `x` (sample `i` from the
/// stream `(seed, i)`) and checks that `s ↦ P(s·a + x)` is real-rooted.
pub fn hyperbolic_at<F: PolarForm + ?Sized>(
    form: &F,
    a: &HermitianForm,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<HyperbolicityReport> {
    expect_dim(form.dim(), a.dim())?;
    let d = form.degree();
    let pa = form.value(a)?;
    let scale = form.scale(&vec![a.clone(); d])?;
    if pa.abs() <= ZERO_VALUE_TOL * scale {
        return Err(GhxError::Precondition(format!(
            "P(a) ≠ 0 fails: P(a) = {pa:e} at scale {scale:e}"
        )));
    }
    for i in 0..samples as u64 {
        let x = random_hermitian(&mut stream(seed, i), form.dim());
        let line = restrict_line(form, a, &x)?;
        if !real_rooted(&line, tol)? {
            return Ok(HyperbolicityReport {
                hyperbolic: false,
                samples_checked: i as usize + 1,
                witness_roots: line.roots()?,
                witness: Some(x),
                witness_index: Some(i),
            });
        }
    }
    Ok(HyperbolicityReport {
        hyperbolic: true,
        samples_checked: samples,
        witness: None,
        witness_index: None,
        witness_roots: Vec::new(),
    })
}

/// Membership in the hyperbolicity cone `Γ(P, a)`.
#[derive(Clone, Debug, Serialize)]
pub struct ConeMembership {
    pub member: bool,
    /// `−(largest real root)` of `s ↦ P(s·a + x)`.
    pub margin: f64,
    /// Real parts of all roots, ascending.
    pub roots: Vec<f64>,
    /// Largest `|Im r|` among the roots.
    pub max_imag: f64,
}

/// `x ∈ Γ(P, a)` iff all roots of `s ↦ P(s·a + x)` are strictly negative.
/// Hyperbolicity of `P` at `a` is the caller's responsibility.
pub fn in_cone<F: PolarForm + ?Sized>(
    form: &F,
    a: &HermitianForm,
    x: &HermitianForm,
    tol: f64,
) -> Result<ConeMembership> {
    let line = restrict_line(form, a, x)?;
    let roots = line.roots()?;
    let reals: Vec<f64> = roots.iter().map(|r| r.re).collect();
    let max_imag = roots.iter().fold(0.0, |m: f64, r| m.max(r.im.abs()));
    let margin = reals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let margin = if margin == f64::NEG_INFINITY { f64::INFINITY } else { -margin };
    Ok(ConeMembership {
        member: margin > tol,
        margin,
        roots: reals,
        max_imag,
    })
}

/// Membership in the Gårding cone `Γ_m` of a metric pencil.
#[derive(Clone, Debug, Serialize)]
pub struct GammaMembership {
    pub member: bool,
    /// `σ_l / e_l(|λ|)` for `l = 1..=m` (zero when the scale vanishes).
    pub margins: Vec<f64>,
    /// `σ_l` for `l = 1..=m`.
    pub sigmas: Vec<f64>,
}

impl GammaMembership {
    /// Index `l` (1-based) and margin of the first failing degree.
    pub fn first_failure(&self, tol: f64) -> Option<(usize, f64)> {
        self.margins
            .iter()
            .position(|&m| m <= tol)
            .map(|i| (i + 1, self.margins[i]))
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `A ∈ Γ_m` iff `σ_l(A) > tol·e_l(|λ|)` for every `l = 1..=m`.
pub fn in_gamma_m(a: &HermitianForm, g: &MetricPencil, m: usize, tol: f64) -> Result<GammaMembership> {
    check_degree(m, g.dim())?;
    let ev = hermitian_eigenvalues(&g.reduce(a)?);
    let e = elementary_symmetric(&ev);
    let abs: Vec<f64> = ev.iter().map(|x| x.abs()).collect();
    let scale = elementary_symmetric(&abs);
    let sigmas = e[1..=m].to_vec();
    let margins: Vec<f64> = (1..=m)
        .map(|l| if scale[l] > 0.0 { e[l] / scale[l] } else { 0.0 })
        .collect();
    Ok(GammaMembership {
        member: margins.iter().all(|&v| v > tol),
        margins,
        sigmas,
    })
}

/// Dimension of the linearity space `LP = {x : P(t·x + y) = P(y) ∀ t, y}`,
/// as the numerical kernel of `x ↦ (D(x, Y_2⁽ⁱ⁾, …, Y_d⁽ⁱ⁾))_i` over `2n²`
/// random tuples.
pub fn linearity_dimension<F: PolarForm + ?Sized>(form: &F, seed: u64) -> Result<usize> {
    let n = form.dim();
    let d = form.degree();
    let basis = RealBasis::new(n)?;
    let rows = 2 * n * n;
    let mut map = DMatrix::<f64>::zeros(rows, n * n);
    for i in 0..rows {
        let mut rng = stream(seed, i as u64);
        let tail: Vec<HermitianForm> = (1..d).map(|_| random_hermitian(&mut rng, n)).collect();
        let mut args = Vec::with_capacity(d);
        for (j, e) in basis.elements().iter().enumerate() {
            args.clear();
            args.push(e.clone());
            args.extend_from_slice(&tail);
            map[(i, j)] = form.polar(&args)?;
        }
    }
    let sv = map.singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    if largest == 0.0 {
        return Ok(n * n);
    }
    let rank = sv.iter().filter(|&&s| s > KERNEL_TOL * largest).count();
    Ok(n * n - rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympoly::{GramForm, MixedContext, TracePowerForm};

    #[test]
    fn sigma2_is_hyperbolic_at_identity() {
        let ctx = MixedContext::sigma_m(&MetricPencil::identity(3), 2).unwrap();
        let rep = hyperbolic_at(&ctx, &HermitianForm::identity(3), 1000, 1, 1e-7).unwrap();
        assert!(rep.hyperbolic);
        assert_eq!(rep.samples_checked, 1000);
    }

    #[test]
    fn split_signature_form_is_not_hyperbolic() {
        let gram = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0]));
        let form = GramForm::new(2, gram).unwrap();
        let a = HermitianForm::identity(2);
        let rep = hyperbolic_at(&form, &a, 1000, 3, 1e-7).unwrap();
        assert!(!rep.hyperbolic);
        let x = rep.witness.unwrap();
        let line = restrict_line(&form, &a, &x).unwrap();
        let c = line.coeffs();
        // complex roots of a quadratic ⇔ negative discriminant
        assert!(c[1] * c[1] - 4.0 * c[0] * c[2] < 0.0);
        assert!(rep.witness_roots.iter().any(|r| r.im.abs() > 1e-3));
    }

    #[test]
    fn hyperbolic_precondition() {
        let ctx = MixedContext::sigma_m(&MetricPencil::identity(3), 3).unwrap();
        let err = hyperbolic_at(&ctx, &HermitianForm::diag(&[1.0, 1.0, 0.0]), 10, 0, 1e-7).unwrap_err();
        assert!(matches!(err, GhxError::Precondition(_)));
    }

    #[test]
    fn cone_examples() {
        let i3 = MetricPencil::identity(3);
        let a = HermitianForm::identity(3);
        let x = HermitianForm::diag(&[3.0, 3.0, -1.0]);
        let s2 = MixedContext::sigma_m(&i3, 2).unwrap();
        let s3 = MixedContext::sigma_m(&i3, 3).unwrap();
        let r = in_cone(&s2, &a, &x, 1e-9).unwrap();
        assert!(r.member);
        assert!((r.margin - 1.0 / 3.0).abs() < 1e-10);
        let r = in_cone(&s3, &a, &x, 1e-9).unwrap();
        assert!(!r.member);
        assert!((r.margin + 1.0).abs() < 1e-10);
        let r = in_cone(&s3, &a, &a, 1e-9).unwrap();
        assert!(r.member);
        assert!((r.margin - 1.0).abs() < 1e-4, "margin {}", r.margin);
    }

    #[test]
    fn gamma_examples() {
        let i3 = MetricPencil::identity(3);
        let x = HermitianForm::diag(&[3.0, 3.0, -1.0]);
        assert!(in_gamma_m(&x, &i3, 2, 1e-9).unwrap().member);
        let r = in_gamma_m(&x, &i3, 3, 1e-9).unwrap();
        assert!(!r.member);
        assert_eq!(r.first_failure(1e-9).unwrap().0, 3);
        for m in 1..=3 {
            assert!(in_gamma_m(&HermitianForm::identity(3), &i3, m, 1e-9).unwrap().member);
            assert!(!in_gamma_m(&HermitianForm::identity(3).scaled(-1.0), &i3, m, 1e-9).unwrap().member);
        }
    }

    #[test]
    fn linearity_examples() {
        let i3 = MetricPencil::identity(3);
        for m in 2..=3 {
            let ctx = MixedContext::sigma_m(&i3, m).unwrap();
            assert_eq!(linearity_dimension(&ctx, 5).unwrap(), 0);
        }
        let tp = TracePowerForm::new(&i3, 3).unwrap();
        assert_eq!(linearity_dimension(&tp, 5).unwrap(), 8);
    }
}
