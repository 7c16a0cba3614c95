use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{binomial, sigma_reduced, MixedContext};
use crate::error::{GhxError, Result};
use crate::herm::{coord_vector, expect_dim, HermitianForm, MetricPencil};

/// A homogeneous real polynomial on `Herm(n)` given through its complete
/// polarization: a symmetric multilinear form in `degree()` arguments.
pub trait PolarForm {
    /// Matrix dimension `n` of the arguments.
    fn dim(&self) -> usize;

    /// Homogeneous degree.
    fn degree(&self) -> usize;

    fn polar(&self, args: &[HermitianForm]) -> Result<f64>;

    fn value(&self, x: &HermitianForm) -> Result<f64> {
        self.polar(&vec![x.clone(); self.degree()])
    }

    /// A magnitude bound for `|polar(args)|`, used to make tolerances relative.
    fn scale(&self, args: &[HermitianForm]) -> Result<f64>;
}

impl PolarForm for MixedContext {
    fn dim(&self) -> usize {
        MixedContext::dim(self)
    }

    fn degree(&self) -> usize {
        self.free_degree()
    }

    fn polar(&self, args: &[HermitianForm]) -> Result<f64> {
        super::mixed_sigma(self, args)
    }

    fn value(&self, x: &HermitianForm) -> Result<f64> {
        if self.fixed().is_empty() {
            let reduced = self.metric().reduce(x)?;
            return Ok(sigma_reduced(&reduced, self.degree()));
        }
        self.polar(&vec![x.clone(); self.free_degree()])
    }

    fn scale(&self, args: &[HermitianForm]) -> Result<f64> {
        let g = self.metric();
        let mut s = binomial(self.dim(), self.degree());
        for a in self.fixed().iter().chain(args) {
            s *= g.reduce(a)?.norm();
        }
        Ok(s)
    }
}

/// A real quadratic form on `Herm(n)` given by its Gram matrix in
/// [`RealBasis`](crate::herm::RealBasis) coordinates.
#[derive(Clone, Debug)]
pub struct GramForm {
    n: usize,
    gram: DMatrix<f64>,
}

impl GramForm {
    pub fn new(n: usize, gram: DMatrix<f64>) -> Result<Self> {
        crate::herm::check_dim(n)?;
        expect_dim(n * n, gram.nrows())?;
        expect_dim(n * n, gram.ncols())?;
        let asym = (&gram - gram.transpose()).norm();
        if asym > 1e-12 * gram.norm() {
            return Err(GhxError::Precondition(format!(
                "Gram matrix is not symmetric (asymmetry {asym:e})"
            )));
        }
        Ok(Self { n, gram })
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }
}

impl PolarForm for GramForm {
    fn dim(&self) -> usize {
        self.n
    }

    fn degree(&self) -> usize {
        2
    }

    fn polar(&self, args: &[HermitianForm]) -> Result<f64> {
        if args.len() != 2 {
            return Err(GhxError::ArgumentCount {
                expected: 2,
                found: args.len(),
            });
        }
        expect_dim(self.n, args[0].dim())?;
        expect_dim(self.n, args[1].dim())?;
        let x = coord_vector(&args[0]);
        let y = coord_vector(&args[1]);
        Ok(x.dot(&(&self.gram * y)))
    }

    fn scale(&self, args: &[HermitianForm]) -> Result<f64> {
        Ok(self.gram.norm() * args.iter().map(|a| coord_vector(a).norm()).product::<f64>())
    }
}

/// `x ↦ e_1(x)^p`, the `p`-th power of the pencil trace. Its linearity is the
/// trace-free hyperplane.
#[derive(Clone, Debug)]
pub struct TracePowerForm {
    metric: MetricPencil,
    power: usize,
}

impl TracePowerForm {
    pub fn new(metric: &MetricPencil, power: usize) -> Result<Self> {
        if power == 0 {
            return Err(GhxError::DegreeOutOfRange { degree: 0, n: metric.dim() });
        }
        Ok(Self {
            metric: metric.clone(),
            power,
        })
    }
}

impl PolarForm for TracePowerForm {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn degree(&self) -> usize {
        self.power
    }

    fn polar(&self, args: &[HermitianForm]) -> Result<f64> {
        if args.len() != self.power {
            return Err(GhxError::ArgumentCount {
                expected: self.power,
                found: args.len(),
            });
        }
        args.iter()
            .map(|a| Ok(self.metric.reduce(a)?.trace().re))
            .product()
    }

    fn scale(&self, args: &[HermitianForm]) -> Result<f64> {
        let sqrt_n = (self.dim() as f64).sqrt();
        args.iter()
            .map(|a| Ok(sqrt_n * self.metric.reduce(a)?.norm()))
            .product()
    }
}

/// A real univariate polynomial, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyOnLine {
    coeffs: Vec<f64>,
}

/// Coefficients below this fraction of the largest are treated as zero when
/// locating the leading term.
const LEADING_CUTOFF: f64 = 1e-13;

impl PolyOnLine {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    fn eval_complex(&self, s: Complex64, coeffs: &[f64]) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Degree after discarding negligible leading coefficients; `None` for
    /// the zero polynomial.
    pub fn effective_degree(&self) -> Option<usize> {
        let max = self.max_abs();
        if max == 0.0 {
            return None;
        }
        self.coeffs.iter().rposition(|c| c.abs() > LEADING_CUTOFF * max)
    }

    /// All complex roots, from the eigenvalues of the companion matrix of the
    /// normalized polynomial, each polished by a few Newton steps.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let d = self
            .effective_degree()
            .ok_or_else(|| GhxError::Degenerate("zero polynomial".into()))?;
        if d == 0 {
            return Ok(Vec::new());
        }
        let coeffs = &self.coeffs[..=d];
        let lead = coeffs[d];
        let mut companion = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            companion[(i, d - 1)] = -coeffs[i] / lead;
        }
        let mut roots: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
        for r in roots.iter_mut() {
            let (mut p, _) = self.eval_complex(*r, coeffs);
            for _ in 0..3 {
                let (_, dp) = self.eval_complex(*r, coeffs);
                if dp.norm() == 0.0 {
                    break;
                }
                let cand = *r - p / dp;
                let (pc, _) = self.eval_complex(cand, coeffs);
                if !(pc.norm() < p.norm()) {
                    break;
                }
                *r = cand;
                p = pc;
            }
        }
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }
}

/// `s ↦ P(s·a + x)` as a polynomial: `c_j = C(d, j)·D(a^{(j)}, x^{(d−j)})`.
pub fn restrict_line<F: PolarForm + ?Sized>(
    form: &F,
    a: &HermitianForm,
    x: &HermitianForm,
) -> Result<PolyOnLine> {
    expect_dim(form.dim(), a.dim())?;
    expect_dim(form.dim(), x.dim())?;
    let d = form.degree();
    let coeffs = (0..=d)
        .map(|j| {
            let mut args = vec![a.clone(); j];
            args.extend(std::iter::repeat_n(x.clone(), d - j));
            Ok(binomial(d, j) * form.polar(&args)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolyOnLine::new(coeffs))
}

/// True iff every root `r` satisfies `|Im r| ≤ tol·(1 + |r|)`.
pub fn real_rooted(p: &PolyOnLine, tol: f64) -> Result<bool> {
    Ok(p.roots()?.iter().all(|r| r.im.abs() <= tol * (1.0 + r.norm())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn restrict_identity_line() {
        let ctx = MixedContext::sigma_m(&MetricPencil::identity(2), 2).unwrap();
        let p = restrict_line(&ctx, &HermitianForm::identity(2), &HermitianForm::diag(&[1.0, 2.0])).unwrap();
        for (c, want) in p.coeffs().iter().zip([2.0, 3.0, 1.0]) {
            assert_relative_eq!(*c, want, epsilon = 1e-13);
        }
        let p0 = restrict_line(&ctx, &HermitianForm::identity(2), &HermitianForm::zeros(2)).unwrap();
        assert_eq!(p0.effective_degree(), Some(2));
        assert!(p0.coeffs()[0].abs() < 1e-15 && p0.coeffs()[1].abs() < 1e-15);
    }

    #[test]
    fn restrict_translation() {
        let g = MetricPencil::new(HermitianForm::diag(&[1.0, 2.0, 0.5])).unwrap();
        let ctx = MixedContext::sigma_m(&g, 3).unwrap();
        let a = HermitianForm::diag(&[1.0, 3.0, 2.0]);
        let p = restrict_line(&ctx, &a, &a.scaled(-1.0)).unwrap();
        let s = ctx.value(&a).unwrap();
        // (s − 1)^3 σ(a)
        for (c, want) in p.coeffs().iter().zip([-1.0, 3.0, -3.0, 1.0]) {
            assert!((c - want * s).abs() < 1e-10 * s.abs());
        }
    }

    #[test]
    fn real_rooted_examples() {
        assert!(real_rooted(&PolyOnLine::new(vec![2.0, 3.0, 1.0]), 1e-7).unwrap());
        assert!(!real_rooted(&PolyOnLine::new(vec![1.0, 0.0, 1.0]), 1e-7).unwrap());
        assert!(real_rooted(&PolyOnLine::new(vec![1.0, -2.0, 1.0]), 1e-7).unwrap());
        assert!(matches!(real_rooted(&PolyOnLine::new(vec![0.0, 0.0]), 1e-7), Err(GhxError::Degenerate(_))));
        assert!(real_rooted(&PolyOnLine::new(vec![4.0]), 1e-7).unwrap());
    }

    #[test]
    fn roots_are_accurate() {
        // (s + 1)(s + 2)(s − 3)
        let p = PolyOnLine::new(vec![-6.0, -7.0, 0.0, 1.0]);
        let r = p.roots().unwrap();
        for (z, want) in r.iter().zip([-2.0, -1.0, 3.0]) {
            assert!((z.re - want).abs() < 1e-13 && z.im.abs() < 1e-13);
        }
    }

    #[test]
    fn trace_power_polar() {
        let form = TracePowerForm::new(&MetricPencil::identity(2), 3).unwrap();
        let v = form
            .polar(&[HermitianForm::identity(2), HermitianForm::diag(&[1.0, 2.0]), HermitianForm::diag(&[0.0, -1.0])])
            .unwrap();
        assert_eq!(v, 2.0 * 3.0 * -1.0);
    }
}
