use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{check_degree, factorial, sigma_reduced};
use crate::error::{GhxError, Result};
use crate::fault;
use crate::herm::{expect_dim, HermitianForm, MetricPencil};

/// A degree-`m` polarized `σ_m` relative to a metric, with `k ≤ m` slots
/// already filled. The remaining `m − k` slots are supplied per call.
#[derive(Clone, Debug)]
pub struct MixedContext {
    m: usize,
    metric: MetricPencil,
    fixed: Vec<HermitianForm>,
    fixed_reduced: Vec<DMatrix<Complex64>>,
}

impl MixedContext {
    pub fn new(m: usize, metric: &MetricPencil, fixed: Vec<HermitianForm>) -> Result<Self> {
        let n = metric.dim();
        check_degree(m, n)?;
        if fixed.len() > m {
            return Err(GhxError::ArgumentCount {
                expected: m,
                found: fixed.len(),
            });
        }
        let fixed_reduced = fixed
            .iter()
            .map(|a| metric.reduce(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            m,
            metric: metric.clone(),
            fixed,
            fixed_reduced,
        })
    }

    /// `σ_m` itself: no fixed slots.
    pub fn sigma_m(metric: &MetricPencil, m: usize) -> Result<Self> {
        Self::new(m, metric, Vec::new())
    }

    /// Total degree `m` of the underlying `σ_m`.
    pub fn degree(&self) -> usize {
        self.m
    }

    /// Number of slots still free.
    pub fn free_degree(&self) -> usize {
        self.m - self.fixed.len()
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn metric(&self) -> &MetricPencil {
        &self.metric
    }

    pub fn fixed(&self) -> &[HermitianForm] {
        &self.fixed
    }

    /// A context with `extra` appended to the fixed slots.
    pub fn with_fixed(&self, extra: &[HermitianForm]) -> Result<Self> {
        let mut fixed = self.fixed.clone();
        fixed.extend_from_slice(extra);
        Self::new(self.m, &self.metric, fixed)
    }

    fn check_free(&self, free: &[HermitianForm]) -> Result<()> {
        if free.len() != self.free_degree() {
            return Err(GhxError::ArgumentCount {
                expected: self.free_degree(),
                found: free.len(),
            });
        }
        for b in free {
            expect_dim(self.dim(), b.dim())?;
        }
        Ok(())
    }

    /// Polarization with the free slots given already in the reduced frame.
    pub(crate) fn eval_reduced(&self, free: &[&DMatrix<Complex64>]) -> f64 {
        let mut args: Vec<&DMatrix<Complex64>> = self.fixed_reduced.iter().collect();
        args.extend_from_slice(free);
        polarize(self.m, &args)
    }
}

/// Complete polarization of `A ↦ e_m(λ(A))` at reduced matrices, by
/// inclusion–exclusion over sub-multisets of the arguments:
///
/// `D = (1/m!) Σ_{c ≤ mult, c ≠ 0} (−1)^{m−|c|} ∏ C(mult_i, c_i) σ_m(Σ c_i M_i)`
///
/// which is the subset formula with identical arguments merged. Each
/// argument is first scaled to unit norm and the norms are multiplied back at
/// the end, so that arguments of very different size do not turn the
/// alternating sum into a cancellation of large terms.
pub(crate) fn polarize(m: usize, args: &[&DMatrix<Complex64>]) -> f64 {
    debug_assert_eq!(args.len(), m);
    let mut distinct: Vec<(&DMatrix<Complex64>, usize)> = Vec::with_capacity(m);
    for a in args {
        match distinct.iter_mut().find(|(g, _)| std::ptr::eq(*g, *a) || *g == *a) {
            Some((_, mult)) => *mult += 1,
            None => distinct.push((a, 1)),
        }
    }
    let mut norm_product = 1.0;
    let mut groups: Vec<(DMatrix<Complex64>, usize)> = Vec::with_capacity(distinct.len());
    for (a, mult) in distinct {
        let norm = a.norm();
        if norm == 0.0 {
            return 0.0;
        }
        norm_product *= norm.powi(mult as i32);
        let unit = a.unscale(norm);
        // positive multiples of one matrix agree here up to rounding; merging
        // them spares the alternating sum its worst cancellation
        match groups.iter_mut().find(|(g, _)| same_unit(g, &unit)) {
            Some((_, m)) => *m += mult,
            None => groups.push((unit, mult)),
        }
    }
    let flip_sign = fault::polarization_sign_fault();
    if let ([(g, _)], false) = (groups.as_slice(), flip_sign) {
        return sigma_reduced(g, m) * norm_product;
    }
    let n = args[0].nrows();
    let mut counts = vec![0usize; groups.len()];
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    loop {
        // odometer increment over count vectors
        let mut i = 0;
        while i < groups.len() && counts[i] == groups[i].1 {
            counts[i] = 0;
            i += 1;
        }
        if i == groups.len() {
            break;
        }
        counts[i] += 1;

        acc.fill(Complex64::new(0.0, 0.0));
        let mut total = 0;
        let mut weight = 1.0;
        for ((g, mult), &c) in groups.iter().zip(&counts) {
            if c > 0 {
                acc.zip_apply(g, |x, y| *x += y * c as f64);
                total += c;
                weight *= super::binomial(*mult, c);
            }
        }
        let sign = if (m - total) % 2 == 0 || flip_sign { 1.0 } else { -1.0 };
        let term = sign * weight * sigma_reduced(&acc, m);
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    (sum + comp) / factorial(m) * norm_product
}

/// Unit-norm matrices equal up to a few rounding errors per entry.
fn same_unit(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= 16.0 * f64::EPSILON)
}

/// The polarization `D(fixed…, free…)` of `σ_m` relative to the context metric.
pub fn mixed_sigma(ctx: &MixedContext, free: &[HermitianForm]) -> Result<f64> {
    ctx.check_free(free)?;
    let reduced = free
        .iter()
        .map(|b| ctx.metric.reduce(b))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&DMatrix<Complex64>> = reduced.iter().collect();
    Ok(ctx.eval_reduced(&refs))
}

/// `e_k` of the pencil `(A, G)` without any eigensolver or factorization:
/// `det(G + tA)/det G = Σ_k e_k t^k`, sampled on a circle of radius
/// `‖G‖/‖A‖` at `n + 1` roots of unity and inverted by a discrete Fourier sum.
pub fn sigma_oracle(a: &HermitianForm, g: &HermitianForm, k: usize) -> Result<f64> {
    let n = g.dim();
    expect_dim(n, a.dim())?;
    check_degree(k, n)?;
    let an = a.frobenius_norm();
    if an == 0.0 {
        return Ok(0.0);
    }
    let gm = g.to_matrix();
    let am = a.to_matrix();
    let det_g = gm.clone().determinant().re;
    let radius = g.frobenius_norm() / an;
    let points = n + 1;
    let mut coeff = Complex64::new(0.0, 0.0);
    for j in 0..points {
        let theta = 2.0 * std::f64::consts::PI * (j as f64) / (points as f64);
        let t = Complex64::from_polar(radius, theta);
        let p = (&gm + &am * t).determinant();
        coeff += p * Complex64::from_polar(1.0, -theta * k as f64);
    }
    Ok(coeff.re / (points as f64) / radius.powi(k as i32) / det_g)
}

/// Independent evaluation of [`mixed_sigma`]: nested forward differences
/// `Δ_1 ⋯ Δ_m f(0)` of `f(t) = σ_m(Σ t_i s_i B_i)` on the grid
/// `t ∈ {0, 1}^m`, with per-argument steps `s_i = 1/‖B_i‖`, and `σ_m`
/// taken from [`sigma_oracle`].
pub fn mixed_sigma_oracle(ctx: &MixedContext, free: &[HermitianForm]) -> Result<f64> {
    ctx.check_free(free)?;
    let m = ctx.m;
    let g = ctx.metric.metric();
    let args: Vec<&HermitianForm> = ctx.fixed.iter().chain(free).collect();
    let steps: Vec<f64> = args
        .iter()
        .map(|b| {
            let nb = b.frobenius_norm();
            if nb > 0.0 {
                1.0 / nb
            } else {
                1.0
            }
        })
        .collect();

    fn nested(
        level: usize,
        base: &HermitianForm,
        args: &[&HermitianForm],
        steps: &[f64],
        g: &HermitianForm,
        m: usize,
    ) -> Result<f64> {
        if level == args.len() {
            return sigma_oracle(base, g, m);
        }
        let mut shifted = base.clone();
        shifted.axpy(steps[level], args[level]);
        let upper = nested(level + 1, &shifted, args, steps, g, m)?;
        let lower = nested(level + 1, base, args, steps, g, m)?;
        Ok(upper - lower)
    }

    let diff = nested(0, &HermitianForm::zeros(ctx.dim()), &args, &steps, g, m)?;
    let scale: f64 = steps.iter().product();
    Ok(diff / scale / factorial(m))
}
