use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{grid_mean, ScalarField, TorusContext};
use crate::error::{GhxError, Result};
use crate::herm::{expect_dim, hermitian_eigenvalues, HermitianForm, MetricPencil};
use crate::sympoly::{mixed_sigma, MixedContext};

/// A Hermitian form at every grid point, stored as `n²` coordinate planes in
/// [`RealBasis`](crate::herm::RealBasis) order.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldValues {
    n: usize,
    planes: Vec<Vec<f64>>,
}

impl FieldValues {
    pub fn constant(ctx: &TorusContext, c: &HermitianForm) -> Result<Self> {
        expect_dim(ctx.dim(), c.dim())?;
        Ok(Self {
            n: c.dim(),
            planes: c.coords().iter().map(|&v| vec![v; ctx.points()]).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.planes[0].len()
    }

    /// Coordinate plane `i`: coordinate `i` at every grid point.
    pub fn plane(&self, i: usize) -> &[f64] {
        &self.planes[i]
    }

    pub fn coords_at(&self, p: usize) -> Vec<f64> {
        self.planes.iter().map(|pl| pl[p]).collect()
    }

    pub fn at(&self, p: usize) -> HermitianForm {
        HermitianForm::from_coords(self.n, self.coords_at(p)).expect("plane count is n²")
    }

    pub fn add_constant(&mut self, c: &HermitianForm) {
        assert_eq!(self.n, c.dim(), "dimension mismatch");
        for (pl, &v) in self.planes.iter_mut().zip(c.coords()) {
            pl.iter_mut().for_each(|x| *x += v);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        Self {
            n: self.n,
            planes: self
                .planes
                .iter()
                .zip(&other.planes)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        }
    }

    /// `inner(H, F(x))` at every grid point.
    pub fn contract(&self, h: &HermitianForm) -> Vec<f64> {
        assert_eq!(self.n, h.dim(), "dimension mismatch");
        let weights: Vec<f64> = h
            .coords()
            .iter()
            .enumerate()
            .map(|(i, &c)| if i < self.n { c } else { 2.0 * c })
            .collect();
        (0..self.points())
            .into_par_iter()
            .map(|p| self.planes.iter().zip(&weights).map(|(pl, w)| w * pl[p]).sum())
            .collect()
    }

    /// Entrywise grid mean.
    pub fn mean(&self) -> HermitianForm {
        HermitianForm::from_coords(self.n, self.planes.iter().map(|pl| grid_mean(pl)).collect())
            .expect("plane count is n²")
    }

    /// `max_x ‖F(x)‖_F`.
    pub fn max_norm(&self) -> f64 {
        (0..self.points())
            .map(|p| {
                self.planes
                    .iter()
                    .enumerate()
                    .map(|(i, pl)| if i < self.n { pl[p] * pl[p] } else { 2.0 * pl[p] * pl[p] })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Inverse transform of `spectrum` multiplied pointwise by `symbol(ζ)`.
fn filtered(
    ctx: &TorusContext,
    spectrum: &[Complex64],
    zetas: &[Complex64],
    symbol: impl Fn(&[Complex64]) -> Complex64 + Sync,
) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = spectrum
        .par_iter()
        .zip(zetas.par_chunks(ctx.dim()))
        .map(|(s, z)| s * symbol(z))
        .collect();
    ctx.transform(&mut data, true);
    data
}

/// `dd^cψ` at every grid point: entry `(j, k)` is `∂²ψ/∂z_j∂z̄_k`, with symbol
/// `−π²·ζ_j·conj(ζ_k)`.
pub fn ddc(psi: &ScalarField, ctx: &TorusContext) -> Result<FieldValues> {
    psi.check_band_limit(ctx)?;
    let n = ctx.dim();
    let spectrum = psi.spectrum(ctx)?;
    let z = ctx.zetas();
    let mut planes = vec![Vec::new(); n * n];
    let mut leak: f64 = 0.0;
    for j in 0..n {
        let out = filtered(ctx, spectrum, z, |zeta| Complex64::new(-PI * PI * zeta[j].norm_sqr(), 0.0));
        leak = leak.max(out.iter().fold(0.0, |m: f64, v| m.max(v.im.abs())));
        planes[j] = out.iter().map(|v| v.re).collect();
    }
    let mut slot = n;
    for j in 0..n {
        for k in j + 1..n {
            let out = filtered(ctx, spectrum, z, |zeta| -PI * PI * zeta[j] * zeta[k].conj());
            planes[slot] = out.iter().map(|v| v.re).collect();
            planes[slot + 1] = out.iter().map(|v| v.im).collect();
            slot += 2;
        }
    }
    let values = FieldValues { n, planes };
    let scale = values.max_norm();
    if leak > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(GhxError::Numerical(format!(
            "diagonal of dd^c has imaginary part {leak:e} at scale {scale:e}"
        )));
    }
    Ok(values)
}

/// Symbol of `φ ↦ inner(H, dd^cφ)`: `−π²·ζ†Hζ`, real, and strictly negative
/// at nonzero frequency when `H` is positive definite.
pub fn laplacian_symbol(h: &HermitianForm, zeta: &[Complex64]) -> f64 {
    let n = h.dim();
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            acc += (zeta[j].conj() * h.get(j, k) * zeta[k]).re;
        }
    }
    -PI * PI * acc
}

/// `inner(H, dd^cφ)`, computed spectrally.
pub fn apply_laplacian(h: &HermitianForm, phi: &ScalarField, ctx: &TorusContext) -> Result<ScalarField> {
    expect_dim(ctx.dim(), h.dim())?;
    let z = ctx.zetas();
    let out = filtered(ctx, phi.spectrum(ctx)?, z, |zeta| Complex64::new(laplacian_symbol(h, zeta), 0.0));
    ScalarField::new(ctx, out.iter().map(|v| v.re).collect())
}

#[derive(Clone, Debug)]
pub struct LaplacianSolution {
    pub phi: ScalarField,
    /// `‖inner(H, dd^cφ) − f‖_∞`.
    pub residual: f64,
}

/// Solves `inner(H, dd^cφ) = f` for zero-mean `f`, with `φ` normalized to
/// zero mean.
pub fn laplacian_solve(h: &HermitianForm, f: &ScalarField, ctx: &TorusContext) -> Result<LaplacianSolution> {
    expect_dim(ctx.dim(), h.dim())?;
    let min_eigenvalue = hermitian_eigenvalues(&h.to_matrix())[0];
    if min_eigenvalue <= 0.0 {
        return Err(GhxError::NotPositiveDefinite { min_eigenvalue });
    }
    let sup = f.sup_norm();
    let mean = f.mean();
    if mean.abs() > 1e-10 * sup {
        return Err(GhxError::NonZeroMean { mean });
    }
    let z = ctx.zetas();
    let spectrum = f.spectrum(ctx)?;
    let mut data: Vec<Complex64> = spectrum
        .par_iter()
        .zip(z.par_chunks(ctx.dim()))
        .enumerate()
        .map(|(p, (s, zeta))| if p == 0 { Complex64::new(0.0, 0.0) } else { s / laplacian_symbol(h, zeta) })
        .collect();
    ctx.transform(&mut data, true);
    let phi = ScalarField::new(ctx, data.iter().map(|v| v.re).collect())?;
    let back = apply_laplacian(h, &phi, ctx)?;
    let residual = back
        .values()
        .iter()
        .zip(f.values())
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
    if residual > 1e-8 * sup {
        return Err(GhxError::Numerical(format!(
            "Laplacian residual {residual:e} exceeds 1e-8·{sup:e}"
        )));
    }
    Ok(LaplacianSolution { phi, residual })
}

/// `C + dd^cψ`: closed, and cohomologous to the constant `C`.
#[derive(Clone, Debug)]
pub struct FormField {
    pub constant: HermitianForm,
    pub potential: ScalarField,
}

impl FormField {
    pub fn new(constant: HermitianForm, potential: ScalarField) -> Self {
        Self { constant, potential }
    }

    pub fn constant(ctx: &TorusContext, c: HermitianForm) -> Self {
        Self::new(c, ScalarField::zeros(ctx))
    }

    pub fn is_constant(&self) -> bool {
        self.potential.is_zero()
    }

    pub fn evaluate(&self, ctx: &TorusContext) -> Result<FieldValues> {
        expect_dim(ctx.dim(), self.constant.dim())?;
        if self.is_constant() {
            return FieldValues::constant(ctx, &self.constant);
        }
        let mut v = ddc(&self.potential, ctx)?;
        v.add_constant(&self.constant);
        Ok(v)
    }
}

/// `∫ D(F_1(x), …, F_m(x)) dx` with `m = fields.len()` and `σ_m` relative to
/// `g`, as a grid mean in fixed summation order.
pub fn integral_pairing(fields: &[FormField], g: &MetricPencil, ctx: &TorusContext) -> Result<f64> {
    let m = fields.len();
    let mctx = MixedContext::sigma_m(g, m)?;
    expect_dim(ctx.dim(), g.dim())?;
    if fields.iter().all(FormField::is_constant) {
        let constants: Vec<HermitianForm> = fields.iter().map(|f| f.constant.clone()).collect();
        for c in &constants {
            expect_dim(ctx.dim(), c.dim())?;
        }
        return mixed_sigma(&mctx, &constants);
    }
    let values = fields.iter().map(|f| f.evaluate(ctx)).collect::<Result<Vec<_>>>()?;
    let pointwise = (0..ctx.points())
        .into_par_iter()
        .map(|p| {
            let args: Vec<HermitianForm> = values.iter().map(|v| v.at(p)).collect();
            mixed_sigma(&mctx, &args)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(grid_mean(&pointwise))
}
