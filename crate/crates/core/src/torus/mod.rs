//! The flat torus `ℂⁿ / (ℤⁿ + iℤⁿ)` on a uniform grid.
//!
//! Classes are constant Hermitian forms; representatives are a constant plus
//! `dd^c` of a periodic potential. With `d^c = (i/2)(∂̄ − ∂)` one has
//! `dd^c = i∂∂̄`, and the form `dd^cψ` is stored as the Hermitian matrix
//! `(∂²ψ/∂z_j∂z̄_k)`, `z_j = x_j + i·y_j`. Derivatives are spectral: a mode
//! with frequencies `k` (along `x`) and `l` (along `y`) picks up `π(l_j + ik_j)`
//! under `∂/∂z_j` and `−π(l_j − ik_j)` under `∂/∂z̄_j`.
//!
//! Grid axes are `x_1, …, x_n, y_1, …, y_n`, stored row-major with the last
//! axis fastest. Integrals are grid means, so the torus has volume 1.

mod forms;
mod snapshot;
mod verify;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{GhxError, Result};
use crate::herm::check_dim;

pub use forms::{
    apply_laplacian, ddc, integral_pairing, laplacian_solve, laplacian_symbol, FieldValues, FormField, LaplacianSolution,
};
pub use snapshot::{read_snapshot, write_snapshot, Sidecar, Snapshot};
pub use verify::{
    hessian_constant_check, run_theorem_a_torus, verify_theorem_a_torus, HessianCheck, PairRatio, TorusRun, TorusTheoremReport,
};

/// Largest number of grid points.
pub const MAX_POINTS: usize = 1 << 24;

/// Discretization of the unit-period torus of complex dimension `n`.
#[derive(Clone)]
pub struct TorusContext {
    n: usize,
    grid: usize,
    points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    zetas: Arc<OnceLock<Vec<Complex64>>>,
}

impl fmt::Debug for TorusContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusContext")
            .field("n", &self.n)
            .field("grid", &self.grid)
            .finish()
    }
}

impl TorusContext {
    /// `grid` points per real axis; a power of two, at least 4.
    pub fn new(n: usize, grid: usize) -> Result<Self> {
        check_dim(n)?;
        if grid < 4 || !grid.is_power_of_two() {
            return Err(GhxError::Grid(format!("resolution {grid} must be a power of two ≥ 4")));
        }
        let points = (0..2 * n)
            .try_fold(1usize, |acc, _| acc.checked_mul(grid))
            .filter(|&p| p <= MAX_POINTS)
            .ok_or_else(|| GhxError::Grid(format!("{grid}^{} points exceed {MAX_POINTS}", 2 * n)))?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            grid,
            points,
            forward: planner.plan_fft_forward(grid),
            inverse: planner.plan_fft_inverse(grid),
            zetas: Arc::new(OnceLock::new()),
        })
    }

    /// 32 points per axis up to `n = 2`, 8 for `n = 3`, 4 beyond.
    pub fn with_default_grid(n: usize) -> Result<Self> {
        let grid = match n {
            0..=2 => 32,
            3 => 8,
            _ => 4,
        };
        Self::new(n, grid)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Number of real axes, `2n`.
    pub fn axes(&self) -> usize {
        2 * self.n
    }

    /// Axis names in storage order.
    pub fn axis_names(&self) -> Vec<String> {
        (1..=self.n)
            .map(|j| format!("x{j}"))
            .chain((1..=self.n).map(|j| format!("y{j}")))
            .collect()
    }

    /// Integer frequency of grid index `i` along one axis, in `[−N/2, N/2)`.
    fn signed(&self, i: usize) -> i64 {
        let i = i as i64;
        let n = self.grid as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Per-axis grid indices of flat index `p`.
    pub fn digits(&self, mut p: usize) -> Vec<usize> {
        let mut d = vec![0; self.axes()];
        for slot in d.iter_mut().rev() {
            *slot = p % self.grid;
            p /= self.grid;
        }
        d
    }

    /// Coordinates in `[0, 1)` of flat index `p`, in axis order.
    pub fn position(&self, p: usize) -> Vec<f64> {
        self.digits(p)
            .into_iter()
            .map(|i| i as f64 / self.grid as f64)
            .collect()
    }

    /// Signed frequencies of flat spectral index `p`, in axis order.
    pub fn frequency(&self, p: usize) -> Vec<i64> {
        self.digits(p).into_iter().map(|i| self.signed(i)).collect()
    }

    /// Flat spectral index of a frequency vector.
    pub fn index_of(&self, freq: &[i64]) -> usize {
        let n = self.grid as i64;
        freq.iter().fold(0, |acc, &f| acc * self.grid + f.rem_euclid(n) as usize)
    }

    /// Largest `|frequency|` over the axes of spectral index `p`.
    fn max_abs_frequency(&self, mut p: usize) -> i64 {
        let mut top = 0;
        for _ in 0..self.axes() {
            top = top.max(self.signed(p % self.grid).abs());
            p /= self.grid;
        }
        top
    }

    /// `ζ_j = l_j + i·k_j` for spectral index `p`.
    pub fn zeta(&self, p: usize) -> Vec<Complex64> {
        self.zetas()[p * self.n..(p + 1) * self.n].to_vec()
    }

    /// `ζ` at every spectral index, `n` entries per index; built on first use
    /// and shared by clones.
    pub(crate) fn zetas(&self) -> &[Complex64] {
        self.zetas.get_or_init(|| {
            let n = self.n;
            let mut out = vec![Complex64::new(0.0, 0.0); self.points * n];
            out.par_chunks_mut(n).enumerate().for_each(|(p, z)| {
                let mut q = p;
                // axes are x_1..x_n, y_1..y_n with the last one fastest
                for axis in (0..2 * n).rev() {
                    let f = self.signed(q % self.grid) as f64;
                    q /= self.grid;
                    if axis < n {
                        z[axis].im = f;
                    } else {
                        z[axis - n].re = f;
                    }
                }
            });
            out
        })
    }

    /// In-place multidimensional DFT along every axis. The inverse carries the
    /// `1/points` normalization.
    pub fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.points, "field length does not match grid");
        let fft = if inverse { &self.inverse } else { &self.forward };
        let g = self.grid;
        for axis in 0..self.axes() {
            let stride = g.pow((self.axes() - 1 - axis) as u32);
            data.par_chunks_mut(g * stride).for_each_init(
                || {
                    (
                        vec![Complex64::new(0.0, 0.0); g],
                        vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
                    )
                },
                |(line, scratch), chunk| {
                    for i in 0..stride {
                        for t in 0..g {
                            line[t] = chunk[i + t * stride];
                        }
                        fft.process_with_scratch(line, scratch);
                        for t in 0..g {
                            chunk[i + t * stride] = line[t];
                        }
                    }
                },
            );
        }
        if inverse {
            let s = 1.0 / self.points as f64;
            data.par_iter_mut().for_each(|z| *z *= s);
        }
    }
}

/// Sum in a fixed binary-tree order, independent of thread count. On a
/// power-of-two length, a constant sequence sums exactly.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => return 0.0,
        1 => return xs[0],
        _ => {}
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Grid mean by [`pairwise_sum`].
pub fn grid_mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Real periodic function on the grid with a lazily computed spectrum.
#[derive(Clone)]
pub struct ScalarField {
    n: usize,
    grid: usize,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("n", &self.n)
            .field("grid", &self.grid)
            .field("mean", &self.mean())
            .finish()
    }
}

impl ScalarField {
    pub fn new(ctx: &TorusContext, values: Vec<f64>) -> Result<Self> {
        if values.len() != ctx.points {
            return Err(GhxError::DimensionMismatch {
                expected: ctx.points,
                found: values.len(),
            });
        }
        Ok(Self {
            n: ctx.n,
            grid: ctx.grid,
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(ctx: &TorusContext) -> Self {
        Self::constant(ctx, 0.0)
    }

    pub fn constant(ctx: &TorusContext, c: f64) -> Self {
        Self::new(ctx, vec![c; ctx.points]).expect("length matches by construction")
    }

    /// Samples `f` at every grid point; `f` receives the `2n` coordinates.
    pub fn from_fn(ctx: &TorusContext, f: impl Fn(&[f64]) -> f64 + Sync) -> Self {
        let values = (0..ctx.points).into_par_iter().map(|p| f(&ctx.position(p))).collect();
        Self::new(ctx, values).expect("length matches by construction")
    }

    /// Real part of the inverse transform of `spectrum`, with the largest
    /// imaginary part discarded.
    pub fn from_spectrum(ctx: &TorusContext, mut spectrum: Vec<Complex64>) -> Result<(Self, f64)> {
        if spectrum.len() != ctx.points {
            return Err(GhxError::DimensionMismatch {
                expected: ctx.points,
                found: spectrum.len(),
            });
        }
        ctx.transform(&mut spectrum, true);
        let max_imag = spectrum.iter().fold(0.0, |m: f64, z| m.max(z.im.abs()));
        let field = Self::new(ctx, spectrum.iter().map(|z| z.re).collect())?;
        Ok((field, max_imag))
    }

    /// `amplitude`-scaled sum of `modes` random real Fourier modes with every
    /// frequency component in `(−N/4, N/4)`, so the field passes the aliasing
    /// guard.
    pub fn random_band_limited<R: Rng + ?Sized>(
        ctx: &TorusContext,
        rng: &mut R,
        modes: usize,
        amplitude: f64,
    ) -> Self {
        let limit = (ctx.grid / 4) as i64 - 1;
        let mut spectrum = vec![Complex64::new(0.0, 0.0); ctx.points];
        let weight = amplitude * ctx.points as f64 / (modes.max(1) as f64).sqrt();
        let mut added = 0;
        while added < modes && limit > 0 {
            let freq: Vec<i64> = (0..ctx.axes()).map(|_| rng.random_range(-limit..=limit)).collect();
            if freq.iter().all(|&f| f == 0) {
                continue;
            }
            let a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * (weight * 0.5);
            let neg: Vec<i64> = freq.iter().map(|f| -f).collect();
            spectrum[ctx.index_of(&freq)] += a;
            spectrum[ctx.index_of(&neg)] += a.conj();
            added += 1;
        }
        Self::from_spectrum(ctx, spectrum).expect("length matches by construction").0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn mean(&self) -> f64 {
        grid_mean(&self.values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    fn check_grid(&self, ctx: &TorusContext) -> Result<()> {
        if self.n != ctx.n || self.grid != ctx.grid {
            return Err(GhxError::Grid(format!(
                "field on n = {}, N = {} used with n = {}, N = {}",
                self.n, self.grid, ctx.n, ctx.grid
            )));
        }
        Ok(())
    }

    /// Unnormalized forward DFT, computed once.
    pub fn spectrum(&self, ctx: &TorusContext) -> Result<&[Complex64]> {
        self.check_grid(ctx)?;
        Ok(self.spectrum.get_or_init(|| {
            let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            ctx.transform(&mut data, false);
            data
        }))
    }

    /// `‖ifft(fft(f)) − f‖_∞`.
    pub fn round_trip_error(&self, ctx: &TorusContext) -> Result<f64> {
        let (back, _) = Self::from_spectrum(ctx, self.spectrum(ctx)?.to_vec())?;
        Ok(back
            .values
            .iter()
            .zip(&self.values)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())))
    }

    /// Fails when more than a `1e−20` share of the spectral energy sits at a
    /// frequency with some component of size `≥ N/4`.
    pub fn check_band_limit(&self, ctx: &TorusContext) -> Result<()> {
        let spec = self.spectrum(ctx)?;
        let cutoff = (ctx.grid / 4) as i64;
        let (mut high, mut total) = (0.0, 0.0);
        for (p, z) in spec.iter().enumerate() {
            let e = z.norm_sqr();
            total += e;
            if ctx.max_abs_frequency(p) >= cutoff {
                high += e;
            }
        }
        if total > 0.0 && high > 1e-20 * total {
            return Err(GhxError::Aliasing {
                cutoff: cutoff as usize,
                mass: high / total,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "grid mismatch");
        self.map_with(other, |a, b| a + b)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// The field shifted to zero mean.
    pub fn centered(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    fn map_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            n: self.n,
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            spectrum: OnceLock::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::stream;

    #[test]
    fn context_limits() {
        assert!(TorusContext::new(1, 2).is_err());
        assert!(TorusContext::new(1, 12).is_err());
        assert!(TorusContext::new(3, 32).is_err());
        assert_eq!(TorusContext::new(3, 16).unwrap().points(), 1 << 24);
        assert_eq!(TorusContext::with_default_grid(3).unwrap().grid(), 8);
        assert_eq!(TorusContext::with_default_grid(2).unwrap().grid(), 32);
    }

    #[test]
    fn index_round_trip() {
        let ctx = TorusContext::new(2, 8).unwrap();
        for p in [0, 1, 77, 4095] {
            assert_eq!(ctx.index_of(&ctx.frequency(p)), p);
        }
        assert_eq!(ctx.frequency(1), vec![0, 0, 0, 1]);
        assert_eq!(ctx.zeta(1), vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn single_mode_spectrum() {
        let ctx = TorusContext::new(1, 8).unwrap();
        let f = ScalarField::from_fn(&ctx, |x| (2.0 * std::f64::consts::PI * x[0]).cos());
        let spec = f.spectrum(&ctx).unwrap();
        let half = ctx.points() as f64 / 2.0;
        for (p, z) in spec.iter().enumerate() {
            let fr = ctx.frequency(p);
            let want = if fr == [1, 0] || fr == [-1, 0] { half } else { 0.0 };
            assert!((z - want).norm() < 1e-12, "{fr:?} {z}");
        }
    }

    #[test]
    fn round_trip_and_band_limit() {
        let ctx = TorusContext::new(2, 16).unwrap();
        let f = ScalarField::random_band_limited(&ctx, &mut stream(3, 0), 12, 1.0);
        assert!(f.round_trip_error(&ctx).unwrap() <= 1e-12 * f.sup_norm());
        assert!(f.mean().abs() < 1e-12);
        f.check_band_limit(&ctx).unwrap();
        let nyquist = ScalarField::from_fn(&ctx, |x| (2.0 * std::f64::consts::PI * 6.0 * x[1]).sin());
        assert!(matches!(nyquist.check_band_limit(&ctx), Err(GhxError::Aliasing { cutoff: 4, .. })));
    }

    #[test]
    fn pairwise_sum_of_constants_is_exact() {
        let xs = vec![0.1; 1 << 12];
        assert_eq!(grid_mean(&xs), 0.1);
    }
}
