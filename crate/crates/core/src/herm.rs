//! Hermitian matrices, metric pencils and the real coordinate basis of `Herm(n)`.
//!
//! A [`HermitianForm`] stores its `n²` real coordinates in the ordering of
//! [`RealBasis`]: the diagonal entries first, then for every pair `j < k`
//! (lexicographic) the real and imaginary part of the `(j, k)` entry. The
//! lower triangle is never stored, so conjugate symmetry holds exactly.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{GhxError, Result};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 16;

/// Default relative tolerance used throughout the crate.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest admissible ratio of extreme metric eigenvalues.
pub const MAX_CONDITION: f64 = 1e10;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(GhxError::UnsupportedDimension(n));
    }
    Ok(())
}

pub(crate) fn expect_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(GhxError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Index of the off-diagonal pair `(j, k)`, `j < k`, in lexicographic order.
#[inline]
fn pair_index(n: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k < n);
    // pairs (0,1)..(0,n-1), (1,2).. ; rows before j contribute sum_{r<j}(n-1-r)
    j * (2 * n - j - 1) / 2 + (k - j - 1)
}

/// An `n × n` complex Hermitian matrix.
#[derive(Clone, PartialEq)]
pub struct HermitianForm {
    n: usize,
    coords: Vec<f64>,
}

impl HermitianForm {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} out of range");
        Self {
            n,
            coords: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n);
        a.coords[..n].fill(1.0);
        a
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut a = Self::zeros(values.len());
        a.coords[..values.len()].copy_from_slice(values);
        a
    }

    /// Builds the form from real coordinates in [`RealBasis`] order.
    pub fn from_coords(n: usize, coords: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        expect_dim(n * n, coords.len())?;
        Ok(Self { n, coords })
    }

    /// Builds the form from a function evaluated on the upper triangle.
    /// Imaginary parts on the diagonal are discarded.
    pub fn from_upper(n: usize, mut entry: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut a = Self::zeros(n);
        for j in 0..n {
            for k in j..n {
                a.set(j, k, entry(j, k));
            }
        }
        a
    }

    /// Converts a dense matrix, rejecting it if `‖A − A†‖_F > tol·‖A‖_F`.
    pub fn from_matrix(m: &DMatrix<Complex64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(GhxError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let n = m.nrows();
        check_dim(n)?;
        let asym = (m - m.adjoint()).norm();
        if asym > tol * m.norm().max(f64::MIN_POSITIVE) {
            return Err(GhxError::NotHermitian { asymmetry: asym });
        }
        Ok(Self::from_upper(n, |j, k| {
            if j == k {
                Complex64::new(m[(j, j)].re, 0.0)
            } else {
                (m[(j, k)] + m[(k, j)].conj()) * 0.5
            }
        }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        let n = self.n;
        assert!(j < n && k < n, "index ({j}, {k}) out of range for n = {n}");
        match j.cmp(&k) {
            std::cmp::Ordering::Equal => Complex64::new(self.coords[j], 0.0),
            std::cmp::Ordering::Less => {
                let p = n + 2 * pair_index(n, j, k);
                Complex64::new(self.coords[p], self.coords[p + 1])
            }
            std::cmp::Ordering::Greater => {
                let p = n + 2 * pair_index(n, k, j);
                Complex64::new(self.coords[p], -self.coords[p + 1])
            }
        }
    }

    /// Sets entry `(j, k)` and, implicitly, its conjugate `(k, j)`.
    pub fn set(&mut self, j: usize, k: usize, value: Complex64) {
        let n = self.n;
        assert!(j < n && k < n, "index ({j}, {k}) out of range for n = {n}");
        match j.cmp(&k) {
            std::cmp::Ordering::Equal => self.coords[j] = value.re,
            std::cmp::Ordering::Less => {
                let p = n + 2 * pair_index(n, j, k);
                self.coords[p] = value.re;
                self.coords[p + 1] = value.im;
            }
            std::cmp::Ordering::Greater => {
                let p = n + 2 * pair_index(n, k, j);
                self.coords[p] = value.re;
                self.coords[p + 1] = -value.im;
            }
        }
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |j, k| self.get(j, k))
    }

    pub fn frobenius_norm(&self) -> f64 {
        inner_unchecked(self, self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.coords[..self.n].iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            coords: self.coords.iter().map(|x| c * x).collect(),
        }
    }

    /// `self + c·other`, in place.
    pub fn axpy(&mut self, c: f64, other: &Self) {
        assert_eq!(self.n, other.n, "dimension mismatch in axpy");
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += c * b;
        }
    }

    /// Coordinates scaled so that the Euclidean dot product equals [`inner`].
    pub fn orthonormal_coords(&self) -> Vec<f64> {
        let n = self.n;
        self.coords
            .iter()
            .enumerate()
            .map(|(i, x)| if i < n { *x } else { x * std::f64::consts::SQRT_2 })
            .collect()
    }

    pub fn from_orthonormal_coords(n: usize, u: &[f64]) -> Result<Self> {
        check_dim(n)?;
        expect_dim(n * n, u.len())?;
        let coords = u
            .iter()
            .enumerate()
            .map(|(i, x)| if i < n { *x } else { x * std::f64::consts::FRAC_1_SQRT_2 })
            .collect();
        Ok(Self { n, coords })
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for HermitianForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianForm(n={}, [", self.n)?;
        for j in 0..self.n {
            if j > 0 {
                write!(f, "; ")?;
            }
            for k in 0..self.n {
                let z = self.get(j, k);
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}{:+}i", z.re, z.im)?;
            }
        }
        write!(f, "])")
    }
}

impl Add<&HermitianForm> for &HermitianForm {
    type Output = HermitianForm;
    fn add(self, rhs: &HermitianForm) -> HermitianForm {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Add for HermitianForm {
    type Output = HermitianForm;
    fn add(mut self, rhs: HermitianForm) -> HermitianForm {
        self.axpy(1.0, &rhs);
        self
    }
}

impl AddAssign<&HermitianForm> for HermitianForm {
    fn add_assign(&mut self, rhs: &HermitianForm) {
        self.axpy(1.0, rhs);
    }
}

impl Sub<&HermitianForm> for &HermitianForm {
    type Output = HermitianForm;
    fn sub(self, rhs: &HermitianForm) -> HermitianForm {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Sub for HermitianForm {
    type Output = HermitianForm;
    fn sub(mut self, rhs: HermitianForm) -> HermitianForm {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl Neg for HermitianForm {
    type Output = HermitianForm;
    fn neg(self) -> HermitianForm {
        self.scaled(-1.0)
    }
}

impl Mul<&HermitianForm> for f64 {
    type Output = HermitianForm;
    fn mul(self, rhs: &HermitianForm) -> HermitianForm {
        rhs.scaled(self)
    }
}

impl Mul<HermitianForm> for f64 {
    type Output = HermitianForm;
    fn mul(self, rhs: HermitianForm) -> HermitianForm {
        rhs.scaled(self)
    }
}

/// The ordered real basis of `Herm(n)`.
///
/// Order: `E_jj` for ascending `j`, then for each pair `j < k` in
/// lexicographic order the symmetric unit `E_jk + E_kj` followed by the
/// antisymmetric unit `i(E_jk − E_kj)`.
#[derive(Clone, Debug)]
pub struct RealBasis {
    n: usize,
    elements: Vec<HermitianForm>,
}

impl RealBasis {
    pub fn new(n: usize) -> Result<Self> {
        check_dim(n)?;
        let elements = (0..n * n)
            .map(|i| {
                let mut coords = vec![0.0; n * n];
                coords[i] = 1.0;
                HermitianForm { n, coords }
            })
            .collect();
        Ok(Self { n, elements })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianForm] {
        &self.elements
    }

    /// `inner(e_i, e_i)`: 1 on the diagonal units, 2 on the off-diagonal ones.
    pub fn weight(&self, i: usize) -> f64 {
        if i < self.n {
            1.0
        } else {
            2.0
        }
    }

    /// Short human-readable name: `D1`, `S12`, `A12` (1-based indices).
    pub fn label(&self, i: usize) -> String {
        let n = self.n;
        if i < n {
            return format!("D{}", i + 1);
        }
        let p = (i - n) / 2;
        let mut count = 0;
        for j in 0..n {
            for k in j + 1..n {
                if count == p {
                    let kind = if (i - n) % 2 == 0 { 'S' } else { 'A' };
                    return format!("{kind}{}{}", j + 1, k + 1);
                }
                count += 1;
            }
        }
        unreachable!("basis index {i} out of range")
    }

    pub fn combine(&self, coords: &[f64]) -> Result<HermitianForm> {
        HermitianForm::from_coords(self.n, coords.to_vec())
    }
}

fn inner_unchecked(a: &HermitianForm, b: &HermitianForm) -> f64 {
    let n = a.n;
    let diag: f64 = a.coords[..n].iter().zip(&b.coords[..n]).map(|(x, y)| x * y).sum();
    let off: f64 = a.coords[n..].iter().zip(&b.coords[n..]).map(|(x, y)| x * y).sum();
    diag + 2.0 * off
}

/// Real Frobenius pairing `Re tr(A·B)`.
pub fn inner(a: &HermitianForm, b: &HermitianForm) -> Result<f64> {
    expect_dim(a.n, b.n)?;
    Ok(inner_unchecked(a, b))
}

/// Returns `c` with `A ≈ c·B` when `‖A − cB‖_F ≤ tol·(‖A‖_F + ‖B‖_F)`.
pub fn proportionality(a: &HermitianForm, b: &HermitianForm, tol: f64) -> Result<Option<f64>> {
    expect_dim(a.n, b.n)?;
    let bb = inner_unchecked(b, b);
    let nb = bb.sqrt();
    if nb <= 1e-14 * b.n as f64 {
        return Err(GhxError::Degenerate(format!(
            "reference matrix is numerically zero (norm {nb:e})"
        )));
    }
    let c = inner_unchecked(a, b) / bb;
    let mut residual = a.clone();
    residual.axpy(-c, b);
    let bound = tol * (a.frobenius_norm() + nb);
    Ok((residual.frobenius_norm() <= bound).then_some(c))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    if n == 2 {
        // closed form; exact enough and much cheaper than the QR sweep
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)].norm();
        let mean = 0.5 * (a + d);
        let rad = (0.5 * (a - d)).hypot(b);
        return vec![mean - rad, mean + rad];
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Positive-definite Hermitian reference `G` with its factor `G = L·L†`.
#[derive(Clone, Debug)]
pub struct MetricPencil {
    g: HermitianForm,
    factor: DMatrix<Complex64>,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
}

impl MetricPencil {
    pub fn new(g: HermitianForm) -> Result<Self> {
        check_dim(g.n)?;
        if !g.is_finite() {
            return Err(GhxError::Numerical("metric has non-finite entries".into()));
        }
        let gm = g.to_matrix();
        let ev = hermitian_eigenvalues(&gm);
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo <= 0.0 {
            return Err(GhxError::NotPositiveDefinite { min_eigenvalue: lo });
        }
        let ratio = hi / lo;
        if ratio > MAX_CONDITION {
            return Err(GhxError::IllConditioned {
                ratio,
                limit: MAX_CONDITION,
            });
        }
        let chol = nalgebra::Cholesky::new(gm.clone()).ok_or(GhxError::NotPositiveDefinite {
            min_eigenvalue: lo,
        })?;
        let factor = chol.l();
        let recon = (&factor * factor.adjoint() - &gm).norm();
        if recon > 1e-12 * gm.norm() {
            return Err(GhxError::Numerical(format!(
                "Cholesky reconstruction error {recon:e} too large"
            )));
        }
        Ok(Self {
            g,
            factor,
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(HermitianForm::identity(n)).expect("identity is a valid metric")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.g.n
    }

    /// The metric `G` itself.
    pub fn metric(&self) -> &HermitianForm {
        &self.g
    }

    /// Lower-triangular `L` with `G = L·L†`.
    pub fn factor(&self) -> &DMatrix<Complex64> {
        &self.factor
    }

    pub fn condition_ratio(&self) -> f64 {
        self.max_eigenvalue / self.min_eigenvalue
    }

    /// `L⁻¹·A·L⁻†`, Hermitian up to rounding (re-symmetrized).
    pub fn reduce(&self, a: &HermitianForm) -> Result<DMatrix<Complex64>> {
        expect_dim(self.dim(), a.n)?;
        Ok(self.reduce_matrix(&a.to_matrix()))
    }

    pub(crate) fn reduce_matrix(&self, a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let x = self
            .factor
            .solve_lower_triangular(a)
            .expect("Cholesky factor is nonsingular");
        let y = self
            .factor
            .solve_lower_triangular(&x.adjoint())
            .expect("Cholesky factor is nonsingular");
        (&y + y.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Maps a matrix from the `G`-orthonormal frame back: `L·M·L†`.
    pub fn unreduce(&self, m: &DMatrix<Complex64>) -> Result<HermitianForm> {
        expect_dim(self.dim(), m.nrows())?;
        let out = &self.factor * m * self.factor.adjoint();
        HermitianForm::from_matrix(&out, 1e-8)
    }
}

/// Roots of `det(A − λG) = 0`, ascending.
pub fn pencil_eigenvalues(a: &HermitianForm, g: &MetricPencil) -> Result<Vec<f64>> {
    let reduced = g.reduce(a)?;
    Ok(hermitian_eigenvalues(&reduced))
}

/// Real coordinate vector of `a` as an `nalgebra` vector.
pub fn coord_vector(a: &HermitianForm) -> DVector<f64> {
    DVector::from_column_slice(&a.coords)
}
