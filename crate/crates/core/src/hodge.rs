//! The mixed Hodge-index form `Q(β, γ) = D(Ω, β, γ)` with
//! `Ω = (α_1, …, α_{m−2})` on `Herm(n)`: its Gram matrix and signature, the
//! primitive hyperplane cut out by `γ ↦ D(Ω, α_{m−1}, γ)`, negativity there,
//! and the consequences (reverse Cauchy–Schwarz, 2×2 minors, log-concavity).
//!
//! Everything is real: `Herm(n)` has real dimension `n²`, and negativity on
//! complex classes follows by splitting into real and imaginary parts.
//!
//! On the torus model, `Q` is the intersection pairing composed with the map
//! `β ↦ ω^{n−m}·Ω·β` into `H^{n−1,n−1}`, so a nonsingular Gram matrix is the
//! same as that map being injective, hence an isomorphism by dimension count.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GhxError, Result};
use crate::garding::{positive_representer, require_gamma};
use crate::herm::{coord_vector, expect_dim, inner, proportionality, HermitianForm, MetricPencil, RealBasis, DEFAULT_TOL};
use crate::json::matrix_rows;
use crate::sympoly::{binomial, check_degree, mixed_sigma, sigma, MixedContext, PolarForm};

/// Eigenvalues within this fraction of the spectral scale count as zero.
pub const SIGNATURE_ZERO_TOL: f64 = 1e-8;
/// Restricted eigenvalues must lie below `−NEGATIVITY_TOL·scale`.
pub const NEGATIVITY_TOL: f64 = 1e-10;
/// Residual bound for primitivity of returned basis vectors and decompositions.
pub const PRIMITIVE_TOL: f64 = 1e-10;
/// Residual bound for user-supplied primitive inputs.
pub const INPUT_PRIMITIVE_TOL: f64 = 1e-8;
/// The Gram matrix is nonsingular when `min |λ| > NONSINGULAR_TOL·scale`.
pub const NONSINGULAR_TOL: f64 = 1e-8;
/// Slack of the inequality checks, relative to the natural scale.
pub const INEQUALITY_TOL: f64 = 1e-9;
/// A log-concavity step counts as equality when its gap is below this
/// fraction of `a_k²`.
pub const EQUALITY_TOL: f64 = 1e-7;
/// Tolerance handed to `proportionality` for the equality diagnostics.
pub const PROPORTIONAL_TOL: f64 = 1e-4;

/// Serialized as the triple `[plus, zero, minus]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub plus: usize,
    pub zero: usize,
    pub minus: usize,
}

impl Signature {
    /// `(1, 0, d − 1)`.
    pub fn lorentzian(d: usize) -> Self {
        Self {
            plus: 1,
            zero: 0,
            minus: d - 1,
        }
    }

    /// Counts signs of `eigenvalues` with a dead zone of `tol·max|λ|`.
    pub fn of(eigenvalues: &[f64], tol: f64) -> Self {
        let scale = eigenvalues.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        let cut = tol * scale;
        let mut s = Self {
            plus: 0,
            zero: 0,
            minus: 0,
        };
        for &x in eigenvalues {
            if x > cut {
                s.plus += 1;
            } else if x < -cut {
                s.minus += 1;
            } else {
                s.zero += 1;
            }
        }
        s
    }
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.plus, self.zero, self.minus).serialize(s)
    }
}

/// `γ = (γ − c·α_{m−1}) + c·α_{m−1}` with the first part primitive.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub constant: f64,
    /// `|D(Ω, α_{m−1}, γ − cα_{m−1})|`, relative to `‖H‖·(‖γ‖ + |c|·‖α_{m−1}‖)`.
    pub residual: f64,
    pub primitive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadraticReport {
    pub n: usize,
    /// Labels of the [`RealBasis`] elements indexing `gram`.
    pub basis: Vec<String>,
    #[serde(serialize_with = "matrix_rows")]
    pub gram: DMatrix<f64>,
    /// Eigenvalues of `gram`, ascending.
    pub eigenvalues: Vec<f64>,
    pub signature: Signature,
    /// Some eigenvalue fell inside the zero dead zone.
    pub indeterminate: bool,
    /// Largest `|eigenvalue|`.
    pub spectral_scale: f64,
    pub nonsingular: bool,
    /// Representer of the primitivity functional, in basis coordinates.
    pub functional: Vec<f64>,
    /// Frobenius-orthonormal basis of the primitive hyperplane, in basis
    /// coordinates.
    pub primitive_basis: Vec<Vec<f64>>,
    /// Largest relative value of the functional on `primitive_basis`.
    pub primitivity_residual: f64,
    /// Eigenvalues of `Q` restricted to the primitive hyperplane, ascending.
    pub restricted_spectrum: Vec<f64>,
    pub negative_definite: Option<bool>,
    /// `Q(α_{m−1}, α_{m−1})`.
    pub volume: Option<f64>,
    pub decomposition: Option<Decomposition>,
}

impl QuadraticReport {
    /// A report holding only the Gram matrix and its signature.
    pub fn from_gram(n: usize, gram: DMatrix<f64>) -> Result<Self> {
        let basis = RealBasis::new(n)?;
        expect_dim(n * n, gram.nrows())?;
        expect_dim(n * n, gram.ncols())?;
        let asym = (&gram - gram.transpose()).norm();
        if asym > 1e-12 * gram.norm() {
            return Err(GhxError::Precondition(format!(
                "Gram matrix is not symmetric (asymmetry {asym:e})"
            )));
        }
        let mut eigenvalues: Vec<f64> = SymmetricEigen::new(gram.clone()).eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        let signature = Signature::of(&eigenvalues, SIGNATURE_ZERO_TOL);
        let spectral_scale = eigenvalues.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
        let smallest = eigenvalues.iter().fold(f64::INFINITY, |m: f64, x| m.min(x.abs()));
        Ok(Self {
            n,
            basis: (0..basis.len()).map(|i| basis.label(i)).collect(),
            gram,
            eigenvalues,
            signature,
            indeterminate: signature.zero > 0,
            spectral_scale,
            nonsingular: smallest > NONSINGULAR_TOL * spectral_scale,
            functional: Vec::new(),
            primitive_basis: Vec::new(),
            primitivity_residual: 0.0,
            restricted_spectrum: Vec::new(),
            negative_definite: None,
            volume: None,
            decomposition: None,
        })
    }

    /// `Q(x, y)` through the Gram matrix.
    pub fn pairing(&self, x: &HermitianForm, y: &HermitianForm) -> Result<f64> {
        expect_dim(self.n, x.dim())?;
        expect_dim(self.n, y.dim())?;
        Ok(coord_vector(x).dot(&(&self.gram * coord_vector(y))))
    }

    /// Every verdict that was computed came out as the theory predicts.
    pub fn holds(&self) -> bool {
        quadratic_hyperbolicity(self)
            && self.nonsingular
            && self.negative_definite != Some(false)
            && self.volume.map_or(true, |v| v > 0.0)
            && self.decomposition.as_ref().map_or(true, |d| d.primitive)
    }
}

/// Gram matrix of `(e_i, e_j) ↦ D(fixed…, e_i, e_j)` over the basis. Entries
/// are independent, so they are computed in parallel and placed by index.
fn assemble_gram(ctx: &MixedContext) -> Result<DMatrix<f64>> {
    debug_assert_eq!(ctx.free_degree(), 2);
    let n = ctx.dim();
    let basis = RealBasis::new(n)?;
    let reduced = basis
        .elements()
        .iter()
        .map(|e| ctx.metric().reduce(e))
        .collect::<Result<Vec<_>>>()?;
    let d = n * n;
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| ctx.eval_reduced(&[&reduced[i], &reduced[j]]))
        .collect();
    let mut gram = DMatrix::zeros(d, d);
    for (&(i, j), v) in pairs.iter().zip(values) {
        gram[(i, j)] = v;
        gram[(j, i)] = v;
    }
    Ok(gram)
}

fn check_slots(omega: &[HermitianForm], m: usize, n: usize) -> Result<()> {
    if m < 2 {
        return Err(GhxError::DegreeOutOfRange { degree: m, n });
    }
    check_degree(m, n)?;
    if omega.len() != m - 2 {
        return Err(GhxError::ArgumentCount {
            expected: m - 2,
            found: omega.len(),
        });
    }
    Ok(())
}

/// Gram matrix and signature of `Q` for `Ω = omega` (`m − 2` slots in `Γ_m`).
pub fn gram_matrix(omega: &[HermitianForm], g: &MetricPencil, m: usize) -> Result<QuadraticReport> {
    check_slots(omega, m, g.dim())?;
    require_gamma(omega, g, m, DEFAULT_TOL)?;
    let ctx = MixedContext::new(m, g, omega.to_vec())?;
    QuadraticReport::from_gram(g.dim(), assemble_gram(&ctx)?)
}

/// A real quadratic form is complete and hyperbolic exactly when it is
/// nondegenerate with signature `(1, 0, d − 1)`.
pub fn quadratic_hyperbolicity(report: &QuadraticReport) -> bool {
    !report.indeterminate && report.signature == Signature::lorentzian(report.n * report.n)
}

/// The hyperplane `{γ : D(Ω, α_{m−1}, γ) = 0}`.
#[derive(Clone, Debug)]
pub struct PrimitiveBasis {
    /// `H` with `D(Ω, α_{m−1}, γ) = inner(H, γ)`.
    pub functional: HermitianForm,
    /// Frobenius-orthonormal, `n² − 1` elements.
    pub vectors: Vec<HermitianForm>,
}

impl PrimitiveBasis {
    /// `|inner(H, x)| / (‖H‖·‖x‖)`, zero for `x = 0`.
    pub fn residual(&self, x: &HermitianForm) -> Result<f64> {
        let scale = self.functional.frobenius_norm() * x.frobenius_norm();
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok(inner(&self.functional, x)?.abs() / scale)
    }

    pub fn max_residual(&self) -> f64 {
        self.vectors
            .iter()
            .map(|v| self.residual(v).expect("dimensions agree by construction"))
            .fold(0.0, f64::max)
    }

    /// Basis vectors as columns of basis coordinates.
    pub fn coordinate_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.vectors.iter().map(coord_vector).collect();
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the Frobenius complement of the positive representer
/// of `γ ↦ D(Ω, α_last, γ)`, from the Householder reflector that sends the
/// unit representer to a coordinate axis.
pub fn primitive_basis(
    omega: &[HermitianForm],
    alpha_last: &HermitianForm,
    g: &MetricPencil,
    m: usize,
) -> Result<PrimitiveBasis> {
    check_slots(omega, m, g.dim())?;
    let mut alphas = omega.to_vec();
    alphas.push(alpha_last.clone());
    let h = positive_representer(&alphas, g)?.h;
    let n = g.dim();
    let d = n * n;
    let u = DVector::from_vec(h.orthonormal_coords());
    let norm = u.norm();
    if norm == 0.0 {
        return Err(GhxError::Degenerate("primitivity functional vanishes".into()));
    }
    let u = u / norm;
    // v = u + sign(u_0)·e_0 avoids cancellation
    let mut v = u.clone();
    v[0] += if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let vv = v.dot(&v);
    let vectors = (1..d)
        .map(|k| {
            let mut col = -(2.0 * v[k] / vv) * &v;
            col[k] += 1.0;
            HermitianForm::from_orthonormal_coords(n, col.as_slice())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrimitiveBasis { functional: h, vectors })
}

/// Full check of the mixed Hodge-index statement for `α_1, …, α_{m−1} ∈ Γ_m`
/// (`m = alphas.len() + 1`): Lorentzian signature, negativity on the primitive
/// hyperplane, the decomposition of `query` (when given), and nonsingularity.
pub fn verify_theorem_a(
    alphas: &[HermitianForm],
    g: &MetricPencil,
    query: Option<&HermitianForm>,
) -> Result<QuadraticReport> {
    if alphas.is_empty() {
        return Err(GhxError::ArgumentCount { expected: 1, found: 0 });
    }
    let m = alphas.len() + 1;
    check_degree(m, g.dim())?;
    require_gamma(alphas, g, m, DEFAULT_TOL)?;
    let (omega, last) = alphas.split_at(m - 2);
    let last = &last[0];
    let ctx = MixedContext::new(m, g, omega.to_vec())?;
    let mut report = QuadraticReport::from_gram(g.dim(), assemble_gram(&ctx)?)?;

    let prim = primitive_basis(omega, last, g, m)?;
    let b = prim.coordinate_matrix();
    let restricted = b.transpose() * &report.gram * &b;
    let restricted = (&restricted + restricted.transpose()) * 0.5;
    let mut spectrum: Vec<f64> = SymmetricEigen::new(restricted).eigenvalues.iter().copied().collect();
    spectrum.sort_by(f64::total_cmp);
    let top = spectrum.last().copied().unwrap_or(f64::NEG_INFINITY);
    report.negative_definite = Some(top < -NEGATIVITY_TOL * report.spectral_scale);
    report.restricted_spectrum = spectrum;
    report.primitivity_residual = prim.max_residual();
    report.primitive_basis = prim.vectors.iter().map(|v| v.coords().to_vec()).collect();
    report.functional = prim.functional.coords().to_vec();

    let volume = mixed_sigma(&ctx, &[last.clone(), last.clone()])?;
    report.volume = Some(volume);
    if let Some(gamma) = query {
        expect_dim(g.dim(), gamma.dim())?;
        let constant = mixed_sigma(&ctx, &[gamma.clone(), last.clone()])? / volume;
        let mut rest = gamma.clone();
        rest.axpy(-constant, last);
        let scale = prim.functional.frobenius_norm()
            * (gamma.frobenius_norm() + constant.abs() * last.frobenius_norm());
        let residual = if scale > 0.0 {
            inner(&prim.functional, &rest)?.abs() / scale
        } else {
            0.0
        };
        report.decomposition = Some(Decomposition {
            constant,
            residual,
            primitive: residual <= PRIMITIVE_TOL,
        });
    }
    Ok(report)
}

/// `D(β, α^{m−1})`, `D(β², α^{m−2})` and the reverse Cauchy–Schwarz gap
/// `D(β, α^{m−1})² − D(β², α^{m−2})·σ_m(α)`.
#[derive(Clone, Debug, Serialize)]
pub struct HodgeCorollary {
    pub pairing: f64,
    pub q_value: f64,
    pub volume: f64,
    pub gap: f64,
    pub scale: f64,
    /// `gap ≥ −1e−9·scale`.
    pub holds: bool,
}

pub fn corollary_hodge_index(
    alpha: &HermitianForm,
    beta: &HermitianForm,
    g: &MetricPencil,
    m: usize,
) -> Result<HodgeCorollary> {
    let n = g.dim();
    check_slots(&vec![alpha.clone(); m.saturating_sub(2)], m, n)?;
    expect_dim(n, beta.dim())?;
    require_gamma(std::slice::from_ref(alpha), g, m, DEFAULT_TOL)?;
    let ctx = MixedContext::new(m, g, vec![alpha.clone(); m - 2])?;
    let q_value = mixed_sigma(&ctx, &[beta.clone(), beta.clone()])?;
    let pairing = mixed_sigma(&ctx, &[beta.clone(), alpha.clone()])?;
    let volume = sigma(alpha, g, m)?;
    let base = binomial(n, m) * g.reduce(beta)?.norm() * g.reduce(alpha)?.norm().powi(m as i32 - 1);
    let scale = base * base;
    let gap = pairing * pairing - q_value * volume;
    Ok(HodgeCorollary {
        pairing,
        q_value,
        volume,
        gap,
        scale,
        holds: gap >= -INEQUALITY_TOL * scale,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Minor {
    pub matrix: [[f64; 2]; 2],
    /// Ascending.
    pub eigenvalues: [f64; 2],
    pub determinant: f64,
    pub scale: f64,
    pub negative_semidefinite: bool,
    pub degenerate: bool,
    pub proportional: bool,
}

impl Minor {
    /// Degenerate exactly when proportional.
    pub fn consistent(&self) -> bool {
        self.degenerate == self.proportional
    }
}

fn proportional_or_zero(a: &HermitianForm, b: &HermitianForm, tol: f64) -> Result<bool> {
    match proportionality(a, b, tol) {
        Ok(c) => Ok(c.is_some()),
        Err(GhxError::Degenerate(_)) => Ok(true),
        Err(e) => Err(e),
    }
}

/// The matrix `[Q(β_i, β_j)]` for primitive `β_1, β_2`, where primitivity is
/// relative to `alphas = (Ω…, α_{m−1})`.
pub fn minor_2x2(
    b1: &HermitianForm,
    b2: &HermitianForm,
    alphas: &[HermitianForm],
    g: &MetricPencil,
) -> Result<Minor> {
    if alphas.is_empty() {
        return Err(GhxError::ArgumentCount { expected: 1, found: 0 });
    }
    let m = alphas.len() + 1;
    let (omega, last) = alphas.split_at(m - 2);
    let prim = primitive_basis(omega, &last[0], g, m)?;
    for (index, b) in [b1, b2].into_iter().enumerate() {
        expect_dim(g.dim(), b.dim())?;
        let residual = prim.residual(b)?;
        if residual > INPUT_PRIMITIVE_TOL {
            return Err(GhxError::NotPrimitive { index, residual });
        }
    }
    let ctx = MixedContext::new(m, g, omega.to_vec())?;
    let q11 = mixed_sigma(&ctx, &[b1.clone(), b1.clone()])?;
    let q12 = mixed_sigma(&ctx, &[b1.clone(), b2.clone()])?;
    let q22 = mixed_sigma(&ctx, &[b2.clone(), b2.clone()])?;
    let scale = ctx.scale(&[b1.clone(), b2.clone()])?;
    let half_trace = 0.5 * (q11 + q22);
    let radius = (0.25 * (q11 - q22).powi(2) + q12 * q12).sqrt();
    let eigenvalues = [half_trace - radius, half_trace + radius];
    let determinant = q11 * q22 - q12 * q12;
    Ok(Minor {
        matrix: [[q11, q12], [q12, q22]],
        eigenvalues,
        determinant,
        scale,
        negative_semidefinite: eigenvalues[1] <= INEQUALITY_TOL * scale,
        degenerate: determinant <= 1e-8 * scale * scale,
        proportional: proportional_or_zero(b1, b2, PROPORTIONAL_TOL)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LogConcavityStep {
    pub k: usize,
    /// `a_k² − a_{k+1}·a_{k−1}`.
    pub gap: f64,
    pub holds: bool,
    pub equality: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogConcavity {
    /// `a_k = D(α^{(k)}, β^{(m−k)})`, `k = 0..=m`.
    pub sequence: Vec<f64>,
    pub steps: Vec<LogConcavityStep>,
    pub proportional: bool,
}

impl LogConcavity {
    pub fn holds(&self) -> bool {
        self.steps.iter().all(|s| s.holds)
    }

    /// Some step is an equality exactly when `α, β` are proportional.
    pub fn consistent(&self) -> bool {
        self.steps.is_empty() || self.steps.iter().any(|s| s.equality) == self.proportional
    }
}

pub fn log_concavity(alpha: &HermitianForm, beta: &HermitianForm, g: &MetricPencil, m: usize) -> Result<LogConcavity> {
    check_degree(m, g.dim())?;
    require_gamma(&[alpha.clone(), beta.clone()], g, m, DEFAULT_TOL)?;
    let ctx = MixedContext::sigma_m(g, m)?;
    let sequence = (0..=m)
        .map(|k| {
            let mut args = vec![alpha.clone(); k];
            args.extend(std::iter::repeat_n(beta.clone(), m - k));
            mixed_sigma(&ctx, &args)
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = (1..m)
        .map(|k| {
            let ak2 = sequence[k] * sequence[k];
            let gap = ak2 - sequence[k + 1] * sequence[k - 1];
            LogConcavityStep {
                k,
                gap,
                holds: gap >= -INEQUALITY_TOL * ak2,
                equality: gap <= EQUALITY_TOL * ak2,
            }
        })
        .collect();
    Ok(LogConcavity {
        sequence,
        steps,
        proportional: proportional_or_zero(alpha, beta, PROPORTIONAL_TOL)?,
    })
}
