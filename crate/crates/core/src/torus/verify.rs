use rayon::prelude::*;
use serde::Serialize;

use super::{grid_mean, integral_pairing, laplacian_solve, ddc, FieldValues, FormField, ScalarField, TorusContext};
use crate::error::{GhxError, Result};
use crate::garding::{positive_representer, require_gamma};
use crate::herm::{coord_vector, expect_dim, inner, proportionality, HermitianForm, MetricPencil, DEFAULT_TOL};
use crate::hodge::gram_matrix;
use crate::sympoly::sigma;

/// End-to-end run of the primitive-negativity argument with a non-constant
/// representative `β + dd^cψ`.
#[derive(Clone, Debug, Serialize)]
pub struct TorusTheoremReport {
    pub n: usize,
    pub m: usize,
    pub grid: usize,
    /// The class after projection onto the primitive hyperplane.
    pub class: Vec<f64>,
    pub representer_min_eigenvalue: f64,
    /// `‖inner(H, dd^cφ) − f‖_∞` of the primitivizing solve.
    pub solver_residual: f64,
    /// `max_x |inner(H, β̂_φ(x))|`, relative to `‖H‖·max_x ‖β̂(x)‖`.
    pub primitivity_residual: f64,
    /// `max_x ‖dd^c(ψ + φ)(x)‖`, relative to `max_x ‖dd^cψ(x)‖`.
    pub exactness_residual: f64,
    pub max_pointwise_q: f64,
    /// Spectral scale of the Gram matrix times `(‖β‖ + max_x ‖dd^cψ(x)‖)²`.
    pub pointwise_scale: f64,
    pub pointwise_negative: bool,
    pub integrated_q: f64,
    pub constant_q: f64,
    pub integrated_matches: bool,
}

impl TorusTheoremReport {
    pub fn holds(&self) -> bool {
        self.primitivity_residual <= 1e-8 && self.pointwise_negative && self.integrated_matches
    }
}

fn pointwise_quadratic(values: &FieldValues, gram: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    let d = gram.nrows();
    // upper triangle, off-diagonal entries doubled, row-major
    let upper: Vec<f64> = (0..d)
        .flat_map(|i| (i..d).map(move |j| if i == j { gram[(i, i)] } else { 2.0 * gram[(i, j)] }))
        .collect();
    (0..values.points())
        .into_par_iter()
        .map_init(
            || vec![0.0; d],
            |c, p| {
                for (i, x) in c.iter_mut().enumerate() {
                    *x = values.plane(i)[p];
                }
                let mut rest = upper.as_slice();
                let mut total = 0.0;
                for i in 0..d {
                    let (row, tail) = rest.split_at(d - i);
                    total += c[i] * row.iter().zip(&c[i..]).map(|(g, x)| g * x).sum::<f64>();
                    rest = tail;
                }
                total
            },
        )
        .collect()
}

/// `alphas = (α_1, …, α_{m−1})` constant in `Γ_m`; `beta_class` is first
/// projected (Frobenius-orthogonally) onto the primitive hyperplane, then
/// perturbed by `dd^c noise` and re-primitivized by the Laplacian solve.
pub fn verify_theorem_a_torus(
    alphas: &[HermitianForm],
    g: &MetricPencil,
    beta_class: &HermitianForm,
    noise: &ScalarField,
    ctx: &TorusContext,
) -> Result<TorusTheoremReport> {
    run_theorem_a_torus(alphas, g, beta_class, noise, ctx).map(|run| run.report)
}

/// The report together with the correcting potential `φ`, so the
/// representative `β + dd^c(ψ + φ)` can be exported.
#[derive(Clone, Debug)]
pub struct TorusRun {
    pub report: TorusTheoremReport,
    pub correction: ScalarField,
}

pub fn run_theorem_a_torus(
    alphas: &[HermitianForm],
    g: &MetricPencil,
    beta_class: &HermitianForm,
    noise: &ScalarField,
    ctx: &TorusContext,
) -> Result<TorusRun> {
    if alphas.is_empty() {
        return Err(GhxError::ArgumentCount { expected: 1, found: 0 });
    }
    let n = ctx.dim();
    expect_dim(n, g.dim())?;
    expect_dim(n, beta_class.dim())?;
    let m = alphas.len() + 1;
    let rep = positive_representer(alphas, g)?;
    let h = &rep.h;
    let mut class = beta_class.clone();
    class.axpy(-inner(h, beta_class)? / inner(h, h)?, h);

    let quad = gram_matrix(&alphas[..m - 2], g, m)?;
    let gram = &quad.gram;

    let noise_ddc = ddc(noise, ctx)?;
    let f_values: Vec<f64> = noise_ddc.contract(h).into_iter().map(|v| -v).collect();
    let f = ScalarField::new(ctx, f_values)?;
    let sol = laplacian_solve(h, &f, ctx)?;
    let correction = ddc(&sol.phi, ctx)?;
    let exact_part = noise_ddc.add(&correction);
    let mut field = exact_part.clone();
    field.add_constant(&class);

    let noise_scale = noise_ddc.max_norm();
    let exactness_residual = if noise_scale > 0.0 {
        exact_part.max_norm() / noise_scale
    } else {
        0.0
    };
    let before_scale = class.frobenius_norm() + noise_scale;
    let h_norm = h.frobenius_norm();
    let primitivity_residual = field.contract(h).into_iter().fold(0.0, |m: f64, v| m.max(v.abs()))
        / (h_norm * before_scale).max(f64::MIN_POSITIVE);

    let q = pointwise_quadratic(&field, gram);
    let max_pointwise_q = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pointwise_scale = quad.spectral_scale * before_scale * before_scale;
    let integrated_q = grid_mean(&q);
    let cv = coord_vector(&class);
    let constant_q = cv.dot(&(gram * &cv));
    let report = TorusTheoremReport {
        n,
        m,
        grid: ctx.grid(),
        class: class.coords().to_vec(),
        representer_min_eigenvalue: rep.min_eigenvalue,
        solver_residual: sol.residual,
        primitivity_residual,
        exactness_residual,
        max_pointwise_q,
        pointwise_scale,
        pointwise_negative: max_pointwise_q <= 1e-8 * pointwise_scale,
        integrated_q,
        constant_q,
        integrated_matches: (integrated_q - constant_q).abs() <= 1e-6 * constant_q.abs() + 1e-12 * pointwise_scale,
    };
    Ok(TorusRun {
        report,
        correction: sol.phi,
    })
}

/// A proportional pair in the equality case, with the ratio predicted by the
/// Hessian-equation constants.
#[derive(Clone, Debug, Serialize)]
pub struct PairRatio {
    pub i: usize,
    pub j: usize,
    pub constant: Option<f64>,
    /// `(c_i / c_j)^{1/m}`.
    pub predicted: f64,
}

/// Constant representatives solve `σ_m(α̂_k) = c_k` exactly; the global
/// Gårding inequality then follows by integrating the pointwise one.
#[derive(Clone, Debug, Serialize)]
pub struct HessianCheck {
    pub m: usize,
    /// Pointwise `σ_m(α_k)`.
    pub sigmas: Vec<f64>,
    /// `c_k = ∫σ_m(α_k) / vol`.
    pub constants: Vec<f64>,
    pub volume: f64,
    pub normalization_error: f64,
    pub integrated: f64,
    /// `vol·∏ c_k^{1/m}`.
    pub bound: f64,
    pub gap: f64,
    pub holds: bool,
    pub equality: bool,
    pub ratios: Vec<PairRatio>,
}

pub fn hessian_constant_check(classes: &[HermitianForm], g: &MetricPencil, ctx: &TorusContext) -> Result<HessianCheck> {
    let m = classes.len();
    if m == 0 {
        return Err(GhxError::ArgumentCount { expected: 1, found: 0 });
    }
    expect_dim(ctx.dim(), g.dim())?;
    require_gamma(classes, g, m, DEFAULT_TOL)?;
    let volume = grid_mean(&vec![1.0; ctx.points()]);
    let sigmas = classes.iter().map(|a| sigma(a, g, m)).collect::<Result<Vec<_>>>()?;
    let constants = classes
        .iter()
        .map(|a| {
            let field = FormField::constant(ctx, a.clone());
            Ok(integral_pairing(&vec![field; m], g, ctx)? / volume)
        })
        .collect::<Result<Vec<_>>>()?;
    let normalization_error = sigmas
        .iter()
        .zip(&constants)
        .map(|(s, c)| (s - c).abs() / s.abs())
        .fold(0.0, f64::max);
    let fields: Vec<FormField> = classes.iter().map(|a| FormField::constant(ctx, a.clone())).collect();
    let integrated = integral_pairing(&fields, g, ctx)?;
    let inv = 1.0 / m as f64;
    let bound = volume * constants.iter().map(|c| c.powf(inv)).product::<f64>();
    let gap = integrated - bound;
    let equality = gap <= 1e-7 * bound;
    let mut ratios = Vec::new();
    if equality {
        for i in 0..m {
            for j in i + 1..m {
                ratios.push(PairRatio {
                    i,
                    j,
                    constant: proportionality(&classes[i], &classes[j], 1e-4)?,
                    predicted: (constants[i] / constants[j]).powf(inv),
                });
            }
        }
    }
    Ok(HessianCheck {
        m,
        sigmas,
        constants,
        volume,
        normalization_error,
        integrated,
        bound,
        gap,
        holds: gap >= -1e-9 * bound,
        equality,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_hermitian, stream};

    #[test]
    fn constant_primitive_class() {
        let ctx = TorusContext::new(2, 8).unwrap();
        let g = MetricPencil::identity(2);
        let beta = HermitianForm::diag(&[1.0, -1.0]);
        let r = verify_theorem_a_torus(&[HermitianForm::identity(2)], &g, &beta, &ScalarField::zeros(&ctx), &ctx).unwrap();
        assert_eq!(r.max_pointwise_q, -1.0);
        assert_eq!(r.integrated_q, -1.0);
        assert!(r.holds());
    }

    #[test]
    fn zero_class_recovers_exact_potential() {
        let ctx = TorusContext::new(2, 16).unwrap();
        let g = MetricPencil::identity(2);
        let psi = ScalarField::random_band_limited(&ctx, &mut stream(9, 0), 8, 0.1);
        let r = verify_theorem_a_torus(&[HermitianForm::diag(&[1.0, 2.0])], &g, &HermitianForm::zeros(2), &psi, &ctx).unwrap();
        assert!(r.exactness_residual < 1e-8, "{}", r.exactness_residual);
        assert!(r.integrated_q.abs() < 1e-12);
        assert!(r.holds());
    }

    #[test]
    fn noisy_class_n3() {
        let ctx = TorusContext::new(3, 8).unwrap();
        let g = MetricPencil::identity(3);
        let beta = random_hermitian(&mut stream(4, 0), 3);
        let psi = ScalarField::random_band_limited(&ctx, &mut stream(4, 1), 10, 0.02);
        let r = verify_theorem_a_torus(&[HermitianForm::diag(&[3.0, 3.0, -1.0])], &g, &beta, &psi, &ctx).unwrap();
        assert!(r.integrated_q < 0.0 && r.holds(), "{r:?}");
    }

    #[test]
    fn hessian_examples() {
        let ctx = TorusContext::new(2, 8).unwrap();
        let g = MetricPencil::identity(2);
        let r = hessian_constant_check(&[HermitianForm::diag(&[1.0, 2.0]), HermitianForm::identity(2)], &g, &ctx).unwrap();
        assert!((r.integrated - 1.5).abs() < 1e-15);
        assert!((r.bound - 2f64.sqrt()).abs() < 1e-15);
        assert!(r.holds && !r.equality);

        let i3 = MetricPencil::identity(3);
        let ctx3 = TorusContext::new(3, 4).unwrap();
        let r = hessian_constant_check(&vec![HermitianForm::identity(3); 2], &i3, &ctx3).unwrap();
        assert_eq!(r.constants, vec![3.0, 3.0]);
        assert!(r.equality && r.normalization_error == 0.0);

        let a = HermitianForm::diag(&[1.0, 2.0]);
        let r = hessian_constant_check(&[a.scaled(3.0), a], &g, &ctx).unwrap();
        assert!(r.equality);
        let pr = &r.ratios[0];
        assert!((pr.constant.unwrap() - pr.predicted).abs() < 1e-12);
    }
}
