//! Gårding's inequality for the polarized `σ_m`, strict positivity of mixed
//! values on the closed cone, the positive representer of
//! `D(A_1, …, A_{m−1}, ·)`, and the concavity profile of `σ_m^{1/m}` along a line.

use serde::Serialize;

use crate::error::{GhxError, Result};
use crate::herm::{expect_dim, hermitian_eigenvalues, proportionality, HermitianForm, MetricPencil, RealBasis, DEFAULT_TOL};
use crate::sympoly::{in_gamma_m, mixed_sigma, sigma, MixedContext};

/// Thresholds for [`garding_gap`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GardingOptions {
    /// Cone-membership tolerance for the preconditions.
    pub cone_tol: f64,
    /// The inequality is violated when `gap < −assert_tol·rhs`.
    pub assert_tol: f64,
    /// The equality witness is produced when `gap ≤ equality_tol·rhs`.
    pub equality_tol: f64,
    /// Tolerance handed to `proportionality` for the witness constants.
    pub proportional_tol: f64,
}

impl Default for GardingOptions {
    fn default() -> Self {
        Self {
            cone_tol: DEFAULT_TOL,
            assert_tol: 1e-9,
            equality_tol: 1e-7,
            proportional_tol: 1e-3,
        }
    }
}

/// `B_i ≈ c·B_j`, or `None` when the pair is not proportional.
#[derive(Clone, Debug, Serialize)]
pub struct PairConstant {
    pub i: usize,
    pub j: usize,
    pub constant: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GardingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// `gap / rhs`.
    pub relative_gap: f64,
    /// `gap ≥ −assert_tol·rhs`.
    pub holds: bool,
    pub equality_witness: Option<Vec<PairConstant>>,
}

/// Checks every argument lies in `Γ_m`, naming the first offender.
pub fn require_gamma(args: &[HermitianForm], g: &MetricPencil, m: usize, tol: f64) -> Result<()> {
    for (index, b) in args.iter().enumerate() {
        expect_dim(g.dim(), b.dim())?;
        let mem = in_gamma_m(b, g, m, tol)?;
        if let Some((degree, margin)) = mem.first_failure(tol) {
            return Err(GhxError::OutsideCone {
                index,
                m,
                degree,
                margin,
            });
        }
    }
    Ok(())
}

/// `D(B_1, …, B_m) ≥ ∏ σ_m(B_i)^{1/m}` for `B_i ∈ Γ_m`, with the equality
/// case diagnosed through pairwise proportionality.
pub fn garding_gap(bs: &[HermitianForm], g: &MetricPencil, opts: &GardingOptions) -> Result<GardingReport> {
    let m = bs.len();
    if m == 0 {
        return Err(GhxError::ArgumentCount { expected: 1, found: 0 });
    }
    require_gamma(bs, g, m, opts.cone_tol)?;
    let ctx = MixedContext::sigma_m(g, m)?;
    let lhs = mixed_sigma(&ctx, bs)?;
    let rhs = bs
        .iter()
        .map(|b| Ok(sigma(b, g, m)?.powf(1.0 / m as f64)))
        .product::<Result<f64>>()?;
    let gap = lhs - rhs;
    let relative_gap = gap / rhs;
    let equality_witness = if gap <= opts.equality_tol * rhs {
        let mut pairs = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                pairs.push(PairConstant {
                    i,
                    j,
                    constant: proportionality(&bs[i], &bs[j], opts.proportional_tol)?,
                });
            }
        }
        Some(pairs)
    } else {
        None
    };
    Ok(GardingReport {
        lhs,
        rhs,
        gap,
        relative_gap,
        holds: gap >= -opts.assert_tol * rhs,
        equality_witness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MixedPositivity {
    pub value: f64,
    pub positive: bool,
}

/// `D(x_1, x_2, …, x_m)` with `x_1` in the closed cone (nonzero) and the
/// rest strictly inside `Γ_m`; the value is strictly positive.
pub fn mixed_positivity(
    x1: &HermitianForm,
    rest: &[HermitianForm],
    g: &MetricPencil,
    tol: f64,
) -> Result<MixedPositivity> {
    let m = rest.len() + 1;
    let ctx = MixedContext::sigma_m(g, m)?;
    expect_dim(g.dim(), x1.dim())?;
    if x1.frobenius_norm() <= 1e-14 * g.dim() as f64 {
        return Err(GhxError::Precondition("x_1 must be nonzero".into()));
    }
    let closed = in_gamma_m(x1, g, m, tol)?;
    if let Some((degree, margin)) = closed.margins.iter().position(|&v| v < -tol).map(|i| (i + 1, closed.margins[i])) {
        return Err(GhxError::OutsideCone {
            index: 0,
            m,
            degree,
            margin,
        });
    }
    for (i, x) in rest.iter().enumerate() {
        require_gamma(std::slice::from_ref(x), g, m, tol).map_err(|e| match e {
            GhxError::OutsideCone { m, degree, margin, .. } => GhxError::OutsideCone {
                index: i + 1,
                m,
                degree,
                margin,
            },
            other => other,
        })?;
    }
    let mut args = Vec::with_capacity(m);
    args.push(x1.clone());
    args.extend_from_slice(rest);
    let value = mixed_sigma(&ctx, &args)?;
    Ok(MixedPositivity {
        value,
        positive: value > 0.0,
    })
}

/// The Hermitian `H` with `D(fixed…, β) = inner(H, β)` for a context with
/// exactly one free slot.
pub fn linear_representer(ctx: &MixedContext) -> Result<HermitianForm> {
    if ctx.free_degree() != 1 {
        return Err(GhxError::ArgumentCount {
            expected: ctx.degree() - 1,
            found: ctx.fixed().len(),
        });
    }
    let n = ctx.dim();
    let basis = RealBasis::new(n)?;
    let reduced = basis
        .elements()
        .iter()
        .map(|e| ctx.metric().reduce(e))
        .collect::<Result<Vec<_>>>()?;
    let coords = reduced
        .iter()
        .enumerate()
        .map(|(j, r)| ctx.eval_reduced(&[r]) / basis.weight(j))
        .collect();
    HermitianForm::from_coords(n, coords)
}

#[derive(Clone, Debug, Serialize)]
pub struct Representer {
    #[serde(skip)]
    pub h: HermitianForm,
    /// Smallest pencil eigenvalue of `(H, G)`; positive certifies that
    /// `β ↦ D(A_1, …, A_{m−1}, β)` is strictly positive on nonzero PSD `β`.
    pub min_eigenvalue: f64,
}

/// The representer of `β ↦ D(A_1, …, A_{m−1}, β)` for `A_i ∈ Γ_m`, `m = len + 1`.
pub fn positive_representer(alphas: &[HermitianForm], g: &MetricPencil) -> Result<Representer> {
    let m = alphas.len() + 1;
    let ctx = MixedContext::new(m, g, alphas.to_vec())?;
    require_gamma(alphas, g, m, DEFAULT_TOL)?;
    let h = linear_representer(&ctx)?;
    let min_eigenvalue = hermitian_eigenvalues(&g.reduce(&h)?)[0];
    Ok(Representer { h, min_eigenvalue })
}

/// One row of a concavity profile.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub t: f64,
    pub g: f64,
    pub g1: f64,
    pub g2: f64,
    pub fd_g1: f64,
    pub fd_g2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcavityProfile {
    pub rows: Vec<ProfileRow>,
    /// `g″ ≤ 1e−9·|g|` at every grid point.
    pub concave: bool,
    /// `g″ < 0` at every grid point.
    pub strictly_concave: bool,
    /// Largest `|fd − closed| / (|closed| + |g|)` over both derivatives.
    pub max_fd_error: f64,
}

/// Step of the finite-difference cross-check.
pub const PROFILE_FD_STEP: f64 = 1e-4;

/// `g(t) = σ_m(α + tβ)^{1/m}` with `g′`, `g″` from the closed forms
/// `g′ = σ^{1/m−1}·D(β, γ^{m−1})` and
/// `g″ = (m−1)·(σ^{1/m−1}·D(β², γ^{m−2}) − σ^{1/m−2}·D(β, γ^{m−1})²)`,
/// `γ = α + tβ`, each cross-checked against finite differences of `g`.
pub fn concavity_profile(
    alpha: &HermitianForm,
    beta: &HermitianForm,
    g: &MetricPencil,
    m: usize,
    t_grid: &[f64],
) -> Result<ConcavityProfile> {
    let ctx = MixedContext::sigma_m(g, m)?;
    require_gamma(&[alpha.clone(), beta.clone()], g, m, DEFAULT_TOL)?;
    if let Some(t) = t_grid.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(GhxError::Precondition(format!("grid point {t} outside [0, ∞)")));
    }
    let mf = m as f64;
    let gfun = |t: f64| -> Result<f64> {
        let mut gamma = alpha.clone();
        gamma.axpy(t, beta);
        Ok(sigma(&gamma, g, m)?.powf(1.0 / mf))
    };
    let h = PROFILE_FD_STEP;
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut max_fd_error: f64 = 0.0;
    for &t in t_grid {
        let mut gamma = alpha.clone();
        gamma.axpy(t, beta);
        let s = sigma(&gamma, g, m)?;
        let mut args1 = vec![gamma.clone(); m];
        args1[0] = beta.clone();
        let d1 = mixed_sigma(&ctx, &args1)?;
        let d2 = if m >= 2 {
            let mut args2 = vec![gamma.clone(); m];
            args2[0] = beta.clone();
            args2[1] = beta.clone();
            mixed_sigma(&ctx, &args2)?
        } else {
            0.0
        };
        let gv = s.powf(1.0 / mf);
        let g1 = s.powf(1.0 / mf - 1.0) * d1;
        let g2 = (mf - 1.0) * (s.powf(1.0 / mf - 1.0) * d2 - s.powf(1.0 / mf - 2.0) * d1 * d1);

        let (fd_g1, fd_g2) = if t >= h {
            let (gm, g0, gp) = (gfun(t - h)?, gv, gfun(t + h)?);
            ((gp - gm) / (2.0 * h), (gp - 2.0 * g0 + gm) / (h * h))
        } else {
            // sixth-order one-sided stencils; near the cone boundary g curves
            // too sharply for lower orders at this step
            let f = (0..8).map(|k| if k == 0 { Ok(gv) } else { gfun(t + k as f64 * h) }).collect::<Result<Vec<_>>>()?;
            let d1 = [-49.0 / 20.0, 6.0, -15.0 / 2.0, 20.0 / 3.0, -15.0 / 4.0, 6.0 / 5.0, -1.0 / 6.0];
            let d2 = [469.0 / 90.0, -223.0 / 10.0, 879.0 / 20.0, -949.0 / 18.0, 41.0, -201.0 / 10.0, 1019.0 / 180.0, -7.0 / 10.0];
            let dot = |c: &[f64]| c.iter().zip(&f).map(|(c, f)| c * f).sum::<f64>();
            (dot(&d1) / h, dot(&d2) / (h * h))
        };
        let scale = gv.abs();
        max_fd_error = max_fd_error
            .max((fd_g1 - g1).abs() / (g1.abs() + scale))
            .max((fd_g2 - g2).abs() / (g2.abs() + scale));
        rows.push(ProfileRow {
            t,
            g: gv,
            g1,
            g2,
            fd_g1,
            fd_g2,
        });
    }
    Ok(ConcavityProfile {
        concave: rows.iter().all(|r| r.g2 <= 1e-9 * r.g.abs()),
        strictly_concave: rows.iter().all(|r| r.g2 < 0.0),
        max_fd_error,
        rows,
    })
}

/// The surface inequality `D(A, B)² ≥ det A · det B` for 2×2 matrices.
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceReport {
    pub mixed: f64,
    pub det_a: f64,
    pub det_b: f64,
    /// `D(A, B)² − det A · det B`.
    pub gap: f64,
    pub proportional: Option<f64>,
}

pub fn surface_inequality(a: &HermitianForm, b: &HermitianForm, tol: f64) -> Result<SurfaceReport> {
    expect_dim(2, a.dim())?;
    expect_dim(2, b.dim())?;
    let g = MetricPencil::identity(2);
    let ctx = MixedContext::sigma_m(&g, 2)?;
    let mixed = mixed_sigma(&ctx, &[a.clone(), b.clone()])?;
    let det_a = sigma(a, &g, 2)?;
    let det_b = sigma(b, &g, 2)?;
    Ok(SurfaceReport {
        mixed,
        det_a,
        det_b,
        gap: mixed * mixed - det_a * det_b,
        proportional: proportionality(a, b, tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sympoly::binomial;
    use approx::assert_relative_eq;

    #[test]
    fn garding_pinned_example() {
        let g = MetricPencil::identity(2);
        let r = garding_gap(&[HermitianForm::diag(&[1.0, 2.0]), HermitianForm::identity(2)], &g, &GardingOptions::default()).unwrap();
        assert_relative_eq!(r.lhs, 1.5, epsilon = 1e-13);
        assert_relative_eq!(r.rhs, 2f64.sqrt(), epsilon = 1e-13);
        assert_relative_eq!(r.gap, 1.5 - 2f64.sqrt(), epsilon = 1e-13);
        assert!(r.holds && r.equality_witness.is_none());
    }

    #[test]
    fn garding_equality_cases() {
        let g = MetricPencil::new(HermitianForm::diag(&[1.0, 2.0, 3.0])).unwrap();
        let a = HermitianForm::diag(&[2.0, 1.0, 4.0]);
        let r = garding_gap(&[a.clone(), a.clone(), a.clone()], &g, &GardingOptions::default()).unwrap();
        assert!(r.gap.abs() <= 1e-10 * r.rhs);
        let w = r.equality_witness.unwrap();
        assert!(w.iter().all(|p| (p.constant.unwrap() - 1.0).abs() < 1e-12));

        let r = garding_gap(&[a.scaled(2.0), a.clone()], &g, &GardingOptions::default()).unwrap();
        assert!(r.gap.abs() <= 1e-10 * r.rhs);
        assert!((r.equality_witness.unwrap()[0].constant.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn garding_rejects_cone_violation() {
        let g = MetricPencil::identity(3);
        let err = garding_gap(
            &[HermitianForm::identity(3), HermitianForm::diag(&[3.0, 3.0, -1.0]), HermitianForm::identity(3)],
            &g,
            &GardingOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, GhxError::OutsideCone { index: 1, degree: 3, .. }), "{err}");
    }

    #[test]
    fn mixed_positivity_examples() {
        let g = MetricPencil::identity(3);
        let v = mixed_positivity(&HermitianForm::diag(&[1.0, 0.0, 0.0]), &[HermitianForm::identity(3)], &g, 1e-9).unwrap();
        assert_relative_eq!(v.value, 1.0, epsilon = 1e-13);
        assert!(v.positive);
        let v = mixed_positivity(&HermitianForm::identity(3), &vec![HermitianForm::identity(3); 2], &g, 1e-9).unwrap();
        assert_relative_eq!(v.value, 1.0, epsilon = 1e-12);
        let err = mixed_positivity(&HermitianForm::zeros(3), &[HermitianForm::identity(3)], &g, 1e-9).unwrap_err();
        assert!(matches!(err, GhxError::Precondition(_)));
    }

    #[test]
    fn representer_examples() {
        let r = positive_representer(&[HermitianForm::diag(&[1.0, 2.0])], &MetricPencil::identity(2)).unwrap();
        assert!((&r.h - &HermitianForm::diag(&[1.0, 0.5])).frobenius_norm() < 1e-13);
        assert_relative_eq!(r.min_eigenvalue, 0.5, epsilon = 1e-13);

        for (n, m) in [(3, 2), (4, 3), (5, 5)] {
            let r = positive_representer(&vec![HermitianForm::identity(n); m - 1], &MetricPencil::identity(n)).unwrap();
            let want = HermitianForm::identity(n).scaled(binomial(n - 1, m - 1) / m as f64);
            assert!((&r.h - &want).frobenius_norm() < 1e-11, "n={n} m={m}");
        }

        let r = positive_representer(&[HermitianForm::diag(&[3.0, 3.0, -1.0])], &MetricPencil::identity(3)).unwrap();
        assert!((&r.h - &HermitianForm::diag(&[1.0, 1.0, 3.0])).frobenius_norm() < 1e-13);
        assert_relative_eq!(r.min_eigenvalue, 1.0, epsilon = 1e-13);
    }

    /// `g(t) = √((1+t)(2+t))`, differentiated by hand.
    fn sqrt_quadratic(t: f64) -> (f64, f64, f64) {
        let q = (1.0 + t) * (2.0 + t);
        let q1 = 2.0 * t + 3.0;
        let g = q.sqrt();
        let g1 = q1 / (2.0 * g);
        let g2 = (2.0 * q - q1 * q1 / 2.0) / (2.0 * q * g);
        (g, g1, g2)
    }

    #[test]
    fn profile_against_symbolic_oracle() {
        let g = MetricPencil::identity(2);
        let grid = [0.0, 0.5, 1.0, 2.0];
        let p = concavity_profile(&HermitianForm::diag(&[1.0, 2.0]), &HermitianForm::identity(2), &g, 2, &grid).unwrap();
        for row in &p.rows {
            let (gv, g1, g2) = sqrt_quadratic(row.t);
            assert_relative_eq!(row.g, gv, epsilon = 1e-13);
            assert_relative_eq!(row.g1, g1, epsilon = 1e-12);
            assert_relative_eq!(row.g2, g2, epsilon = 1e-12);
            assert!(row.g2 < 0.0);
        }
        assert!(p.strictly_concave && p.max_fd_error < 1e-5);
    }

    #[test]
    fn profile_is_linear_for_proportional_pair() {
        let g = MetricPencil::identity(3);
        let a = HermitianForm::diag(&[3.0, 3.0, -1.0]);
        let p = concavity_profile(&a, &a, &g, 2, &[0.0, 0.7, 2.0]).unwrap();
        let s = 3f64.sqrt();
        for row in &p.rows {
            assert_relative_eq!(row.g, (1.0 + row.t) * s, max_relative = 1e-13);
            assert!(row.g2.abs() < 1e-12);
        }
        assert!(p.concave);
    }

    #[test]
    fn surface_example() {
        let r = surface_inequality(&HermitianForm::diag(&[1.0, 2.0]), &HermitianForm::identity(2), 1e-9).unwrap();
        assert_relative_eq!(r.gap, 2.25 - 2.0, epsilon = 1e-13);
        assert!(r.proportional.is_none());
    }
}
