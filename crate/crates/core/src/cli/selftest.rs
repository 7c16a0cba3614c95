//! Pinned regression cases: small inputs with hand-checkable answers.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{emit, CliResult, Fault, SelftestArgs, EXIT_OK, EXIT_VIOLATION};
use crate::fault::set_polarization_sign_fault;
use crate::garding::{
    concavity_profile, garding_gap, mixed_positivity, positive_representer, surface_inequality, GardingOptions,
};
use crate::herm::{inner, pencil_eigenvalues, proportionality, HermitianForm, MetricPencil};
use crate::hodge::{
    corollary_hodge_index, gram_matrix, log_concavity, minor_2x2, primitive_basis, quadratic_hyperbolicity,
    verify_theorem_a, QuadraticReport, Signature,
};
use crate::sample::stream;
use crate::sympoly::{
    hyperbolic_at, in_cone, in_gamma_m, linearity_dimension, mixed_sigma, mixed_sigma_oracle, real_rooted,
    restrict_line, sigma, GramForm, MixedContext, PolyOnLine, TracePowerForm,
};
use crate::torus::{
    ddc, hessian_constant_check, integral_pairing, laplacian_solve, verify_theorem_a_torus, FormField, ScalarField,
    TorusContext,
};

type Check = Result<(), Box<dyn std::error::Error + Send + Sync>>;

/// One pinned case.
#[derive(Clone, Copy)]
pub struct SelftestCase {
    pub name: &'static str,
    check: fn() -> Check,
}

impl SelftestCase {
    /// `Err` carries a description of the first mismatch.
    pub fn run(&self) -> Result<(), String> {
        (self.check)().map_err(|e| e.to_string())
    }
}

impl std::fmt::Debug for SelftestCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name)
    }
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what().into())
    }
}

/// `|got − want| ≤ tol·max(1, |want|)`.
fn close(what: &str, got: f64, want: f64, tol: f64) -> Check {
    ensure((got - want).abs() <= tol * want.abs().max(1.0), || format!("{what}: got {got:e}, want {want:e}"))
}

fn close_all(what: &str, got: &[f64], want: &[f64], tol: f64) -> Check {
    ensure(got.len() == want.len(), || format!("{what}: got {} values, want {}", got.len(), want.len()))?;
    got.iter().zip(want).try_for_each(|(g, w)| close(what, *g, *w, tol))
}

fn d(v: &[f64]) -> HermitianForm {
    HermitianForm::diag(v)
}

fn id(n: usize) -> MetricPencil {
    MetricPencil::identity(n)
}

fn unit(n: usize, j: usize) -> HermitianForm {
    let mut e = HermitianForm::zeros(n);
    e.set(j, j, Complex64::new(1.0, 0.0));
    e
}

fn offdiag() -> HermitianForm {
    HermitianForm::from_upper(2, |j, k| Complex64::new(if j == k { 0.0 } else { 1.0 }, 0.0))
}

const EXACT: f64 = 1e-12;

fn pencil_eigenvalues_case() -> Check {
    let g = MetricPencil::new(d(&[1.0, 2.0]))?;
    close_all("diag(2,4) over diag(1,2)", &pencil_eigenvalues(&d(&[2.0, 4.0]), &g)?, &[2.0, 2.0], EXACT)?;
    close_all("identity", &pencil_eigenvalues(&HermitianForm::identity(3), &id(3))?, &[1.0; 3], EXACT)?;
    close_all("diag(1,2,3)", &pencil_eigenvalues(&d(&[1.0, 2.0, 3.0]), &id(3))?, &[1.0, 2.0, 3.0], EXACT)
}

fn inner_case() -> Check {
    close("inner(I, I)", inner(&HermitianForm::identity(3), &HermitianForm::identity(3))?, 3.0, EXACT)?;
    close("inner(diag(1,2), diag(3,4))", inner(&d(&[1.0, 2.0]), &d(&[3.0, 4.0]))?, 11.0, EXACT)?;
    let sym = offdiag();
    let anti = HermitianForm::from_upper(2, |j, k| Complex64::new(0.0, if j == k { 0.0 } else { 1.0 }));
    close("inner(E_sym, E_anti)", inner(&sym, &anti)?, 0.0, EXACT)
}

fn proportionality_case() -> Check {
    let c = proportionality(&HermitianForm::identity(2).scaled(3.0), &HermitianForm::identity(2), 1e-9)?;
    close("3I / I", c.ok_or("3I and I not proportional")?, 3.0, EXACT)?;
    ensure(proportionality(&d(&[1.0, 2.0]), &HermitianForm::identity(2), 1e-9)?.is_none(), || {
        "diag(1,2) and I reported proportional".into()
    })?;
    let b = d(&[1.0, 1.0]);
    let mut a = b.scaled(2.0);
    a.axpy(1e-12, &unit(2, 0));
    let c = proportionality(&a, &b, 1e-9)?.ok_or("perturbed pair not proportional")?;
    close("perturbed ratio", c, 2.0, 1e-9)
}

fn sigma_case() -> Check {
    close("σ_2(diag(1,2,3))", sigma(&d(&[1.0, 2.0, 3.0]), &id(3), 2)?, 11.0, EXACT)?;
    close("σ_2(I_3)", sigma(&HermitianForm::identity(3), &id(3), 2)?, 3.0, EXACT)?;
    let a = d(&[3.0, 3.0, -1.0]);
    close("σ_2(diag(3,3,−1))", sigma(&a, &id(3), 2)?, 3.0, EXACT)?;
    close("σ_3(diag(3,3,−1))", sigma(&a, &id(3), 3)?, -9.0, EXACT)
}

fn mixed_examples() -> Vec<(MixedContext, Vec<HermitianForm>, f64, &'static str)> {
    let c22 = MixedContext::sigma_m(&id(2), 2).expect("valid degree");
    let c33 = MixedContext::sigma_m(&id(3), 3).expect("valid degree");
    let a = d(&[1.0, 2.0, 3.0]);
    vec![
        (c22.clone(), vec![d(&[1.0, 2.0]), HermitianForm::identity(2)], 1.5, "D(diag(1,2), I)"),
        (c33, vec![a.clone(), a.clone(), a], 6.0, "D(A, A, A)"),
        (c22, vec![unit(2, 0), unit(2, 1)], 0.5, "D(E_11, E_22)"),
    ]
}

fn mixed_sigma_case() -> Check {
    mixed_examples()
        .iter()
        .try_for_each(|(ctx, args, want, what)| close(what, mixed_sigma(ctx, args)?, *want, EXACT))
}

fn mixed_sigma_oracle_case() -> Check {
    mixed_examples()
        .iter()
        .try_for_each(|(ctx, args, want, what)| close(what, mixed_sigma_oracle(ctx, args)?, *want, 1e-10))?;
    let ctx = MixedContext::sigma_m(&id(3), 3)?;
    let zero = [HermitianForm::zeros(3), d(&[1.0, 2.0, 3.0]), HermitianForm::identity(3)];
    close("D(0, B, C)", mixed_sigma(&ctx, &zero)?, 0.0, EXACT)
}

fn restrict_line_case() -> Check {
    let ctx = MixedContext::sigma_m(&id(2), 2)?;
    let p = restrict_line(&ctx, &HermitianForm::identity(2), &d(&[1.0, 2.0]))?;
    close_all("s² + 3s + 2", p.coeffs(), &[2.0, 3.0, 1.0], EXACT)?;
    let p = restrict_line(&ctx, &HermitianForm::identity(2), &HermitianForm::zeros(2))?;
    close_all("s²", p.coeffs(), &[0.0, 0.0, 1.0], EXACT)?;
    let a = d(&[1.0, 3.0]);
    let p = restrict_line(&ctx, &a, &a.scaled(-1.0))?;
    close_all("(s − 1)²·σ(a)", p.coeffs(), &[3.0, -6.0, 3.0], EXACT)
}

fn real_rooted_case() -> Check {
    ensure(real_rooted(&PolyOnLine::new(vec![2.0, 3.0, 1.0]), 1e-9)?, || "s² + 3s + 2 not real-rooted".into())?;
    ensure(!real_rooted(&PolyOnLine::new(vec![1.0, 0.0, 1.0]), 1e-9)?, || "s² + 1 real-rooted".into())?;
    ensure(real_rooted(&PolyOnLine::new(vec![1.0, -2.0, 1.0]), 1e-6)?, || "s² − 2s + 1 not real-rooted".into())
}

fn hyperbolic_case() -> Check {
    let ctx = MixedContext::sigma_m(&id(3), 2)?;
    let r = hyperbolic_at(&ctx, &HermitianForm::identity(3), 1000, 1, 1e-6)?;
    ensure(r.hyperbolic, || format!("σ_2 not hyperbolic at I (sample {:?})", r.witness_index))?;
    let split = GramForm::new(2, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0])))?;
    let r = hyperbolic_at(&split, &d(&[1.0, 0.0]), 1000, 1, 1e-6)?;
    ensure(!r.hyperbolic && r.witness.is_some(), || "split form of signature (2,0,2) passed".into())?;
    let w = r.witness.expect("checked above");
    let line = restrict_line(&split, &d(&[1.0, 0.0]), &w)?;
    ensure(!real_rooted(&line, 1e-6)?, || "witness line is real-rooted".into())?;
    let degenerate = d(&[1.0, 0.0, 0.0]);
    ensure(hyperbolic_at(&ctx, &degenerate, 10, 1, 1e-6).is_err(), || "σ_2(a) = 0 accepted".into())
}

fn in_cone_case() -> Check {
    let ctx2 = MixedContext::sigma_m(&id(2), 2)?;
    let r = in_cone(&ctx2, &HermitianForm::identity(2), &HermitianForm::identity(2), 0.0)?;
    close("margin of I", r.margin, 1.0, 1e-9)?;
    let x = d(&[3.0, 3.0, -1.0]);
    let i3 = HermitianForm::identity(3);
    let r = in_cone(&MixedContext::sigma_m(&id(3), 2)?, &i3, &x, 0.0)?;
    ensure(r.member, || format!("diag(3,3,−1) outside Γ(σ_2): roots {:?}", r.roots))?;
    let r = in_cone(&MixedContext::sigma_m(&id(3), 3)?, &i3, &x, 0.0)?;
    ensure(!r.member, || "diag(3,3,−1) inside Γ(σ_3)".into())
}

fn in_gamma_case() -> Check {
    let x = d(&[3.0, 3.0, -1.0]);
    ensure(in_gamma_m(&x, &id(3), 2, 1e-9)?.member, || "diag(3,3,−1) ∉ Γ_2".into())?;
    ensure(!in_gamma_m(&x, &id(3), 3, 1e-9)?.member, || "diag(3,3,−1) ∈ Γ_3".into())?;
    for m in 1..=4 {
        ensure(in_gamma_m(&HermitianForm::identity(4), &id(4), m, 1e-9)?.member, || format!("I ∉ Γ_{m}"))?;
        ensure(!in_gamma_m(&HermitianForm::identity(4).scaled(-1.0), &id(4), m, 1e-9)?.member, || {
            format!("−I ∈ Γ_{m}")
        })?;
    }
    Ok(())
}

fn linearity_case() -> Check {
    for (n, m) in [(2, 2), (3, 2), (3, 3)] {
        let ctx = MixedContext::sigma_m(&id(n), m)?;
        let k = linearity_dimension(&ctx, 5)?;
        ensure(k == 0, || format!("σ_{m} on Herm({n}): linearity {k}"))?;
    }
    let q = gram_matrix(&[d(&[3.0, 3.0, -1.0])], &id(3), 3);
    ensure(q.is_err(), || "diag(3,3,−1) accepted as a Γ_3 slot".into())?;
    let q = gram_matrix(&[d(&[3.0, 3.0, 1.0])], &id(3), 3)?;
    let k = linearity_dimension(&GramForm::new(3, q.gram)?, 5)?;
    ensure(k == 0, || format!("Hodge-index form: linearity {k}"))?;
    let trace = TracePowerForm::new(&id(3), 2)?;
    let k = linearity_dimension(&trace, 5)?;
    ensure(k == 8, || format!("(tr x)²: linearity {k}, want 8"))
}

fn garding_case() -> Check {
    let opts = GardingOptions::default();
    let r = garding_gap(&[d(&[1.0, 2.0]), HermitianForm::identity(2)], &id(2), &opts)?;
    close("lhs", r.lhs, 1.5, EXACT)?;
    close("rhs", r.rhs, 2f64.sqrt(), EXACT)?;
    close("gap", r.gap, 1.5 - 2f64.sqrt(), 1e-10)?;
    ensure(r.holds && r.equality_witness.is_none(), || "strict case misreported".into())?;
    let a = d(&[2.0, 1.0, 4.0]);
    let r = garding_gap(&[a.clone(), a.clone(), a.clone()], &id(3), &opts)?;
    let w = r.equality_witness.ok_or("equal arguments: no witness")?;
    w.iter().try_for_each(|p| close("witness", p.constant.unwrap_or(f64::NAN), 1.0, 1e-9))?;
    let r = garding_gap(&[a.scaled(2.0), a.clone()], &id(3), &opts)?;
    ensure(r.gap.abs() <= 1e-10 * r.rhs, || format!("B_1 = 2B_2: gap {:e}", r.gap))?;
    let w = r.equality_witness.ok_or("B_1 = 2B_2: no witness")?;
    close("witness", w[0].constant.unwrap_or(f64::NAN), 2.0, 1e-9)
}

fn mixed_positivity_case() -> Check {
    let r = mixed_positivity(&unit(3, 0), &[HermitianForm::identity(3)], &id(3), 1e-9)?;
    close("D(E_11, I)", r.value, 1.0, EXACT)?;
    let r = mixed_positivity(&HermitianForm::identity(3), &[HermitianForm::identity(3)], &id(3), 1e-9)?;
    close("D(I, I)", r.value, 3.0, EXACT)?;
    ensure(mixed_positivity(&HermitianForm::zeros(3), &[HermitianForm::identity(3)], &id(3), 1e-9).is_err(), || {
        "x_1 = 0 accepted".into()
    })
}

fn representer_case() -> Check {
    let r = positive_representer(&[d(&[1.0, 2.0])], &id(2))?;
    close_all("H for diag(1,2)", r.h.coords(), d(&[1.0, 0.5]).coords(), EXACT)?;
    close("min eigenvalue", r.min_eigenvalue, 0.5, EXACT)?;
    let r = positive_representer(&[d(&[3.0, 3.0, -1.0])], &id(3))?;
    close_all("H for diag(3,3,−1)", r.h.coords(), d(&[1.0, 1.0, 3.0]).coords(), EXACT)?;
    close("min eigenvalue", r.min_eigenvalue, 1.0, EXACT)?;
    // identity slots: C(n−1, m−1)/m · I, here C(3, 2)/3 = 1
    let r = positive_representer(&[HermitianForm::identity(4), HermitianForm::identity(4)], &id(4))?;
    close_all("H for I, I", r.h.coords(), HermitianForm::identity(4).coords(), 1e-10)
}

fn concavity_case() -> Check {
    let ts = [0.0, 0.5, 1.0, 2.0];
    let p = concavity_profile(&d(&[1.0, 2.0]), &HermitianForm::identity(2), &id(2), 2, &ts)?;
    for row in &p.rows {
        let t = row.t;
        let q = (1.0 + t) * (2.0 + t);
        let g1 = (3.0 + 2.0 * t) / (2.0 * q.sqrt());
        let g2 = 1.0 / q.sqrt() - (3.0 + 2.0 * t).powi(2) / (4.0 * q.powf(1.5));
        close("g", row.g, q.sqrt(), 1e-12)?;
        close("g′", row.g1, g1, 1e-12)?;
        close("g″", row.g2, g2, 1e-12)?;
    }
    ensure(p.strictly_concave, || "g″ not negative".into())?;
    let a = d(&[1.0, 2.0]);
    let p = concavity_profile(&a, &a, &id(2), 2, &ts)?;
    p.rows.iter().try_for_each(|r| close("g″ for β = α", r.g2, 0.0, 1e-12))
}

fn surface_case() -> Check {
    let r = surface_inequality(&d(&[1.0, 2.0]), &HermitianForm::identity(2), 1e-9)?;
    close("D(A, B)", r.mixed, 1.5, EXACT)?;
    close("gap", r.gap, 0.25, EXACT)?;
    let r = surface_inequality(&d(&[1.0, 2.0]), &d(&[3.0, 6.0]), 1e-9)?;
    close("proportional gap", r.gap, 0.0, 1e-12)?;
    close("ratio", r.proportional.ok_or("not proportional")?, 1.0 / 3.0, 1e-12)
}

fn signature_case() -> Check {
    let want = |r: &QuadraticReport, sig: Signature, what: &str| {
        ensure(r.signature == sig, || format!("{what}: signature {:?}", r.signature))
    };
    let minkowski = gram_matrix(&[], &id(2), 2)?;
    want(&minkowski, Signature::lorentzian(4), "n=2, m=2")?;
    ensure(quadratic_hyperbolicity(&minkowski), || "Minkowski form not hyperbolic".into())?;
    want(&gram_matrix(&[], &id(3), 2)?, Signature::lorentzian(9), "n=3, m=2")?;
    let slot = d(&[3.0, 3.0, 1.0]);
    let r = gram_matrix(&[slot], &id(3), 3)?;
    want(&r, Signature::lorentzian(9), "n=3, m=3")?;
    ensure(quadratic_hyperbolicity(&r), || "n=3, m=3 form not hyperbolic".into())?;
    let inner_gram = QuadraticReport::from_gram(2, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 2.0, 2.0])))?;
    want(&inner_gram, Signature { plus: 4, zero: 0, minus: 0 }, "inner product")?;
    ensure(!quadratic_hyperbolicity(&inner_gram), || "positive definite form hyperbolic".into())
}

fn primitive_case() -> Check {
    let p = primitive_basis(&[], &HermitianForm::identity(2), &id(2), 2)?;
    ensure(p.vectors.len() == 3, || format!("dimension {}", p.vectors.len()))?;
    p.vectors
        .iter()
        .try_for_each(|v| close("trace of a primitive vector", v.trace(), 0.0, 1e-12))?;
    let p = primitive_basis(&[], &d(&[3.0, 3.0, -1.0]), &id(3), 2)?;
    ensure(p.vectors.len() == 8, || format!("dimension {}", p.vectors.len()))?;
    let h = d(&[1.0, 1.0, 3.0]);
    p.vectors
        .iter()
        .try_for_each(|v| close("inner(diag(1,1,3), β)", inner(&h, v)?, 0.0, 1e-10))?;
    ensure(p.max_residual() <= 1e-10, || format!("residual {:e}", p.max_residual()))
}

fn theorem_a_case() -> Check {
    let r = verify_theorem_a(&[HermitianForm::identity(2)], &id(2), Some(&d(&[2.0, -1.0])))?;
    // Q(β, β) = det β, and a trace-free β of unit Frobenius norm has det β = −1/2
    close_all("restricted spectrum", &r.restricted_spectrum, &[-0.5; 3], 1e-10)?;
    ensure(r.holds(), || "n=2, m=2 classical case fails".into())?;
    let r = verify_theorem_a(&[d(&[3.0, 3.0, -1.0])], &id(3), Some(&d(&[1.0, 0.0, 0.0])))?;
    ensure(r.restricted_spectrum.len() == 8 && r.restricted_spectrum.iter().all(|&x| x < 0.0), || {
        format!("restricted spectrum {:?}", r.restricted_spectrum)
    })?;
    ensure(r.holds(), || "n=3, m=2 case fails".into())?;
    let r = verify_theorem_a(&[HermitianForm::identity(3), HermitianForm::identity(3)], &id(3), None)?;
    ensure(r.holds(), || "classical case α_i = ω fails".into())
}

fn corollary_case() -> Check {
    let c = corollary_hodge_index(&d(&[1.0, 2.0]), &d(&[1.0, -1.0]), &id(2), 2)?;
    close("D(β, α)", c.pairing, 0.5, EXACT)?;
    close("D(β, β)", c.q_value, -1.0, EXACT)?;
    close("gap", c.gap, 0.25 + 2.0, EXACT)?;
    let a = d(&[1.0, 2.0, 4.0]);
    let c = corollary_hodge_index(&a, &a, &id(3), 3)?;
    close("β = α gap", c.gap, 0.0, 1e-12 * c.scale)?;
    ensure(c.holds, || "corollary fails for β = α".into())
}

fn minor_case() -> Check {
    let b1 = d(&[1.0, -1.0]);
    let alphas = [HermitianForm::identity(2)];
    let r = minor_2x2(&b1, &offdiag(), &alphas, &id(2))?;
    // Q(β, β) = det β under the normalization D(A, A) = σ_2(A)
    close_all("minor", &[r.matrix[0][0], r.matrix[0][1], r.matrix[1][1]], &[-1.0, 0.0, -1.0], EXACT)?;
    ensure(r.negative_semidefinite && !r.degenerate && r.consistent(), || "independent pair misreported".into())?;
    let r = minor_2x2(&b1, &b1.scaled(2.0), &alphas, &id(2))?;
    ensure(r.degenerate && r.proportional && r.consistent(), || "β_2 = 2β_1 not degenerate".into())
}

fn log_concavity_case() -> Check {
    let r = log_concavity(&d(&[1.0, 2.0]), &HermitianForm::identity(2), &id(2), 2)?;
    close_all("(a_0, a_1, a_2)", &r.sequence, &[1.0, 1.5, 2.0], EXACT)?;
    ensure(r.holds() && !r.steps[0].equality, || "strict case misreported".into())?;
    let r = log_concavity(&d(&[3.0, 3.0, -1.0]), &HermitianForm::identity(3), &id(3), 2)?;
    close_all("(a_0, a_1, a_2)", &r.sequence, &[3.0, 5.0, 3.0], EXACT)?;
    let a = d(&[1.0, 2.0, 5.0]);
    let r = log_concavity(&a, &a.scaled(3.0), &id(3), 3)?;
    ensure(r.holds() && r.proportional && r.steps.iter().all(|s| s.equality), || "proportional pair misreported".into())
}

fn ddc_case() -> Check {
    let ctx = TorusContext::new(1, 16)?;
    let psi = ScalarField::from_fn(&ctx, |x| (2.0 * PI * x[0]).cos());
    let f = ddc(&psi, &ctx)?;
    for p in 0..ctx.points() {
        let want = -PI * PI * (2.0 * PI * ctx.position(p)[0]).cos();
        close("dd^c cos(2πx)", f.at(p).get(0, 0).re, want, 1e-10)?;
    }
    let f = ddc(&ScalarField::constant(&ctx, 2.5), &ctx)?;
    ensure(f.max_norm() == 0.0, || "dd^c of a constant is nonzero".into())?;
    let ctx = TorusContext::new(2, 16)?;
    let psi = ScalarField::random_band_limited(&ctx, &mut stream(3, 0), 6, 1.0);
    let mean = ddc(&psi, &ctx)?.mean();
    ensure(mean.frobenius_norm() <= 1e-10, || format!("mean of dd^cψ {:e}", mean.frobenius_norm()))
}

fn laplacian_case() -> Check {
    let ctx = TorusContext::new(1, 16)?;
    let f = ScalarField::from_fn(&ctx, |x| (2.0 * PI * x[0]).cos());
    let sol = laplacian_solve(&HermitianForm::identity(1), &f, &ctx)?;
    for p in 0..ctx.points() {
        let want = -(2.0 * PI * ctx.position(p)[0]).cos() / (PI * PI);
        close("φ", sol.phi.values()[p], want, 1e-12)?;
    }
    let sol = laplacian_solve(&HermitianForm::identity(1), &ScalarField::zeros(&ctx), &ctx)?;
    ensure(sol.phi.is_zero(), || "f = 0 gives φ ≠ 0".into())
}

fn pairing_case() -> Check {
    let ctx = TorusContext::new(2, 8)?;
    let g = id(2);
    let a = d(&[1.0, 2.0]);
    let b = HermitianForm::identity(2);
    let constant = integral_pairing(&[FormField::constant(&ctx, a.clone()), FormField::constant(&ctx, b.clone())], &g, &ctx)?;
    close("constant pairing", constant, 1.5, EXACT)?;
    let psi = ScalarField::random_band_limited(&ctx, &mut stream(2, 0), 4, 0.3);
    let noisy = integral_pairing(&[FormField::new(a, psi), FormField::constant(&ctx, b.clone())], &g, &ctx)?;
    close("exact perturbation", noisy, 1.5, 1e-10)?;
    let zero = integral_pairing(&[FormField::constant(&ctx, HermitianForm::zeros(2)), FormField::constant(&ctx, b)], &g, &ctx)?;
    close("zero class", zero, 0.0, EXACT)
}

fn torus_theorem_case() -> Check {
    let ctx = TorusContext::new(2, 8)?;
    let g = id(2);
    let r = verify_theorem_a_torus(&[HermitianForm::identity(2)], &g, &d(&[1.0, -1.0]), &ScalarField::zeros(&ctx), &ctx)?;
    close("pointwise Q", r.max_pointwise_q, -1.0, EXACT)?;
    ensure(r.holds(), || "constant primitive class fails".into())?;
    let ctx = TorusContext::new(2, 16)?;
    let psi = ScalarField::random_band_limited(&ctx, &mut stream(9, 0), 8, 0.1);
    let r = verify_theorem_a_torus(&[d(&[1.0, 2.0])], &g, &HermitianForm::zeros(2), &psi, &ctx)?;
    ensure(r.exactness_residual <= 1e-8, || format!("dd^c(ψ + φ) residual {:e}", r.exactness_residual))?;
    close("integrated Q of the zero class", r.integrated_q, 0.0, 1e-12)?;
    let ctx = TorusContext::new(3, 8)?;
    let psi = ScalarField::random_band_limited(&ctx, &mut stream(4, 1), 10, 0.02);
    let beta = d(&[1.0, -2.0, 0.5]);
    let r = verify_theorem_a_torus(&[d(&[3.0, 3.0, -1.0])], &id(3), &beta, &psi, &ctx)?;
    ensure(r.integrated_q < 0.0 && r.holds(), || format!("n=3 run fails: {r:?}"))
}

fn hessian_case() -> Check {
    let ctx = TorusContext::new(2, 8)?;
    let r = hessian_constant_check(&[d(&[1.0, 2.0]), HermitianForm::identity(2)], &id(2), &ctx)?;
    close("integrated", r.integrated, 1.5, EXACT)?;
    close("bound", r.bound, 2f64.sqrt(), EXACT)?;
    ensure(r.holds && !r.equality, || "strict case misreported".into())?;
    let ctx3 = TorusContext::new(3, 4)?;
    let r = hessian_constant_check(&[HermitianForm::identity(3), HermitianForm::identity(3)], &id(3), &ctx3)?;
    close_all("c_k for ω", &r.constants, &[3.0, 3.0], EXACT)?;
    ensure(r.equality, || "ω, ω not an equality case".into())?;
    let a = d(&[1.0, 2.0]);
    let r = hessian_constant_check(&[a.scaled(3.0), a], &id(2), &ctx)?;
    let pr = r.ratios.first().ok_or("proportional pair: no ratio")?;
    close("ratio", pr.constant.unwrap_or(f64::NAN), pr.predicted, 1e-10)
}

/// Every pinned case, in a fixed order.
pub fn selftest_cases() -> Vec<SelftestCase> {
    macro_rules! case {
        ($name:literal, $f:ident) => {
            SelftestCase { name: $name, check: $f }
        };
    }
    vec![
        case!("herm.pencil_eigenvalues", pencil_eigenvalues_case),
        case!("herm.inner", inner_case),
        case!("herm.proportionality", proportionality_case),
        case!("sympoly.sigma", sigma_case),
        case!("sympoly.mixed_sigma", mixed_sigma_case),
        case!("sympoly.mixed_sigma_oracle", mixed_sigma_oracle_case),
        case!("sympoly.restrict_line", restrict_line_case),
        case!("sympoly.real_rooted", real_rooted_case),
        case!("sympoly.hyperbolic_at", hyperbolic_case),
        case!("sympoly.in_cone", in_cone_case),
        case!("sympoly.in_gamma_m", in_gamma_case),
        case!("sympoly.linearity_dimension", linearity_case),
        case!("garding.garding_gap", garding_case),
        case!("garding.mixed_positivity", mixed_positivity_case),
        case!("garding.positive_representer", representer_case),
        case!("garding.concavity_profile", concavity_case),
        case!("garding.surface_inequality", surface_case),
        case!("hodge.gram_signature", signature_case),
        case!("hodge.primitive_basis", primitive_case),
        case!("hodge.verify_theorem_a", theorem_a_case),
        case!("hodge.corollary", corollary_case),
        case!("hodge.minor_2x2", minor_case),
        case!("hodge.log_concavity", log_concavity_case),
        case!("torus.ddc", ddc_case),
        case!("torus.laplacian_solve", laplacian_case),
        case!("torus.integral_pairing", pairing_case),
        case!("torus.verify_theorem_a", torus_theorem_case),
        case!("torus.hessian_constant_check", hessian_case),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseOutcome {
    pub name: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub fault: Option<&'static str>,
    pub passed: usize,
    pub failed: usize,
    pub cases: Vec<CaseOutcome>,
}

/// Runs every case; a panicking case counts as failed.
pub fn run_selftest() -> SelftestReport {
    let cases: Vec<CaseOutcome> = selftest_cases()
        .iter()
        .map(|case| {
            let outcome = std::panic::catch_unwind(|| case.run()).unwrap_or_else(|_| Err("panicked".into()));
            CaseOutcome {
                name: case.name,
                passed: outcome.is_ok(),
                failure: outcome.err(),
            }
        })
        .collect();
    let passed = cases.iter().filter(|c| c.passed).count();
    SelftestReport {
        fault: None,
        passed,
        failed: cases.len() - passed,
        cases,
    }
}

pub(super) fn command(args: &SelftestArgs) -> CliResult<i32> {
    if args.list {
        for case in selftest_cases() {
            println!("{}", case.name);
        }
        return Ok(EXIT_OK);
    }
    let fault = args.inject_fault.map(|f| match f {
        Fault::PolarizationSign => {
            set_polarization_sign_fault(true);
            "polarization-sign"
        }
    });
    let mut report = run_selftest();
    set_polarization_sign_fault(false);
    report.fault = fault;
    for case in &report.cases {
        match &case.failure {
            None => println!("ok    {}", case.name),
            Some(why) => println!("FAIL  {}: {why}", case.name),
        }
    }
    println!("{} passed, {} failed", report.passed, report.failed);
    if let Some(path) = &args.json_out {
        emit("selftest", &report, Some(path))?;
    }
    Ok(if report.failed == 0 { EXIT_OK } else { EXIT_VIOLATION })
}
