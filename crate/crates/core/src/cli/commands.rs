use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{emit, read_matrices, read_matrix, CampaignArgs, CliError, CliResult, ConeArgs, HodgeArgs, Settings, TorusArgs};
use super::{EXIT_OK, EXIT_VIOLATION, MAX_RECORDS};
use crate::error::GhxError;
use crate::garding::{garding_gap, GardingOptions, GardingReport};
use crate::herm::{HermitianForm, MetricPencil, RealBasis};
use crate::hodge::{log_concavity, verify_theorem_a, LogConcavity, QuadraticReport, Signature};
use crate::literal::{format_matrices, format_matrix};
use crate::sample::{noise_stream, random_hermitian, random_in_gamma, random_metric, stream};
use crate::sympoly::{in_cone, in_gamma_m, ConeMembership, GammaMembership, MixedContext};
use crate::torus::{ddc, run_theorem_a_torus, write_snapshot, ScalarField, TorusContext, TorusTheoremReport};

const DEFAULT_SAMPLES: usize = 1000;
const DEFAULT_TORUS_SAMPLES: usize = 10;
const DEFAULT_N: usize = 3;
const DEFAULT_TORUS_N: usize = 2;
const DEFAULT_NOISE: f64 = 0.05;
const DEFAULT_MODES: usize = 8;

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn common_dim(items: &[HermitianForm], path: &Path) -> CliResult<usize> {
    let n = items.first().map(HermitianForm::dim).ok_or_else(|| CliError::Input {
        path: path.to_path_buf(),
        source: GhxError::Parse {
            line: 1,
            column: 1,
            message: "no matrices in file".into(),
        },
    })?;
    if let Some(bad) = items.iter().position(|a| a.dim() != n) {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            source: GhxError::Precondition(format!("matrix {} has dimension {}, the first has {n}", bad + 1, items[bad].dim())),
        });
    }
    Ok(n)
}

/// The inputs of a single-instance report, as literals that parse back to
/// the exact matrices.
#[derive(Debug, Serialize)]
struct Instance<'a, T: Serialize> {
    mode: &'static str,
    n: usize,
    m: usize,
    tol: f64,
    inputs: String,
    metric: String,
    report: &'a T,
}

impl<'a, T: Serialize> Instance<'a, T> {
    fn new(m: usize, s: &Settings, inputs: &[HermitianForm], g: &MetricPencil, report: &'a T) -> Self {
        Self {
            mode: "instance",
            n: g.dim(),
            m,
            tol: s.tol,
            inputs: format_matrices(inputs),
            metric: format_matrix(g.metric()),
            report,
        }
    }
}

// ---------------------------------------------------------------- campaigns

/// One checked sample.
struct Sample<D> {
    inputs: Vec<HermitianForm>,
    query: Option<HermitianForm>,
    metric: HermitianForm,
    violated: bool,
    detail: D,
}

#[derive(Debug, Serialize)]
struct Record<'a, D: Serialize> {
    seed: u64,
    sample: u64,
    inputs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    query: Option<String>,
    metric: String,
    detail: &'a D,
}

#[derive(Debug, Serialize)]
struct Header {
    mode: &'static str,
    n: usize,
    m: usize,
    seed: u64,
    samples: usize,
    tol: f64,
    random_metric: bool,
}

#[derive(Debug, Serialize)]
struct Tally<'a, D: Serialize> {
    checked: usize,
    /// Samples the checks refused (for instance a margin below `tol`).
    rejected: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_rejection: Option<String>,
    violations: usize,
    records: Vec<Record<'a, D>>,
    records_truncated: bool,
}

#[derive(Debug, Serialize)]
struct CampaignReport<'a, W: Serialize, D: Serialize> {
    #[serde(flatten)]
    header: Header,
    worst: W,
    #[serde(flatten)]
    tally: Tally<'a, D>,
}

fn header(s: &Settings, n: usize, m: usize, samples: usize) -> Header {
    Header {
        mode: "random",
        n,
        m,
        seed: s.seed,
        samples,
        tol: s.tol,
        random_metric: s.random_metric,
    }
}

/// Runs `check` on every sample index in parallel; results come back in
/// index order.
fn run_campaign<D, F>(s: &Settings, n: usize, samples: usize, check: F) -> CliResult<Vec<Result<Sample<D>, GhxError>>>
where
    D: Send,
    F: Fn(u64, &mut ChaCha8Rng, &MetricPencil) -> Result<Sample<D>, GhxError> + Sync,
{
    let fixed = s.metric_for(n)?;
    Ok((0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(s.seed, i);
            let g = if s.random_metric {
                random_metric(&mut rng, n)
            } else {
                fixed.clone()
            };
            check(i, &mut rng, &g)
        })
        .collect())
}

fn tally<'a, D: Serialize>(seed: u64, outcomes: &'a [Result<Sample<D>, GhxError>]) -> Tally<'a, D> {
    let mut t = Tally {
        checked: 0,
        rejected: 0,
        first_rejection: None,
        violations: 0,
        records: Vec::new(),
        records_truncated: false,
    };
    for (i, outcome) in outcomes.iter().enumerate() {
        match outcome {
            Ok(sample) => {
                t.checked += 1;
                if sample.violated {
                    t.violations += 1;
                    if t.records.len() < MAX_RECORDS {
                        t.records.push(Record {
                            seed,
                            sample: i as u64,
                            inputs: format_matrices(&sample.inputs),
                            query: sample.query.as_ref().map(format_matrix),
                            metric: format_matrix(&sample.metric),
                            detail: &sample.detail,
                        });
                    } else {
                        t.records_truncated = true;
                    }
                }
            }
            Err(e) => {
                t.rejected += 1;
                if t.first_rejection.is_none() {
                    t.first_rejection = Some(format!("sample {i}: {e}"));
                }
            }
        }
    }
    t
}

fn details<D>(outcomes: &[Result<Sample<D>, GhxError>]) -> impl Iterator<Item = &D> {
    outcomes.iter().filter_map(|o| o.as_ref().ok()).map(|s| &s.detail)
}

fn finish<W: Serialize, D: Serialize>(
    command: &str,
    s: &Settings,
    header: Header,
    worst: W,
    outcomes: &[Result<Sample<D>, GhxError>],
) -> CliResult<i32> {
    let tally = tally(s.seed, outcomes);
    eprintln!(
        "{command}: {} checked, {} rejected, {} violations (n={}, m={}, seed={})",
        tally.checked, tally.rejected, tally.violations, header.n, header.m, header.seed
    );
    let ok = tally.violations == 0;
    emit(command, &CampaignReport { header, worst, tally }, s.json_out.as_deref())?;
    Ok(verdict(ok))
}

fn campaign_shape(s: &Settings, default_n: usize, m_offset: usize) -> CliResult<(usize, usize)> {
    let n = s.n.or(s.metric.as_ref().map(MetricPencil::dim)).unwrap_or(default_n);
    let m = s.m.unwrap_or(n);
    if !(m_offset.max(1)..=n).contains(&m) {
        return Err(CliError::Usage(format!("--m must lie in {}..={n}, got {m}", m_offset.max(1))));
    }
    Ok((n, m))
}

fn min_f64(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::INFINITY, f64::min)
}

fn max_f64(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

// ---------------------------------------------------------------- cone

#[derive(Debug, Serialize)]
struct ConeItem {
    index: usize,
    input: String,
    member: bool,
    margins: Vec<f64>,
    sigmas: Vec<f64>,
    /// Roots of `s ↦ σ_m(A + s·G)`; all negative exactly for members.
    roots: Vec<f64>,
    cone_margin: f64,
    /// The root test and the sign test agree.
    consistent: bool,
}

#[derive(Debug, Serialize)]
struct ConeReport {
    n: usize,
    m: usize,
    tol: f64,
    metric: String,
    member: bool,
    results: Vec<ConeItem>,
}

pub(super) fn cone(args: &ConeArgs) -> CliResult<i32> {
    let s = Settings::resolve(&args.common)?;
    let items = read_matrices(&args.input)?;
    let n = common_dim(&items, &args.input)?;
    let m = s.m.unwrap_or(n);
    let g = s.metric_for(n)?;
    let ctx = MixedContext::sigma_m(&g, m)?;
    let results = items
        .iter()
        .enumerate()
        .map(|(index, a)| {
            let gamma: GammaMembership = in_gamma_m(a, &g, m, s.tol)?;
            let cone: ConeMembership = in_cone(&ctx, g.metric(), a, 0.0)?;
            Ok(ConeItem {
                index,
                input: format_matrix(a),
                member: gamma.member,
                consistent: gamma.member == cone.member || gamma.min_margin().abs() <= s.tol.max(1e-12),
                margins: gamma.margins,
                sigmas: gamma.sigmas,
                roots: cone.roots,
                cone_margin: cone.margin,
            })
        })
        .collect::<Result<Vec<_>, GhxError>>()?;
    let member = results.iter().all(|r| r.member);
    for r in &results {
        eprintln!(
            "cone: matrix {} {} Γ_{m} (min margin {:e})",
            r.index + 1,
            if r.member { "in" } else { "not in" },
            min_f64(r.margins.iter().copied())
        );
    }
    let report = ConeReport {
        n,
        m,
        tol: s.tol,
        metric: format_matrix(g.metric()),
        member,
        results,
    };
    emit("cone", &report, s.json_out.as_deref())?;
    Ok(verdict(member))
}

// ---------------------------------------------------------------- garding

#[derive(Debug, Serialize)]
struct GardingWorst {
    min_relative_gap: f64,
    equality_cases: usize,
}

pub(super) fn garding(args: &CampaignArgs) -> CliResult<i32> {
    let s = Settings::resolve(&args.common)?;
    let opts = GardingOptions {
        cone_tol: s.tol,
        ..GardingOptions::default()
    };
    if let Some(path) = &args.input {
        let bs = read_matrices(path)?;
        let n = common_dim(&bs, path)?;
        if let Some(m) = s.m.filter(|&m| m != bs.len()) {
            return Err(CliError::Usage(format!("--m {m} disagrees with the {} matrices in the file", bs.len())));
        }
        let g = s.metric_for(n)?;
        let report = garding_gap(&bs, &g, &opts)?;
        eprintln!("garding: lhs {:e}, rhs {:e}, holds {}", report.lhs, report.rhs, report.holds);
        emit("garding", &Instance::new(bs.len(), &s, &bs, &g, &report), s.json_out.as_deref())?;
        return Ok(verdict(report.holds));
    }
    let (n, m) = campaign_shape(&s, DEFAULT_N, 1)?;
    let samples = s.samples.unwrap_or(DEFAULT_SAMPLES);
    let outcomes = run_campaign(&s, n, samples, |_, rng, g| {
        let bs: Vec<HermitianForm> = (0..m).map(|_| random_in_gamma(rng, g, m)).collect();
        let report: GardingReport = garding_gap(&bs, g, &opts)?;
        Ok(Sample {
            violated: !report.holds,
            inputs: bs,
            query: None,
            metric: g.metric().clone(),
            detail: report,
        })
    })?;
    let worst = GardingWorst {
        min_relative_gap: min_f64(details(&outcomes).map(|r| r.relative_gap)),
        equality_cases: details(&outcomes).filter(|r| r.equality_witness.is_some()).count(),
    };
    finish("garding", &s, header(&s, n, m, samples), worst, &outcomes)
}

// ---------------------------------------------------------------- hodge

#[derive(Debug, Serialize)]
struct HodgeInstance<'a> {
    signature: Signature,
    lorentzian: bool,
    max_restricted_eigenvalue: f64,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    query: Option<String>,
    #[serde(flatten)]
    instance: Instance<'a, QuadraticReport>,
}

/// Campaign detail: the verdicts without the bulky matrices.
#[derive(Debug, Serialize)]
struct HodgeSummary {
    signature: Signature,
    /// Largest restricted eigenvalue over the spectral scale.
    restricted_ratio: f64,
    /// Smallest `|eigenvalue|` over the spectral scale.
    nonsingular_ratio: f64,
    decomposition_residual: f64,
    primitivity_residual: f64,
    volume: f64,
}

impl HodgeSummary {
    fn of(r: &QuadraticReport) -> Self {
        let scale = r.spectral_scale.max(f64::MIN_POSITIVE);
        Self {
            signature: r.signature,
            restricted_ratio: max_f64(r.restricted_spectrum.iter().copied()) / scale,
            nonsingular_ratio: min_f64(r.eigenvalues.iter().map(|x| x.abs())) / scale,
            decomposition_residual: r.decomposition.as_ref().map_or(0.0, |d| d.residual),
            primitivity_residual: r.primitivity_residual,
            volume: r.volume.unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Serialize)]
struct HodgeWorst {
    signature_failures: usize,
    max_restricted_ratio: f64,
    min_nonsingular_ratio: f64,
    max_decomposition_residual: f64,
    max_primitivity_residual: f64,
}

pub(super) fn hodge(args: &HodgeArgs) -> CliResult<i32> {
    let c = &args.campaign;
    let s = Settings::resolve(&c.common)?;
    if let Some(path) = &c.input {
        let alphas = read_matrices(path)?;
        let n = common_dim(&alphas, path)?;
        let m = alphas.len() + 1;
        if let Some(given) = s.m.filter(|&given| given != m) {
            return Err(CliError::Usage(format!("--m {given} disagrees with the {} slots in the file (m = {m})", alphas.len())));
        }
        let g = s.metric_for(n)?;
        let query = args.query.as_deref().map(read_matrix).transpose()?;
        let report = verify_theorem_a(&alphas, &g, query.as_ref())?;
        let holds = report.holds();
        let max_restricted_eigenvalue = max_f64(report.restricted_spectrum.iter().copied());
        eprintln!(
            "hodge: signature ({}, {}, {}), largest primitive eigenvalue {:e}, holds {holds}",
            report.signature.plus, report.signature.zero, report.signature.minus, max_restricted_eigenvalue
        );
        let body = HodgeInstance {
            signature: report.signature,
            lorentzian: report.signature == Signature::lorentzian(n * n),
            max_restricted_eigenvalue,
            holds,
            query: query.as_ref().map(format_matrix),
            instance: Instance::new(m, &s, &alphas, &g, &report),
        };
        emit("hodge", &body, s.json_out.as_deref())?;
        return Ok(verdict(holds));
    }
    let (n, m) = campaign_shape(&s, DEFAULT_N, 2)?;
    let samples = s.samples.unwrap_or(DEFAULT_SAMPLES);
    let outcomes = run_campaign(&s, n, samples, |_, rng, g| {
        let alphas: Vec<HermitianForm> = (0..m - 1).map(|_| random_in_gamma(rng, g, m)).collect();
        let query = random_hermitian(rng, n);
        let report = verify_theorem_a(&alphas, g, Some(&query))?;
        Ok(Sample {
            violated: !report.holds(),
            detail: HodgeSummary::of(&report),
            inputs: alphas,
            query: Some(query),
            metric: g.metric().clone(),
        })
    })?;
    let lorentzian = Signature::lorentzian(n * n);
    let worst = HodgeWorst {
        signature_failures: details(&outcomes).filter(|d| d.signature != lorentzian).count(),
        max_restricted_ratio: max_f64(details(&outcomes).map(|d| d.restricted_ratio)),
        min_nonsingular_ratio: min_f64(details(&outcomes).map(|d| d.nonsingular_ratio)),
        max_decomposition_residual: max_f64(details(&outcomes).map(|d| d.decomposition_residual)),
        max_primitivity_residual: max_f64(details(&outcomes).map(|d| d.primitivity_residual)),
    };
    finish("hodge", &s, header(&s, n, m, samples), worst, &outcomes)
}

// ---------------------------------------------------------------- logconcavity

#[derive(Debug, Serialize)]
struct LogConcavityInstance<'a> {
    holds: bool,
    consistent: bool,
    #[serde(flatten)]
    instance: Instance<'a, LogConcavity>,
}

#[derive(Debug, Serialize)]
struct LogConcavityWorst {
    /// Smallest `(a_k² − a_{k+1}a_{k−1}) / a_k²`.
    min_relative_gap: f64,
    inconsistent: usize,
}

fn min_relative_step(r: &LogConcavity) -> f64 {
    min_f64(r.steps.iter().map(|st| {
        let ak = r.sequence[st.k];
        st.gap / (ak * ak)
    }))
}

pub(super) fn logconcavity(args: &CampaignArgs) -> CliResult<i32> {
    let s = Settings::resolve(&args.common)?;
    if let Some(path) = &args.input {
        let pair = read_matrices(path)?;
        let n = common_dim(&pair, path)?;
        if pair.len() != 2 {
            return Err(CliError::Input {
                path: path.clone(),
                source: GhxError::ArgumentCount {
                    expected: 2,
                    found: pair.len(),
                },
            });
        }
        let m = s.m.unwrap_or(n);
        let g = s.metric_for(n)?;
        let report = log_concavity(&pair[0], &pair[1], &g, m)?;
        let (holds, consistent) = (report.holds(), report.consistent());
        eprintln!("logconcavity: sequence {:?}, holds {holds}, consistent {consistent}", report.sequence);
        let body = LogConcavityInstance {
            holds,
            consistent,
            instance: Instance::new(m, &s, &pair, &g, &report),
        };
        emit("logconcavity", &body, s.json_out.as_deref())?;
        return Ok(verdict(holds && consistent));
    }
    let (n, m) = campaign_shape(&s, DEFAULT_N, 1)?;
    let samples = s.samples.unwrap_or(DEFAULT_SAMPLES);
    let outcomes = run_campaign(&s, n, samples, |_, rng, g| {
        let alpha = random_in_gamma(rng, g, m);
        let beta = random_in_gamma(rng, g, m);
        let report = log_concavity(&alpha, &beta, g, m)?;
        Ok(Sample {
            violated: !(report.holds() && report.consistent()),
            detail: report,
            inputs: vec![alpha, beta],
            query: None,
            metric: g.metric().clone(),
        })
    })?;
    let worst = LogConcavityWorst {
        min_relative_gap: min_f64(details(&outcomes).map(min_relative_step)),
        inconsistent: details(&outcomes).filter(|r| !r.consistent()).count(),
    };
    finish("logconcavity", &s, header(&s, n, m, samples), worst, &outcomes)
}

// ---------------------------------------------------------------- torus

#[derive(Debug, Serialize)]
struct TorusInstance<'a> {
    grid: usize,
    noise: f64,
    modes: usize,
    seed: u64,
    sample: u64,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshot: Option<String>,
    #[serde(flatten)]
    instance: Instance<'a, TorusTheoremReport>,
}

#[derive(Debug, Serialize)]
struct TorusWorst {
    grid: usize,
    noise: f64,
    modes: usize,
    max_primitivity_residual: f64,
    max_solver_residual: f64,
    /// Largest `|∫Q − Q(class)| / |Q(class)|`.
    max_integrated_mismatch: f64,
    /// Largest pointwise `Q` over its scale.
    max_pointwise_ratio: f64,
}

struct TorusSetup {
    ctx: TorusContext,
    noise: f64,
    modes: usize,
}

fn torus_setup(args: &TorusArgs, s: &Settings, n: usize) -> CliResult<TorusSetup> {
    let ctx = match args.grid.or(s.grid) {
        Some(grid) => TorusContext::new(n, grid)?,
        None => TorusContext::with_default_grid(n)?,
    };
    let noise = args.noise.or(s.noise).unwrap_or(DEFAULT_NOISE);
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(CliError::Usage(format!("--noise must be finite and non-negative, got {noise}")));
    }
    Ok(TorusSetup {
        ctx,
        noise,
        modes: args.modes.or(s.modes).unwrap_or(DEFAULT_MODES),
    })
}

fn potential(setup: &TorusSetup, seed: u64, sample: u64) -> ScalarField {
    ScalarField::random_band_limited(&setup.ctx, &mut noise_stream(seed, sample), setup.modes, setup.noise)
}

fn torus_snapshot(
    stem: &Path,
    setup: &TorusSetup,
    psi: &ScalarField,
    phi: &ScalarField,
    class: &HermitianForm,
) -> CliResult<String> {
    let ctx = &setup.ctx;
    // ψ + φ can cancel to rounding noise, which the band-limit guard rejects
    let mut field = ddc(psi, ctx)?.add(&ddc(phi, ctx)?);
    field.add_constant(class);
    let basis = RealBasis::new(ctx.dim())?;
    let labels: Vec<String> = (0..basis.len()).map(|i| format!("beta.{}", basis.label(i))).collect();
    let mut components: Vec<(&str, &[f64])> = vec![("psi", psi.values()), ("phi", phi.values())];
    for (i, label) in labels.iter().enumerate() {
        components.push((label, field.plane(i)));
    }
    let (bin, _) = write_snapshot(stem, ctx, &components)?;
    Ok(bin.display().to_string())
}

pub(super) fn torus(args: &TorusArgs) -> CliResult<i32> {
    let c = &args.campaign;
    let s = Settings::resolve(&c.common)?;
    if let Some(path) = &c.input {
        let items = read_matrices(path)?;
        let n = common_dim(&items, path)?;
        if items.len() < 2 {
            return Err(CliError::Input {
                path: path.clone(),
                source: GhxError::Precondition("expected α_1..α_{m−1} followed by the class β".into()),
            });
        }
        let (alphas, beta) = items.split_at(items.len() - 1);
        let m = items.len();
        let g = s.metric_for(n)?;
        let setup = torus_setup(args, &s, n)?;
        let sample = args.sample.unwrap_or(0);
        let psi = potential(&setup, s.seed, sample);
        let run = run_theorem_a_torus(alphas, &g, &beta[0], &psi, &setup.ctx)?;
        let report = run.report;
        let snapshot = match &args.snapshot {
            Some(stem) => {
                let class = HermitianForm::from_coords(n, report.class.clone())?;
                Some(torus_snapshot(stem, &setup, &psi, &run.correction, &class)?)
            }
            None => None,
        };
        let holds = report.holds();
        eprintln!(
            "torus: integrated Q {:e}, constant model {:e}, holds {holds}",
            report.integrated_q, report.constant_q
        );
        let body = TorusInstance {
            grid: setup.ctx.grid(),
            noise: setup.noise,
            modes: setup.modes,
            seed: s.seed,
            sample,
            holds,
            snapshot,
            instance: Instance::new(m, &s, &items, &g, &report),
        };
        emit("torus", &body, s.json_out.as_deref())?;
        return Ok(verdict(holds));
    }
    let (n, m) = campaign_shape(&s, DEFAULT_TORUS_N, 2)?;
    let setup = torus_setup(args, &s, n)?;
    let samples = s.samples.unwrap_or(DEFAULT_TORUS_SAMPLES);
    let outcomes = run_campaign(&s, n, samples, |i, rng, g| {
        let psi = potential(&setup, s.seed, i);
        let alphas: Vec<HermitianForm> = (0..m - 1).map(|_| random_in_gamma(rng, g, m)).collect();
        let beta = random_hermitian(rng, n);
        let report = run_theorem_a_torus(&alphas, g, &beta, &psi, &setup.ctx)?.report;
        let mut inputs = alphas;
        inputs.push(beta);
        Ok(Sample {
            violated: !report.holds(),
            detail: report,
            inputs,
            query: None,
            metric: g.metric().clone(),
        })
    })?;
    let worst = TorusWorst {
        grid: setup.ctx.grid(),
        noise: setup.noise,
        modes: setup.modes,
        max_primitivity_residual: max_f64(details(&outcomes).map(|r| r.primitivity_residual)),
        max_solver_residual: max_f64(details(&outcomes).map(|r| r.solver_residual)),
        max_integrated_mismatch: max_f64(
            details(&outcomes).map(|r| (r.integrated_q - r.constant_q).abs() / r.constant_q.abs().max(f64::MIN_POSITIVE)),
        ),
        max_pointwise_ratio: max_f64(details(&outcomes).map(|r| r.max_pointwise_q / r.pointwise_scale)),
    };
    finish("torus", &s, header(&s, n, m, samples), worst, &outcomes)
}
