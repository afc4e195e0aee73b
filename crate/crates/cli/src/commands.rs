//! Report-producing commands. Each is a pure function of its arguments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use stable_exit::pvquad::{
    apply_k, apply_k_checked, apply_k_nu, apply_k_nu_checked, apply_kv, getoor_identity_check,
};
use stable_exit::simulate::{estimate_mean_exit, ExitTimeConfig, ExitTimeEstimate, Sampler};
use stable_exit::{
    mean_exit_closed_form, profile, Direction, Error, LinearMap, PvQuadResult, PvQuadSpec,
    SpectralMeasure, StabilityIndex,
};

use crate::config::{ExperimentConfig, SamplerKind, DEFAULT_DELTA_FRACTION};
use crate::error::{config, Result};
use crate::report::{ExperimentReport, MonteCarloDetail, ReportRow};

/// Index grid shared by the quadrature sweeps.
pub const ALPHA_GRID: [f64; 7] = [0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 1.8];

pub const GETOOR_TOLERANCE: f64 = 1e-6;
pub const LEMMA_TOLERANCE: f64 = 2e-6;
/// Generator cross-check tolerance relative to `max(|μ|, |closed form|)`.
pub const GENERATOR_TOLERANCE: f64 = 1e-5;
/// Closed-form values are exact up to this many ulps of `|μ|`.
const CLOSED_FORM_ULPS: f64 = 4.0;

fn index(alpha: f64, spec: &PvQuadSpec) -> Result<StabilityIndex> {
    StabilityIndex::new(alpha)
        .and_then(|a| a.ensure_supported(spec.supported))
        .map_err(|e| config(e.to_string()))
}

fn indices(alphas: &[f64], spec: &PvQuadSpec) -> Result<Vec<StabilityIndex>> {
    if alphas.is_empty() {
        return Err(config("alpha grid is empty"));
    }
    alphas.iter().map(|&a| index(a, spec)).collect()
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(config(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

fn spec_json(spec: &PvQuadSpec) -> serde_json::Value {
    json!({
        "abs_tol": spec.abs_tol,
        "rel_tol": spec.rel_tol,
        "max_subdivisions": spec.max_subdivisions,
        "inner_cutoff": spec.inner_cutoff,
        "tail_cutoff": spec.tail_cutoff,
    })
}

/// Turns a quadrature outcome into a row. Non-convergence fails the row and
/// keeps the partial value; any other error is returned.
fn quadrature_row(
    label: String,
    expected: f64,
    tolerance: f64,
    result: stable_exit::Result<PvQuadResult>,
) -> Result<ReportRow> {
    match result {
        Ok(r) => Ok(ReportRow::compare(label, expected, r.value, tolerance)),
        Err(Error::QuadratureFailure { value, .. }) => Ok(ReportRow::failed(
            format!("{label} (not converged)"),
            expected,
            value,
            tolerance,
        )),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone)]
pub struct GetoorArgs {
    pub alphas: Vec<f64>,
    /// Evaluation points in units of `r`; each must lie in `(-1, 1)`.
    pub u_fractions: Vec<f64>,
    pub radii: Vec<f64>,
    pub spec: PvQuadSpec,
}

impl Default for GetoorArgs {
    fn default() -> Self {
        Self {
            alphas: ALPHA_GRID.to_vec(),
            u_fractions: vec![0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9],
            radii: vec![0.5, 1.0, 2.0],
            spec: PvQuadSpec::default(),
        }
    }
}

pub fn cmd_verify_getoor(args: &GetoorArgs) -> Result<ExperimentReport> {
    let alphas = indices(&args.alphas, &args.spec)?;
    for &r in &args.radii {
        positive("r", r)?;
    }
    if let Some(u) = args.u_fractions.iter().find(|u| !(u.abs() < 1.0)) {
        return Err(config(format!("u = {u}·r lies outside (-r, r)")));
    }
    let mut cases = Vec::new();
    for &alpha in &alphas {
        for &r in &args.radii {
            for &u in &args.u_fractions {
                cases.push((alpha, r, u * r));
            }
        }
    }
    let rows = cases
        .par_iter()
        .map(|&(alpha, r, u)| {
            let label = format!("alpha={} r={r} u={u}", alpha.get());
            quadrature_row(
                label,
                -1.0,
                GETOOR_TOLERANCE,
                getoor_identity_check(u, r, alpha, &args.spec),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let inputs = json!({
        "alphas": args.alphas,
        "u_fractions": args.u_fractions,
        "radii": args.radii,
        "spec": spec_json(&args.spec),
    });
    Ok(ExperimentReport::new("verify-getoor", inputs, rows))
}

#[derive(Debug, Clone)]
pub struct LemmaArgs {
    pub dims: Vec<usize>,
    /// Random cases per dimension.
    pub cases: usize,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub spec: PvQuadSpec,
}

impl LemmaArgs {
    pub fn new(seed: u64) -> Self {
        Self {
            dims: vec![1, 2, 3, 5],
            cases: 50,
            seed,
            alphas: ALPHA_GRID.to_vec(),
            spec: PvQuadSpec::default(),
        }
    }
}

/// Largest dimension accepted by the lemma sweep.
pub const MAX_LEMMA_DIM: usize = 64;

fn gaussian_vector(rng: &mut ChaCha8Rng, d: usize) -> (Vec<f64>, f64) {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return (v, norm);
        }
    }
}

struct LemmaCase {
    label: String,
    v: Vec<f64>,
    x: Vec<f64>,
    r: f64,
    alpha: StabilityIndex,
}

fn lemma_cases(args: &LemmaArgs, alphas: &[StabilityIndex]) -> Vec<LemmaCase> {
    let mut cases = Vec::new();
    for &alpha in alphas {
        let a = alpha.get();
        cases.push(LemmaCase {
            label: format!("alpha={a} v=e1 x=0"),
            v: vec![1.0],
            x: vec![0.0],
            r: 1.0,
            alpha,
        });
        cases.push(LemmaCase {
            label: format!("alpha={a} v=2e1 x=0"),
            v: vec![2.0],
            x: vec![0.0],
            r: 1.0,
            alpha,
        });
        cases.push(LemmaCase {
            label: format!("alpha={a} v=e1 x=(0.3,0.4)"),
            v: vec![1.0, 0.0],
            x: vec![0.3, 0.4],
            r: 1.0,
            alpha,
        });
        cases.push(LemmaCase {
            label: format!("alpha={a} v=e2 x=(-0.4,0.3) rotated"),
            v: vec![0.0, 1.0],
            x: vec![-0.4, 0.3],
            r: 1.0,
            alpha,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for &d in &args.dims {
        for i in 0..args.cases {
            let alpha = alphas[i % alphas.len()];
            let r = rng.random_range(0.5..2.0);
            let (v, v_norm) = gaussian_vector(&mut rng, d);
            let v_len = rng.random_range(0.5..2.0);
            let v: Vec<f64> = v.iter().map(|c| c * v_len / v_norm).collect();
            let (dir, dir_norm) = gaussian_vector(&mut rng, d);
            let radius = 0.95 * r * rng.random::<f64>().powf(1.0 / d as f64);
            let x: Vec<f64> = dir.iter().map(|c| c * radius / dir_norm).collect();
            cases.push(LemmaCase {
                label: format!("d={d} case={i} alpha={}", alpha.get()),
                v,
                x,
                r,
                alpha,
            });
        }
    }
    cases
}

pub fn cmd_verify_lemma(args: &LemmaArgs) -> Result<ExperimentReport> {
    let alphas = indices(&args.alphas, &args.spec)?;
    if let Some(d) = args.dims.iter().find(|&&d| d == 0 || d > MAX_LEMMA_DIM) {
        return Err(config(format!("dimension {d} outside 1..={MAX_LEMMA_DIM}")));
    }
    let cases = lemma_cases(args, &alphas);
    let rows = cases
        .par_iter()
        .map(|c| {
            let v_norm = c.v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let expected = -v_norm.powf(c.alpha.get());
            let result = apply_kv(&c.v, &c.x, c.r, c.alpha, &args.spec);
            quadrature_row(c.label.clone(), expected, LEMMA_TOLERANCE, result)
        })
        .collect::<Result<Vec<_>>>()?;
    let inputs = json!({
        "dims": args.dims,
        "cases": args.cases,
        "seed": args.seed,
        "alphas": args.alphas,
        "spec": spec_json(&args.spec),
    });
    Ok(ExperimentReport::new("verify-lemma", inputs, rows))
}

#[derive(Debug, Clone)]
pub struct GeneratorArgs {
    pub alphas: Vec<f64>,
    pub spec: PvQuadSpec,
    /// Measure swept in addition to the built-in suite.
    pub extra: Option<SpectralMeasure>,
}

impl Default for GeneratorArgs {
    fn default() -> Self {
        Self {
            alphas: ALPHA_GRID.to_vec(),
            spec: PvQuadSpec::default(),
            extra: None,
        }
    }
}

fn generator_suite() -> stable_exit::Result<Vec<(String, SpectralMeasure)>> {
    let skew = SpectralMeasure::from_pairs(
        3,
        &[
            (Direction::normalize(&[1.0, 2.0, 2.0])?, 0.7),
            (Direction::normalize(&[0.0, 1.0, -1.0])?, 1.3),
            (Direction::axis(3, 2), 0.5),
        ],
    )?;
    Ok(vec![
        ("antipodal d=1".into(), SpectralMeasure::antipodal(1, 1.0)?),
        (
            "axis cross d=2".into(),
            SpectralMeasure::axis_cross(2, 1.0)?,
        ),
        ("skew d=3".into(), skew),
        ("isotropic d=2".into(), SpectralMeasure::isotropic(2, 4.0)?),
        ("isotropic d=3".into(), SpectralMeasure::isotropic(3, 2.0)?),
    ])
}

fn generator_maps(d: usize) -> Vec<(&'static str, LinearMap)> {
    let mut maps = vec![
        ("identity", LinearMap::identity(d)),
        ("2I", LinearMap::scaled_identity(d, 2.0)),
    ];
    if d >= 2 {
        let (s, c) = 0.7f64.sin_cos();
        let mut rot: Vec<Vec<f64>> = LinearMap::identity(d).rows().to_vec();
        rot[0][0] = c;
        rot[0][1] = -s;
        rot[1][0] = s;
        rot[1][1] = c;
        maps.push(("rotation", LinearMap::new(rot).expect("square")));
        let shear: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        if i == j {
                            1.0
                        } else if j > i {
                            0.5
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        maps.push(("shear", LinearMap::new(shear).expect("square")));
    }
    maps
}

fn generator_point(d: usize) -> Vec<f64> {
    (0..d)
        .map(|i| 0.3 * (-1f64).powi(i as i32) / (d as f64).sqrt())
        .collect()
}

fn generator_rows(
    name: &str,
    mu: &SpectralMeasure,
    alpha: StabilityIndex,
    spec: &PvQuadSpec,
) -> Result<Vec<ReportRow>> {
    let d = mu.dim();
    let x = generator_point(d);
    let r = 1.0;
    let a = alpha.get();
    let mass = mu.total_mass();
    let exact_tol = CLOSED_FORM_ULPS * f64::EPSILON * mass;
    let mut rows = Vec::new();

    let k_nu = apply_k_nu(mu, &x, r, alpha)?;
    rows.push(ReportRow::compare(
        format!("{name} alpha={a} K_nu closed form"),
        -0.5 * mass,
        k_nu,
        exact_tol,
    ));
    match apply_k_nu_checked(mu, &x, r, alpha, spec) {
        Ok(check) => rows.push(ReportRow::compare(
            format!("{name} alpha={a} K_nu quadrature"),
            check.closed_form,
            check.quadrature,
            GENERATOR_TOLERANCE * mass,
        )),
        Err(Error::QuadratureFailure { value, .. }) => rows.push(ReportRow::failed(
            format!("{name} alpha={a} K_nu quadrature (not converged)"),
            k_nu,
            value,
            GENERATOR_TOLERANCE * mass,
        )),
        Err(e) => return Err(e.into()),
    }

    if mu.atoms().is_none() {
        return Ok(rows);
    }
    for (map_name, map) in generator_maps(d) {
        let closed = apply_k(mu, &map, &x, r, alpha)?;
        if map_name == "identity" {
            rows.push(ReportRow::compare(
                format!("{name} alpha={a} K identity closed form"),
                -mass,
                closed,
                exact_tol,
            ));
        }
        let tolerance = GENERATOR_TOLERANCE * mass.max(closed.abs());
        let label = format!("{name} alpha={a} K {map_name} quadrature");
        match apply_k_checked(mu, &map, &x, r, alpha, spec) {
            Ok(check) => rows.push(ReportRow::compare(
                label,
                check.closed_form,
                check.quadrature,
                tolerance,
            )),
            Err(Error::QuadratureFailure { value, .. }) => rows.push(ReportRow::failed(
                format!("{label} (not converged)"),
                closed,
                value,
                tolerance,
            )),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(rows)
}

pub fn cmd_verify_generator(args: &GeneratorArgs) -> Result<ExperimentReport> {
    let alphas = indices(&args.alphas, &args.spec)?;
    let mut measures = generator_suite()?;
    if let Some(extra) = &args.extra {
        if !extra.is_symmetric() {
            return Err(config("the supplied spectral measure is not symmetric"));
        }
        measures.push(("supplied".into(), extra.clone()));
    }
    let cases: Vec<(&str, &SpectralMeasure, StabilityIndex)> = measures
        .iter()
        .flat_map(|(name, mu)| alphas.iter().map(move |&a| (name.as_str(), mu, a)))
        .collect();
    let rows: Vec<Vec<ReportRow>> = cases
        .par_iter()
        .map(|&(name, mu, alpha)| generator_rows(name, mu, alpha, &args.spec))
        .collect::<Result<_>>()?;
    let inputs = json!({
        "alphas": args.alphas,
        "measures": measures.iter().map(|(name, mu)| json!({"name": name, "mu": mu.to_document()})).collect::<Vec<_>>(),
        "spec": spec_json(&args.spec),
    });
    Ok(ExperimentReport::new(
        "verify-generator",
        inputs,
        rows.concat(),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormArgs {
    pub alphas: Vec<f64>,
    /// Start points `s·e_1`.
    pub s_values: Vec<f64>,
    pub r: f64,
    pub mass: f64,
    pub d: usize,
}

impl Default for ClosedFormArgs {
    fn default() -> Self {
        Self {
            alphas: ALPHA_GRID.to_vec(),
            s_values: vec![0.0, 0.25, 0.5, 0.75],
            r: 1.0,
            mass: 4.0,
            d: 2,
        }
    }
}

/// Relative agreement required between the two closed-form routes.
const CLOSED_FORM_ROUTES: f64 = 1e-12;

/// Mean exit times from the `κ_α` formula, each checked against
/// `S_r(x) / (|μ|/2)`.
pub fn cmd_closed_form(args: &ClosedFormArgs) -> Result<ExperimentReport> {
    positive("r", args.r)?;
    positive("mass", args.mass)?;
    if args.d == 0 || args.d > stable_exit::spectral::MAX_DIMENSION {
        return Err(config(format!("dimension {} is not supported", args.d)));
    }
    if args.alphas.is_empty() {
        return Err(config("alpha grid is empty"));
    }
    if let Some(s) = args.s_values.iter().find(|s| !(s.abs() < args.r)) {
        return Err(config(format!("s = {s} lies outside (-r, r)")));
    }
    let mut rows = Vec::new();
    for &a in &args.alphas {
        let alpha = StabilityIndex::new(a).map_err(|e| config(e.to_string()))?;
        for &s in &args.s_values {
            let mut x = vec![0.0; args.d];
            x[0] = s;
            let expected = mean_exit_closed_form(&x, args.r, alpha, args.mass)?;
            let observed = profile(&x, args.r, alpha)? / (0.5 * args.mass);
            rows.push(ReportRow::compare(
                format!("alpha={a} s={s}"),
                expected,
                observed,
                CLOSED_FORM_ROUTES * expected.abs(),
            ));
        }
    }
    let inputs = serde_json::to_value(args)?;
    Ok(ExperimentReport::new("closed-form", inputs, rows))
}

/// Default discretisation-bias allowance as a fraction of the expected mean.
pub const DEFAULT_BIAS_FRACTION: f64 = 0.01;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn estimate_row(
    label: String,
    run: &ExitTimeConfig,
    est: &ExitTimeEstimate,
    bias_fraction: f64,
) -> Result<ReportRow> {
    let expected = run.closed_form_mean()?;
    let detail = MonteCarloDetail {
        x0_norm: norm(&run.x0),
        alpha: run.alpha.get(),
        mu_total: run.mu.total_mass(),
        stderr: est.stderr,
        n_truncated: est.n_truncated,
        bias_budget: bias_fraction * expected,
    };
    let mut row = ReportRow::monte_carlo(label, expected, est.mean, detail);
    if est.unreliable {
        row.label
            .push_str(" (unreliable: too many truncated paths)");
        row.pass = false;
    }
    Ok(row)
}

/// Row comparing two independent estimates; expected difference zero.
fn difference_row(
    label: String,
    a: &ExitTimeEstimate,
    b: &ExitTimeEstimate,
    template: &MonteCarloDetail,
) -> ReportRow {
    let detail = MonteCarloDetail {
        stderr: a.stderr.hypot(b.stderr),
        n_truncated: a.n_truncated + b.n_truncated,
        bias_budget: 0.0,
        ..template.clone()
    };
    ReportRow::monte_carlo(label, 0.0, a.mean - b.mean, detail)
}

#[derive(Debug, Clone)]
pub struct EstimateArgs {
    pub config: ExperimentConfig,
    /// Overrides the seed in the configuration.
    pub seed: Option<u64>,
    pub bias_fraction: f64,
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<ExperimentReport> {
    let mut cfg = args.config.clone();
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if !(args.bias_fraction.is_finite() && args.bias_fraction >= 0.0) {
        return Err(config("bias budget must be non-negative"));
    }
    let runs = cfg.exit_configs()?;
    let mut rows = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        let est = estimate_mean_exit(run)?;
        rows.push(estimate_row(
            format!("x0[{i}]"),
            run,
            &est,
            args.bias_fraction,
        )?);
    }
    let inputs = json!({
        "config": cfg,
        "bias_fraction": args.bias_fraction,
    });
    Ok(ExperimentReport::new("estimate", inputs, rows))
}

#[derive(Debug, Clone, Serialize)]
pub struct MassEquivalenceArgs {
    pub mass: f64,
    pub alpha: f64,
    pub d: usize,
    pub r: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Grid step as a fraction of the closed-form mean at the origin.
    pub h_factor: f64,
    /// Sampler for the two discrete measures; the isotropic one always uses
    /// the compound Poisson scheme.
    pub sampler: SamplerKind,
    pub delta: Option<f64>,
    /// Masses of the antipodal, axis-cross and isotropic measures; all equal
    /// to `mass` unless overridden.
    pub masses: Option<[f64; 3]>,
    pub bias_fraction: f64,
}

impl MassEquivalenceArgs {
    pub fn new(mass: f64, alpha: f64, d: usize, r: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            mass,
            alpha,
            d,
            r,
            n_paths,
            seed,
            h_factor: 1e-3,
            sampler: SamplerKind::Cpg,
            delta: None,
            masses: None,
            bias_fraction: DEFAULT_BIAS_FRACTION,
        }
    }
}

pub fn cmd_mass_equivalence(args: &MassEquivalenceArgs) -> Result<ExperimentReport> {
    positive("mass", args.mass)?;
    positive("r", args.r)?;
    positive("h factor", args.h_factor)?;
    if args.d == 0 || args.d > stable_exit::spectral::MAX_DIMENSION {
        return Err(config(format!("dimension {} is not supported", args.d)));
    }
    let alpha = StabilityIndex::new(args.alpha).map_err(|e| config(e.to_string()))?;
    let [m_anti, m_cross, m_iso] = args.masses.unwrap_or([args.mass; 3]);
    for m in [m_anti, m_cross, m_iso] {
        positive("mass", m)?;
    }
    let measures = [
        (
            "antipodal",
            SpectralMeasure::antipodal(args.d, 0.5 * m_anti)?,
        ),
        (
            "axis cross",
            SpectralMeasure::axis_cross(args.d, m_cross / (2 * args.d) as f64)?,
        ),
        ("isotropic", SpectralMeasure::isotropic(args.d, m_iso)?),
    ];
    let origin = vec![0.0; args.d];
    let h = args.h_factor * mean_exit_closed_form(&origin, args.r, alpha, args.mass)?;
    let delta = args.delta.unwrap_or(DEFAULT_DELTA_FRACTION * args.r);
    let cpg = Sampler::CompoundPoissonGaussian { delta };
    let mut runs = Vec::new();
    let mut estimates = Vec::new();
    for (i, (_, mu)) in measures.iter().enumerate() {
        let sampler = match (args.sampler, mu.is_isotropic()) {
            (SamplerKind::Exact, false) => Sampler::ExactIncrement,
            _ => cpg,
        };
        let seed = args.seed.wrapping_add(i as u64);
        let run = ExitTimeConfig::new(
            origin.clone(),
            args.r,
            alpha,
            mu.clone(),
            sampler,
            h,
            args.n_paths,
            seed,
        )
        .map_err(|e| config(e.to_string()))?;
        estimates.push(estimate_mean_exit(&run)?);
        runs.push(run);
    }
    let mut rows = Vec::new();
    for ((name, _), (run, est)) in measures.iter().zip(runs.iter().zip(&estimates)) {
        rows.push(estimate_row(
            name.to_string(),
            run,
            est,
            args.bias_fraction,
        )?);
    }
    let template = rows[0]
        .monte_carlo
        .clone()
        .expect("estimate rows carry detail");
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let label = format!("{} - {}", measures[i].0, measures[j].0);
        rows.push(difference_row(
            label,
            &estimates[i],
            &estimates[j],
            &template,
        ));
    }
    let inputs = serde_json::to_value(args)?;
    Ok(ExperimentReport::new("mass-equivalence", inputs, rows))
}

#[derive(Debug, Clone)]
pub struct ScalingArgs {
    pub config: ExperimentConfig,
    pub lambda: f64,
    pub seed: Option<u64>,
}

/// Runs the configuration at `(x0, r)` and at `(λ x0, λ r)` with the grid
/// and horizon scaled by `λ^α`, and compares the ratio of means with `λ^α`.
/// The scaled run uses the next seed so the two estimates are independent.
pub fn cmd_scaling_check(args: &ScalingArgs) -> Result<ExperimentReport> {
    let lambda = positive("lambda", args.lambda)?;
    let mut cfg = args.config.clone();
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let base_runs = cfg.exit_configs()?;
    let factor = lambda.powf(cfg.alpha);
    let mut rows = Vec::new();
    for (i, base) in base_runs.iter().enumerate() {
        let sampler = match base.sampler {
            Sampler::CompoundPoissonGaussian { delta } => Sampler::CompoundPoissonGaussian {
                delta: lambda * delta,
            },
            s => s,
        };
        let scaled = ExitTimeConfig::new(
            base.x0.iter().map(|c| lambda * c).collect(),
            lambda * base.r,
            base.alpha,
            base.mu.clone(),
            sampler,
            factor * base.h,
            base.n_paths,
            base.seed.wrapping_add(1),
        )
        .and_then(|c| c.with_t_max(factor * base.t_max))
        .map_err(|e| config(e.to_string()))?;
        let est_base = estimate_mean_exit(base)?;
        let est_scaled = estimate_mean_exit(&scaled)?;
        let base_row = estimate_row(
            format!("x0[{i}] base"),
            base,
            &est_base,
            DEFAULT_BIAS_FRACTION,
        )?;
        let scaled_row = estimate_row(
            format!("x0[{i}] scaled"),
            &scaled,
            &est_scaled,
            DEFAULT_BIAS_FRACTION,
        )?;
        let ratio = est_scaled.mean / est_base.mean;
        let rel = (est_base.stderr / est_base.mean).hypot(est_scaled.stderr / est_scaled.mean);
        let mut detail = base_row
            .monte_carlo
            .clone()
            .expect("estimate rows carry detail");
        detail.stderr = factor * rel;
        detail.n_truncated = est_base.n_truncated + est_scaled.n_truncated;
        detail.bias_budget = 0.0;
        rows.push(base_row);
        rows.push(scaled_row);
        rows.push(ReportRow::monte_carlo(
            format!("x0[{i}] ratio"),
            factor,
            ratio,
            detail,
        ));
    }
    let inputs = json!({
        "config": cfg,
        "lambda": lambda,
    });
    Ok(ExperimentReport::new("scaling-check", inputs, rows))
}
