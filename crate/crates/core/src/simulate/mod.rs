//! Monte Carlo estimation of mean exit times from a ball.
//!
//! Two path schemes are provided:
//!
//! * **exact increments** for discrete spectral measures. A symmetric pair
//!   `{±z_i}` with mass `m_i` on each atom contributes an independent
//!   one-dimensional stable driver along `z_i`, so increments over a grid
//!   step are sampled exactly and the exit is checked at grid times;
//! * **compound Poisson + Gaussian** for any symmetric measure. Jumps larger
//!   than `δ` arrive at rate `ν(|y| > δ)` and are drawn exactly; the
//!   remaining small-jump activity is replaced by a Brownian motion with the
//!   same covariance. The exit is checked at grid times and at every jump.
//!
//! Each path draws from its own ChaCha8 stream derived from
//! `(seed, path index)`, and per-path samples are reduced in path order, so
//! estimates do not depend on the number of worker threads.

pub mod stable;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::closed_form::{check_radius, mean_exit_closed_form, norm_sq};
use crate::error::{Error, Result};
use crate::index::{StabilityIndex, SupportedRange};
use crate::spectral::{small_jump_radial_factor, DirectionSampler, SpectralMeasure};

use stable::SymmetricStable;
pub use stable::{c1, sample_sas_1d, StableScale};

/// Default horizon in units of the closed-form mean exit time.
pub const DEFAULT_HORIZON_FACTOR: f64 = 50.0;

/// Truncated fraction above which an estimate is flagged unreliable.
pub const MAX_RELIABLE_TRUNCATION: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sampler {
    #[serde(rename = "exact")]
    ExactIncrement,
    #[serde(rename = "cpg")]
    CompoundPoissonGaussian { delta: f64 },
}

/// Everything that determines a Monte Carlo exit-time estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeConfig {
    pub x0: Vec<f64>,
    pub r: f64,
    pub alpha: StabilityIndex,
    pub mu: SpectralMeasure,
    pub sampler: Sampler,
    /// Grid step.
    pub h: f64,
    pub t_max: f64,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub supported: SupportedRange,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExitTimeConfig {
    /// Builds and validates a configuration whose horizon is
    /// [`DEFAULT_HORIZON_FACTOR`] times the closed-form mean.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        x0: Vec<f64>,
        r: f64,
        alpha: StabilityIndex,
        mu: SpectralMeasure,
        sampler: Sampler,
        h: f64,
        n_paths: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut config = Self {
            x0,
            r,
            alpha,
            mu,
            sampler,
            h,
            t_max: f64::INFINITY,
            n_paths,
            seed,
            supported: SupportedRange::default(),
        };
        config.t_max = DEFAULT_HORIZON_FACTOR * config.closed_form_mean()?;
        config.validate()?;
        Ok(config)
    }

    /// Closed-form mean exit time for this configuration.
    pub fn closed_form_mean(&self) -> Result<f64> {
        check_radius(self.r)?;
        if self.x0.len() != self.mu.dim() {
            return Err(config_error(format!(
                "x0 has dimension {}, spectral measure has {}",
                self.x0.len(),
                self.mu.dim()
            )));
        }
        mean_exit_closed_form(&self.x0, self.r, self.alpha, self.mu.total_mass())
    }

    pub fn with_t_max(mut self, t_max: f64) -> Result<Self> {
        self.t_max = t_max;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.ensure_supported(self.supported)?;
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(config_error(format!(
                "radius must be positive, got {}",
                self.r
            )));
        }
        if self.x0.len() != self.mu.dim() {
            return Err(config_error(format!(
                "x0 has dimension {}, spectral measure has {}",
                self.x0.len(),
                self.mu.dim()
            )));
        }
        if self.x0.iter().any(|c| !c.is_finite()) || !(norm_sq(&self.x0) < self.r * self.r) {
            return Err(config_error("x0 must lie strictly inside the ball"));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(config_error(format!(
                "step must be positive, got {}",
                self.h
            )));
        }
        if !(self.t_max.is_finite() && self.h <= self.t_max) {
            return Err(config_error(format!(
                "horizon {} must be finite and at least the step {}",
                self.t_max, self.h
            )));
        }
        if self.n_paths == 0 {
            return Err(config_error("n_paths must be positive"));
        }
        if !self.mu.is_symmetric() {
            return Err(Error::Asymmetric);
        }
        match self.sampler {
            Sampler::ExactIncrement => {
                if self.mu.is_isotropic() {
                    return Err(config_error(
                        "the exact-increment sampler needs a discrete spectral measure",
                    ));
                }
            }
            Sampler::CompoundPoissonGaussian { delta } => {
                if !(delta.is_finite() && delta > 0.0 && delta <= 0.1 * self.r) {
                    return Err(config_error(format!(
                        "jump threshold must lie in (0, r/10], got {delta}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Short hex digest of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("configuration serialises");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    fn max_steps(&self) -> u64 {
        (self.t_max / self.h).floor() as u64
    }
}

/// Outcome of one path: the exit time, or the horizon if the path was
/// still inside when it was reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitSample {
    pub time: f64,
    pub truncated: bool,
}

impl ExitSample {
    fn exited(time: f64) -> Self {
        Self {
            time,
            truncated: false,
        }
    }

    fn truncated(time: f64) -> Self {
        Self {
            time,
            truncated: true,
        }
    }
}

/// Random stream for path `path_id`.
pub fn path_rng(seed: u64, path_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_id);
    rng
}

struct ExactKernel {
    directions: Vec<Vec<f64>>,
    scales: Vec<f64>,
    stable: SymmetricStable,
}

impl ExactKernel {
    fn new(config: &ExitTimeConfig, dt: f64) -> Result<Self> {
        let pairs = config.mu.pairs()?;
        let mut directions = Vec::with_capacity(pairs.len());
        let mut scales = Vec::with_capacity(pairs.len());
        for (z, m) in pairs {
            // the pair ±z with mass m each is a line density m |w|^{-1-α}
            scales.push(StableScale::for_increment(config.alpha, m, dt)?.get());
            directions.push(z.coords().to_vec());
        }
        Ok(Self {
            directions,
            scales,
            stable: SymmetricStable::new(config.alpha),
        })
    }

    #[inline]
    fn add_increment<R: Rng + ?Sized>(&self, rng: &mut R, x: &mut [f64]) {
        for (z, sigma) in self.directions.iter().zip(&self.scales) {
            let xi = sigma * self.stable.sample(rng);
            for (xj, zj) in x.iter_mut().zip(z) {
                *xj += xi * zj;
            }
        }
    }
}

fn exits(x: &[f64], r_sq: f64) -> bool {
    norm_sq(x) >= r_sq
}

/// One exit-time sample with exact stable increments on the grid `k h`.
pub fn simulate_exit_exact<R: Rng + ?Sized>(
    config: &ExitTimeConfig,
    rng: &mut R,
) -> Result<ExitSample> {
    config.validate()?;
    if config.sampler != Sampler::ExactIncrement {
        return Err(config_error(
            "configuration does not select the exact-increment sampler",
        ));
    }
    let kernel = ExactKernel::new(config, config.h)?;
    Ok(run_exact(config, &kernel, rng))
}

fn run_exact<R: Rng + ?Sized>(
    config: &ExitTimeConfig,
    kernel: &ExactKernel,
    rng: &mut R,
) -> ExitSample {
    let r_sq = config.r * config.r;
    let mut x = config.x0.clone();
    for k in 1..=config.max_steps() {
        kernel.add_increment(rng, &mut x);
        if exits(&x, r_sq) {
            return ExitSample::exited(k as f64 * config.h);
        }
    }
    ExitSample::truncated(config.t_max)
}

/// Exact-increment paths on the grids `h` and `h/2` driven by the same
/// noise: each coarse increment is the sum of two fine ones.
fn run_exact_coupled<R: Rng + ?Sized>(
    config: &ExitTimeConfig,
    fine: &ExactKernel,
    rng: &mut R,
) -> (ExitSample, ExitSample) {
    let r_sq = config.r * config.r;
    let d = config.x0.len();
    let mut coarse_x = config.x0.clone();
    let mut fine_x = config.x0.clone();
    let mut step = vec![0.0; d];
    let mut sub_step = vec![0.0; d];
    let mut coarse_exit = None;
    let mut fine_exit = None;
    let half = 0.5 * config.h;
    for k in 1..=config.max_steps() {
        step.iter_mut().for_each(|s| *s = 0.0);
        for sub in 0..2u64 {
            sub_step.iter_mut().for_each(|s| *s = 0.0);
            fine.add_increment(rng, &mut sub_step);
            for j in 0..d {
                step[j] += sub_step[j];
            }
            if fine_exit.is_none() {
                for j in 0..d {
                    fine_x[j] += sub_step[j];
                }
                if exits(&fine_x, r_sq) {
                    fine_exit = Some((2 * k - 1 + sub) as f64 * half);
                }
            }
        }
        if coarse_exit.is_none() {
            for j in 0..d {
                coarse_x[j] += step[j];
            }
            if exits(&coarse_x, r_sq) {
                coarse_exit = Some(k as f64 * config.h);
            }
        }
        if coarse_exit.is_some() && fine_exit.is_some() {
            break;
        }
    }
    let wrap = |t: Option<f64>| t.map_or(ExitSample::truncated(config.t_max), ExitSample::exited);
    (wrap(coarse_exit), wrap(fine_exit))
}

enum Diffusion {
    Pairs {
        directions: Vec<Vec<f64>>,
        coeffs: Vec<f64>,
    },
    Isotropic {
        coeff: f64,
    },
}

struct CpgKernel<'a> {
    intensity: f64,
    delta: f64,
    alpha: StabilityIndex,
    jumps: DirectionSampler<'a>,
    diffusion: Diffusion,
}

impl<'a> CpgKernel<'a> {
    fn new(config: &'a ExitTimeConfig, delta: f64) -> Result<Self> {
        let radial = small_jump_radial_factor(config.alpha, delta);
        let diffusion = if config.mu.is_isotropic() {
            Diffusion::Isotropic {
                coeff: (radial * config.mu.total_mass() / config.mu.dim() as f64).sqrt(),
            }
        } else {
            // covariance per unit time: radial Σ_pairs 2 m_i z_i z_iᵀ
            let pairs = config.mu.pairs()?;
            Diffusion::Pairs {
                coeffs: pairs
                    .iter()
                    .map(|(_, m)| (2.0 * m * radial).sqrt())
                    .collect(),
                directions: pairs
                    .into_iter()
                    .map(|(z, _)| z.coords().to_vec())
                    .collect(),
            }
        };
        Ok(Self {
            intensity: config.mu.big_jump_intensity(config.alpha, delta)?,
            delta,
            alpha: config.alpha,
            jumps: DirectionSampler::new(&config.mu),
            diffusion,
        })
    }

    fn diffuse<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R, x: &mut [f64]) {
        if dt <= 0.0 {
            return;
        }
        let root = dt.sqrt();
        match &self.diffusion {
            Diffusion::Pairs { directions, coeffs } => {
                for (z, c) in directions.iter().zip(coeffs) {
                    let g: f64 = rng.sample(StandardNormal);
                    let scale = root * c * g;
                    for (xj, zj) in x.iter_mut().zip(z) {
                        *xj += scale * zj;
                    }
                }
            }
            Diffusion::Isotropic { coeff } => {
                for xj in x.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *xj += root * coeff * g;
                }
            }
        }
    }

    fn next_arrival<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = rng.sample(Exp1);
        e / self.intensity
    }
}

/// One exit-time sample from the compound Poisson + Gaussian scheme.
pub fn simulate_exit_cpg<R: Rng + ?Sized>(
    config: &ExitTimeConfig,
    rng: &mut R,
) -> Result<ExitSample> {
    config.validate()?;
    let Sampler::CompoundPoissonGaussian { delta } = config.sampler else {
        return Err(config_error(
            "configuration does not select the compound Poisson sampler",
        ));
    };
    let kernel = CpgKernel::new(config, delta)?;
    Ok(run_cpg(config, &kernel, rng))
}

fn run_cpg<R: Rng + ?Sized>(
    config: &ExitTimeConfig,
    kernel: &CpgKernel<'_>,
    rng: &mut R,
) -> ExitSample {
    let r_sq = config.r * config.r;
    let mut x = config.x0.clone();
    let mut jump = vec![0.0; x.len()];
    let mut now = 0.0;
    let mut next_jump = kernel.next_arrival(rng);
    for k in 1..=config.max_steps() {
        let grid = k as f64 * config.h;
        while next_jump <= grid {
            kernel.diffuse(next_jump - now, rng, &mut x);
            now = next_jump;
            // the position just before the jump is observed too
            if exits(&x, r_sq) {
                return ExitSample::exited(now);
            }
            kernel
                .jumps
                .sample_big_jump(kernel.alpha, kernel.delta, rng, &mut jump);
            x.iter_mut().zip(&jump).for_each(|(xj, yj)| *xj += yj);
            if exits(&x, r_sq) {
                return ExitSample::exited(now);
            }
            next_jump += kernel.next_arrival(rng);
        }
        kernel.diffuse(grid - now, rng, &mut x);
        now = grid;
        if exits(&x, r_sq) {
            return ExitSample::exited(now);
        }
    }
    ExitSample::truncated(config.t_max)
}

/// Monte Carlo estimate of the mean exit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitTimeEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_completed: usize,
    pub n_truncated: usize,
    pub config_hash: String,
    /// Set when more than [`MAX_RELIABLE_TRUNCATION`] of the paths hit the horizon.
    pub unreliable: bool,
}

impl ExitTimeEstimate {
    pub fn from_samples(samples: &[ExitSample], config_hash: String) -> Self {
        let n = samples.len();
        let times: Vec<f64> = samples.iter().map(|s| s.time).collect();
        let (mean, stderr) = mean_and_stderr(&times);
        let n_truncated = samples.iter().filter(|s| s.truncated).count();
        Self {
            mean,
            stderr,
            n_completed: n - n_truncated,
            n_truncated,
            config_hash,
            unreliable: n_truncated as f64 > MAX_RELIABLE_TRUNCATION * n as f64,
        }
    }

    pub fn n_paths(&self) -> usize {
        self.n_completed + self.n_truncated
    }
}

/// Pairwise summation; the result depends only on the order of `values`.
fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 64 {
        values.iter().sum()
    } else {
        let (left, right) = values.split_at(values.len() / 2);
        pairwise_sum(left) + pairwise_sum(right)
    }
}

/// Sample mean and its CLT standard error (two-pass variance).
pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&squares) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn run_paths<F>(config: &ExitTimeConfig, path: F) -> Vec<ExitSample>
where
    F: Fn(&mut ChaCha8Rng) -> ExitSample + Sync,
{
    (0..config.n_paths as u64)
        .into_par_iter()
        .map(|id| path(&mut path_rng(config.seed, id)))
        .collect()
}

/// Runs `n_paths` independent paths and summarises their exit times.
///
/// Work is spread over the current rayon pool; the result is bit-identical
/// for any pool size.
pub fn estimate_mean_exit(config: &ExitTimeConfig) -> Result<ExitTimeEstimate> {
    config.validate()?;
    let samples = match config.sampler {
        Sampler::ExactIncrement => {
            let kernel = ExactKernel::new(config, config.h)?;
            run_paths(config, |rng| run_exact(config, &kernel, rng))
        }
        Sampler::CompoundPoissonGaussian { delta } => {
            let kernel = CpgKernel::new(config, delta)?;
            run_paths(config, |rng| run_cpg(config, &kernel, rng))
        }
    };
    Ok(ExitTimeEstimate::from_samples(
        &samples,
        config.config_hash(),
    ))
}

/// Grid-refinement diagnostic for the exact-increment sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementShift {
    /// Estimate on the grid `h`.
    pub coarse: ExitTimeEstimate,
    /// Estimate on the grid `h/2`, from the same noise.
    pub fine: ExitTimeEstimate,
    /// Mean of the paired differences `τ_h - τ_{h/2}`.
    pub shift: f64,
    pub shift_stderr: f64,
}

/// Estimates how much the mean exit time moves when the grid step is halved,
/// using coupled paths so the difference is resolved far below the Monte
/// Carlo error of either estimate.
pub fn estimate_refinement_shift(config: &ExitTimeConfig) -> Result<RefinementShift> {
    config.validate()?;
    if config.sampler != Sampler::ExactIncrement {
        return Err(config_error(
            "refinement shift needs the exact-increment sampler",
        ));
    }
    let fine = ExactKernel::new(config, 0.5 * config.h)?;
    let pairs: Vec<(ExitSample, ExitSample)> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|id| run_exact_coupled(config, &fine, &mut path_rng(config.seed, id)))
        .collect();
    let coarse: Vec<ExitSample> = pairs.iter().map(|p| p.0).collect();
    let fine: Vec<ExitSample> = pairs.iter().map(|p| p.1).collect();
    let diffs: Vec<f64> = pairs.iter().map(|(c, f)| c.time - f.time).collect();
    let (shift, shift_stderr) = mean_and_stderr(&diffs);
    let hash = config.config_hash();
    Ok(RefinementShift {
        coarse: ExitTimeEstimate::from_samples(&coarse, hash.clone()),
        fine: ExitTimeEstimate::from_samples(&fine, hash),
        shift,
        shift_stderr,
    })
}
