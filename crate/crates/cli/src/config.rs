//! JSON experiment configuration.

use serde::{Deserialize, Serialize};
use stable_exit::simulate::{ExitTimeConfig, Sampler};
use stable_exit::spectral::SpectralDocument;
use stable_exit::{SpectralMeasure, StabilityIndex};

use crate::error::{config, Result};

/// Default CPG jump threshold as a fraction of the radius.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Exact,
    Cpg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

/// One start point or several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartPoints {
    One(Vec<f64>),
    Many(Vec<Vec<f64>>),
}

impl StartPoints {
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            StartPoints::One(p) => vec![p.clone()],
            StartPoints::Many(ps) => ps.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub r: f64,
    pub x0: StartPoints,
    pub mu: SpectralDocument,
    pub sampler: SamplerSpec,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    pub n_paths: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json_str(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| config(format!("invalid experiment config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn measure(&self) -> Result<SpectralMeasure> {
        SpectralMeasure::from_document(&self.mu).map_err(|e| config(format!("mu: {e}")))
    }

    pub fn sampler(&self) -> Result<Sampler> {
        match (self.sampler.kind, self.sampler.delta) {
            (SamplerKind::Exact, None) => Ok(Sampler::ExactIncrement),
            (SamplerKind::Exact, Some(_)) => Err(config("sampler \"exact\" takes no delta")),
            (SamplerKind::Cpg, delta) => Ok(Sampler::CompoundPoissonGaussian {
                delta: delta.unwrap_or(DEFAULT_DELTA_FRACTION * self.r),
            }),
        }
    }

    /// One validated simulation configuration per start point.
    pub fn exit_configs(&self) -> Result<Vec<ExitTimeConfig>> {
        let alpha = StabilityIndex::new(self.alpha).map_err(|e| config(e.to_string()))?;
        let mu = self.measure()?;
        let sampler = self.sampler()?;
        let points = self.x0.points();
        if points.is_empty() {
            return Err(config("x0 lists no start points"));
        }
        points
            .into_iter()
            .map(|x0| {
                let built = ExitTimeConfig::new(
                    x0,
                    self.r,
                    alpha,
                    mu.clone(),
                    sampler,
                    self.h,
                    self.n_paths,
                    self.seed,
                )
                .and_then(|c| match self.t_max {
                    Some(t) => c.with_t_max(t),
                    None => Ok(c),
                });
                built.map_err(|e| config(e.to_string()))
            })
            .collect()
    }
}
