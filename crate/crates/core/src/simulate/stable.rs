//! One-dimensional symmetric stable laws.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::distr::Open01;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gamma::gamma;
use crate::index::StabilityIndex;

/// `c₁(α) = ∫_R (1 - cos w) |w|^{-1-α} dw`.
///
/// A Lévy density `m |w|^{-1-α}` on the line has characteristic exponent
/// `m c₁(α) |θ|^α`.
pub fn c1(alpha: StabilityIndex) -> f64 {
    let a = alpha.get();
    if a == 1.0 {
        return PI;
    }
    // cos(πα/2) / (1 - α) = sin(π(1 - α)/2) / (1 - α), no cancellation near α = 1
    let b = 1.0 - a;
    2.0 * gamma(2.0 - a) * (FRAC_PI_2 * b).sin() / (b * a)
}

/// Scale `σ` of the symmetric stable law with characteristic function
/// `exp(-σ^α |θ|^α)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct StableScale(f64);

impl StableScale {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(Self(sigma))
        } else {
            Err(domain(format!(
                "stable scale must be positive and finite, got {sigma}"
            )))
        }
    }

    /// Scale of the increment over time `dt` of a process whose Lévy density
    /// on the line is `mass |w|^{-1-α}`.
    pub fn for_increment(alpha: StabilityIndex, mass: f64, dt: f64) -> Result<Self> {
        Self::new((mass * c1(alpha) * dt).powf(1.0 / alpha.get()))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Width of the band around `α = 1` that uses the log-domain formula.
const NEAR_ONE: f64 = 0.05;

/// Chambers-Mallows-Stuck sampler for the standard symmetric law, with the
/// per-`α` constants hoisted out of the sampling loop.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SymmetricStable {
    alpha: f64,
    inv_alpha: f64,
    tail_exponent: f64,
    branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    Cauchy,
    NearOne,
    General,
}

impl SymmetricStable {
    pub(crate) fn new(alpha: StabilityIndex) -> Self {
        let a = alpha.get();
        let branch = if a == 1.0 {
            Branch::Cauchy
        } else if (a - 1.0).abs() < NEAR_ONE {
            Branch::NearOne
        } else {
            Branch::General
        };
        Self {
            alpha: a,
            inv_alpha: 1.0 / a,
            tail_exponent: (1.0 - a) / a,
            branch,
        }
    }

    /// One draw with characteristic function `exp(-|θ|^α)`.
    #[inline]
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        let v = PI * (u - 0.5);
        match self.branch {
            Branch::Cauchy => v.tan(),
            Branch::General => {
                // sin(αv) cos(v)^{-1/α} (cos((1-α)v) / w)^{(1-α)/α}, with
                // cos((1-α)v) expanded so only two sin_cos calls are needed
                let w: f64 = rng.sample(Exp1);
                let (sin_v, cos_v) = v.sin_cos();
                let (sin_av, cos_av) = (self.alpha * v).sin_cos();
                let cos_rest = cos_v * cos_av + sin_v * sin_av;
                let log_mag =
                    self.inv_alpha * ((1.0 - self.alpha) * (cos_rest / w).ln() - cos_v.ln());
                sin_av * log_mag.exp()
            }
            Branch::NearOne => {
                let w: f64 = rng.sample(Exp1);
                let a = self.alpha;
                // ln cos((1-α)v) = ln(1 - 2 sin²((1-α)v/2))
                let s = (0.5 * (1.0 - a) * v).sin();
                let log_cos_small = (-2.0 * s * s).ln_1p();
                let log_mag =
                    -self.inv_alpha * v.cos().ln() + self.tail_exponent * (log_cos_small - w.ln());
                (a * v).sin() * log_mag.exp()
            }
        }
    }
}

/// One draw from the symmetric stable law with scale `sigma`.
pub fn sample_sas_1d<R: Rng + ?Sized>(
    alpha: StabilityIndex,
    sigma: StableScale,
    rng: &mut R,
) -> f64 {
    sigma.get() * SymmetricStable::new(alpha).sample(rng)
}
