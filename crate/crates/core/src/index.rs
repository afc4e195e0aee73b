//! The stability index of a symmetric stable law.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Stability index `alpha` in the open interval (0, 2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StabilityIndex(f64);

impl StabilityIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 2.0 {
            Ok(Self(alpha))
        } else {
            Err(domain(format!(
                "stability index must lie in (0, 2), got {alpha}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Fails unless `alpha` lies in `range`. Quadrature and simulation call
    /// this before doing any work; closed forms accept the whole open interval.
    pub fn ensure_supported(self, range: SupportedRange) -> Result<Self> {
        if range.contains(self) {
            Ok(self)
        } else {
            Err(Error::Unsupported {
                alpha: self.0,
                lo: range.lo,
                hi: range.hi,
            })
        }
    }
}

impl TryFrom<f64> for StabilityIndex {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<StabilityIndex> for f64 {
    fn from(alpha: StabilityIndex) -> f64 {
        alpha.0
    }
}

impl fmt::Display for StabilityIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Closed sub-interval of (0, 2) on which the numerical routines are trusted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportedRange {
    pub lo: f64,
    pub hi: f64,
}

impl SupportedRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo > 0.0 && hi < 2.0 && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(domain(format!(
                "supported range [{lo}, {hi}] must be a sub-interval of (0, 2)"
            )))
        }
    }

    pub fn contains(&self, alpha: StabilityIndex) -> bool {
        (self.lo..=self.hi).contains(&alpha.get())
    }
}

impl Default for SupportedRange {
    fn default() -> Self {
        Self { lo: 0.1, hi: 1.95 }
    }
}
