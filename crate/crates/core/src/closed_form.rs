//! Normalising constants, the profile function and the closed-form mean
//! exit time from a ball.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gamma::gamma;
use crate::index::StabilityIndex;

/// `1 / (Γ(1 - α/2) Γ(1 + α/2))`.
pub fn kappa(alpha: StabilityIndex) -> f64 {
    let half = 0.5 * alpha.get();
    1.0 / (gamma(1.0 - half) * gamma(1.0 + half))
}

/// `α κ(α) / 2`, the constant that makes the profile an exact eigenfunction
/// of the one-dimensional operator.
pub fn c_alpha(alpha: StabilityIndex) -> f64 {
    0.5 * alpha.get() * kappa(alpha)
}

pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub(crate) fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "radius must be positive and finite, got {r}"
        )))
    }
}

/// `(r² - |x|²)₊^{α/2}`; the clamp happens before the power.
fn positive_part_pow(x: &[f64], r: f64, alpha: StabilityIndex) -> f64 {
    let base = (r * r - norm_sq(x)).max(0.0);
    if base == 0.0 {
        0.0
    } else {
        base.powf(0.5 * alpha.get())
    }
}

/// `S_r(x) = c_α (r² - |x|²)₊^{α/2}` for a fixed radius and index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileFunction {
    radius: f64,
    alpha: StabilityIndex,
    c_alpha: f64,
}

impl ProfileFunction {
    pub fn new(radius: f64, alpha: StabilityIndex) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            radius,
            alpha,
            c_alpha: c_alpha(alpha),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn alpha(&self) -> StabilityIndex {
        self.alpha
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.c_alpha * positive_part_pow(x, self.radius, self.alpha)
    }
}

pub fn profile(x: &[f64], r: f64, alpha: StabilityIndex) -> Result<f64> {
    Ok(ProfileFunction::new(r, alpha)?.value(x))
}

/// Mean exit time from the ball of radius `r` started at `x`, for a process
/// whose spectral measure has total mass `mu_total`:
/// `κ_α α / |μ| · (r² - |x|²)₊^{α/2}`.
///
/// The factor `α / |μ|` is `1 / ν(|y| ≥ 1)`.
pub fn mean_exit_closed_form(
    x: &[f64],
    r: f64,
    alpha: StabilityIndex,
    mu_total: f64,
) -> Result<f64> {
    check_radius(r)?;
    if !(mu_total.is_finite() && mu_total > 0.0) {
        return Err(domain(format!(
            "total spectral mass must be positive and finite, got {mu_total}"
        )));
    }
    Ok(kappa(alpha) * alpha.get() / mu_total * positive_part_pow(x, r, alpha))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;

    fn a(v: f64) -> StabilityIndex {
        StabilityIndex::new(v).unwrap()
    }

    #[test]
    fn kappa_reference_values() {
        assert!((kappa(a(1.0)) - 2.0 / PI).abs() < 1e-15);
        // 1/(Γ(0.75)Γ(1.25)) and 1/(Γ(0.25)Γ(1.75)), arbitrary-precision references
        assert!((kappa(a(0.5)) - 0.900_316_316_157_106_069_56).abs() < 1e-12);
        assert!((kappa(a(1.5)) - 0.300_105_438_719_035_356_52).abs() < 1e-12);
    }

    #[test]
    fn c_alpha_reference_values() {
        assert!((c_alpha(a(1.0)) - 1.0 / PI).abs() < 1e-15);
        assert!((c_alpha(a(0.5)) - 0.25 * kappa(a(0.5))).abs() < 1e-16);
        assert!((c_alpha(a(0.5)) - 0.225_079_079_039_276_517_39).abs() < 1e-12);
    }

    #[test]
    fn c_alpha_kappa_identity_within_4_ulps() {
        for i in 1..=100 {
            let alpha = a(i as f64 * 0.0199);
            let k = kappa(alpha);
            let diff = (2.0 * c_alpha(alpha) / alpha.get() - k).abs();
            assert!(diff <= 4.0 * f64::EPSILON * k, "alpha {alpha}: {diff:e}");
        }
    }

    #[test]
    fn profile_examples() {
        assert!((profile(&[0.0, 0.0], 1.0, a(1.0)).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(profile(&[0.6, 0.8], 1.0, a(1.3)).unwrap(), 0.0);
        assert_eq!(profile(&[0.72, 0.96], 1.0, a(0.7)).unwrap(), 0.0);
        assert_eq!(profile(&[3.0], 3.0, a(0.7)).unwrap(), 0.0);
        assert!(profile(&[0.0], 0.0, a(1.0)).is_err());
        assert!(profile(&[0.0], -1.0, a(1.0)).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert!(
            (mean_exit_closed_form(&[0.0], 1.0, a(1.0), 2.0).unwrap() - 1.0 / PI).abs() < 1e-15
        );
        assert!(
            (mean_exit_closed_form(&[0.0, 0.0], 1.0, a(1.0), 4.0).unwrap() - 0.5 / PI).abs()
                < 1e-15
        );
        assert_eq!(
            mean_exit_closed_form(&[1.0, 0.5], 1.0, a(1.0), 4.0).unwrap(),
            0.0
        );
        assert!(mean_exit_closed_form(&[0.0], 1.0, a(1.0), 0.0).is_err());
        assert!(mean_exit_closed_form(&[0.0], 1.0, a(1.0), -2.0).is_err());
        assert!(mean_exit_closed_form(&[0.0], 1.0, a(1.0), f64::NAN).is_err());
    }

    #[test]
    fn endpoint_indices_stay_finite() {
        for alpha in [1e-6, 0.01, 1.99, 2.0 - 1e-9] {
            let v = mean_exit_closed_form(&[0.1], 1.0, a(alpha), 1.0).unwrap();
            assert!(v.is_finite() && v > 0.0, "alpha {alpha}");
        }
    }

    proptest! {
        #[test]
        fn self_similar(
            alpha in 0.05f64..1.95,
            s in -0.99f64..0.99,
            t in -0.99f64..0.99,
            lambda in 0.01f64..100.0,
            mass in 0.1f64..10.0,
        ) {
            let alpha = a(alpha);
            let x = [s / 2f64.sqrt(), t / 2f64.sqrt()];
            let lx = [lambda * x[0], lambda * x[1]];
            let base = mean_exit_closed_form(&x, 1.0, alpha, mass).unwrap();
            let scaled = mean_exit_closed_form(&lx, lambda, alpha, mass).unwrap();
            let expected = lambda.powf(alpha.get()) * base;
            prop_assert!((scaled - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
        }

        #[test]
        fn strictly_decreasing_inside_ball(
            alpha in 0.05f64..1.95,
            s in 0.0f64..0.98,
            gap in 1e-3f64..0.02,
        ) {
            let alpha = a(alpha);
            let inner = mean_exit_closed_form(&[s], 1.0, alpha, 2.0).unwrap();
            let outer = mean_exit_closed_form(&[s + gap], 1.0, alpha, 2.0).unwrap();
            prop_assert!(outer < inner);
        }

        #[test]
        fn profile_vanishes_exactly_off_the_ball(alpha in 0.05f64..1.95, s in 1.0f64..10.0) {
            prop_assert_eq!(profile(&[0.0, s], 1.0, a(alpha)).unwrap(), 0.0);
        }
    }
}
