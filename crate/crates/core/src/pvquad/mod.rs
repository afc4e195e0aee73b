//! Principal-value quadrature for the directional fractional operator
//!
//! ```text
//! K_v f(x) = p.v. ∫_R [f(x + v w) - f(x)] |w|^{-1-α} dw
//! ```
//!
//! and numerical checks of its values on the profile function.
//!
//! The integral over `w` is folded onto `(0, ∞)`:
//!
//! ```text
//! p.v. ∫_R [f(u + w) - f(u)] |w|^{-1-α} dw = ∫_0^∞ Δ(u, w) w^{-1-α} dw,
//! Δ(u, w) = f(u + w) + f(u - w) - 2 f(u),
//! ```
//!
//! which is the principal value by definition and absolutely convergent when
//! `f` is C² near `u`. The folded integral is split into
//!
//! * `(0, ε]`: substitution `w = ε s^{1/(2-α)}` turns `Δ w^{-1-α} dw` into
//!   `ε^{2-α}/(2-α) · Δ/w² ds`, a bounded integrand on `(0, 1]`;
//! * `[ε, W]`: adaptive Gauss-Kronrod with every `|b - u|` for caller
//!   breakpoints `b` as a panel boundary;
//! * `(W, ∞)`: `f(u ± w) = 0` there, so the tail is `-2 f(u) W^{-α} / α`.

mod kronrod;

use serde::{Deserialize, Serialize};

use crate::closed_form::{c_alpha, check_radius, norm_sq};
use crate::error::{domain, Error, Result};
use crate::index::{StabilityIndex, SupportedRange};
use crate::spectral::{LinearMap, SpectralMeasure};

/// Tolerances and cut-offs for [`pv_fractional_integral_1d`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvQuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Radius `ε` of the region around `w = 0` handled by the substitution.
    pub inner_cutoff: f64,
    /// `W`; `None` places it at the farthest breakpoint.
    pub tail_cutoff: Option<f64>,
    pub supported: SupportedRange,
}

impl Default for PvQuadSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
            inner_cutoff: 1e-6,
            tail_cutoff: None,
            supported: SupportedRange::default(),
        }
    }
}

impl PvQuadSpec {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(domain("quadrature tolerances must be positive"));
        }
        if !(self.inner_cutoff.is_finite() && self.inner_cutoff > 0.0) {
            return Err(domain("inner cut-off must be positive"));
        }
        if let Some(w) = self.tail_cutoff {
            if !(w.is_finite() && w > self.inner_cutoff) {
                return Err(domain(
                    "tail cut-off must be finite and exceed the inner cut-off",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvQuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
}

impl PvQuadResult {
    fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.abs(),
            ..self
        }
    }
}

/// A real function of one variable, integrated along a line.
pub trait LineFunction {
    fn value(&self, t: f64) -> f64;

    /// `f(u + w) + f(u - w) - 2 f(u)`. The default loses about
    /// `ε_mach |f| / w²` relative accuracy for small `w`, which is harmless
    /// for `α < 1` but costs digits above; override it where a
    /// cancellation-free form exists.
    fn second_difference(&self, u: f64, w: f64) -> f64 {
        self.value(u + w) + self.value(u - w) - 2.0 * self.value(u)
    }

    /// `∫_{|w| > W} [f(u + w) - f(u)] |w|^{-1-α} dw`. The default assumes `f`
    /// vanishes outside `[u - W, u + W]`.
    fn tail_integral(&self, u: f64, cutoff: f64, alpha: f64) -> f64 {
        -2.0 * self.value(u) * cutoff.powf(-alpha) / alpha
    }
}

impl<F: Fn(f64) -> f64> LineFunction for F {
    fn value(&self, t: f64) -> f64 {
        self(t)
    }
}

/// A function together with a closed-form tail `(u, W, α) ↦ ∫_{|w|>W} ...`,
/// for integrands that do not vanish far from `u`.
#[derive(Debug, Clone, Copy)]
pub struct WithTail<F, T> {
    pub f: F,
    pub tail: T,
}

impl<F, T> LineFunction for WithTail<F, T>
where
    F: Fn(f64) -> f64,
    T: Fn(f64, f64, f64) -> f64,
{
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn tail_integral(&self, u: f64, cutoff: f64, alpha: f64) -> f64 {
        (self.tail)(u, cutoff, alpha)
    }
}

/// The one-dimensional profile `c (R² - t²)₊^{α/2}` with a cancellation-free
/// second difference inside its support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineProfile {
    scale: f64,
    radius: f64,
    half_alpha: f64,
}

impl LineProfile {
    pub fn new(scale: f64, radius: f64, alpha: StabilityIndex) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self {
            scale,
            radius,
            half_alpha: 0.5 * alpha.get(),
        })
    }

    /// `s_R = c_α (R² - t²)₊^{α/2}`.
    pub fn standard(radius: f64, alpha: StabilityIndex) -> Result<Self> {
        Self::new(c_alpha(alpha), radius, alpha)
    }

    /// Points where the profile meets zero.
    pub fn support(&self) -> [f64; 2] {
        [-self.radius, self.radius]
    }
}

impl LineFunction for LineProfile {
    fn value(&self, t: f64) -> f64 {
        let base = (self.radius * self.radius - t * t).max(0.0);
        if base == 0.0 {
            0.0
        } else {
            self.scale * base.powf(self.half_alpha)
        }
    }

    fn second_difference(&self, u: f64, w: f64) -> f64 {
        let rr = self.radius * self.radius;
        let w = w.abs();
        if u.abs() + w >= self.radius {
            return self.value(u + w) + self.value(u - w) - 2.0 * self.value(u);
        }
        // With D = R² - u², g(u ± w) = D^a (1 - p±)^a. Writing A, B for the
        // two log terms, e^A + e^B - 2 = 2 [expm1(m) cosh(h) + 2 sinh²(h/2)]
        // with m = (A + B)/2 and h = (A - B)/2, both computed from products
        // that carry their w² or w factor explicitly.
        let a = self.half_alpha;
        let d = rr - u * u;
        let q = w * w * (w * w - 2.0 * u * u - 2.0 * rr) / (d * d);
        let m = 0.5 * a * q.ln_1p();
        let ratio = -4.0 * u * w / (rr - (u - w) * (u - w));
        let h = 0.5 * a * ratio.ln_1p();
        let s = (0.5 * h).sinh();
        self.scale * d.powf(a) * 2.0 * (m.exp_m1() * h.cosh() + 2.0 * s * s)
    }
}

/// `p.v. ∫_R [f(u + w) - f(u)] |w|^{-1-α} dw` for a bounded, piecewise smooth
/// `f` that vanishes outside `[u - W, u + W]` and is C² near `u`.
///
/// `breakpoints` are the points where `f` is not smooth; they become panel
/// boundaries. `u` itself must not be one.
pub fn pv_fractional_integral_1d<F: LineFunction + ?Sized>(
    f: &F,
    u: f64,
    alpha: StabilityIndex,
    spec: &PvQuadSpec,
    breakpoints: &[f64],
) -> Result<PvQuadResult> {
    alpha.ensure_supported(spec.supported)?;
    spec.validate()?;
    if !u.is_finite() {
        return Err(domain("evaluation point must be finite"));
    }
    let a = alpha.get();

    let mut distances: Vec<f64> = Vec::with_capacity(breakpoints.len());
    for &b in breakpoints {
        if !b.is_finite() {
            return Err(domain("breakpoints must be finite"));
        }
        let dist = (b - u).abs();
        if dist == 0.0 {
            return Err(domain(format!(
                "evaluation point {u} coincides with a breakpoint"
            )));
        }
        distances.push(dist);
    }
    distances.sort_by(f64::total_cmp);
    distances.dedup();

    let tail_cutoff = match spec.tail_cutoff {
        Some(w) => {
            if distances.last().is_some_and(|&d| d > w) {
                return Err(domain(format!(
                    "breakpoint lies beyond the tail cut-off {w}"
                )));
            }
            w
        }
        None => *distances
            .last()
            .ok_or_else(|| domain("tail cut-off must be given when there are no breakpoints"))?,
    };

    // Δ must be smooth on the substituted region.
    let inner = spec
        .inner_cutoff
        .min(0.5 * distances.first().copied().unwrap_or(f64::INFINITY))
        .min(0.5 * tail_cutoff);

    // (0, ε]
    let exponent = 1.0 / (2.0 - a);
    let prefactor = inner.powf(2.0 - a) / (2.0 - a);
    let near = kronrod::integrate(
        |s: f64| {
            let w = inner * s.powf(exponent);
            if w == 0.0 {
                0.0
            } else {
                f.second_difference(u, w) / (w * w)
            }
        },
        &[0.0, 1.0],
        spec.abs_tol / prefactor,
        spec.rel_tol,
        spec.max_subdivisions,
    );

    // [ε, W]
    let mut points = Vec::with_capacity(distances.len() + 2);
    points.push(inner);
    points.extend(
        distances
            .iter()
            .copied()
            .filter(|&d| d > inner && d < tail_cutoff),
    );
    points.push(tail_cutoff);
    let middle = kronrod::integrate(
        |w: f64| f.second_difference(u, w) * w.powf(-1.0 - a),
        &points,
        spec.abs_tol,
        spec.rel_tol,
        spec.max_subdivisions.saturating_sub(near.subdivisions),
    );

    // (W, ∞)
    let tail = f.tail_integral(u, tail_cutoff, a);

    let value = prefactor * near.value + middle.value + tail;
    let error_estimate = prefactor * near.error + middle.error;
    let subdivisions_used = near.subdivisions + middle.subdivisions;
    if !(near.converged && middle.converged) {
        return Err(Error::QuadratureFailure {
            value,
            error_estimate,
            subdivisions: subdivisions_used,
        });
    }
    Ok(PvQuadResult {
        value,
        error_estimate,
        subdivisions_used,
    })
}

/// Evaluates `∫_R [s_r(u + w) - s_r(u)] |w|^{-1-α} dw` for `|u| < r`; the
/// exact value is `-1`.
pub fn getoor_identity_check(
    u: f64,
    r: f64,
    alpha: StabilityIndex,
    spec: &PvQuadSpec,
) -> Result<PvQuadResult> {
    check_radius(r)?;
    if !(u.abs() < r) {
        return Err(domain(format!("|u| = {} must be below r = {r}", u.abs())));
    }
    let profile = LineProfile::standard(r, alpha)?;
    pv_fractional_integral_1d(&profile, u, alpha, spec, &profile.support())
}

/// `K_v S_r(x)` by quadrature, for `|x| < r` and `v ≠ 0`; the exact value is
/// `-|v|^α`.
///
/// The line `x + v* w` meets the profile as a one-dimensional profile of
/// radius `√(r² - |x̃|²)` evaluated at `x₁ = x·v*`, where `x̃ = x - x₁ v*`.
/// `|v|^α` comes out of the substitution `w → |v| w`.
pub fn apply_kv(
    v: &[f64],
    x: &[f64],
    r: f64,
    alpha: StabilityIndex,
    spec: &PvQuadSpec,
) -> Result<PvQuadResult> {
    check_radius(r)?;
    if v.len() != x.len() || v.is_empty() {
        return Err(domain(
            "direction and point must have the same non-zero dimension",
        ));
    }
    if v.iter().chain(x).any(|c| !c.is_finite()) {
        return Err(domain("direction and point must be finite"));
    }
    let v_norm = norm_sq(v).sqrt();
    if v_norm == 0.0 {
        return Err(domain("direction must be non-zero"));
    }
    let x_norm_sq = norm_sq(x);
    if !(x_norm_sq < r * r) {
        return Err(domain(format!(
            "|x| = {} must be below r = {r}",
            x_norm_sq.sqrt()
        )));
    }
    let along: f64 = x.iter().zip(v).map(|(xi, vi)| xi * vi).sum::<f64>() / v_norm;
    let across_sq = (x_norm_sq - along * along).max(0.0);
    let chord = (r * r - across_sq).sqrt();
    let profile = LineProfile::standard(chord, alpha)?;
    let result = pv_fractional_integral_1d(&profile, along, alpha, spec, &profile.support())?;
    Ok(result.scaled(v_norm.powf(alpha.get())))
}

fn check_ball_point(x: &[f64], r: f64, dim: usize) -> Result<()> {
    check_radius(r)?;
    if x.len() != dim {
        return Err(domain(format!(
            "point has dimension {}, expected {dim}",
            x.len()
        )));
    }
    if !(norm_sq(x) < r * r) {
        return Err(domain("point must lie strictly inside the ball"));
    }
    Ok(())
}

/// Closed-form generator value together with its quadrature cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorCheck {
    pub closed_form: f64,
    pub quadrature: f64,
    pub error_estimate: f64,
    /// Largest disagreement accepted between the two routes.
    pub tolerance: f64,
}

impl GeneratorCheck {
    pub fn agrees(&self) -> bool {
        (self.closed_form - self.quadrature).abs() <= self.tolerance
    }
}

/// Relative tolerance granted per directional term in cross-checks.
const DIRECTIONAL_TOLERANCE: f64 = 1e-6;

/// `K S_r(x) = -∫_S |A z|^α μ(dz)` for a discrete `μ` and constant map `A`.
pub fn apply_k(
    mu: &SpectralMeasure,
    map: &LinearMap,
    x: &[f64],
    r: f64,
    alpha: StabilityIndex,
) -> Result<f64> {
    let atoms = mu
        .atoms()
        .ok_or_else(|| domain("apply_k needs a discrete spectral measure"))?;
    if map.dim() != mu.dim() {
        return Err(domain("linear map and measure dimensions differ"));
    }
    check_ball_point(x, r, mu.dim())?;
    let mut total = 0.0;
    for (index, atom) in atoms.iter().enumerate() {
        let image_norm = norm_sq(&map.apply(atom.z.coords())).sqrt();
        if image_norm == 0.0 {
            return Err(Error::DegenerateDirection { index });
        }
        total += atom.mass * image_norm.powf(alpha.get());
    }
    Ok(-total)
}

/// [`apply_k`] cross-checked by running [`apply_kv`] on every image `A z_i`.
/// Use [`GeneratorCheck::agrees`] for the verdict.
pub fn apply_k_checked(
    mu: &SpectralMeasure,
    map: &LinearMap,
    x: &[f64],
    r: f64,
    alpha: StabilityIndex,
    spec: &PvQuadSpec,
) -> Result<GeneratorCheck> {
    let closed_form = apply_k(mu, map, x, r, alpha)?;
    let atoms = mu.atoms().expect("apply_k accepted the measure");
    let mut quadrature = 0.0;
    let mut error_estimate = 0.0;
    let mut tolerance = 0.0;
    for atom in atoms {
        let image = map.apply(atom.z.coords());
        let kv = apply_kv(&image, x, r, alpha, spec)?;
        quadrature += atom.mass * kv.value;
        error_estimate += atom.mass * kv.error_estimate;
        tolerance += atom.mass * (kv.error_estimate + DIRECTIONAL_TOLERANCE * kv.value.abs());
    }
    Ok(GeneratorCheck {
        closed_form,
        quadrature,
        error_estimate,
        tolerance,
    })
}

/// Generator of the process, `K_ν S_r(x) = -|μ| / 2`, for a symmetric `μ`.
pub fn apply_k_nu(mu: &SpectralMeasure, x: &[f64], r: f64, _alpha: StabilityIndex) -> Result<f64> {
    if !mu.is_symmetric() {
        return Err(Error::Asymmetric);
    }
    check_ball_point(x, r, mu.dim())?;
    Ok(-0.5 * mu.total_mass())
}

/// [`apply_k_nu`] cross-checked through `½ ∫_S K_z S_r(x) μ(dz)`.
///
/// Discrete measures sum over their atoms. The isotropic measure is checked
/// on the coordinate axes and the main diagonal with equal weights, each
/// directional value compared against its exact value.
pub fn apply_k_nu_checked(
    mu: &SpectralMeasure,
    x: &[f64],
    r: f64,
    alpha: StabilityIndex,
    spec: &PvQuadSpec,
) -> Result<GeneratorCheck> {
    let closed_form = apply_k_nu(mu, x, r, alpha)?;
    let weighted: Vec<(Vec<f64>, f64)> = match mu.atoms() {
        Some(atoms) => atoms
            .iter()
            .map(|a| (a.z.coords().to_vec(), a.mass))
            .collect(),
        None => {
            let d = mu.dim();
            let mut dirs: Vec<Vec<f64>> = (0..d)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            if d > 1 {
                dirs.push(vec![1.0 / (d as f64).sqrt(); d]);
            }
            let weight = mu.total_mass() / dirs.len() as f64;
            dirs.into_iter().map(|z| (z, weight)).collect()
        }
    };
    let mut quadrature = 0.0;
    let mut error_estimate = 0.0;
    let mut tolerance = 0.0;
    for (z, mass) in weighted {
        let kv = apply_kv(&z, x, r, alpha, spec)?;
        quadrature += 0.5 * mass * kv.value;
        error_estimate += 0.5 * mass * kv.error_estimate;
        tolerance += 0.5 * mass * (kv.error_estimate + DIRECTIONAL_TOLERANCE * kv.value.abs());
    }
    Ok(GeneratorCheck {
        closed_form,
        quadrature,
        error_estimate,
        tolerance,
    })
}
