//! Mean exit times of symmetric α-stable Lévy processes from balls.
//!
//! For any symmetric α-stable process in `R^d` with spectral measure `μ`,
//! the mean exit time from the ball `B_r` started at `x` is
//!
//! ```text
//! E^x τ_{B_r} = κ_α / ν(B_1^c) · (r² - |x|²)₊^{α/2},   ν(B_1^c) = |μ| / α,
//! ```
//!
//! with `κ_α = 1 / (Γ(1 - α/2) Γ(1 + α/2))`. This crate evaluates that closed
//! form ([`closed_form`]), checks the generator identities behind it by
//! principal-value quadrature ([`pvquad`]) and estimates the left-hand side by
//! Monte Carlo path simulation ([`simulate`]).

// `!(a < b)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod gamma;
pub mod index;
pub mod pvquad;
pub mod simulate;
pub mod spectral;

pub use closed_form::{c_alpha, kappa, mean_exit_closed_form, profile, ProfileFunction};
pub use error::{Error, Result};
pub use index::{StabilityIndex, SupportedRange};
pub use pvquad::{PvQuadResult, PvQuadSpec};
pub use spectral::{Atom, Direction, LinearMap, SpectralMeasure};
