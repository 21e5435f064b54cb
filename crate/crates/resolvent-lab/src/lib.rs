//! Numerical verification bench for uniform resolvent estimates on model
//! manifolds.
//!
//! The crate probes two families of operators with controlled spectral
//! truncations:
//!
//! * the shifted Laplacian `-Δ - z²` on the flat torus `Tⁿ` and on the zonal
//!   (rotation-invariant) sector of the round 3-sphere, where resolvent
//!   norms between Lebesgue spaces are expected to stay bounded on a
//!   parabolic neighbourhood of the positive real axis;
//! * the stationary damped-wave pencil `P(τ) = -Δ + 2i a(x) τ - τ²`, whose
//!   spectrum is confined to a horizontal band determined by the damping
//!   and whose resolvent admits explicit bounds off that band.
//!
//! Everything is built from band-limited spectral discretisations: products
//! are de-aliased, quadratures are exact on the retained bands, and each
//! claimed inequality is checked either against a closed-form oracle or by
//! evaluating both sides without fitted constants.
//!
//! Module map:
//!
//! * [`geometry`]: torus and sphere discretisations, damping fields;
//! * [`fields`]: band-limited fields, Lebesgue/Sobolev norms;
//! * [`regions`]: spectral-region membership and admissible exponents;
//! * [`resolvent`]: direct and iterative solves, operator-norm probes,
//!   inequality checkers for the Laplace and damped resolvents;
//! * [`damped`]: quadratic eigenvalue problem, geodesic flow averages,
//!   band-localisation and strip checks;
//! * [`harness`]: campaign configuration, scans, reports, acceptance gate.

pub mod damped;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod regions;
pub mod resolvent;
pub(crate) mod util;

pub use error::{Error, Result};

/// The guide's chapters compile as doc-tests, so every snippet in
/// `book/` is checked against the current crate API on `cargo test`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/regions.md")]
    mod regions {}
    #[doc = include_str!("../../../book/src/probes.md")]
    mod probes {}
    #[doc = include_str!("../../../book/src/damped-spectra.md")]
    mod damped_spectra {}
    #[doc = include_str!("../../../book/src/flow-averages.md")]
    mod flow_averages {}
    #[doc = include_str!("../../../book/src/campaigns.md")]
    mod campaigns {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}

/// Complex scalar used throughout; `rustfft` and the dense eigensolver both
/// interoperate with this representation.
pub type C64 = num_complex::Complex64;
