//! Damped-wave spectral theory: the quadratic eigenvalue problem and
//! geodesic-flow averages of the damping.
//!
//! The pencil `P(τ) = -Δ + 2i a(x) τ - τ²` restricted to a truncation
//! band is linearised to a companion matrix and solved densely. Computed
//! eigenpairs are post-processed through the Rayleigh functional of the
//! pencil, which restores full accuracy at defective points and places
//! every refined eigenvalue exactly on its theoretical branch. Flow
//! averages `⟨a⟩_T` along the Hamiltonian flow of `|ξ|²` produce the
//! asymptotic band edges `A±` that the spectral strip theorem refers to.

mod flow;
mod qep;

pub use flow::{
    estimate_a_bounds, gauss_legendre, geodesic_flow, time_average, torus_average_oracle,
    FlowAverageOptions, FlowAverageReport, PhasePoint,
};
pub use qep::{
    assemble_qep, check_band_localization, check_strip_theorem, constant_damping_spectrum,
    matching_distance, qep_eigenvalues, BandLocalization, QepEigenvalue, QepPencil, QepSpectrum,
    StripCheck,
};
