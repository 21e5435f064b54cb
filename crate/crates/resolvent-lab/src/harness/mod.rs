//! Campaign harness: configuration, scan drivers, reporting, pinned
//! expected values, and the acceptance gate.
//!
//! The harness owns everything that turns the library's operators and
//! checkers into reproducible campaigns: TOML configuration with strict
//! key checking, deterministic scan execution, CSV/JSON artifacts whose
//! value columns never contain timing data, and the thirteen-criterion
//! acceptance run.

pub mod acceptance;
pub mod config;
pub mod expected;
pub mod report;
pub mod scans;

pub use acceptance::{run_acceptance, AcceptanceOptions, AcceptanceReport, CriterionResult};
pub use config::CampaignConfig;
pub use expected::ExpectedValues;
pub use report::{ScanReport, ScanRow};
pub use scans::{scan_damped, scan_laplace, sharpness_sphere};
