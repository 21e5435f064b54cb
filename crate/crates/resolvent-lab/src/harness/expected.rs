//! Calibrated expected values for the acceptance suite.
//!
//! Slope statistics, elliptic constants, and the sphere growth factor
//! are existential in the underlying estimates: the first calibrated run
//! pins their measured values here, and later runs must not regress
//! beyond a 1% drift band. The default file ships with the crate and is
//! embedded at compile time; a config can point at an external copy.

use serde::{Deserialize, Serialize};

use std::path::Path;

use crate::error::{Error, Result};

pub const EXPECTED_SCHEMA: u32 = 1;

/// Default calibrated values compiled into the crate.
pub const EMBEDDED: &str = include_str!("../../expected/expected_values.json");

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanExpectation {
    /// Pinned `slope + 2·stderr` of the calibrated scan.
    pub slope_upper: f64,
    pub max_probe: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ElliptExpectation {
    /// Calibrated prefactors `C` per regime.
    pub c_off_axis: f64,
    pub c_negative_real: f64,
    /// Worst measured ratio `‖u‖_q / (K(z)‖f‖_p)` per regime.
    pub worst_off_axis: f64,
    pub worst_negative_real: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SphereExpectation {
    /// Pinned probe growth over the shrinking sequence.
    pub growth_factor: f64,
    pub control_slope_upper: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedValues {
    pub schema: u32,
    /// Uniform slope limit shared by every uniformity verdict.
    pub slope_threshold: f64,
    pub crucial_line: ScanExpectation,
    pub scaling: ScanExpectation,
    pub ellipt: ElliptExpectation,
    pub sphere: SphereExpectation,
    pub damped_band: ScanExpectation,
}

impl ExpectedValues {
    /// Parses and validates; any structural or numeric defect is an
    /// `ExpectedValues` error so the caller can map it to a config exit.
    pub fn parse(text: &str) -> Result<Self> {
        let values: ExpectedValues = serde_json::from_str(text)
            .map_err(|e| Error::ExpectedValues(format!("malformed expected-values file: {e}")))?;
        values.validate()?;
        Ok(values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::ExpectedValues(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn embedded() -> Result<Self> {
        Self::parse(EMBEDDED)
    }

    fn validate(&self) -> Result<()> {
        if self.schema != EXPECTED_SCHEMA {
            return Err(Error::ExpectedValues(format!(
                "schema {} unsupported (expected {EXPECTED_SCHEMA})",
                self.schema
            )));
        }
        let finite = [
            self.slope_threshold,
            self.crucial_line.slope_upper,
            self.crucial_line.max_probe,
            self.scaling.slope_upper,
            self.scaling.max_probe,
            self.ellipt.c_off_axis,
            self.ellipt.c_negative_real,
            self.ellipt.worst_off_axis,
            self.ellipt.worst_negative_real,
            self.sphere.growth_factor,
            self.sphere.control_slope_upper,
            self.damped_band.slope_upper,
            self.damped_band.max_probe,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::ExpectedValues(
                "expected-values entries must be finite".into(),
            ));
        }
        if self.slope_threshold <= 0.0
            || self.crucial_line.max_probe <= 0.0
            || self.scaling.max_probe <= 0.0
            || self.ellipt.c_off_axis <= 0.0
            || self.ellipt.c_negative_real <= 0.0
            || self.sphere.growth_factor <= 1.0
            || self.damped_band.max_probe <= 0.0
        {
            return Err(Error::ExpectedValues(
                "expected-values entries out of range".into(),
            ));
        }
        Ok(())
    }
}

/// Drift allowance of the regression guards.
pub const REGRESSION_BAND: f64 = 0.01;

/// Passes when a larger-is-worse measurement stays within the band of
/// its pinned value.
pub fn within_upper(measured: f64, pinned: f64) -> bool {
    measured <= pinned.abs() * REGRESSION_BAND + pinned + f64::EPSILON
}

/// Passes when a larger-is-better measurement has not dropped below the
/// band of its pinned value.
pub fn within_lower(measured: f64, pinned: f64) -> bool {
    measured >= pinned - pinned.abs() * REGRESSION_BAND - f64::EPSILON
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_values_parse_and_validate() {
        let v = ExpectedValues::embedded().unwrap();
        assert_eq!(v.schema, EXPECTED_SCHEMA);
        assert!(v.sphere.growth_factor >= 2.0);
    }

    #[test]
    fn malformed_text_is_a_schema_error() {
        assert!(matches!(
            ExpectedValues::parse("{ not json"),
            Err(Error::ExpectedValues(_))
        ));
        assert!(matches!(
            ExpectedValues::parse(r#"{"schema": 99}"#),
            Err(Error::ExpectedValues(_))
        ));
        // Structurally valid JSON with an out-of-range entry.
        let mut v = ExpectedValues::embedded().unwrap();
        v.sphere.growth_factor = 0.5;
        let text = serde_json::to_string(&v).unwrap();
        assert!(matches!(
            ExpectedValues::parse(&text),
            Err(Error::ExpectedValues(_))
        ));
    }

    #[test]
    fn regression_guards_allow_one_percent_drift() {
        assert!(within_upper(1.009, 1.0));
        assert!(!within_upper(1.02, 1.0));
        assert!(within_lower(2.98, 3.0));
        assert!(!within_lower(2.9, 3.0));
        // Negative pinned slopes: drift band scales with magnitude.
        assert!(within_upper(-0.0499, -0.05));
        assert!(!within_upper(-0.04, -0.05));
    }
}
