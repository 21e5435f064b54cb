//! Campaign configuration: a sectioned key-value file (TOML) mapped onto
//! validated builders for geometries, dampings, regions, and solver
//! budgets.
//!
//! Every subcommand reads the same schema and uses the sections it
//! needs; unknown keys are rejected so a typo cannot silently fall back
//! to a default. CLI flags (`--seed`, `--out`, `--threads`) override the
//! corresponding fields after parsing.

use serde::Deserialize;

use std::path::PathBuf;
use std::sync::Arc;

use crate::damped::FlowAverageOptions;
use crate::error::{Error, Result};
use crate::geometry::{DampingField, ModelGeometry};
use crate::regions::admissible_p_range;
use crate::resolvent::boyd::BoydOptions;
use crate::resolvent::gmres::GmresConfig;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// `torus` or `sphere-zonal`.
    pub kind: String,
    pub dim: Option<usize>,
    pub nper: Option<usize>,
    pub kmax: Option<usize>,
    pub ntheta: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSection {
    /// `constant`, `cosine-sum`, or `zonal-cosine`.
    pub kind: String,
    pub constant: Option<f64>,
    pub offset: Option<f64>,
    /// Cosine terms as `[axis, amplitude]` pairs.
    pub terms: Option<Vec<(usize, f64)>>,
    pub amp: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub delta: f64,
    /// Band/strip split `L` for the damped region.
    pub l: Option<f64>,
    /// Pinned damping bounds; computed from the flow section when absent.
    pub a_plus: Option<f64>,
    pub a_minus: Option<f64>,
    pub disk_radius: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// `crucial-line`, `upper-band`, `lower-band`, `compact`,
    /// `sharpness` (sphere shrinking sequence).
    pub segment: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub p: f64,
    /// Exponent `w` of the compensating weight `|Re|^w` in the fit.
    pub weight_exponent: Option<f64>,
    /// Height of a compact damped segment (defaults to `-delta/2`).
    pub im_level: Option<f64>,
    pub slope_threshold: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub rel_tol: Option<f64>,
    pub stall_iters: Option<usize>,
    pub seed: Option<u64>,
    pub gmres_restart: Option<usize>,
    pub gmres_max_iters: Option<usize>,
    pub gmres_tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QepSection {
    pub truncation: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub t_ladder: Option<Vec<f64>>,
    pub rational_height: Option<i64>,
    pub quasi_directions: Option<usize>,
    pub base_per_axis: Option<usize>,
    pub monotonicity_tol: Option<f64>,
    pub quad_points: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub expected_values: Option<PathBuf>,
}

/// Whole campaign file; sections are optional so one file can serve
/// several subcommands.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub geometry: Option<GeometrySection>,
    pub damping: Option<DampingSection>,
    pub region: Option<RegionSection>,
    pub scan: Option<ScanSection>,
    pub probe: Option<ProbeSection>,
    pub qep: Option<QepSection>,
    pub flow: Option<FlowSection>,
    pub output: Option<OutputSection>,
}

impl CampaignConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn build_geometry(&self) -> Result<Arc<ModelGeometry>> {
        let g = self
            .geometry
            .as_ref()
            .ok_or_else(|| Error::Config("missing [geometry] section".into()))?;
        let geom = match g.kind.as_str() {
            "torus" => {
                ModelGeometry::torus(g.dim.unwrap_or(3), g.nper.unwrap_or(16))?
            }
            "sphere-zonal" => ModelGeometry::sphere_zonal(g.kmax.unwrap_or(24), g.ntheta)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown geometry kind '{other}' (expected torus or sphere-zonal)"
                )))
            }
        };
        Ok(Arc::new(geom))
    }

    pub fn build_damping(&self, geom: &Arc<ModelGeometry>) -> Result<DampingField> {
        let d = self
            .damping
            .as_ref()
            .ok_or_else(|| Error::Config("missing [damping] section".into()))?;
        match d.kind.as_str() {
            "constant" => DampingField::constant(
                geom,
                d.constant
                    .ok_or_else(|| Error::Config("constant damping needs `constant`".into()))?,
            ),
            "cosine-sum" => DampingField::cosine_sum(
                geom,
                d.offset
                    .ok_or_else(|| Error::Config("cosine-sum damping needs `offset`".into()))?,
                d.terms
                    .as_deref()
                    .ok_or_else(|| Error::Config("cosine-sum damping needs `terms`".into()))?,
            ),
            "zonal-cosine" => DampingField::zonal_cosine(
                geom,
                d.offset
                    .ok_or_else(|| Error::Config("zonal-cosine damping needs `offset`".into()))?,
                d.amp
                    .ok_or_else(|| Error::Config("zonal-cosine damping needs `amp`".into()))?,
            ),
            other => Err(Error::Config(format!("unknown damping kind '{other}'"))),
        }
    }

    pub fn boyd_options(&self, seed_override: Option<u64>) -> BoydOptions {
        let mut opts = BoydOptions::default();
        if let Some(p) = &self.probe {
            if let Some(v) = p.restarts {
                opts.restarts = v;
            }
            if let Some(v) = p.max_iters {
                opts.max_iters = v;
            }
            if let Some(v) = p.rel_tol {
                opts.rel_tol = v;
            }
            if let Some(v) = p.stall_iters {
                opts.stall_iters = v;
            }
            if let Some(v) = p.seed {
                opts.seed = v;
            }
        }
        if let Some(s) = seed_override {
            opts.seed = s;
        }
        opts
    }

    pub fn gmres_config(&self) -> GmresConfig {
        let mut cfg = GmresConfig::default();
        if let Some(p) = &self.probe {
            if let Some(v) = p.gmres_restart {
                cfg.restart = v;
            }
            if let Some(v) = p.gmres_max_iters {
                cfg.max_iters = v;
            }
            if let Some(v) = p.gmres_tol {
                cfg.tol = v;
            }
        }
        cfg
    }

    pub fn flow_options(&self, seed_override: Option<u64>) -> FlowAverageOptions {
        let mut opts = FlowAverageOptions::default();
        if let Some(f) = &self.flow {
            if let Some(v) = &f.t_ladder {
                opts.t_ladder = v.clone();
            }
            if let Some(v) = f.rational_height {
                opts.rational_height = v;
            }
            if let Some(v) = f.quasi_directions {
                opts.quasi_directions = v;
            }
            if let Some(v) = f.base_per_axis {
                opts.base_per_axis = v;
            }
            if let Some(v) = f.monotonicity_tol {
                opts.monotonicity_tol = v;
            }
            opts.quad_points = f.quad_points;
        }
        if let Some(p) = &self.probe {
            if let Some(s) = p.seed {
                opts.seed = s;
            }
        }
        if let Some(s) = seed_override {
            opts.seed = s;
        }
        opts
    }

    /// Warns (does not fail) when the scan exponent leaves the admissible
    /// window; returns whether it was admissible.
    pub fn check_exponent(&self, n: usize) -> Result<bool> {
        let Some(scan) = &self.scan else {
            return Ok(true);
        };
        let (lo, hi) = admissible_p_range(n)?;
        let ok = scan.p >= lo - 1e-12 && scan.p <= hi + 1e-12;
        if !ok {
            eprintln!(
                "warning: p = {} outside the admissible range [{lo:.6}, {hi:.6}] for n = {n}; proceeding",
                scan.p
            );
        }
        Ok(ok)
    }
}
