//! The acceptance campaign: thirteen criteria that certify a desk-scale
//! build of the toolkit end to end.
//!
//! Each criterion is a self-contained check with a pinned configuration
//! (geometry sizes, shifts, seeds, tolerances) so that two runs with the
//! same seed produce identical numbers. Expensive shared artifacts (the
//! two QEP spectra, the flow-average ladders, the crucial-line scan) are
//! computed once and reused across criteria.
//!
//! Criterion failures and numerical errors are kept apart: a failure
//! means the measured quantity missed its threshold, an error means the
//! measurement itself could not be completed. Both are reported per
//! criterion rather than aborting the campaign.

use serde::Serialize;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use crate::damped::{
    assemble_qep, check_band_localization, check_strip_theorem, constant_damping_spectrum,
    estimate_a_bounds, matching_distance, qep_eigenvalues, FlowAverageOptions, FlowAverageReport,
    QepSpectrum,
};
use crate::error::{Error, Result};
use crate::geometry::{DampingField, ModelGeometry};
use crate::harness::expected::{within_lower, within_upper, ExpectedValues};
use crate::harness::report::ScanReport;
use crate::harness::scans::{
    scan_damped, scan_laplace, sharpness_sphere, DampedScanSpec, LaplaceScanSpec, SharpnessSpec,
};
use crate::regions::{Disk, RegionSpec};
use crate::resolvent::boyd::{opnorm_lower_bound, BoydOptions};
use crate::resolvent::checks::{
    check_apriori_crucial, check_damped_l2_bounds, check_ellipt_bounds, DampedBoundRegime,
    ElliptRegime,
};
use crate::resolvent::gmres::GmresConfig;
use crate::resolvent::{l2_resolvent_norm_exact, DampedSolveOptions, LaplaceResolvent};
use crate::util::derive_seed;
use crate::C64;

/// Desk-scale torus resolution (16³ grid, modes |k|_∞ ≤ 8).
pub const DESK_TORUS_N: usize = 16;
/// Desk-scale zonal sphere truncation (degrees 0..=24).
pub const DESK_SPHERE_KMAX: usize = 24;
/// Distance to the spectral region boundary used throughout.
pub const DESK_DELTA: f64 = 0.5;
/// QEP Fourier truncation |k|_∞ ≤ 4 (companion order 2·9³).
pub const DESK_TRUNCATION: usize = 4;
/// Largest averaging half-time in the flow ladder.
pub const DESK_T_MAX: f64 = 64.0;

/// Critical pair exponent 2n/(n+2) at n = 3.
const CRITICAL_P: f64 = 1.2;
/// Second scan exponent, strictly inside the admissible range.
const SECOND_P: f64 = 4.0 / 3.0;
/// Strip-theorem margin ε.
const STRIP_EPSILON: f64 = 0.5;
/// Exclusion-disk radius around pencil eigenvalues.
const DISK_RADIUS: f64 = 0.25;

/// Shifts for the exact-L² comparison, chosen so the two nearest
/// eigenvalues are at distance ratio ≤ 0.65 (fast power-iteration
/// convergence) and the closest one is at distance ≥ 0.46.
const PINNED_L2: [(f64, f64); 20] = [
    (1.5360780494650046, 0.0976512880007907),
    (1.8321307283827248, 0.08187188701998867),
    (2.313914930730538, 0.06482520079190755),
    (2.520623203122743, 0.05950909275696915),
    (2.8901027216635575, 0.05190126941704662),
    (3.217479363822975, 0.04662034563036687),
    (3.369270252255724, 0.04452002622810536),
    (3.514515840577153, 0.04268013200229794),
    (3.78834631111885, 0.03959511292823147),
    (4.165488774808281, 0.03601017986344323),
    (4.398995649103443, 0.03409869251190813),
    (4.620720053428213, 0.032462473005416485),
    (4.934665539788769, 0.030397196890150496),
    (5.133308276567264, 0.02922092185359803),
    (5.229801396263569, 0.028681777496783623),
    (5.417634778190411, 0.02768735917818785),
    (5.509150690696181, 0.027227427315306342),
    (5.775004298614933, 0.025974006640302544),
    (5.945640123717609, 0.025228570326959184),
    (6.192785051368949, 0.024221735254131203),
];

/// Off-axis elliptic shifts; Im z² = 2·Re z·Im z stays ≥ 1.9.
const PINNED_OFF_AXIS: [(f64, f64); 10] = [
    (1.2, 0.8),
    (1.8, 0.9),
    (2.3, 0.7),
    (2.8, 1.1),
    (3.4, 0.9),
    (1.5, 1.5),
    (2.0, 2.0),
    (3.0, 1.5),
    (4.0, 1.0),
    (2.5, 2.5),
];

/// Negative-real elliptic shifts z = iy, so z² = -y².
const PINNED_NEG_REAL: [f64; 10] = [0.5, 0.8, 1.0, 1.3, 1.7, 2.1, 2.6, 3.2, 4.0, 5.0];

/// Above-band damped shifts (Im τ > sup a = 6, Re τ ≠ 0).
const PINNED_ABOVE: [(f64, f64); 6] = [
    (8.0, 7.0),
    (-8.0, 7.0),
    (12.0, 8.0),
    (-12.0, 8.0),
    (20.0, 6.5),
    (-5.0, 10.0),
];

/// Below-band damped shifts (Im τ < inf a = 0, Re τ ≠ 0).
const PINNED_BELOW: [(f64, f64); 6] = [
    (8.0, -1.0),
    (-8.0, -1.0),
    (12.0, -2.0),
    (-12.0, -0.5),
    (5.0, -3.0),
    (-20.0, -1.5),
];

/// High-imaginary damped shifts (|Im τ| ≥ 4‖a‖_∞ = 24, |Re τ| ≤ |Im τ|/2).
const PINNED_HIGH_IM: [(f64, f64); 6] = [
    (0.0, 24.0),
    (10.0, 25.0),
    (-10.0, 25.0),
    (5.0, -24.0),
    (-8.0, 26.0),
    (12.0, 30.0),
];

/// Options for one acceptance run.
#[derive(Clone, Debug)]
pub struct AcceptanceOptions {
    pub seed: u64,
    /// Directory for CSV/JSON artifacts; nothing is written when absent.
    pub out: Option<PathBuf>,
    /// Restrict the run to a single criterion ("c7" or "7").
    pub only: Option<String>,
    pub expected: ExpectedValues,
}

/// Outcome of one criterion.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub pass: bool,
    /// The measurement could not be completed (solver or setup error);
    /// recorded as a failure with the error text in `detail`.
    pub errored: bool,
    pub measured: String,
    pub threshold: String,
    pub detail: String,
    pub elapsed_ms: u128,
}

impl CriterionResult {
    /// The one-line pass/fail rendering used by the CLI and the test gate.
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "{tag} {:<4} {:<26} {} [{}]",
            self.id, self.title, self.measured, self.threshold
        )
    }
}

/// Full campaign outcome.
#[derive(Clone, Debug, Serialize)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub results: Vec<CriterionResult>,
    pub passed: usize,
    pub failed: usize,
    /// Criteria that failed because the measurement errored out.
    pub errored: usize,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && !self.results.is_empty()
    }
}

struct Outcome {
    measured: String,
    threshold: String,
    pass: bool,
    detail: String,
}

/// Shared state across criteria; heavy artifacts are computed on first
/// use and cached.
struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    expected: ExpectedValues,
    torus: Option<Arc<ModelGeometry>>,
    sphere: Option<Arc<ModelGeometry>>,
    a3: Option<DampingField>,
    qep_const: Option<(QepSpectrum, Vec<f64>)>,
    qep_a3: Option<QepSpectrum>,
    flow_sep: Option<FlowAverageReport>,
    flow_a3: Option<FlowAverageReport>,
    c2_report: Option<ScanReport>,
}

impl Ctx {
    fn new(opts: &AcceptanceOptions) -> Self {
        Self {
            seed: opts.seed,
            out: opts.out.clone(),
            expected: opts.expected.clone(),
            torus: None,
            sphere: None,
            a3: None,
            qep_const: None,
            qep_a3: None,
            flow_sep: None,
            flow_a3: None,
            c2_report: None,
        }
    }

    fn torus(&mut self) -> Result<Arc<ModelGeometry>> {
        if self.torus.is_none() {
            self.torus = Some(Arc::new(ModelGeometry::torus(3, DESK_TORUS_N)?));
        }
        Ok(Arc::clone(self.torus.as_ref().unwrap()))
    }

    fn sphere(&mut self) -> Result<Arc<ModelGeometry>> {
        if self.sphere.is_none() {
            self.sphere = Some(Arc::new(ModelGeometry::sphere_zonal(
                DESK_SPHERE_KMAX,
                None,
            )?));
        }
        Ok(Arc::clone(self.sphere.as_ref().unwrap()))
    }

    fn ensure_a3(&mut self) -> Result<()> {
        if self.a3.is_none() {
            let geom = self.torus()?;
            self.a3 = Some(DampingField::cosine_sum(
                &geom,
                3.0,
                &[(0, 1.0), (1, 1.0), (2, 1.0)],
            )?);
        }
        Ok(())
    }

    fn a3(&self) -> &DampingField {
        self.a3.as_ref().expect("ensure_a3 ran")
    }

    fn ensure_qep_const(&mut self) -> Result<()> {
        if self.qep_const.is_none() {
            let geom = self.torus()?;
            let one = DampingField::constant(&geom, 1.0)?;
            let pencil = assemble_qep(&geom, &one, DESK_TRUNCATION)?;
            let spectrum = qep_eigenvalues(&pencil)?;
            self.qep_const = Some((spectrum, pencil.lambdas().to_vec()));
        }
        Ok(())
    }

    fn ensure_qep_a3(&mut self) -> Result<()> {
        self.ensure_a3()?;
        if self.qep_a3.is_none() {
            let geom = self.torus()?;
            let pencil = assemble_qep(&geom, self.a3(), DESK_TRUNCATION)?;
            self.qep_a3 = Some(qep_eigenvalues(&pencil)?);
        }
        Ok(())
    }

    fn ensure_flow_sep(&mut self) -> Result<()> {
        if self.flow_sep.is_none() {
            let geom = self.torus()?;
            let sep = DampingField::cosine_sum(&geom, 1.0, &[(0, 1.0)])?;
            let opts = FlowAverageOptions {
                seed: derive_seed(self.seed, 0x0801),
                ..FlowAverageOptions::default()
            };
            self.flow_sep = Some(estimate_a_bounds(&sep, &opts)?);
        }
        Ok(())
    }

    fn ensure_flow_a3(&mut self) -> Result<()> {
        self.ensure_a3()?;
        if self.flow_a3.is_none() {
            let opts = FlowAverageOptions {
                seed: derive_seed(self.seed, 0x0802),
                ..FlowAverageOptions::default()
            };
            self.flow_a3 = Some(estimate_a_bounds(self.a3(), &opts)?);
        }
        Ok(())
    }

    fn flow_a3(&self) -> &FlowAverageReport {
        self.flow_a3.as_ref().expect("ensure_flow_a3 ran")
    }

    fn crucial_scan(&mut self, label: &str) -> Result<ScanReport> {
        let geom = self.torus()?;
        let spec = LaplaceScanSpec {
            delta: DESK_DELTA,
            p: CRITICAL_P,
            range: (2.0, 30.0),
            points: 24,
            weight_exponent: 0.0,
            slope_threshold: self.expected.slope_threshold,
        };
        let boyd = BoydOptions {
            restarts: 3,
            max_iters: 40,
            rel_tol: 1e-10,
            stall_iters: 4,
            seed: derive_seed(self.seed, 0x0202),
        };
        scan_laplace(&geom, &spec, &boyd, label)
    }

    fn ensure_c2(&mut self) -> Result<()> {
        if self.c2_report.is_none() {
            self.c2_report = Some(self.crucial_scan("c2-crucial-line")?);
        }
        Ok(())
    }

    fn emit_report(&self, report: &ScanReport) -> Result<()> {
        if let Some(dir) = &self.out {
            report.write(dir)?;
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        if let Some(dir) = &self.out {
            std::fs::create_dir_all(dir)?;
            let body = serde_json::to_string_pretty(value)
                .map_err(|e| Error::Config(format!("artifact serialisation failed: {e}")))?;
            std::fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

fn c1(ctx: &mut Ctx) -> Result<Outcome> {
    let geom = ctx.torus()?;
    let base = BoydOptions {
        restarts: 2,
        max_iters: 300,
        rel_tol: 1e-12,
        stall_iters: 6,
        seed: derive_seed(ctx.seed, 0x0101),
    };
    let mut max_rel = 0.0f64;
    let mut worst = String::new();
    let mut overshoot = 0usize;
    for (j, &(re, im)) in PINNED_L2.iter().enumerate() {
        let z = C64::new(re, im);
        let exact = l2_resolvent_norm_exact(&geom, z)?;
        let op = LaplaceResolvent::new(&geom, z)?;
        let mut opts = base.clone();
        opts.seed = derive_seed(base.seed, j as u64);
        let probe = opnorm_lower_bound(&op, 2.0, 2.0, &opts)?;
        if probe.value > exact * (1.0 + 1e-9) {
            overshoot += 1;
        }
        let rel = (probe.value - exact).abs() / exact;
        if rel > max_rel {
            max_rel = rel;
            worst = format!("worst at z = {re:.4} + {im:.4}i");
        }
    }
    Ok(Outcome {
        measured: format!("max relative error {max_rel:.2e} over 20 shifts"),
        threshold: "≤ 1e-2, probes never exceed the exact norm".into(),
        pass: max_rel <= 1e-2 && overshoot == 0,
        detail: format!("{worst}; {overshoot} probes above the exact norm"),
    })
}

fn c2(ctx: &mut Ctx) -> Result<Outcome> {
    ctx.ensure_c2()?;
    let report = ctx.c2_report.clone().expect("ensure_c2 ran");
    ctx.emit_report(&report)?;
    let fit = report
        .summary
        .slope
        .ok_or_else(|| Error::NonConvergence("crucial-line slope fit missing".into()))?;
    let exp = &ctx.expected.crucial_line;
    let clean = report.rows.iter().all(|r| r.region_ok && r.is_ok());
    let pass = report.summary.uniform == Some(true)
        && clean
        && within_upper(fit.upper(), exp.slope_upper)
        && within_upper(report.summary.max_probe, exp.max_probe);
    Ok(Outcome {
        measured: format!(
            "slope {:+.4} (+2σ = {:+.4}), max probe {:.4}",
            fit.slope,
            fit.upper(),
            report.summary.max_probe
        ),
        threshold: format!(
            "slope+2σ ≤ {}, within 1% of pinned ({:.4}, {:.4})",
            ctx.expected.slope_threshold, exp.slope_upper, exp.max_probe
        ),
        pass,
        detail: format!(
            "24 points on Im z = {DESK_DELTA}, Re z ∈ [2,30], p = {CRITICAL_P}; all rows ok: {clean}"
        ),
    })
}

fn c3(ctx: &mut Ctx) -> Result<Outcome> {
    let geom = ctx.torus()?;
    let spec = LaplaceScanSpec {
        delta: DESK_DELTA,
        p: SECOND_P,
        range: (2.0, 30.0),
        points: 24,
        weight_exponent: 0.5,
        slope_threshold: ctx.expected.slope_threshold,
    };
    let boyd = BoydOptions {
        restarts: 3,
        max_iters: 40,
        rel_tol: 1e-10,
        stall_iters: 4,
        seed: derive_seed(ctx.seed, 0x0303),
    };
    let report = scan_laplace(&geom, &spec, &boyd, "c3-weighted-pair")?;
    ctx.emit_report(&report)?;
    let fit = report
        .summary
        .slope
        .ok_or_else(|| Error::NonConvergence("weighted-pair slope fit missing".into()))?;
    let exp = &ctx.expected.scaling;
    let pass = report.summary.uniform == Some(true)
        && report.rows.iter().all(|r| r.region_ok && r.is_ok())
        && within_upper(fit.upper(), exp.slope_upper)
        && within_upper(report.summary.max_probe, exp.max_probe);
    Ok(Outcome {
        measured: format!(
            "weighted slope {:+.4} (+2σ = {:+.4}), max probe {:.4}",
            fit.slope,
            fit.upper(),
            report.summary.max_probe
        ),
        threshold: format!(
            "slope+2σ ≤ {} for probe·|Re z|^0.5, within 1% of pinned",
            ctx.expected.slope_threshold
        ),
        pass,
        detail: format!("p = {SECOND_P}, same segment as c2"),
    })
}

fn c4(ctx: &mut Ctx) -> Result<Outcome> {
    let geom = ctx.torus()?;
    let mut min_slack = f64::INFINITY;
    let mut worst_ratio = 0.0f64;
    for (idx, h) in [0.25, 0.125, 0.0625].into_iter().enumerate() {
        let check = check_apriori_crucial(
            &geom,
            DESK_DELTA,
            h,
            100,
            derive_seed(ctx.seed, 0x0400 + idx as u64),
        )?;
        min_slack = min_slack.min(check.min_slack);
        worst_ratio = worst_ratio.max(check.worst_ratio);
    }
    let pass = min_slack >= -1e-8 * (1.0 + min_slack.abs()) && worst_ratio <= 1.0 + 1e-9;
    Ok(Outcome {
        measured: format!("min slack {min_slack:.3e}, worst lhs/rhs {worst_ratio:.6}"),
        threshold: "slack ≥ 0 (rounding tolerance 1e-8) on 300 trials".into(),
        pass,
        detail: "h ∈ {1/4, 1/8, 1/16}, 100 random f each, z = 1/h + iδ".into(),
    })
}

fn c5(ctx: &mut Ctx) -> Result<Outcome> {
    let geom = ctx.torus()?;
    let mut worst_off = 0.0f64;
    for (j, &(re, im)) in PINNED_OFF_AXIS.iter().enumerate() {
        let check = check_ellipt_bounds(
            &geom,
            ElliptRegime::OffAxis,
            C64::new(re, im),
            10,
            derive_seed(ctx.seed, 0x0500 + j as u64),
        )?;
        worst_off = worst_off.max(check.worst_ratio);
    }
    let mut worst_neg = 0.0f64;
    for (j, &y) in PINNED_NEG_REAL.iter().enumerate() {
        let check = check_ellipt_bounds(
            &geom,
            ElliptRegime::NegativeReal,
            C64::new(0.0, y),
            10,
            derive_seed(ctx.seed, 0x0540 + j as u64),
        )?;
        worst_neg = worst_neg.max(check.worst_ratio);
    }
    let exp = &ctx.expected.ellipt;
    let pass = worst_off <= exp.c_off_axis
        && worst_neg <= exp.c_negative_real
        && within_upper(worst_off, exp.worst_off_axis)
        && within_upper(worst_neg, exp.worst_negative_real);
    Ok(Outcome {
        measured: format!(
            "worst ‖u‖_q/(K(z)‖f‖_p): off-axis {worst_off:.4}, negative-real {worst_neg:.4}"
        ),
        threshold: format!(
            "≤ calibrated C ({}, {}), within 1% of pinned",
            exp.c_off_axis, exp.c_negative_real
        ),
        pass,
        detail: "10 shifts × 10 random trials per regime".into(),
    })
}

fn c6(ctx: &mut Ctx) -> Result<Outcome> {
    ctx.ensure_qep_const()?;
    let (spectrum, lambdas) = ctx.qep_const.as_ref().expect("ensure_qep_const ran");
    ctx.emit_json("c6-qep-constant.json", spectrum)?;
    let oracle = constant_damping_spectrum(lambdas, 1.0);
    let trusted: Vec<C64> = spectrum.trusted().map(|e| e.tau()).collect();
    if trusted.is_empty() {
        return Ok(Outcome {
            measured: "no trusted eigenvalues".into(),
            threshold: "trusted set nonempty and within 1e-8 of the oracle".into(),
            pass: false,
            detail: "trust filter rejected the whole spectrum".into(),
        });
    }
    let dist = matching_distance(&trusted, &oracle);
    let mut branch_err = 0.0f64;
    for t in &trusted {
        if t.re.abs() > 1e-6 {
            branch_err = branch_err.max((t.im - 1.0).abs());
        }
    }
    Ok(Outcome {
        measured: format!(
            "matching distance {dist:.2e}, real-branch |Im τ - 1| ≤ {branch_err:.2e}, {} trusted",
            trusted.len()
        ),
        threshold: "both ≤ 1e-8 against ic ± √(λ - c²)".into(),
        pass: dist <= 1e-8 && branch_err <= 1e-8,
        detail: format!("a ≡ 1, truncation {DESK_TRUNCATION}, {} modes", spectrum.mode_count),
    })
}

fn c7(ctx: &mut Ctx) -> Result<Outcome> {
    ctx.ensure_qep_a3()?;
    let spectrum = ctx.qep_a3.as_ref().expect("ensure_qep_a3 ran");
    ctx.emit_json("c7-qep-three-cosine.json", spectrum)?;
    let band = check_band_localization(spectrum, 0.0, 6.0, 1e-6);
    let refl = spectrum.reflection_distance();
    let pass = band.checked > 0 && band.violations == 0 && refl <= 1e-8;
    Ok(Outcome {
        measured: format!(
            "{} trusted checked, {} band violations, reflection distance {refl:.2e}",
            band.checked, band.violations
        ),
        threshold: "0 violations of Im τ ∈ [0, 6] off axis (tol 1e-6), reflection ≤ 1e-8".into(),
        pass,
        detail: format!(
            "a = 3 + Σ cos x_j, worst band excursion {:+.2e}",
            band.worst_excursion
        ),
    })
}

fn c8(ctx: &mut Ctx) -> Result<Outcome> {
    ctx.ensure_flow_sep()?;
    ctx.ensure_flow_a3()?;
    let sep = ctx.flow_sep.as_ref().expect("ensure_flow_sep ran");
    let a3 = ctx.flow_a3.as_ref().expect("ensure_flow_a3 ran");
    ctx.emit_json("c8-flow-separable.json", sep)?;
    ctx.emit_json("c8-flow-three-cosine.json", a3)?;

    let sep_ok = (sep.a_plus - 2.0).abs() <= 1e-3 && sep.a_minus.abs() <= 1e-3;

    // Along the sampled orbits of 3 + Σ cos x_j the extremal averages at
    // half-time T are exactly 5 ± sinc(2T) and 1 ∓ sinc(2T) (axis
    // directions from extremal base points), so the finite-T reference
    // values carry a sinc(2T) offset inside the 1/(2T) envelope.
    let sinc = (2.0 * DESK_T_MAX).sin() / (2.0 * DESK_T_MAX);
    let oracle_plus = 5.0 + sinc;
    let oracle_minus = 1.0 - sinc;
    let envelope = 1.0 / (2.0 * DESK_T_MAX);
    let a3_ok = (a3.a_plus - oracle_plus).abs() <= 5e-3
        && (a3.a_minus - oracle_minus).abs() <= 5e-3
        && (oracle_plus - 5.0).abs() <= envelope
        && (oracle_minus - 1.0).abs() <= envelope;

    let ladders_ok = a3.sup_ladder.windows(2).all(|w| w[1] <= w[0] + 1e-6)
        && a3.inf_ladder.windows(2).all(|w| w[1] >= w[0] - 1e-6)
        && a3.t_ladder.last() == Some(&DESK_T_MAX);

    Ok(Outcome {
        measured: format!(
            "1+cos: A₊ = {:.6}, A₋ = {:.6}; 3+Σcos: A₊ = {:.6}, A₋ = {:.6}",
            sep.a_plus, sep.a_minus, a3.a_plus, a3.a_minus
        ),
        threshold: format!(
            "(2, 0) ± 1e-3; ({oracle_plus:.6}, {oracle_minus:.6}) ± 5e-3 with |offset| ≤ 1/(2T)"
        ),
        pass: sep_ok && a3_ok && ladders_ok,
        detail: format!(
            "T ladder {:?}, {} samples, Cauchy gaps ({:.2e}, {:.2e})",
            a3.t_ladder, a3.sample_count, a3.cauchy_gap_sup, a3.cauchy_gap_inf
        ),
    })
}

fn c9(ctx: &mut Ctx) -> Result<Outcome> {
    ctx.ensure_qep_a3()?;
    ctx.ensure_flow_a3()?;
    let spectrum = ctx.qep_a3.as_ref().expect("ensure_qep_a3 ran");
    let flow = ctx.flow_a3();
    let check = check_strip_theorem(
        spectrum,
        flow.a_plus,
        flow.a_minus,
        STRIP_EPSILON,
        (6.0, 12.0),
    );
    ctx.emit_json("c9-strip-window.json", &check)?;
    let vacuous = if check.vacuous { " (vacuously)" } else { "" };
    Ok(Outcome {
        measured: format!(
            "{} trusted in window, {} exceptions{vacuous}",
            check.in_window,
            check.exceptions.len()
        ),
        threshold: format!(
            "0 exceptions to Im τ ∈ ({:.4}, {:.4}) for Re τ ∈ [6, 12]",
            check.strip.0, check.strip.1
        ),
        pass: check.exceptions.is_empty(),
        detail: format!(
            "strip from measured (A₋, A₊) = ({:.4}, {:.4}) with ε = {STRIP_EPSILON}; window counts reported either way",
            flow.a_minus, flow.a_plus
        ),
    })
}

fn c10(ctx: &mut Ctx) -> Result<Outcome> {
    ctx.ensure_a3()?;
    let geom = ctx.torus()?;
    let a = ctx.a3();
    let solve = DampedSolveOptions {
        gmres: GmresConfig {
            restart: 80,
            max_iters: 800,
            tol: 1e-10,
        },
        known_spectrum: vec![],
    };
    let regimes: [(DampedBoundRegime, &[(f64, f64)]); 3] = [
        (DampedBoundRegime::AboveBand, &PINNED_ABOVE),
        (DampedBoundRegime::BelowBand, &PINNED_BELOW),
        (DampedBoundRegime::HighImaginary, &PINNED_HIGH_IM),
    ];
    let mut min_margin = f64::INFINITY;
    let mut violations = 0usize;
    let mut solves = 0usize;
    for (r, (regime, taus)) in regimes.into_iter().enumerate() {
        for (j, &(re, im)) in taus.iter().enumerate() {
            let check = check_damped_l2_bounds(
                &geom,
                a,
                regime,
                C64::new(re, im),
                50,
                &solve,
                derive_seed(ctx.seed, 0x0a00 + (r as u64) * 64 + j as u64),
            )?;
            min_margin = min_margin.min(check.min_margin);
            violations += check.violations;
            solves += check.trials;
        }
    }
    Ok(Outcome {
        measured: format!("min margin {min_margin:.6} over {solves} solves, {violations} violations"),
        threshold: "0 violations of bound·‖f‖₂/‖u‖₂ ≥ 1 - 1e-8".into(),
        pass: violations == 0 && min_margin >= 1.0 - 1e-8,
        detail: "3 regimes × 6 pinned τ × 50 random f".into(),
    })
}

fn c11(ctx: &mut Ctx) -> Result<Outcome> {
    ctx.ensure_qep_a3()?;
    ctx.ensure_flow_a3()?;
    let geom = ctx.torus()?;
    let (a_plus, a_minus) = {
        let flow = ctx.flow_a3();
        (flow.a_plus, flow.a_minus)
    };
    let disks: Vec<Disk> = ctx
        .qep_a3
        .as_ref()
        .expect("ensure_qep_a3 ran")
        .trusted()
        .map(|e| Disk::new(e.tau(), DISK_RADIUS))
        .collect();
    let region = RegionSpec::DampedBands {
        delta: DESK_DELTA,
        l: 6.0,
        a_plus,
        a_minus,
        excluded: disks,
    };
    let gmres = GmresConfig {
        restart: 80,
        max_iters: 800,
        tol: 1e-8,
    };
    let boyd = BoydOptions {
        restarts: 2,
        max_iters: 25,
        rel_tol: 1e-8,
        stall_iters: 4,
        seed: derive_seed(ctx.seed, 0x0b01),
    };

    let upper_spec = DampedScanSpec {
        p: CRITICAL_P,
        im_level: a_plus + DESK_DELTA,
        range: (6.0, 30.0),
        points: 9,
        weight_exponent: 0.0,
        slope_threshold: ctx.expected.slope_threshold,
        fit_slope: true,
    };
    let a3_field_ptr = ctx.a3.as_ref().expect("ensure_a3 ran");
    let upper = scan_damped(
        &geom,
        a3_field_ptr,
        &region,
        &upper_spec,
        &boyd,
        &gmres,
        &[],
        "c11-upper-band",
    )?;

    let compact_spec = DampedScanSpec {
        p: CRITICAL_P,
        im_level: -DESK_DELTA / 2.0,
        range: (-6.0, 6.0),
        points: 13,
        weight_exponent: 0.0,
        slope_threshold: ctx.expected.slope_threshold,
        fit_slope: false,
    };
    let mut cboyd = boyd.clone();
    cboyd.seed = derive_seed(ctx.seed, 0x0b02);
    let compact = scan_damped(
        &geom,
        a3_field_ptr,
        &region,
        &compact_spec,
        &cboyd,
        &gmres,
        &[],
        "c11-compact",
    )?;
    ctx.emit_report(&upper)?;
    ctx.emit_report(&compact)?;

    let fit = upper
        .summary
        .slope
        .ok_or_else(|| Error::NonConvergence("upper-band slope fit missing".into()))?;
    let exp = &ctx.expected.damped_band;
    let upper_ok = upper.summary.uniform == Some(true)
        && upper.rows.iter().all(|r| r.region_ok)
        && within_upper(fit.upper(), exp.slope_upper)
        && within_upper(upper.summary.max_probe, exp.max_probe);
    let skipped = compact
        .summary
        .flag_counts
        .get("skip-disk")
        .copied()
        .unwrap_or(0);
    let compact_ok = compact
        .rows
        .iter()
        .all(|r| r.flag == "skip-disk" || (r.is_ok() && r.probe.is_finite()));
    Ok(Outcome {
        measured: format!(
            "upper slope {:+.4} (+2σ = {:+.4}), max probe {:.4}; compact: {} finite, {} disk-skipped",
            fit.slope,
            fit.upper(),
            upper.summary.max_probe,
            compact.rows.len() - skipped,
            skipped
        ),
        threshold: format!(
            "slope+2σ ≤ {} on Im τ = A₊+{DESK_DELTA}, all compact probes finite outside r = {DISK_RADIUS} disks",
            ctx.expected.slope_threshold
        ),
        pass: upper_ok && compact_ok,
        detail: format!(
            "upper band Re τ ∈ [6,30] at Im τ = {:.4}; compact Im τ = {:.2}, Re τ ∈ [-6,6]",
            a_plus + DESK_DELTA,
            -DESK_DELTA / 2.0
        ),
    })
}

fn c12(ctx: &mut Ctx) -> Result<Outcome> {
    let geom = ctx.sphere()?;
    let spec = SharpnessSpec {
        delta: DESK_DELTA,
        c: 1.0,
        k_lo: 6,
        k_hi: 20,
        p: CRITICAL_P,
        slope_threshold: ctx.expected.slope_threshold,
        growth_min: 2.0,
    };
    let boyd = BoydOptions {
        restarts: 3,
        max_iters: 60,
        rel_tol: 1e-10,
        stall_iters: 5,
        seed: derive_seed(ctx.seed, 0x0c00),
    };
    let outcome = sharpness_sphere(&geom, &spec, &boyd, "c12-sphere")?;
    ctx.emit_report(&outcome.control)?;
    ctx.emit_report(&outcome.shrinking)?;
    let control_upper = outcome
        .control
        .summary
        .slope
        .map(|s| s.upper())
        .unwrap_or(f64::INFINITY);
    let exp = &ctx.expected.sphere;
    let pass = outcome.demonstrated
        && within_lower(outcome.growth_factor, exp.growth_factor)
        && within_upper(control_upper, exp.control_slope_upper);
    Ok(Outcome {
        measured: format!(
            "growth ×{:.2} along z_k = (k+1) + i/k, control slope+2σ = {:+.4}, monotone tail: {}",
            outcome.growth_factor, control_upper, outcome.monotone_tail
        ),
        threshold: format!(
            "growth ≥ 2 and monotone for k ∈ [13,20], control slope+2σ ≤ {}, pinned growth ≥ {:.2}",
            ctx.expected.slope_threshold, exp.growth_factor
        ),
        pass,
        detail: format!("zonal sphere K = {DESK_SPHERE_KMAX}, k ∈ [6,20], p = {CRITICAL_P}"),
    })
}

fn c13(ctx: &mut Ctx) -> Result<Outcome> {
    ctx.ensure_c2()?;
    let first = ctx.c2_report.as_ref().expect("ensure_c2 ran").csv();
    let replay = ctx.crucial_scan("c2-crucial-line")?;
    let second = replay.csv();
    let pass = first == second;
    let detail = if pass {
        format!("{} CSV rows replayed byte-identically", replay.rows.len())
    } else {
        let line = first
            .lines()
            .zip(second.lines())
            .position(|(a, b)| a != b)
            .map(|i| format!("first divergence at line {}", i + 1))
            .unwrap_or_else(|| "row counts differ".into());
        line
    };
    Ok(Outcome {
        measured: if pass {
            "replay byte-identical".into()
        } else {
            "replay diverged".into()
        },
        threshold: "CSV (timing excluded) identical for the same seed".into(),
        pass,
        detail,
    })
}

type CriterionFn = fn(&mut Ctx) -> Result<Outcome>;

const TABLE: [(&str, &str, CriterionFn); 13] = [
    ("c1", "exact-l2-oracle", c1),
    ("c2", "crucial-line-uniformity", c2),
    ("c3", "weighted-pair-scaling", c3),
    ("c4", "apriori-crucial-identity", c4),
    ("c5", "elliptic-region-bounds", c5),
    ("c6", "qep-constant-oracle", c6),
    ("c7", "qep-band-localization", c7),
    ("c8", "flow-average-limits", c8),
    ("c9", "strip-theorem-window", c9),
    ("c10", "damped-l2-apriori", c10),
    ("c11", "damped-band-uniformity", c11),
    ("c12", "sphere-sharpness", c12),
    ("c13", "determinism-replay", c13),
];

/// Normalises a criterion selector ("c7", "C7", "7") to a table id.
pub fn normalize_criterion_id(raw: &str) -> Result<String> {
    let trimmed = raw.trim().to_ascii_lowercase();
    let digits = trimmed.strip_prefix('c').unwrap_or(&trimmed);
    let n: usize = digits
        .parse()
        .map_err(|_| Error::Config(format!("unknown criterion id '{raw}'")))?;
    if !(1..=TABLE.len()).contains(&n) {
        return Err(Error::Config(format!(
            "criterion id '{raw}' outside c1..c{}",
            TABLE.len()
        )));
    }
    Ok(format!("c{n}"))
}

/// Runs the campaign, printing one pass/fail line per criterion.
pub fn run_acceptance(opts: &AcceptanceOptions) -> Result<AcceptanceReport> {
    let selected = match &opts.only {
        Some(raw) => Some(normalize_criterion_id(raw)?),
        None => None,
    };
    let mut ctx = Ctx::new(opts);
    let mut results = Vec::new();
    for (id, title, f) in TABLE {
        if let Some(sel) = &selected {
            if sel != id {
                continue;
            }
        }
        let start = Instant::now();
        let result = match f(&mut ctx) {
            Ok(out) => CriterionResult {
                id: id.into(),
                title: title.into(),
                pass: out.pass,
                errored: false,
                measured: out.measured,
                threshold: out.threshold,
                detail: out.detail,
                elapsed_ms: start.elapsed().as_millis(),
            },
            Err(e) => CriterionResult {
                id: id.into(),
                title: title.into(),
                pass: false,
                errored: true,
                measured: "measurement errored".into(),
                threshold: "-".into(),
                detail: e.to_string(),
                elapsed_ms: start.elapsed().as_millis(),
            },
        };
        println!("{}", result.line());
        results.push(result);
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let failed = results.len() - passed;
    let errored = results.iter().filter(|r| r.errored).count();
    let report = AcceptanceReport {
        seed: opts.seed,
        results,
        passed,
        failed,
        errored,
    };
    println!(
        "acceptance: {passed}/{} passed{}",
        report.results.len(),
        if errored > 0 {
            format!(" ({errored} errored)")
        } else {
            String::new()
        }
    );
    if let Some(dir) = &opts.out {
        std::fs::create_dir_all(dir)?;
        let body = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Config(format!("acceptance serialisation failed: {e}")))?;
        std::fs::write(dir.join("acceptance.json"), body)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_ids_normalise() {
        assert_eq!(normalize_criterion_id("c7").unwrap(), "c7");
        assert_eq!(normalize_criterion_id("7").unwrap(), "c7");
        assert_eq!(normalize_criterion_id(" C13 ").unwrap(), "c13");
        assert!(normalize_criterion_id("c14").is_err());
        assert!(normalize_criterion_id("zero").is_err());
        assert!(normalize_criterion_id("0").is_err());
    }

    #[test]
    fn table_ids_are_sequential() {
        for (i, (id, _, _)) in TABLE.iter().enumerate() {
            assert_eq!(*id, format!("c{}", i + 1));
        }
    }
}
