//! Command-line driver for the resolvent-lab campaigns.
//!
//! Exit codes: 0 on success, 1 when a campaign's pass criterion fails,
//! 2 for configuration errors, 3 for numerical failures.

use clap::{Parser, Subcommand};

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use resolvent_lab::damped::{
    assemble_qep, check_band_localization, estimate_a_bounds, qep_eigenvalues,
};
use resolvent_lab::error::Error;
use resolvent_lab::geometry::ModelGeometry;
use resolvent_lab::harness::acceptance::{run_acceptance, AcceptanceOptions};
use resolvent_lab::harness::scans::{
    scan_damped, scan_laplace, sharpness_sphere, DampedScanSpec, LaplaceScanSpec, SharpnessSpec,
};
use resolvent_lab::harness::{CampaignConfig, ExpectedValues, ScanReport};
use resolvent_lab::regions::{Disk, RegionSpec};
use resolvent_lab::Result;
use resolvent_lab::C64;

#[derive(Parser)]
#[command(
    name = "resolvent-lab",
    version,
    about = "Numerical verification campaigns for uniform resolvent estimates"
)]
struct Cli {
    /// Campaign configuration (TOML); defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Artifact directory for CSV/JSON outputs; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run a single acceptance criterion ("c7" or "7").
    #[arg(long, global = true)]
    only: Option<String>,
    /// Rayon worker threads; defaults to the executing machine's cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniformity scan of the shifted Laplace resolvent along Im z = δ.
    ScanLaplace,
    /// Damped-pencil scan along a band or compact segment.
    ScanDamped,
    /// Assemble and solve the quadratic eigenvalue problem.
    Qep,
    /// Geodesic flow averages of the damping coefficient.
    FlowAverage,
    /// Two-part sphere sharpness experiment.
    SharpnessSphere,
    /// The thirteen-criterion acceptance campaign.
    Acceptance,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::ExpectedValues(_) | Error::InvalidParameter(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let cfg = match &cli.config {
        Some(path) => CampaignConfig::load(path)?,
        None => CampaignConfig::default(),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()));
    match cli.command {
        Command::ScanLaplace => cmd_scan_laplace(cli, &cfg, out.as_deref()),
        Command::ScanDamped => cmd_scan_damped(cli, &cfg, out.as_deref()),
        Command::Qep => cmd_qep(cli, &cfg, out.as_deref()),
        Command::FlowAverage => cmd_flow(cli, &cfg, out.as_deref()),
        Command::SharpnessSphere => cmd_sharpness(cli, &cfg, out.as_deref()),
        Command::Acceptance => cmd_acceptance(cli, &cfg, out),
    }
}

fn delta_of(cfg: &CampaignConfig) -> f64 {
    cfg.region.as_ref().map(|r| r.delta).unwrap_or(0.5)
}

fn print_scan(report: &ScanReport) {
    println!("scan '{}': {} rows", report.label, report.rows.len());
    for (flag, count) in &report.summary.flag_counts {
        println!("  {flag}: {count}");
    }
    if report.summary.max_probe.is_finite() {
        println!("  max probe: {:.6}", report.summary.max_probe);
    }
    if let Some(fit) = &report.summary.slope {
        println!(
            "  slope {:+.5} ± {:.5} over {} points (+2σ = {:+.5}, threshold {})",
            fit.slope,
            fit.stderr,
            fit.points,
            fit.upper(),
            report.summary.slope_threshold
        );
    }
    if let Some(uniform) = report.summary.uniform {
        println!("  uniform: {uniform}");
    }
}

fn scan_exit(report: &ScanReport) -> ExitCode {
    if report.summary.uniform == Some(false) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_scan_laplace(
    cli: &Cli,
    cfg: &CampaignConfig,
    out: Option<&std::path::Path>,
) -> Result<ExitCode> {
    let geom = cfg.build_geometry()?;
    let scan = cfg.scan.as_ref();
    let p = scan.map(|s| s.p).unwrap_or(1.2);
    cfg.check_exponent(geom.dimension())?;
    let spec = LaplaceScanSpec {
        delta: delta_of(cfg),
        p,
        range: (
            scan.map(|s| s.min).unwrap_or(2.0),
            scan.map(|s| s.max).unwrap_or(30.0),
        ),
        points: scan.map(|s| s.points).unwrap_or(24),
        weight_exponent: scan.and_then(|s| s.weight_exponent).unwrap_or(0.0),
        slope_threshold: scan.and_then(|s| s.slope_threshold).unwrap_or(0.1),
    };
    let report = scan_laplace(&geom, &spec, &cfg.boyd_options(cli.seed), "scan-laplace")?;
    print_scan(&report);
    if let Some(dir) = out {
        report.write(dir)?;
    }
    Ok(scan_exit(&report))
}

fn cmd_scan_damped(
    cli: &Cli,
    cfg: &CampaignConfig,
    out: Option<&std::path::Path>,
) -> Result<ExitCode> {
    let geom = cfg.build_geometry()?;
    let a = cfg.build_damping(&geom)?;
    let delta = delta_of(cfg);
    let region_cfg = cfg.region.as_ref();
    let l = region_cfg.and_then(|r| r.l).unwrap_or(6.0);
    let a_plus = region_cfg.and_then(|r| r.a_plus).unwrap_or_else(|| a.sup());
    let a_minus = region_cfg.and_then(|r| r.a_minus).unwrap_or_else(|| a.inf());
    let disk_radius = region_cfg.and_then(|r| r.disk_radius).unwrap_or(0.25);

    // With a QEP truncation configured, the trusted eigenvalues become
    // exclusion disks and the solver's singular-shift guard list.
    let (disks, known): (Vec<Disk>, Vec<C64>) = match cfg.qep.as_ref() {
        Some(q) => {
            let pencil = assemble_qep(&geom, &a, q.truncation)?;
            let spectrum = qep_eigenvalues(&pencil)?;
            let taus: Vec<C64> = spectrum.trusted().map(|e| e.tau()).collect();
            (
                taus.iter().map(|&t| Disk::new(t, disk_radius)).collect(),
                taus,
            )
        }
        None => (vec![], vec![]),
    };

    let scan = cfg.scan.as_ref();
    let segment = scan.map(|s| s.segment.as_str()).unwrap_or("upper-band");
    let im_level = match scan.and_then(|s| s.im_level) {
        Some(level) => level,
        None => match segment {
            "upper-band" => a_plus + delta,
            "lower-band" => a_minus - delta,
            "compact" => -delta / 2.0,
            other => {
                return Err(Error::Config(format!(
                    "unknown scan segment '{other}' (expected upper-band, lower-band, or compact)"
                )))
            }
        },
    };
    let spec = DampedScanSpec {
        p: scan.map(|s| s.p).unwrap_or(1.2),
        im_level,
        range: (
            scan.map(|s| s.min).unwrap_or(6.0),
            scan.map(|s| s.max).unwrap_or(30.0),
        ),
        points: scan.map(|s| s.points).unwrap_or(9),
        weight_exponent: scan.and_then(|s| s.weight_exponent).unwrap_or(0.0),
        slope_threshold: scan.and_then(|s| s.slope_threshold).unwrap_or(0.1),
        fit_slope: segment != "compact",
    };
    let region = RegionSpec::DampedBands {
        delta,
        l,
        a_plus,
        a_minus,
        excluded: disks,
    };
    let report = scan_damped(
        &geom,
        &a,
        &region,
        &spec,
        &cfg.boyd_options(cli.seed),
        &cfg.gmres_config(),
        &known,
        "scan-damped",
    )?;
    print_scan(&report);
    if let Some(dir) = out {
        report.write(dir)?;
    }
    Ok(scan_exit(&report))
}

fn cmd_qep(cli: &Cli, cfg: &CampaignConfig, out: Option<&std::path::Path>) -> Result<ExitCode> {
    let _ = cli;
    let geom = cfg.build_geometry()?;
    let a = cfg.build_damping(&geom)?;
    let truncation = cfg.qep.as_ref().map(|q| q.truncation).unwrap_or(4);
    let pencil = assemble_qep(&geom, &a, truncation)?;
    let spectrum = qep_eigenvalues(&pencil)?;
    let (a_inf, a_sup) = pencil.damping_bounds();
    let band = check_band_localization(&spectrum, a_inf, a_sup, 1e-6);
    let trusted = spectrum.trusted().count();
    println!(
        "qep: {} modes at truncation {truncation}, {} eigenvalues, {trusted} trusted",
        spectrum.mode_count,
        spectrum.eigenvalues.len()
    );
    println!(
        "  reflection distance {:.3e}, band [inf a, sup a] = [{a_inf:.4}, {a_sup:.4}]",
        spectrum.reflection_distance()
    );
    println!(
        "  band check: {} trusted checked, {} violations, worst excursion {:+.3e}",
        band.checked, band.violations, band.worst_excursion
    );
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let body = serde_json::to_string_pretty(&spectrum)
            .map_err(|e| Error::Config(format!("artifact serialisation failed: {e}")))?;
        std::fs::write(dir.join("qep.json"), body)?;
    }
    Ok(if band.violations == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_flow(cli: &Cli, cfg: &CampaignConfig, out: Option<&std::path::Path>) -> Result<ExitCode> {
    let geom = cfg.build_geometry()?;
    let a = cfg.build_damping(&geom)?;
    let opts = cfg.flow_options(cli.seed);
    let report = estimate_a_bounds(&a, &opts)?;
    println!(
        "flow-average: {} samples on {}",
        report.sample_count,
        geom.label()
    );
    for ((t, sup), inf) in report
        .t_ladder
        .iter()
        .zip(&report.sup_ladder)
        .zip(&report.inf_ladder)
    {
        println!("  T = {t:>6}: sup {sup:.8}, inf {inf:.8}");
    }
    println!(
        "  A+ = {:.8}, A- = {:.8} (Cauchy gaps {:.2e}, {:.2e})",
        report.a_plus, report.a_minus, report.cauchy_gap_sup, report.cauchy_gap_inf
    );
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let body = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Config(format!("artifact serialisation failed: {e}")))?;
        std::fs::write(dir.join("flow-average.json"), body)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sharpness(
    cli: &Cli,
    cfg: &CampaignConfig,
    out: Option<&std::path::Path>,
) -> Result<ExitCode> {
    let geom = match cfg.geometry.as_ref() {
        None => Arc::new(ModelGeometry::sphere_zonal(24, None)?),
        Some(_) => cfg.build_geometry()?,
    };
    geom.as_sphere().map_err(|_| {
        Error::Config("sharpness-sphere needs a sphere geometry in [geometry]".into())
    })?;
    let scan = cfg.scan.as_ref();
    let spec = SharpnessSpec {
        delta: delta_of(cfg),
        c: 1.0,
        k_lo: 6,
        k_hi: 20,
        p: scan.map(|s| s.p).unwrap_or(1.2),
        slope_threshold: scan.and_then(|s| s.slope_threshold).unwrap_or(0.1),
        growth_min: 2.0,
    };
    let outcome = sharpness_sphere(&geom, &spec, &cfg.boyd_options(cli.seed), "sharpness")?;
    print_scan(&outcome.control);
    print_scan(&outcome.shrinking);
    println!(
        "sharpness: growth ×{:.3}, monotone tail {}, demonstrated {}",
        outcome.growth_factor, outcome.monotone_tail, outcome.demonstrated
    );
    if let Some(dir) = out {
        outcome.control.write(dir)?;
        outcome.shrinking.write(dir)?;
        std::fs::create_dir_all(dir)?;
        let body = serde_json::to_string_pretty(&outcome)
            .map_err(|e| Error::Config(format!("artifact serialisation failed: {e}")))?;
        std::fs::write(dir.join("sharpness.json"), body)?;
    }
    Ok(if outcome.demonstrated {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_acceptance(cli: &Cli, cfg: &CampaignConfig, out: Option<PathBuf>) -> Result<ExitCode> {
    let expected = match cfg
        .output
        .as_ref()
        .and_then(|o| o.expected_values.as_ref())
    {
        Some(path) => ExpectedValues::load(path)?,
        None => ExpectedValues::embedded()?,
    };
    let seed = cli
        .seed
        .or_else(|| cfg.probe.as_ref().and_then(|p| p.seed))
        .unwrap_or(0);
    let report = run_acceptance(&AcceptanceOptions {
        seed,
        out,
        only: cli.only.clone(),
        expected,
    })?;
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else if report.errored > 0 {
        ExitCode::from(3)
    } else {
        ExitCode::from(1)
    })
}
