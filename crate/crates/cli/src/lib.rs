//! Command-line front end: `simulate`, `check`, `equilibria`, `list-systems`.
//!
//! Exit codes: 0 success, 1 config or I/O error, 2 system construction
//! error, 3 failed invariant or structural check, 4 integration failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use metriplectic::analysis::{
    closed_form_check, default_seeds, find_equilibria, integrate, structural_suite, EquilibriumOptions, StructuralReport,
    SuiteOptions, TrajectoryRecord,
};
use metriplectic::config::{OutputFormat, RunConfig, SystemSource};
use metriplectic::sampling;
use metriplectic::systems::{self, list_builtins};
use metriplectic::MetriplecticSystem;
use serde::Serialize;
use thiserror::Error;

pub mod output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CONSTRUCTION: i32 = 2;
pub const EXIT_CHECK: i32 = 3;
pub const EXIT_INTEGRATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "metriplectic", version, about = "Simulate and check three-dimensional metriplectic systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate from x0 and write the monitored trajectory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides output.format.
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Check the structural identities at random sample points.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = sampling::CASIMIR_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = sampling::CASIMIR_SEED)]
        seed: u64,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Find and classify equilibria on an energy level; prints JSON.
    Equilibria {
        #[arg(long)]
        config: PathBuf,
        /// Energy level; defaults to H(x0).
        #[arg(long = "h-level", allow_negative_numbers = true)]
        h_level: Option<f64>,
    },
    /// List the built-in systems.
    ListSystems {
        #[arg(long)]
        format: Option<OutputFormat>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Construction(String),
    #[error("{0}")]
    Check(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Construction(_) => EXIT_CONSTRUCTION,
            CliError::Check(_) => EXIT_CHECK,
            CliError::Integration(_) => EXIT_INTEGRATION,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn build(cfg: &RunConfig) -> Result<MetriplecticSystem, CliError> {
    cfg.build_system().map_err(|e| CliError::Construction(e.to_string()))
}

/// Runs one command, writing normal output to `out` and warnings and
/// summaries to `err`. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let res = match cli.command {
        Command::Simulate { config, out: path, format } => simulate(&config, path, format, out, err),
        Command::Check { config, samples, seed, format } => check(&config, samples, seed, format, out),
        Command::Equilibria { config, h_level } => equilibria(&config, h_level, out),
        Command::ListSystems { format } => list_systems(format, out),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn warn_non_casimir(sys: &MetriplecticSystem, err: &mut dyn Write) {
    if !sys.casimir_verified {
        let _ = writeln!(
            err,
            "warning: S is not a Casimir of P for system {:?}; dS/dt = -|sigma|^2 does not hold and the \
             entropy monotonicity check is disabled",
            sys.name
        );
    }
}

fn simulate(
    config: &Path,
    path: Option<PathBuf>,
    format: Option<OutputFormat>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = load(config)?;
    let x0 = cfg.x0.ok_or_else(|| CliError::Config(format!("{}: simulate needs x0", config.display())))?;
    let sys = build(&cfg)?;
    warn_non_casimir(&sys, err);
    let rec = integrate(&sys, x0, &cfg.integrator).map_err(|e| CliError::Integration(e.to_string()))?;

    let format = format.unwrap_or(cfg.output.format);
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => output::write_csv(&mut buf, &rec, cfg.output.every),
        OutputFormat::Json => output::write_json(&mut buf, &cfg, &rec),
    }
    .map_err(|e| CliError::Io(e.to_string()))?;

    let target = path.or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match &target {
        Some(p) => fs::write(p, &buf).map_err(|e| io_err(p, e))?,
        None => out.write_all(&buf).map_err(|e| CliError::Io(e.to_string()))?,
    }

    let verdict = verdict(&sys, x0, &cfg, &rec);
    let s = &rec.summary;
    let _ = writeln!(
        err,
        "final state {} at t = {}; H drift {:.3e} (tol {:.3e}); S violations {}{}; {}",
        s.final_state,
        s.final_time,
        s.h_drift_max,
        verdict.drift_tol,
        s.s_monotone_violations,
        if s.monotone_checked && cfg.checks.monotone { "" } else { " (not checked)" },
        if s.terminated_at_rest { "terminated at rest" } else { "ran to t_end" },
    );
    if verdict.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("invariant check failed: {}", verdict.failures.join("; "))))
    }
}

struct Verdict {
    drift_tol: f64,
    failures: Vec<String>,
}

fn verdict(sys: &MetriplecticSystem, x0: metriplectic::Vec3, cfg: &RunConfig, rec: &TrajectoryRecord) -> Verdict {
    let s = &rec.summary;
    let drift_tol = cfg.checks.h_drift_tol * (1.0 + sys.energy(x0).abs());
    let mut failures = Vec::new();
    if s.h_drift_max.is_nan() || s.h_drift_max > drift_tol {
        failures.push(format!("H drift {:.3e} exceeds {:.3e}", s.h_drift_max, drift_tol));
    }
    if cfg.checks.monotone && s.monotone_checked && s.s_monotone_violations > 0 {
        failures.push(format!("S increased on {} steps", s.s_monotone_violations));
    }
    if cfg.checks.ortho && sys.casimir_verified {
        let bad = rec.diagnostics.iter().filter(|d| !d.ortho_ok).count();
        if bad > 0 {
            failures.push(format!("orthogonality violated at {bad} samples"));
        }
    }
    Verdict { drift_tol, failures }
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    system: &'a str,
    seed: u64,
    #[serde(flatten)]
    report: &'a StructuralReport,
    pass: bool,
}

fn check(config: &Path, n: usize, seed: u64, format: Option<OutputFormat>, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(config)?;
    let sys = build(&cfg)?;
    let samples = sampling::uniform_box(n, seed, sampling::BOX_HALF_WIDTH);
    let opts = SuiteOptions { casimir: cfg.checks.casimir, ortho: cfg.checks.ortho };
    let mut report = structural_suite(&sys, &samples, opts);
    if let SystemSource::Builtin { name, params } = &cfg.system {
        let spec = systems::builtin(name, params).map_err(|e| CliError::Construction(e.to_string()))?;
        report.checks.extend(closed_form_check(&spec, &sys, &samples));
    }
    let pass = report.pass();
    let w = |e: std::io::Error| CliError::Io(e.to_string());
    match format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => {
            let doc = CheckOutput { system: &sys.name, seed, report: &report, pass };
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out).map_err(w)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "system {}: {} samples, seed {seed}", sys.name, report.samples).map_err(w)?;
            for c in &report.checks {
                writeln!(
                    out,
                    "{:<13} max {:.3e}  tol {:.0e}  {}",
                    c.name,
                    c.max_residual,
                    c.tol,
                    if c.pass { "pass".to_string() } else { format!("FAIL ({} samples)", c.failures) }
                )
                .map_err(w)?;
            }
        }
    }
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        Err(CliError::Check(format!("structural checks failed: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct EquilibriaOutput<'a> {
    system: &'a str,
    level: f64,
    search: metriplectic::analysis::EquilibriumSearch,
}

fn equilibria(config: &Path, h_level: Option<f64>, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load(config)?;
    let sys = build(&cfg)?;
    let level = match (h_level, cfg.x0) {
        (Some(l), _) if l.is_finite() => l,
        (Some(l), _) => return Err(CliError::Config(format!("--h-level must be finite, got {l}"))),
        (None, Some(x0)) => sys.energy(x0),
        (None, None) => return Err(CliError::Config("equilibria needs --h-level or x0 in the config".into())),
    };
    let opts = EquilibriumOptions { level: Some(level), ..Default::default() };
    let search = find_equilibria(&sys, &default_seeds(&sys, level), &opts);
    let doc = EquilibriaOutput { system: &sys.name, level, search };
    serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Io(e.to_string()))
}

fn list_systems(format: Option<OutputFormat>, out: &mut dyn Write) -> Result<(), CliError> {
    let w = |e: std::io::Error| CliError::Io(e.to_string());
    match format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, list_builtins()).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out).map_err(w)
        }
        OutputFormat::Csv => {
            for b in list_builtins() {
                writeln!(out, "{:<16} {:<22} {}", b.name, b.provenance, b.description).map_err(w)?;
            }
            Ok(())
        }
    }
}
