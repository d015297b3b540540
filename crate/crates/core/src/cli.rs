//! `funnelquad run`: load a scenario, simulate it, write telemetry.
//!
//! Exit status: 0 when every logged error stayed inside its funnel, 2 on a
//! funnel violation (initial or in flight), 1 on any other failure such as an
//! invalid config or an unwritable output directory.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{self, Scenario};
use crate::error::{ConfigError, SimError};
use crate::funnel::Channel;
use crate::output;
use crate::plant::{DisturbanceKind, DisturbanceSpec};
use crate::sim::{self, RunReport, Termination};

/// Output directory used when neither `--out-dir` nor `FUNNELQUAD_OUT` is set.
pub const DEFAULT_OUT_DIR: &str = "funnelquad-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "funnelquad",
    version,
    about = "Prescribed-performance quadrotor simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and write telemetry.csv, metrics.json and plots.
    Run(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario file, or the name of a bundled preset (`ascent`, `landing`).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; falls back to $FUNNELQUAD_OUT.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Override the simulated duration, s.
    #[arg(long, allow_negative_numbers = true)]
    pub duration: Option<f64>,
    /// Override the logging and control period, s.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Replace the disturbance with a default one of this kind.
    #[arg(long)]
    pub disturbance: Option<DisturbanceKind>,
    /// Also write funnel_<channel>.svg charts.
    #[arg(long)]
    pub plots: bool,
}

/// What a successful or violating run wrote.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub report: Option<RunReport>,
    pub message: String,
}

/// Loads a scenario from a file, or from a bundled preset when `path` is a
/// bare preset name that does not exist on disk.
pub fn resolve_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    if !path.exists() && path.parent().is_none_or(|p| p.as_os_str().is_empty()) {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        if config::preset_source(stem).is_some() {
            return config::preset_scenario(stem);
        }
    }
    config::load_scenario(path)
}

fn apply_overrides(scenario: &mut Scenario, args: &RunArgs) -> Result<(), ConfigError> {
    let cfg = &mut scenario.sim;
    if let Some(d) = args.duration {
        cfg.duration = d;
    }
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(kind) = args.disturbance {
        cfg.disturbance = DisturbanceSpec::default_for(kind);
    }
    let file = config::ScenarioFile::from_config(cfg);
    let mut checked = file.into_scenario()?;
    checked.plot_channels = std::mem::take(&mut scenario.plot_channels);
    *scenario = checked;
    Ok(())
}

fn out_dir(args: &RunArgs) -> PathBuf {
    args.out_dir
        .clone()
        .or_else(|| std::env::var_os("FUNNELQUAD_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn write_outputs(
    report: &RunReport,
    dir: &Path,
    channels: &[Channel],
    plots: bool,
) -> Result<Vec<PathBuf>, crate::error::OutputError> {
    std::fs::create_dir_all(dir)?;
    let mut files = vec![dir.join("telemetry.csv"), dir.join("metrics.json")];
    output::write_csv(report, &files[0])?;
    output::write_metrics(report, &files[1])?;
    if plots && !report.records.is_empty() {
        let all = Channel::ALL.to_vec();
        let chosen = if channels.is_empty() { &all } else { channels };
        for c in chosen {
            let path = dir.join(format!("funnel_{c}.svg"));
            output::write_funnel_svg(report, c.name(), &path)?;
            files.push(path);
        }
    }
    Ok(files)
}

/// Executes `run` without printing.
pub fn run_command(args: &RunArgs) -> RunOutcome {
    let dir = out_dir(args);
    let fail = |code: i32, message: String| RunOutcome {
        exit_code: code,
        out_dir: dir.clone(),
        files: Vec::new(),
        report: None,
        message,
    };

    let mut scenario = match resolve_scenario(&args.config) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_ERROR, format!("config error: {e}")),
    };
    if let Err(e) = apply_overrides(&mut scenario, args) {
        return fail(EXIT_ERROR, format!("config error: {e}"));
    }

    let (report, code, message) = match sim::run(&scenario.sim) {
        Ok(report) if !report.is_compliant() => {
            let msg = match (report.violations.first(), report.termination) {
                (Some(v), Termination::Diverged { t }) => format!(
                    "funnel violation on {} at t = {} s: xi = {}; state diverged at t = {t} s",
                    v.channel, v.t, v.xi
                ),
                (Some(v), _) => format!(
                    "{} funnel violations, first on {} at t = {} s: xi = {}",
                    report.violations.len(),
                    v.channel,
                    v.t,
                    v.xi
                ),
                (None, term) => format!("run did not complete: {term:?}"),
            };
            (report, EXIT_VIOLATION, msg)
        }
        Ok(report) => {
            let m = &report.metrics;
            let worst = Channel::ALL
                .into_iter()
                .max_by(|a, b| m.max_abs_xi[a.index()].total_cmp(&m.max_abs_xi[b.index()]))
                .expect("twelve channels");
            let msg = format!(
                "ok: {} steps, no funnel violations (largest |xi| = {:.4} on {worst})",
                m.steps,
                m.max_abs_xi[worst.index()]
            );
            (report, EXIT_OK, msg)
        }
        Err(SimError::FunnelViolation { violation, report }) => {
            let msg = format!(
                "funnel violation on {} at t = {} s: xi = {}",
                violation.channel, violation.t, violation.xi
            );
            (*report, EXIT_VIOLATION, msg)
        }
        Err(e @ SimError::InitialCompliance(_)) => return fail(EXIT_VIOLATION, e.to_string()),
        Err(e @ SimError::InvalidConfig(_)) => {
            return fail(EXIT_ERROR, format!("config error: {e}"))
        }
        Err(e) => return fail(EXIT_ERROR, format!("simulation failed: {e}")),
    };

    match write_outputs(&report, &dir, &scenario.plot_channels, args.plots) {
        Ok(files) => RunOutcome {
            exit_code: code,
            out_dir: dir,
            files,
            report: Some(report),
            message,
        },
        Err(e) => fail(
            EXIT_ERROR,
            format!("cannot write outputs to {}: {e}", dir.display()),
        ),
    }
}

/// Parses `argv`, runs, prints a one-line summary, returns the exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run(args) => {
            let outcome = run_command(&args);
            if outcome.exit_code == EXIT_OK {
                println!("{}", outcome.message);
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
            } else {
                eprintln!("{}", outcome.message);
                for f in &outcome.files {
                    eprintln!("wrote {}", f.display());
                }
            }
            outcome.exit_code
        }
    }
}
