//! Command-line driver: reads experiment files, runs the harness and
//! writes CSV/JSON results.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::Utc;
use clap::{Parser, Subcommand};
use onebit_core::harness::{impossibility_demo, run_sweep, DemoReport, RiskReport};
use onebit_core::verify::{self, VerifyOptions};

use crate::config::{Command as ConfigCommand, ConfigError, ConfigFile};
use crate::output::{Document, RunManifest, CSV_COLUMNS, CSV_SCHEMA_VERSION};

pub const OUT_ENV: &str = "ONEBIT_SIM_OUT";

/// Exit status for bad configuration or usage.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failed runs and failed verification suites.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "onebit-sim", version, about = "Simulate one-bit sensor network learning protocols")]
pub struct Cli {
    /// Experiment file (flat key = value, see README).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the file's `seed`.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory; the ONEBIT_SIM_OUT environment variable wins over this flag.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the expected risk at a single network size `n`.
    Simulate,
    /// Estimate the expected risk over the `n_grid` sizes.
    Sweep,
    /// Regression without abstention against the abstaining protocol.
    DemoImpossibility,
    /// Run the built-in oracle suites.
    Verify {
        #[arg(long, hide = true)]
        corrupt_tie_break: bool,
    },
    /// Write gnuplot (n, excess_risk) files from a results CSV.
    Report {
        /// Results CSV; defaults to sweep.csv in the output directory.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
}

enum Failure {
    Config(ConfigError),
    Run(anyhow::Error),
    Verify(Vec<&'static str>),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::Run(e)
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            EXIT_FAILURE
        }
        Err(Failure::Verify(failed)) => {
            eprintln!("error: failed suites: {}", failed.join(", "));
            EXIT_FAILURE
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| cli.out.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let pool = match cli.jobs {
        Some(0) => return Err(ConfigError::new("--jobs", "must be at least 1").into()),
        Some(n) => Some(rayon::ThreadPoolBuilder::new().num_threads(n).build().context("cannot start worker pool")?),
        None => None,
    };
    let go = || match &cli.command {
        Command::Simulate => experiment(cli, ConfigCommand::Simulate),
        Command::Sweep => experiment(cli, ConfigCommand::Sweep),
        Command::DemoImpossibility => experiment(cli, ConfigCommand::Demo),
        Command::Verify { corrupt_tie_break } => verify_suites(*corrupt_tie_break),
        Command::Report { input } => report(cli, input.as_deref()),
    };
    match pool {
        Some(pool) => pool.install(go),
        None => go(),
    }
}

fn load_config(cli: &Cli, command: ConfigCommand) -> Result<ConfigFile, Failure> {
    match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
            Ok(text.parse()?)
        }
        None if command == ConfigCommand::Demo => Ok(ConfigFile::default()),
        None => Err(ConfigError::new("--config", "required").into()),
    }
}

fn experiment(cli: &Cli, command: ConfigCommand) -> Result<(), Failure> {
    let file = load_config(cli, command)?;
    let (mut config, demo_options) = config::experiment(&file.resolve(command), command)?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    let out = out_dir(cli);
    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let started_at = Utc::now().to_rfc3339();
    log::info!("{} {} on {} over n = {:?}", command.section(), config.protocol, config.scenario, config.n_grid);

    let (rows, demo): (Vec<RiskReport>, Option<DemoReport>) = match command {
        ConfigCommand::Demo => {
            let d = impossibility_demo(&config, demo_options.grid_points).context("demonstration failed")?;
            let rows = d.sweep.iter().chain(&d.contrast).cloned().collect();
            (rows, Some(d))
        }
        _ => (run_sweep(&config).context("experiment failed")?, None),
    };

    let name = command.section();
    let mut manifest_config = config::echo(&config);
    if command == ConfigCommand::Demo {
        manifest_config.insert("c".into(), demo_options.c.to_string());
        manifest_config.insert("grid_points".into(), demo_options.grid_points.to_string());
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        master_seed: config.master_seed,
        started_at,
        finished_at: Utc::now().to_rfc3339(),
        csv_schema_version: CSV_SCHEMA_VERSION,
        csv_columns: CSV_COLUMNS.to_vec(),
        config: manifest_config,
        experiment: config,
    };
    let csv_path = out.join(format!("{name}.csv"));
    let json_path = out.join(format!("{name}.json"));
    output::write_csv(&csv_path, &rows)?;
    output::write_json(&json_path, &Document { manifest, rows: &rows, demo: demo.as_ref() })?;

    for r in &rows {
        println!(
            "{:<14} n={:<8} risk={:.6} se={:.6} excess={:+.6} ({})",
            r.protocol, r.n, r.risk_mean, r.risk_se, r.excess_risk, r.schedule_validity
        );
    }
    if let Some(d) = &demo {
        println!(
            "mean |estimate| on {} grid points at largest n: {:.6}\nterminal MSE {:.6} (E{{Y^2}} = {:.6}), excess {:.6}, predicted plateau {:.6}\nabstaining contrast terminal excess {:.6}",
            d.grid_points, d.mean_abs_estimate, d.terminal_mse, d.second_moment, d.terminal_excess, d.predicted_plateau, d.contrast_terminal_excess
        );
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn verify_suites(corrupt_tie_break: bool) -> Result<(), Failure> {
    let mut opts = VerifyOptions::default();
    if corrupt_tie_break {
        opts.majority = verify::corrupted_tie_break;
    }
    let outcomes = verify::run_all(&opts);
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failed))
    }
}

fn report(cli: &Cli, input: Option<&Path>) -> Result<(), Failure> {
    let out = out_dir(cli);
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| out.join("sweep.csv"));
    let rows = output::read_plot_rows(&input)?;
    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
    for path in output::write_gnuplot(&out, &input, &rows)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
