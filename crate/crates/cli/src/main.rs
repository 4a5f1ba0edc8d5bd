use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hfns_core::io::{
    load_trajectory_file, metric_table, parse_checks, parse_config, run, trajectory_from_snapshots, verify, Check,
    ExitStatus, IoError, RunConfig, RunSummary,
};
use hfns_core::pathspace::PathMetricConfig;

#[derive(Parser)]
#[command(name = "hfns", version, about = "Horizontally filtered Navier-Stokes solver and estimate checker")]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the configuration).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated checks, or `all`.
    #[arg(long, global = true, value_name = "LIST")]
    checks: Option<String>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured run and check the estimates along it.
    Simulate,
    /// Check the estimates on a stored trajectory.
    Verify {
        /// Trajectory file (defaults to `<out>/trajectory.hfns`).
        #[arg(long, value_name = "FILE")]
        trajectory: Option<PathBuf>,
    },
    /// Pairwise path-space distances between stored trajectories.
    Metric {
        /// Number of series terms (defaults to `metric_N` or 20).
        #[arg(long, value_name = "N")]
        terms: Option<usize>,
        #[arg(required = true, num_args = 2.., value_name = "TRAJECTORY")]
        files: Vec<PathBuf>,
    },
    /// Pressure, momentum-balance and continuity checks.
    Pressure {
        /// Evaluate a stored trajectory instead of simulating.
        #[arg(long, value_name = "FILE")]
        trajectory: Option<PathBuf>,
    },
}

fn fail(code: ExitStatus, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("hfns: {message}");
    ExitCode::from(code as u8)
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("HFNS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("HFNS_THREADS={value} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load_config(cli: &Cli, required: bool) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None if required => return Err("--config is required".into()),
        None => RunConfig::default(),
    };
    if let Some(list) = &cli.checks {
        cfg.checks = parse_checks(list).map_err(|e| format!("--checks: {e}"))?;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("hfns-out"))
}

fn report(cli: &Cli, result: Result<RunSummary, IoError>) -> ExitCode {
    match result {
        Ok(summary) => {
            let status = summary.exit_status();
            if !cli.quiet || status != ExitStatus::Pass {
                print!("{}", summary.render());
            }
            ExitCode::from(status as u8)
        }
        Err(e) => fail(ExitStatus::Usage, e),
    }
}

fn stored_or_default(trajectory: &Option<PathBuf>, out: &Path) -> PathBuf {
    trajectory.clone().unwrap_or_else(|| out.join("trajectory.hfns"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return fail(ExitStatus::Usage, e);
    }
    let needs_config = !matches!(cli.command, Command::Metric { .. });
    let mut cfg = match load_config(&cli, needs_config) {
        Ok(c) => c,
        Err(e) => return fail(ExitStatus::Usage, e),
    };
    let out = out_dir(&cli, &cfg);
    match &cli.command {
        Command::Simulate => report(&cli, run(&cfg, &out)),
        Command::Verify { trajectory } => report(&cli, verify(&cfg, &stored_or_default(trajectory, &out), &out)),
        Command::Pressure { trajectory } => {
            if cli.checks.is_none() {
                cfg.checks = vec![Check::Pressure, Check::Momentum, Check::Continuity];
            }
            match trajectory {
                Some(path) => report(&cli, verify(&cfg, path, &out)),
                None => report(&cli, run(&cfg, &out)),
            }
        }
        Command::Metric { terms, files } => {
            let metric = PathMetricConfig {
                n_terms: terms.unwrap_or(cfg.metric_terms),
            };
            let mut trajectories = Vec::new();
            for path in files {
                let loaded = load_trajectory_file(path).and_then(|s| trajectory_from_snapshots(s, &cfg.sim, None));
                match loaded {
                    Ok(t) => trajectories.push((path.display().to_string(), t)),
                    Err(e) => return fail(ExitStatus::Usage, format!("{}: {e}", path.display())),
                }
            }
            if let Err(e) = std::fs::create_dir_all(&out) {
                return fail(ExitStatus::Usage, e);
            }
            let file = match std::fs::File::create(out.join("metric.csv")) {
                Ok(f) => f,
                Err(e) => return fail(ExitStatus::Usage, e),
            };
            match metric_table(&trajectories, &metric, file) {
                Ok(values) => {
                    if !cli.quiet {
                        for (i, j, d) in values {
                            println!("d({}, {}) = {:e}", trajectories[i].0, trajectories[j].0, d);
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(ExitStatus::Usage, e),
            }
        }
    }
}
