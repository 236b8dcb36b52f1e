use anyhow::Context;
use clap::{Parser, Subcommand};
use hvpopt_harness::config::{Command, ExperimentConfig};
use hvpopt_harness::experiment::{lowerbound_command, solve_or_sweep};
use hvpopt_harness::report::write_json;
use hvpopt_harness::verify::{run_verify, DEFAULT_SEED};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Worker count for replications and grid points; unset means one per core.
const WORKERS_ENV: &str = "HVPOPT_WORKERS";

#[derive(Parser)]
#[command(name = "hvpopt", version = hvpopt_harness::VERSION, about = "Stochastic second-order optimization experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One run per (epsilon, replication) of the configured solver.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Epsilon sweep with a log-log slope fit of median queries.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Zero-respecting simulations on a chain instance.
    Lowerbound {
        #[arg(long)]
        config: PathBuf,
    },
    /// Property suites: core, hvp_rvr, subproblems, solvers, hard_instances or all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Where to write `verify.json`.
        #[arg(long, default_value = "hvpopt-out")]
        out: PathBuf,
    },
}

enum Failure {
    Property,
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

fn load(path: &Path, expected: Command) -> Result<ExperimentConfig, Failure> {
    let cfg = ExperimentConfig::load(path).map_err(Failure::Config)?;
    if cfg.command != expected {
        return Err(Failure::Config(anyhow::anyhow!(
            "config command is {:?} but `{}` was invoked",
            cfg.command.as_str(),
            expected.as_str()
        )));
    }
    Ok(cfg)
}

fn set_workers() -> Result<(), Failure> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Runtime(e.into()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    set_workers()?;
    match cli.cmd {
        Cmd::Solve { config, seed, out } => {
            let mut cfg = load(&config, Command::Solve)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.output = o;
            }
            solve_or_sweep(&cfg).map_err(Failure::Runtime)?;
            println!("results written to {}", cfg.output.display());
        }
        Cmd::Sweep { config } => {
            let cfg = load(&config, Command::Sweep)?;
            let s = solve_or_sweep(&cfg).map_err(Failure::Runtime)?;
            match &s.fit {
                Some(f) => println!("slope {:.3} (r² {:.3}, {} points)", f.slope, f.r_squared, f.points),
                None => println!("no slope fit"),
            }
            for w in s.warnings.iter() {
                println!("warning: {w}");
            }
            println!("results written to {}", cfg.output.display());
        }
        Cmd::Lowerbound { config } => {
            let cfg = load(&config, Command::Lowerbound)?;
            let s = lowerbound_command(&cfg).map_err(Failure::Runtime)?;
            println!(
                "T={} rho={} deadline={:.1} failure_fraction={:.3} median_completion={}",
                s.t, s.rho, s.deadline, s.deadline_failure_fraction, s.median_completion
            );
            println!("results written to {}", cfg.output.display());
        }
        Cmd::Verify { suite, seed, out } => {
            let report = run_verify(&suite, seed).map_err(|e| Failure::Config(e.into()))?;
            for c in &report.checks {
                println!("{}", c.line());
            }
            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))
                .map_err(Failure::Runtime)?;
            write_json(&out.join("verify.json"), &report).map_err(Failure::Runtime)?;
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", report.checks.len());
            if failed > 0 {
                return Err(Failure::Property);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
