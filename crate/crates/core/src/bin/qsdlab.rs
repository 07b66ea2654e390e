use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsdlab::config::ExperimentConfig;
use qsdlab::runner;

#[derive(Parser)]
#[command(name = "qsdlab", version, about = "Conditional empirical measures of subordinated killed diffusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML); the built-in headline config when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Eigensystem, basis file and eigenvalue table.
    Eigensys,
    /// Limit constants and finiteness classification.
    Limit,
    /// Grid densities of the conditional empirical measure.
    Density,
    /// `t² W₂²` over the t grid, with assertions.
    W2Curve,
    /// Monte Carlo conditional empirical measure.
    Simulate,
    /// Invariant report of every module.
    Verify,
}

fn run(cli: &Cli) -> qsdlab::Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::headline(),
    };
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let (Some(seed), Some(mc)) = (cli.seed, cfg.monte_carlo.as_mut()) {
        mc.seed = seed;
    }
    let dir = cfg.output.clone();
    let (files, passed) = match cli.command {
        Command::Eigensys => (runner::run_eigensys(&cfg, &dir)?, true),
        Command::Limit => (runner::run_limit(&cfg, &dir)?.1, true),
        Command::Density => (runner::run_density(&cfg, &dir)?, true),
        Command::W2Curve => {
            let r = runner::run_convergence(&cfg)?;
            print!("{}", r.summary());
            (r.write(&dir)?, r.passed())
        }
        Command::Simulate => {
            let r = runner::run_simulate(&cfg)?;
            for c in &r.checks {
                println!("{}: {} ({})", c.name, c.status.tag(), c.detail);
            }
            (r.write(&dir)?, r.passed())
        }
        Command::Verify => {
            let r = runner::run_verify(&cfg)?;
            for e in r.failures() {
                println!("FAIL {}/{}: measured {:e}, threshold {:e}", e.module, e.name, e.measured, e.threshold);
            }
            println!("{} entries, {} failed", r.entries.len(), r.failures().len());
            (r.write(&dir)?, r.passed())
        }
    };
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(2)
        }
    }
}
