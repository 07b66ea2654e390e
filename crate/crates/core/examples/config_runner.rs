//! Load a TOML config, run the invariant suite and write the report.
//!
//! `cargo run --release --example config_runner -- configs/linear.toml out/example`

use std::path::PathBuf;

use qsdlab::config::ExperimentConfig;
use qsdlab::runner::run_verify;

fn main() -> qsdlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(p) => ExperimentConfig::load(&PathBuf::from(p))?,
        None => ExperimentConfig::headline(),
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("qsdlab-example"));
    let report = run_verify(&cfg)?;
    for e in &report.entries {
        println!("{:<12} {:<28} {:>12.4e} {}", e.module, e.name, e.measured, if e.passed { "pass" } else { "FAIL" });
    }
    for f in report.write(&out)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
