//! `t^2 W_2^2` approaching the precise limit for the headline configuration.

use qsdlab::config::ExperimentConfig;
use qsdlab::runner::run_convergence;

fn main() -> qsdlab::Result<()> {
    let mut cfg = ExperimentConfig::headline();
    cfg.times = vec![5.0, 10.0, 20.0, 40.0, 80.0];
    let r = run_convergence(&cfg)?;
    println!("precise limit {:.6}, upper constant {:.6}", r.limit.value(), r.limit.upper_constant());
    for row in &r.rows {
        println!("t = {:>4}: t2w2 = {:.6}, ratio {:.4}, TV {:.3e}", row.t, row.t2w2, row.ratio(), row.tv);
    }
    for c in &r.checks {
        println!("{}: {}", c.name, c.status.tag());
    }
    Ok(())
}
