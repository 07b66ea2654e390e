//! Bernstein functions: values, class exponents and the ratio limit.

use qsdlab::bernstein::{check_class_alpha, default_probe, largest_class_alpha, ratio_limit_check, BernsteinFunction};

fn main() -> qsdlab::Result<()> {
    let probe = default_probe();
    let family = [
        BernsteinFunction::linear(1.0)?,
        BernsteinFunction::stable(0.5)?,
        BernsteinFunction::stable_drift(0.1, 1.0, 0.5)?,
        BernsteinFunction::compound_poisson_drift(0.5, 2.0, 1.0)?,
    ];
    for b in &family {
        let class = check_class_alpha(b, b.declared_alpha(), &probe)?;
        let best = largest_class_alpha(b, &probe)?;
        let ratio = ratio_limit_check(b, 1.0, &probe)?;
        println!("{}", b.describe());
        println!("  B(1) = {:.6}, B(4) = {:.6}, B'(0+) = {}", b.eval(1.0)?, b.eval(4.0)?, b.derivative_at_zero());
        println!("  class alpha = {}: {} (inf {:.4})", class.alpha, class.passed, class.inf_value);
        println!("  largest class alpha on probe: {best:?}");
        println!("  ratio limit deviation {:.3e}, decreasing {}", ratio.final_deviation, ratio.decreasing);
    }
    Ok(())
}
