//! Limit series, finiteness classification and divergence probes.

use std::f64::consts::PI;

use qsdlab::bernstein::BernsteinFunction;
use qsdlab::limits::{divergence_probe, finiteness_classify, limit_precise, NuMeta};
use qsdlab::semigroup::InitialDistribution;
use qsdlab::spectral::{build_grid, eigensystem_closed_form, Domain};

fn main() -> qsdlab::Result<()> {
    let basis = eigensystem_closed_form(PI, 256, &build_grid(&Domain::interval(PI)?, 4097)?)?;
    let nu = InitialDistribution::ground_state(&basis)?;
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        let b = if alpha == 1.0 { BernsteinFunction::linear(1.0)? } else { BernsteinFunction::stable(alpha)? };
        let s = limit_precise(&basis, &b, &nu, 256)?;
        println!("alpha = {alpha}: limit {:.6}, upper {:.6}, tail bound {:.2e}", s.value(), s.upper_constant(), s.tail_bound);
    }
    let inf = NuMeta { p: Some(f64::INFINITY), q: Some(f64::INFINITY) };
    for (d, alpha) in [(1, 0.5), (3, 0.5), (4, 0.5), (6, 1.0)] {
        let v = finiteness_classify(d, alpha, inf)?;
        let probe = divergence_probe(d, alpha, 4096)?;
        println!("d = {d}, alpha = {alpha}: {:?}, divergence indicated {}", v.case, probe.divergence_indicated);
    }
    Ok(())
}
