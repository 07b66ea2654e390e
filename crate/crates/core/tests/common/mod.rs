#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use qsdlab::bernstein::BernsteinFunction;
use qsdlab::spectral::{build_grid, eigensystem_closed_form, Domain, SpectralBasis};

/// Closed-form basis on `[0, π]`.
pub fn pi_basis(n: usize, k: usize) -> SpectralBasis {
    let g = build_grid(&Domain::interval(PI).unwrap(), n).unwrap();
    eigensystem_closed_form(PI, k, &g).unwrap()
}

pub fn sqrt_b() -> BernsteinFunction {
    BernsteinFunction::stable(0.5).unwrap()
}

/// Composite Gauss–Legendre rule on panels refined geometrically toward both ends of `[a, b]`.
pub fn graded_integral(a: f64, b: f64, levels: usize, points: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(points).unwrap());
    let mid = 0.5 * (a + b);
    let mut cuts = vec![a];
    let half = mid - a;
    for j in (1..=levels).rev() {
        cuts.push(a + half * 0.5f64.powi(j as i32));
    }
    cuts.push(mid);
    for j in 1..=levels {
        cuts.push(b - half * 0.5f64.powi(j as i32));
    }
    cuts.push(b);
    cuts.windows(2).map(|w| rule.integrate(w[0], w[1], &f)).sum()
}

/// One result line on the real stdout, bypassing the test harness capture.
pub fn report(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}
