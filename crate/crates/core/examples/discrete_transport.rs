//! Discrete optimal transport between weighted clouds.

use qsdlab::transport::{w2_discrete, WeightedPoints};

fn main() -> qsdlab::Result<()> {
    let a = WeightedPoints::from_1d(&[0.0, 0.5, 1.0], vec![0.2, 0.3, 0.5])?;
    let b = WeightedPoints::from_1d(&[0.1, 0.9], vec![0.6, 0.4])?;
    let (w, plan) = w2_discrete(&a, &b)?;
    println!("W2 = {w:.6}, duality gap {:.1e}", plan.duality_gap);
    print!("{}", plan.to_csv());

    let pts: Vec<Vec<f64>> = (0..25).map(|k| vec![(k % 5) as f64 * 0.25, (k / 5) as f64 * 0.25]).collect();
    let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + 0.1, p[1] - 0.05]).collect();
    let w = vec![1.0 / 25.0; 25];
    let (d, _) = w2_discrete(&WeightedPoints::new(pts, w.clone())?, &WeightedPoints::new(moved, w)?)?;
    println!("translated grid in the plane: W2 = {d:.6} (shift length {:.6})", (0.1f64 * 0.1 + 0.05 * 0.05).sqrt());
    Ok(())
}
