//! Synthesizes ex-ante optimal grading curves for several priors and norms.

use std::sync::Arc;

use spvote::welfare::{big_g, optimal_curve, PriorSpec};

fn main() -> spvote::Result<()> {
    let uniform = PriorSpec::uniform(0.0, 1.0)?;
    let tent = PriorSpec::custom(0.0, 1.0, "tent", Arc::new(|x: f64| 2.0 - 4.0 * (x - 0.5).abs()))?;
    let probes = [0.1, 0.25, 0.5, 0.75, 0.9];
    for (prior, q) in [(&uniform, 2.0), (&uniform, 3.0), (&uniform, 1.5), (&tent, 2.0)] {
        let g = optimal_curve(prior, q)?;
        let values: Vec<String> = probes.iter().map(|&t| format!("{:.4}", g.eval(t).unwrap())).collect();
        println!("{prior} q={q}: g at {probes:?} = [{}]", values.join(", "));
    }
    println!("G for the tent prior, q=2:");
    for x in [0.2, 0.3, 0.4, 0.5] {
        println!("  G({x}) = {:.6}", big_g(&tent, 2.0, x)?);
    }
    Ok(())
}
