//! Minimax-optimal phantom values for weighted electorates.

use spvote::domain::{ExtremeProfile, Weights};
use spvote::welfare::minimax_optimal_phantoms;

fn main() -> spvote::Result<()> {
    for (weights, q) in [(vec![1.0, 1.0, 1.0], 2.0), (vec![2.0, 1.0], 2.0), (vec![3.0, 1.0, 1.0], 3.0)] {
        let n = weights.len();
        let alpha = minimax_optimal_phantoms(&Weights::new(weights.clone())?, q, 0.0, 1.0)?;
        println!("weights {weights:?}, q={q}");
        for mask in 0..1u64 << n {
            let x = ExtremeProfile::from_mask(n, mask);
            println!("  alpha({x}) = {:.6}", alpha.eval(&x)?);
        }
    }
    Ok(())
}
