//! Outcomes minimizing the L1 and Lq distance to a given profile.

use spvote::domain::{Profile, Weights};
use spvote::welfare::{ex_post_welfare, l1_optimal_outcome, lq_optimal_outcome, weighted_medians};

fn main() -> spvote::Result<()> {
    let profile = Profile::from_peaks(&[0.1, 0.2, 0.7, 0.9])?;
    println!("weighted medians: {:?}", weighted_medians(&profile, None)?);
    println!("L1 optimum (even split at 0.5): {}", l1_optimal_outcome(&profile, 0.5, None)?);
    for q in [1.5, 2.0, 4.0, f64::INFINITY] {
        let x = lq_optimal_outcome(&profile, q, None)?;
        println!("L{q} optimum: {x:.6}, welfare {:.6}", ex_post_welfare(x, &profile, q, None)?);
    }
    let w = Weights::new(vec![1.0, 1.0, 1.0, 5.0])?;
    println!("L2 optimum, last voter weighted 5: {:.6}", lq_optimal_outcome(&profile, 2.0, Some(&w))?);
    Ok(())
}
