//! Evaluates one rule with all five evaluators and shows where the outcome comes from.

use spvote::domain::{AlternativeDomain, Profile};
use spvote::phantoms::{GradingCurve, PhantomFunction};
use spvote::representations::{cross_check, Representation};

fn main() -> spvote::Result<()> {
    let domain = AlternativeDomain::unit();
    let rules = [
        ("linear median", PhantomFunction::curve(GradingCurve::linear(domain))),
        ("median voter", PhantomFunction::order_statistic(domain, 3)?),
        (
            "step at 0.6",
            PhantomFunction::curve(GradingCurve::step(domain, 0.6, 0.0, 1.0, None)?),
        ),
        (
            "two-voter table",
            PhantomFunction::table(domain, 2, vec![0.1, 0.4, 0.7, 0.9])?,
        ),
    ];
    let five = Profile::from_peaks(&[0.05, 0.3, 0.45, 0.8, 0.95])?;
    let two = Profile::from_peaks(&[0.2, 0.8])?;
    for (name, alpha) in &rules {
        let profile = if alpha.arity() == Some(2) { &two } else { &five };
        let cc = cross_check(alpha, profile)?;
        println!("{name}: outcome {} ({:?})", cc.value(), cc.outcome().provenance);
        for e in &cc.entries {
            println!("  {:<7} {:>10} ns", e.representation.name(), e.elapsed_ns);
        }
    }
    // large electorates: only the curve and median evaluators scale
    let peaks: Vec<f64> = (0..100_001).map(|i| (i as f64 * 0.618_034).fract()).collect();
    let big = Profile::from_peaks(&peaks)?;
    let linear = &rules[0].1;
    let a = Representation::Curve.evaluate(linear, &big)?;
    let b = Representation::Median.evaluate(linear, &big)?;
    println!("100001 voters: curve {} median {}", a.value, b.value);
    Ok(())
}
