//! Compares the expected L2 loss of several rules under a uniform prior.

use spvote::axioms::{mean_rule, PhantomRule, Rule};
use spvote::domain::AlternativeDomain;
use spvote::phantoms::{GradingCurve, PhantomFunction};
use spvote::welfare::{monte_carlo_ex_ante, PriorSpec};

fn main() -> spvote::Result<()> {
    let d = AlternativeDomain::unit();
    let prior = PriorSpec::uniform(0.0, 1.0)?;
    let linear = PhantomRule::new(PhantomFunction::curve(GradingCurve::linear(d)));
    let median = PhantomRule::new(PhantomFunction::order_statistic(d, 3)?);
    let step = PhantomRule::new(PhantomFunction::curve(GradingCurve::step(d, 0.6, 0.0, 1.0, None)?));
    let mean = mean_rule();
    let rules: [(&str, &dyn Rule); 4] = [
        ("linear median", &linear),
        ("median voter", &median),
        ("step at 0.6", &step),
        ("mean (not strategy-proof)", &mean),
    ];
    println!("n=5, 100000 samples, seed 42, q=2");
    for (name, rule) in rules {
        let est = monte_carlo_ex_ante(rule, &prior, 2.0, 5, 100_000, 42, None)?;
        println!("  {name:<26} {:.5} ± {:.5}", est.mean, est.std_error);
    }
    Ok(())
}
