//! Audits the linear median and the arithmetic mean against the fixed-electorate axioms.

use spvote::axioms::{audit_fixed, mean_rule, AuditOptions, Axiom, PhantomRule};
use spvote::domain::AlternativeDomain;
use spvote::phantoms::{GradingCurve, PhantomFunction};

fn main() -> spvote::Result<()> {
    let grid = AlternativeDomain::unit().with_grid(10)?;
    let opts = AuditOptions::default();
    let linear = PhantomRule::new(PhantomFunction::curve(GradingCurve::linear(AlternativeDomain::unit())));
    let report = audit_fixed(&linear, &grid, 3, &Axiom::FIXED, &opts)?;
    println!("{}", report.rule);
    for r in &report.results {
        println!("  {:<22} {}", r.axiom.to_string(), if r.status.passed() { "pass" } else { "FAIL" });
    }
    let mean = mean_rule();
    let report = audit_fixed(&mean, &grid, 2, &[Axiom::StrategyProofness, Axiom::Lipschitz], &opts)?;
    println!("{}", report.rule);
    for r in &report.results {
        match r.status.witness() {
            Some(w) => println!("  {:<22} FAIL {}", r.axiom.to_string(), serde_json::to_string(w).unwrap()),
            None => println!("  {:<22} pass", r.axiom.to_string()),
        }
    }
    Ok(())
}
