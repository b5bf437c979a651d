//! Audits rules whose electorate size varies: participation, consistency and friends.

use spvote::axioms::{audit_variable, AuditOptions, Axiom, SizeDependentRule};
use spvote::domain::AlternativeDomain;
use spvote::phantoms::{GradingCurve, VariableRule};

fn main() -> spvote::Result<()> {
    let unit = AlternativeDomain::unit();
    let grid = unit.with_grid(5)?;
    let sizes = [1, 2, 3];
    let opts = AuditOptions::default();
    let linear = VariableRule::new(GradingCurve::linear(unit), 0.5)?;
    let gap = VariableRule::new(GradingCurve::step(unit, 0.5, 0.2, 0.8, None)?, 0.9)?;
    let family = SizeDependentRule::power(unit, 0.5, |n| if n % 2 == 0 { 2.0 } else { 1.0 });
    let rules: [(&str, &dyn spvote::axioms::Rule); 3] = [
        ("linear median", &linear),
        ("step with empty value 0.9", &gap),
        ("t^2 for even sizes", &family),
    ];
    for (name, rule) in rules {
        let report = audit_variable(rule, &grid, &sizes, &Axiom::VARIABLE, &opts)?;
        println!("{name}");
        for r in &report.results {
            let verdict = match r.status.witness() {
                Some(w) => format!("FAIL {}", serde_json::to_string(w).unwrap()),
                None => "pass".into(),
            };
            println!("  {:<24} {verdict}", r.axiom.to_string());
        }
    }
    Ok(())
}
