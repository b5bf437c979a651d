//! Times every evaluator on seeded random profiles and prints growth ratios.

use spvote::cli::bench::{run_bench, to_csv};
use spvote::domain::AlternativeDomain;
use spvote::phantoms::{GradingCurve, PhantomFunction};
use spvote::representations::Representation;

fn main() -> spvote::Result<()> {
    let alpha = PhantomFunction::curve(GradingCurve::linear(AlternativeDomain::unit()));
    let rows = run_bench(&alpha, &Representation::ALL, &[4, 8, 12, 16], 5, 0)?;
    print!("{}", to_csv(&rows));
    for rep in Representation::ALL {
        let at = |n| rows.iter().find(|r| r.representation == rep && r.n == n).map(|r| r.median_ns as f64);
        if let (Some(a), Some(b)) = (at(12), at(16)) {
            println!("# {rep}: n=16 / n=12 = {:.1}", b / a);
        }
    }
    let large = run_bench(&alpha, &[Representation::Curve, Representation::Median], &[1_000_000], 3, 0)?;
    print!("{}", to_csv(&large));
    Ok(())
}
