//! Loads the sample rule configs and ballot file shipped next to this example.

use std::path::Path;

use spvote::cli::ballots::read_ballots;
use spvote::cli::config::RuleConfig;
use spvote::cli::CliError;
use spvote::representations::cross_check;

fn main() -> Result<(), CliError> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    for name in ["linear.json", "step.toml", "dictator.json", "table.json"] {
        let cfg = RuleConfig::load(&data.join(name))?;
        let ballots = read_ballots(&data.join(if name == "table.json" { "pair.csv" } else { "ballots.csv" }), &cfg.domain()?)?;
        let alpha = cfg.phantom(ballots.profile.voters(), ballots.weights)?;
        let cc = cross_check(&alpha, &ballots.profile)?;
        println!("{name:<14} -> {}", cc.value());
    }
    Ok(())
}
