mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spvote::axioms::{PhantomRule, Rule};
use spvote::cli::ballots::{format_peaks, parse_ballots};
use spvote::cli::config::{CurveConfig, RuleConfig, RuleSpec};
use spvote::domain::Profile;
use spvote::phantoms::{GradingCurve, PhantomFunction};
use spvote::representations::{cross_check, Representation};
use spvote::welfare::{monte_carlo_ex_ante, PriorSpec};

fn table_rule(seed: u64, n: usize) -> (Vec<f64>, PhantomRule) {
    let table = random_monotone_table(&mut ChaCha8Rng::seed_from_u64(seed), n, 20);
    let alpha = PhantomFunction::table(unit(), n, table.clone()).unwrap();
    (table, PhantomRule::new(alpha))
}

fn peaks(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![0.0..=1.0f64, (0..=4u8).prop_map(|j| j as f64 / 4.0)], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn no_misreport_moves_the_outcome_toward_the_peak(
        seed in any::<u64>(),
        (r, voter, lie) in (1usize..=6).prop_flat_map(|n| (peaks(n), 0..n, 0.0..=1.0f64)),
    ) {
        let (_, rule) = table_rule(seed, r.len());
        let truthful = rule.outcome(&r).unwrap();
        let mut dev = r.clone();
        dev[voter] = lie;
        let deviated = rule.outcome(&dev).unwrap();
        prop_assert!((deviated - r[voter]).abs() >= (truthful - r[voter]).abs());
        // uncompromising: a lie on the far side of the outcome changes nothing
        if truthful < r[voter] {
            prop_assert!(deviated <= truthful);
            if lie >= truthful {
                prop_assert_eq!(deviated, truthful);
            }
        }
        if truthful > r[voter] {
            prop_assert!(deviated >= truthful);
            if lie <= truthful {
                prop_assert_eq!(deviated, truthful);
            }
        }
    }

    #[test]
    fn outcomes_are_one_lipschitz(
        seed in any::<u64>(),
        (a, b) in (1usize..=6).prop_flat_map(|n| (peaks(n), peaks(n))),
    ) {
        let (_, rule) = table_rule(seed, a.len());
        let sup = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let gap = (rule.outcome(&a).unwrap() - rule.outcome(&b).unwrap()).abs();
        prop_assert!(gap <= sup + 1e-15);
    }

    #[test]
    fn evaluators_match_the_oracle(seed in any::<u64>(), r in (1usize..=7).prop_flat_map(peaks)) {
        let (table, rule) = table_rule(seed, r.len());
        let cc = cross_check(rule.alpha(), &Profile::from_peaks(&r).unwrap()).unwrap();
        prop_assert_eq!(cc.value(), oracle_maxmin(&table, &r));
    }

    #[test]
    fn curve_rules_are_anonymous(r in (1usize..=9).prop_flat_map(peaks), shift in 0usize..9) {
        for (_, g, _) in curve_corpus().into_iter().take(5) {
            let alpha = curve_rule(&g);
            let mut rotated = r.clone();
            rotated.rotate_left(shift % r.len());
            let a = Representation::Curve.evaluate(&alpha, &Profile::from_peaks(&r).unwrap()).unwrap();
            let b = Representation::Median.evaluate(&alpha, &Profile::from_peaks(&rotated).unwrap()).unwrap();
            prop_assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn step_configs_round_trip(threshold in 0.0..=1.0f64, low in 0.0..0.5f64, high in 0.5..=1.0f64) {
        let cfg = RuleConfig {
            domain: Default::default(),
            rule: RuleSpec::Curve { curve: CurveConfig::Step { threshold, low, high } },
            weights: None,
            alpha_even: None,
            empty_electorate_value: Some(low),
            at_threshold: Some(high),
        };
        prop_assert_eq!(RuleConfig::from_json(&cfg.to_json()).unwrap(), cfg.clone());
        let toml_text = toml::to_string(&cfg).unwrap();
        prop_assert_eq!(toml::from_str::<RuleConfig>(&toml_text).unwrap(), cfg);
    }

    #[test]
    fn ballot_files_round_trip(r in (0usize..=12).prop_flat_map(peaks)) {
        let parsed = parse_ballots(&format_peaks(&r), &unit()).unwrap();
        prop_assert_eq!(parsed.profile.peaks().unwrap(), r);
    }
}

#[test]
fn monte_carlo_is_reproducible_per_seed() {
    let u = PriorSpec::uniform(0.0, 1.0).unwrap();
    let rule = PhantomRule::new(PhantomFunction::curve(GradingCurve::linear(unit())));
    let a = monte_carlo_ex_ante(&rule, &u, 2.0, 4, 5_000, 3, None).unwrap();
    let b = monte_carlo_ex_ante(&rule, &u, 2.0, 4, 5_000, 3, None).unwrap();
    let c = monte_carlo_ex_ante(&rule, &u, 2.0, 4, 5_000, 4, None).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.mean, c.mean);
}
