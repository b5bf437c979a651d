use serde::Serialize;

use super::Rule;
use crate::error::{Error, Result};

/// Tolerance used by floating-point comparisons in Lipschitz and ordinality checks.
pub const FLOAT_TOL: f64 = 1e-12;

/// Concrete counterexample to an axiom. Every variant can be replayed
/// through the rule that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `voter` gains by reporting `deviation` instead of its peak.
    Manipulation {
        profile: Vec<f64>,
        voter: usize,
        deviation: f64,
        truthful_outcome: f64,
        deviated_outcome: f64,
        gain: f64,
    },
    /// Raising `voter`'s ballot to `raised_to` lowers the outcome.
    NotResponsive {
        profile: Vec<f64>,
        voter: usize,
        raised_to: f64,
        before: f64,
        after: f64,
    },
    /// Changing one ballot moves the outcome further than the ballot moved.
    NotLipschitz {
        profile: Vec<f64>,
        voter: usize,
        changed_to: f64,
        before: f64,
        after: f64,
    },
    /// No grid profile of `voters` voters produces `unattained`.
    Unattained { voters: usize, unattained: f64 },
    /// Outcome outside the range of the ballots.
    NotPareto { profile: Vec<f64>, outcome: f64 },
    /// Every ballot rises strictly, the outcome does not.
    NotStrictlyResponsive {
        lower: Vec<f64>,
        upper: Vec<f64>,
        lower_outcome: f64,
        upper_outcome: f64,
    },
    /// The rule does not commute with an increasing bijection `π`, given by
    /// its piecewise-linear knots.
    NotOrdinal {
        profile: Vec<f64>,
        knots: Vec<(f64, f64)>,
        outcome_of_mapped: f64,
        mapped_outcome: f64,
    },
    /// A phantom value strictly inside the domain.
    InteriorPhantom { extreme_profile: String, value: f64 },
    /// Swapping two voters changes the outcome.
    NotAnonymous {
        profile: Vec<f64>,
        swapped: (usize, usize),
        before: f64,
        after: f64,
    },
    /// `voter` changes the outcome on its own.
    NotDummy {
        profile: Vec<f64>,
        voter: usize,
        changed_to: f64,
        before: f64,
        after: f64,
    },
    /// `voter` prefers abstaining.
    NoShow {
        profile: Vec<f64>,
        voter: usize,
        with_voter: f64,
        without_voter: f64,
    },
    /// Two electorates agree, their union does not.
    Inconsistent {
        left: Vec<f64>,
        right: Vec<f64>,
        outcome: f64,
        merged_outcome: f64,
    },
    /// Replicating every ballot changes the outcome.
    NotHomogeneous {
        profile: Vec<f64>,
        copies: usize,
        outcome: f64,
        replicated_outcome: f64,
    },
    /// An extreme profile whose outcome is not the share at the top.
    NotProportional {
        profile: Vec<f64>,
        expected: f64,
        outcome: f64,
    },
    /// Adding one voter to ever more copies of `base` keeps the outcome away
    /// from `φ(base)`.
    DiscontinuousInNewMembers {
        base: Vec<f64>,
        newcomer: f64,
        target: f64,
        distance_32: f64,
        distance_64: f64,
    },
}

fn unsound(what: &str) -> Error {
    Error::UnsoundWitness(what.to_owned())
}

fn with(profile: &[f64], voter: usize, value: f64) -> Vec<f64> {
    let mut s = profile.to_vec();
    s[voter] = value;
    s
}

/// `φ(s) ≥ φ(r) ≥ r_i` or `φ(s) ≤ φ(r) ≤ r_i`.
pub(crate) fn uncompromising(peak: f64, truthful: f64, deviated: f64) -> bool {
    (deviated >= truthful && truthful >= peak) || (deviated <= truthful && truthful <= peak)
}

/// Distance by which a deviation moves the outcome toward the peak.
pub(crate) fn gain(peak: f64, truthful: f64, deviated: f64) -> f64 {
    (truthful - peak).abs() - (deviated - peak).abs()
}

/// Outcome of `base` replicated `copies` times plus one `newcomer`.
pub(crate) fn replicated_with_newcomer(rule: &dyn Rule, base: &[f64], copies: usize, newcomer: f64) -> Result<f64> {
    let mut r: Vec<f64> = base.iter().copied().cycle().take(base.len() * copies).collect();
    r.push(newcomer);
    rule.outcome(&r)
}

pub(crate) fn pl_map(knots: &[(f64, f64)], x: f64) -> f64 {
    let j = knots.partition_point(|&(k, _)| k <= x).clamp(1, knots.len() - 1);
    let ((x0, y0), (x1, y1)) = (knots[j - 1], knots[j]);
    if x == x0 {
        return y0;
    }
    if x == x1 {
        return y1;
    }
    y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
}

/// Continuity verdict from the last two replication distances.
pub(crate) fn diverges(distance_32: f64, distance_64: f64) -> bool {
    distance_64 > 1e-6 && distance_64 >= 0.9 * distance_32
}

impl Witness {
    /// Re-evaluates the rule on the witness and confirms the violation.
    /// `outcomes` supplies the full outcome set for [`Witness::Unattained`].
    pub fn replay(&self, rule: &dyn Rule, attained: Option<&[f64]>) -> Result<()> {
        let ok = match self {
            Witness::Manipulation {
                profile,
                voter,
                deviation,
                ..
            } => {
                let t = rule.outcome(profile)?;
                let d = rule.outcome(&with(profile, *voter, *deviation))?;
                !uncompromising(profile[*voter], t, d)
            }
            Witness::NotResponsive {
                profile,
                voter,
                raised_to,
                ..
            } => *raised_to > profile[*voter] && rule.outcome(&with(profile, *voter, *raised_to))? < rule.outcome(profile)?,
            Witness::NotLipschitz {
                profile,
                voter,
                changed_to,
                ..
            } => {
                let a = rule.outcome(profile)?;
                let b = rule.outcome(&with(profile, *voter, *changed_to))?;
                (a - b).abs() > (profile[*voter] - changed_to).abs() + FLOAT_TOL
            }
            Witness::Unattained { unattained, .. } => match attained {
                Some(values) => !values.contains(unattained),
                None => return Err(unsound("sovereignty (no outcome table to replay against)")),
            },
            Witness::NotPareto { profile, .. } => {
                let x = rule.outcome(profile)?;
                let lo = profile.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                x < lo || x > hi
            }
            Witness::NotStrictlyResponsive { lower, upper, .. } => {
                lower.iter().zip(upper).all(|(a, b)| a < b) && rule.outcome(lower)? >= rule.outcome(upper)?
            }
            Witness::NotOrdinal { profile, knots, .. } => {
                let mapped: Vec<f64> = profile.iter().map(|&x| pl_map(knots, x)).collect();
                let lhs = rule.outcome(&mapped)?;
                let rhs = pl_map(knots, rule.outcome(profile)?);
                (lhs - rhs).abs() > FLOAT_TOL
            }
            Witness::InteriorPhantom { extreme_profile, value } => {
                let phantom = rule.phantom().ok_or_else(|| unsound("ordinality (rule has no phantom)"))?;
                let x: crate::domain::ExtremeProfile = extreme_profile.parse().map_err(|e: String| unsound(&e))?;
                let v = phantom.eval(&x)?;
                let d = phantom.domain();
                v == *value && v != d.mu_minus() && v != d.mu_plus()
            }
            Witness::NotAnonymous { profile, swapped, .. } => {
                let mut s = profile.clone();
                s.swap(swapped.0, swapped.1);
                rule.outcome(profile)? != rule.outcome(&s)?
            }
            Witness::NotDummy {
                profile,
                voter,
                changed_to,
                ..
            } => rule.outcome(profile)? != rule.outcome(&with(profile, *voter, *changed_to))?,
            Witness::NoShow { profile, voter, .. } => {
                let mut s = profile.clone();
                s.remove(*voter);
                !uncompromising(profile[*voter], rule.outcome(profile)?, rule.outcome(&s)?)
            }
            Witness::Inconsistent { left, right, .. } => {
                let a = rule.outcome(left)?;
                let merged: Vec<f64> = left.iter().chain(right).copied().collect();
                a == rule.outcome(right)? && a != rule.outcome(&merged)?
            }
            Witness::NotHomogeneous { profile, copies, .. } => {
                let rep: Vec<f64> = profile.iter().copied().cycle().take(profile.len() * copies).collect();
                rule.outcome(profile)? != rule.outcome(&rep)?
            }
            Witness::NotProportional { profile, expected, .. } => rule.outcome(profile)? != *expected,
            Witness::DiscontinuousInNewMembers { base, newcomer, .. } => {
                let target = rule.outcome(base)?;
                let d32 = (replicated_with_newcomer(rule, base, 32, *newcomer)? - target).abs();
                let d64 = (replicated_with_newcomer(rule, base, 64, *newcomer)? - target).abs();
                diverges(d32, d64)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(unsound(self.label()))
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Witness::Manipulation { .. } => "strategy-proofness",
            Witness::NotResponsive { .. } => "weak responsiveness",
            Witness::NotLipschitz { .. } => "Lipschitz continuity",
            Witness::Unattained { .. } => "sovereignty",
            Witness::NotPareto { .. } => "Pareto optimality",
            Witness::NotStrictlyResponsive { .. } => "strict responsiveness",
            Witness::NotOrdinal { .. } | Witness::InteriorPhantom { .. } => "ordinality",
            Witness::NotAnonymous { .. } => "anonymity",
            Witness::NotDummy { .. } => "dummy voter",
            Witness::NoShow { .. } => "participation",
            Witness::Inconsistent { .. } => "consistency",
            Witness::NotHomogeneous { .. } => "homogeneity",
            Witness::NotProportional { .. } => "proportionality",
            Witness::DiscontinuousInNewMembers { .. } => "continuity with respect to new members",
        }
    }
}
