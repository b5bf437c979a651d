//! Five evaluators of the strategy-proof rule generated by a phantom
//! function. All of them return bit-identical values on the same input.
//!
//! | evaluator | cost |
//! |-----------|------|
//! | [`eval_phantom_direct`] | `O(2^n (n + f))` |
//! | [`eval_maxmin`] | `O(2^n (n + f))` |
//! | [`eval_issues`] | `O(2^n (n + f))` |
//! | [`eval_median`] | `O(n (log n + f))` |
//! | [`eval_curve`] | `O(n log n + f log n)` |
//!
//! `f` is the cost of one phantom evaluation (constant for every built-in
//! kind once the voters are sorted).

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::domain::{descending_order, ExtremeProfile, Profile};
use crate::error::{Error, Result};
use crate::phantoms::{PhantomChain, PhantomFunction};

/// Size guard for the exponential evaluators.
pub const MAX_EXPONENTIAL_VOTERS: usize = 20;
/// Largest electorate on which [`cross_check`] runs the exponential evaluators.
pub const MAX_CROSS_CHECK_VOTERS: usize = 14;

/// Which phantom value produced an outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PhantomRef {
    Profile(ExtremeProfile),
    /// `X_k`: the `k` largest ballots at the top.
    Rank(usize),
}

/// Where an outcome comes from: a voter's ballot or a phantom value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Index of the voter in the profile.
    Ballot(usize),
    Phantom(PhantomRef),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleOutcome {
    pub value: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Direct,
    Maxmin,
    Median,
    Curve,
    Issues,
}

impl Representation {
    pub const ALL: [Representation; 5] = [
        Representation::Curve,
        Representation::Median,
        Representation::Direct,
        Representation::Maxmin,
        Representation::Issues,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Direct => "direct",
            Representation::Maxmin => "maxmin",
            Representation::Median => "median",
            Representation::Curve => "curve",
            Representation::Issues => "issues",
        }
    }

    pub fn is_exponential(self) -> bool {
        matches!(self, Representation::Direct | Representation::Maxmin | Representation::Issues)
    }

    pub fn evaluate(self, alpha: &PhantomFunction, profile: &Profile) -> Result<RuleOutcome> {
        match self {
            Representation::Direct => eval_phantom_direct(alpha, profile),
            Representation::Maxmin => eval_maxmin(alpha, profile),
            Representation::Median => eval_median(alpha, profile),
            Representation::Curve => eval_curve(alpha, profile),
            Representation::Issues => eval_issues(alpha, profile),
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Representation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown representation `{s}`"))
    }
}

fn exponential_peaks(alpha: &PhantomFunction, profile: &Profile, what: &'static str) -> Result<Vec<f64>> {
    let n = profile.len();
    if n > MAX_EXPONENTIAL_VOTERS {
        return Err(Error::TooManyVoters {
            what,
            n,
            max: MAX_EXPONENTIAL_VOTERS,
        });
    }
    profile.check_within(alpha.domain())?;
    profile.peaks().ok_or(Error::AbstentionNotSupported(what))
}

fn bits(n: usize, mask: u64) -> impl Iterator<Item = usize> {
    (0..n).filter(move |i| mask >> i & 1 == 1)
}

/// First voter whose ballot equals `value`.
fn ballot_with(profile: &Profile, value: f64) -> Option<usize> {
    profile.active().find(|&(_, x)| x == value).map(|(i, _)| i)
}

fn attribute(profile: &Profile, value: f64, phantom: PhantomRef) -> RuleOutcome {
    let provenance = match ballot_with(profile, value) {
        Some(i) => Provenance::Ballot(i),
        None => Provenance::Phantom(phantom),
    };
    RuleOutcome { value, provenance }
}

/// Case analysis over all extreme profiles: either some `α_X` is consistent
/// with every voter's side, or the outcome is a ballot `r_i` bracketed by
/// the phantoms just above and just below it.
pub fn eval_phantom_direct(alpha: &PhantomFunction, profile: &Profile) -> Result<RuleOutcome> {
    let r = exponential_peaks(alpha, profile, "the direct evaluator")?;
    let n = r.len();
    for mask in 0..1u64 << n {
        let a = alpha.eval_mask(n, mask)?;
        let fits = (0..n).all(|j| if mask >> j & 1 == 1 { a <= r[j] } else { a >= r[j] });
        if fits {
            return Ok(RuleOutcome {
                value: a,
                provenance: Provenance::Phantom(PhantomRef::Profile(ExtremeProfile::from_mask(n, mask))),
            });
        }
    }
    for i in 0..n {
        let (mut above, mut at_or_above) = (0u64, 0u64);
        for j in 0..n {
            if r[j] > r[i] {
                above |= 1 << j;
                at_or_above |= 1 << j;
            } else if r[j] == r[i] {
                at_or_above |= 1 << j;
            }
        }
        if alpha.eval_mask(n, above)? <= r[i] && r[i] <= alpha.eval_mask(n, at_or_above)? {
            return Ok(RuleOutcome {
                value: r[i],
                provenance: Provenance::Ballot(i),
            });
        }
    }
    Err(Error::MalformedPhantom(
        "no case of the direct characterization applies; the phantom is not monotone".into(),
    ))
}

/// `max_X min(α_X, min_{i ∈ μ+(X)} r_i)`.
pub fn eval_maxmin(alpha: &PhantomFunction, profile: &Profile) -> Result<RuleOutcome> {
    let r = exponential_peaks(alpha, profile, "the maxmin evaluator")?;
    let (value, mask) = up_value(alpha, &r)?;
    Ok(attribute(profile, value, PhantomRef::Profile(ExtremeProfile::from_mask(r.len(), mask))))
}

fn up_value(alpha: &PhantomFunction, r: &[f64]) -> Result<(f64, u64)> {
    let n = r.len();
    let mut best = (f64::NEG_INFINITY, 0);
    for mask in 0..1u64 << n {
        let floor = bits(n, mask).map(|i| r[i]).fold(f64::INFINITY, f64::min);
        let v = alpha.eval_mask(n, mask)?.min(floor);
        if v > best.0 {
            best = (v, mask);
        }
    }
    Ok(best)
}

fn down_value(alpha: &PhantomFunction, r: &[f64]) -> Result<(f64, u64)> {
    let n = r.len();
    let full = (1u64 << n) - 1;
    let mut best = (f64::INFINITY, full);
    for mask in 0..1u64 << n {
        let ceiling = bits(n, full & !mask).map(|i| r[i]).fold(f64::NEG_INFINITY, f64::max);
        let v = alpha.eval_mask(n, mask)?.max(ceiling);
        if v < best.0 {
            best = (v, mask);
        }
    }
    Ok(best)
}

/// Voting by issues on threshold properties `{y ≥ a}` and `{y ≤ a}`.
///
/// `μ+(X)` wins `{y ≥ a}` iff `α_X ≥ a`, so the largest `a` whose supporters
/// contain a winning coalition is the up-value `U`; dually the smallest `a`
/// carried downward is `D`. The outcome is the unique `a` with `D ≤ a ≤ U`.
pub fn eval_issues(alpha: &PhantomFunction, profile: &Profile) -> Result<RuleOutcome> {
    let r = exponential_peaks(alpha, profile, "the issues evaluator")?;
    let (up, up_mask) = up_value(alpha, &r)?;
    let (down, _) = down_value(alpha, &r)?;
    if up != down {
        return Err(Error::MalformedPhantom(format!(
            "threshold issues do not settle on one alternative (down {down}, up {up})"
        )));
    }
    Ok(attribute(profile, up, PhantomRef::Profile(ExtremeProfile::from_mask(r.len(), up_mask))))
}

fn sorted_chain<'a>(alpha: &'a PhantomFunction, profile: &Profile) -> Result<(Vec<usize>, PhantomChain<'a>)> {
    profile.check_within(alpha.domain())?;
    let order = descending_order(profile);
    let chain = alpha.chain(profile, &order)?;
    Ok((order, chain))
}

/// Median of the active ballots and the phantoms `α_{X_0}, …, α_{X_n}`.
pub fn eval_median(alpha: &PhantomFunction, profile: &Profile) -> Result<RuleOutcome> {
    let (_, chain) = sorted_chain(alpha, profile)?;
    let n = chain.len();
    // (value, is_phantom, index)
    let mut values: Vec<(f64, bool, usize)> = Vec::with_capacity(2 * n + 1);
    values.extend(profile.active().map(|(i, x)| (x, false, i)));
    for k in 0..=n {
        values.push((chain.at(k)?, true, k));
    }
    let (_, &mut (value, is_phantom, idx), _) =
        values.select_nth_unstable_by(n, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let provenance = if is_phantom {
        match ballot_with(profile, value) {
            Some(i) => Provenance::Ballot(i),
            None => Provenance::Phantom(PhantomRef::Rank(idx)),
        }
    } else {
        Provenance::Ballot(ballot_with(profile, value).unwrap_or(idx))
    };
    Ok(RuleOutcome { value, provenance })
}

/// `sup { y : α_{θ(r, y)} ≥ y }`, by binary search over the sorted ballots.
///
/// Between consecutive distinct ballots `θ` is constant, equal to some
/// `X_k`; the sup is the first interval (from the top) that `α_{X_k}`
/// reaches, clipped to that interval.
pub fn eval_curve(alpha: &PhantomFunction, profile: &Profile) -> Result<RuleOutcome> {
    let (order, chain) = sorted_chain(alpha, profile)?;
    let ballots = profile.ballots();
    let peak = |pos: usize| ballots[order[pos]].peak().expect("order holds active voters");
    let n = order.len();
    if n == 0 {
        return Ok(RuleOutcome {
            value: chain.at(0)?,
            provenance: Provenance::Phantom(PhantomRef::Rank(0)),
        });
    }
    // starts[j]: position in `order` of the first voter holding the j-th
    // largest distinct ballot; starts[m] = n.
    let mut starts = vec![0usize];
    for pos in 1..n {
        if peak(pos) != peak(pos - 1) {
            starts.push(pos);
        }
    }
    let m = starts.len();
    starts.push(n);
    let mu_plus = alpha.domain().mu_plus();
    // interval j = (d_j, hi_j] with θ = X_{starts[j]}; interval m = [μ−, d_{m−1}] with θ = X_n
    let bounds = |j: usize| -> (f64, f64, usize) {
        let hi = if j == 0 { mu_plus } else { peak(starts[j - 1]) };
        let lo = if j == m { f64::NEG_INFINITY } else { peak(starts[j]) };
        (lo, hi, starts[j])
    };
    let reaches = |j: usize| -> Result<bool> {
        if j == m {
            return Ok(true);
        }
        let (lo, hi, k) = bounds(j);
        Ok(lo < hi && chain.at(k)? > lo)
    };
    let (mut lo_j, mut hi_j) = (0usize, m);
    while lo_j < hi_j {
        let mid = lo_j + (hi_j - lo_j) / 2;
        if reaches(mid)? {
            hi_j = mid;
        } else {
            lo_j = mid + 1;
        }
    }
    let (_, hi, k) = bounds(lo_j);
    let a = chain.at(k)?;
    if a < hi || lo_j == 0 {
        Ok(RuleOutcome {
            value: a.min(hi),
            provenance: Provenance::Phantom(PhantomRef::Rank(k)),
        })
    } else {
        Ok(RuleOutcome {
            value: hi,
            provenance: Provenance::Ballot(order[starts[lo_j - 1]]),
        })
    }
}

/// One evaluator's result inside a [`CrossCheck`].
#[derive(Debug, Clone)]
pub struct CrossCheckEntry {
    pub representation: Representation,
    pub outcome: RuleOutcome,
    pub elapsed_ns: u128,
}

#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub entries: Vec<CrossCheckEntry>,
    /// Evaluators not run on this input, with the reason.
    pub skipped: Vec<(Representation, String)>,
}

impl CrossCheck {
    /// The agreed value.
    pub fn value(&self) -> f64 {
        self.entries[0].outcome.value
    }

    /// Outcome as reported by the median evaluator, else the first entry.
    pub fn outcome(&self) -> &RuleOutcome {
        self.entries
            .iter()
            .find(|e| e.representation == Representation::Median)
            .map_or(&self.entries[0].outcome, |e| &e.outcome)
    }
}

/// Runs every applicable evaluator and demands exact agreement.
pub fn cross_check(alpha: &PhantomFunction, profile: &Profile) -> Result<CrossCheck> {
    let mut entries: Vec<CrossCheckEntry> = Vec::new();
    let mut skipped = Vec::new();
    for rep in Representation::ALL {
        if rep.is_exponential() {
            if profile.len() > MAX_CROSS_CHECK_VOTERS {
                skipped.push((rep, format!("more than {MAX_CROSS_CHECK_VOTERS} voters")));
                continue;
            }
            if profile.has_abstentions() {
                skipped.push((rep, "profile contains abstentions".into()));
                continue;
            }
        }
        let start = Instant::now();
        let outcome = rep.evaluate(alpha, profile)?;
        let elapsed_ns = start.elapsed().as_nanos();
        if let Some(first) = entries.first() {
            if first.outcome.value.to_bits() != outcome.value.to_bits() {
                return Err(Error::Disagreement {
                    first: first.representation.to_string(),
                    first_value: first.outcome.value,
                    second: rep.to_string(),
                    second_value: outcome.value,
                    profile: profile.as_options(),
                });
            }
        }
        entries.push(CrossCheckEntry {
            representation: rep,
            outcome,
            elapsed_ns,
        });
    }
    Ok(CrossCheck { entries, skipped })
}
