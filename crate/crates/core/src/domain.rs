//! Value types shared across the crate: the alternative interval, ballots and
//! profiles, extreme profiles and the cut-off transform `theta`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::exact_sum;

/// Closed interval of alternatives `[mu_minus, mu_plus]`, optionally
/// discretized into `grid_steps` equal steps for exhaustive audits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternativeDomain {
    mu_minus: f64,
    mu_plus: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_steps: Option<usize>,
}

impl AlternativeDomain {
    pub fn new(mu_minus: f64, mu_plus: f64) -> Result<Self> {
        if !(mu_minus.is_finite() && mu_plus.is_finite() && mu_minus < mu_plus) {
            return Err(Error::InvalidDomain { mu_minus, mu_plus });
        }
        Ok(Self {
            mu_minus,
            mu_plus,
            grid_steps: None,
        })
    }

    /// The unit interval `[0, 1]`.
    pub fn unit() -> Self {
        Self {
            mu_minus: 0.0,
            mu_plus: 1.0,
            grid_steps: None,
        }
    }

    pub fn with_grid(mut self, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::EmptyGrid);
        }
        self.grid_steps = Some(steps);
        Ok(self)
    }

    pub fn mu_minus(&self) -> f64 {
        self.mu_minus
    }

    pub fn mu_plus(&self) -> f64 {
        self.mu_plus
    }

    pub fn width(&self) -> f64 {
        self.mu_plus - self.mu_minus
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.mu_minus + self.mu_plus)
    }

    pub fn grid_steps(&self) -> Option<usize> {
        self.grid_steps
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.mu_minus && x <= self.mu_plus
    }

    /// Grid point `j` of a `steps`-step grid; the last point is exactly `mu_plus`.
    pub fn grid_point(&self, j: usize, steps: usize) -> f64 {
        if j >= steps {
            return self.mu_plus;
        }
        self.mu_minus + self.width() * (j as f64 / steps as f64)
    }

    /// All points of the configured grid, or an error if none is configured.
    pub fn grid_points(&self) -> Result<Vec<f64>> {
        let k = self.grid_steps.ok_or(Error::EmptyGrid)?;
        Ok((0..=k).map(|j| self.grid_point(j, k)).collect())
    }

    /// Maps `t` in `[0, 1]` affinely onto the interval.
    pub fn lerp(&self, t: f64) -> f64 {
        if t >= 1.0 {
            self.mu_plus
        } else {
            self.mu_minus + t * self.width()
        }
    }

    pub(crate) fn check_value(&self, value: f64) -> Result<()> {
        if value.is_finite() && self.contains(value) {
            Ok(())
        } else {
            Err(Error::PhantomOutOfRange {
                value,
                mu_minus: self.mu_minus,
                mu_plus: self.mu_plus,
            })
        }
    }
}

/// Opaque voter identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VoterId(pub String);

impl fmt::Display for VoterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VoterId {
    fn from(s: &str) -> Self {
        VoterId(s.to_owned())
    }
}

/// A single vote: a reported peak, or an abstention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ballot {
    Peak(f64),
    Abstain,
}

impl Ballot {
    pub fn peak(self) -> Option<f64> {
        match self {
            Ballot::Peak(x) => Some(x),
            Ballot::Abstain => None,
        }
    }
}

/// Identity-indexed list of ballots.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    voters: Vec<VoterId>,
    ballots: Vec<Ballot>,
}

impl Profile {
    pub fn new(entries: Vec<(VoterId, Ballot)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        let mut voters = Vec::with_capacity(entries.len());
        let mut ballots = Vec::with_capacity(entries.len());
        for (id, ballot) in entries {
            if let Ballot::Peak(x) = ballot {
                if !x.is_finite() {
                    return Err(Error::NonFiniteBallot { voter: id.0 });
                }
            }
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateVoter(id.0));
            }
            voters.push(id);
            ballots.push(ballot);
        }
        Ok(Self { voters, ballots })
    }

    /// Profile with voters named `"1"`, `"2"`, ... voting the given peaks.
    pub fn from_peaks(peaks: &[f64]) -> Result<Self> {
        Self::from_ballots(peaks.iter().map(|&x| Ballot::Peak(x)).collect())
    }

    /// Profile with voters named `"1"`, `"2"`, ... casting the given ballots.
    pub fn from_ballots(ballots: Vec<Ballot>) -> Result<Self> {
        Self::new(
            ballots
                .into_iter()
                .enumerate()
                .map(|(i, b)| (VoterId((i + 1).to_string()), b))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.ballots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ballots.is_empty()
    }

    pub fn voters(&self) -> &[VoterId] {
        &self.voters
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn voter(&self, i: usize) -> &VoterId {
        &self.voters[i]
    }

    pub fn index_of(&self, id: &VoterId) -> Option<usize> {
        self.voters.iter().position(|v| v == id)
    }

    pub fn has_abstentions(&self) -> bool {
        self.ballots.iter().any(|b| matches!(b, Ballot::Abstain))
    }

    pub fn active_count(&self) -> usize {
        self.ballots.iter().filter(|b| b.peak().is_some()).count()
    }

    /// `(index, peak)` of every non-abstaining voter.
    pub fn active(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.ballots
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.peak().map(|x| (i, x)))
    }

    /// All peaks, or `None` when someone abstains.
    pub fn peaks(&self) -> Option<Vec<f64>> {
        self.ballots.iter().map(|b| b.peak()).collect()
    }

    pub fn check_within(&self, domain: &AlternativeDomain) -> Result<()> {
        for (i, x) in self.active() {
            if !domain.contains(x) {
                return Err(Error::BallotOutOfRange {
                    voter: self.voters[i].0.clone(),
                    value: x,
                    mu_minus: domain.mu_minus(),
                    mu_plus: domain.mu_plus(),
                });
            }
        }
        Ok(())
    }

    /// Ballots as `Option<f64>`, used in error reports and witnesses.
    pub fn as_options(&self) -> Vec<Option<f64>> {
        self.ballots.iter().map(|b| b.peak()).collect()
    }
}

/// Position of one voter in an extreme profile. Ordered
/// `Bottom < Abstain < Top`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mark {
    Bottom,
    Abstain,
    Top,
}

impl Mark {
    fn symbol(self) -> char {
        match self {
            Mark::Bottom => 'B',
            Mark::Abstain => 'A',
            Mark::Top => 'T',
        }
    }
}

/// Profile in which every voter sits at an endpoint of the domain or abstains.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtremeProfile(Vec<Mark>);

impl ExtremeProfile {
    pub fn new(marks: Vec<Mark>) -> Self {
        Self(marks)
    }

    pub fn uniform(n: usize, mark: Mark) -> Self {
        Self(vec![mark; n])
    }

    /// Bit `i` of `mask` set means voter `i` is at the top.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self(
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { Mark::Top } else { Mark::Bottom })
                .collect(),
        )
    }

    /// Inverse of [`from_mask`](Self::from_mask); `None` if a voter abstains
    /// or there are more than 64 voters.
    pub fn to_mask(&self) -> Option<u64> {
        if self.0.len() > 64 {
            return None;
        }
        let mut mask = 0u64;
        for (i, m) in self.0.iter().enumerate() {
            match m {
                Mark::Top => mask |= 1 << i,
                Mark::Bottom => {}
                Mark::Abstain => return None,
            }
        }
        Some(mask)
    }

    pub fn marks(&self) -> &[Mark] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top_count(&self) -> usize {
        self.0.iter().filter(|&&m| m == Mark::Top).count()
    }

    pub fn active_count(&self) -> usize {
        self.0.iter().filter(|&&m| m != Mark::Abstain).count()
    }

    pub fn has_abstentions(&self) -> bool {
        self.0.contains(&Mark::Abstain)
    }

    pub fn tops(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == Mark::Top)
            .map(|(i, _)| i)
    }

    pub fn bottoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == Mark::Bottom)
            .map(|(i, _)| i)
    }

    /// Pointwise order under `Bottom < Abstain < Top`.
    pub fn le(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Marks laid out as ballots at the domain endpoints.
    pub fn to_ballots(&self, domain: &AlternativeDomain) -> Vec<Ballot> {
        self.0
            .iter()
            .map(|m| match m {
                Mark::Bottom => Ballot::Peak(domain.mu_minus()),
                Mark::Top => Ballot::Peak(domain.mu_plus()),
                Mark::Abstain => Ballot::Abstain,
            })
            .collect()
    }
}

impl fmt::Display for ExtremeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.0 {
            write!(f, "{}", m.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for ExtremeProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                'B' | 'b' => Ok(Mark::Bottom),
                'T' | 't' => Ok(Mark::Top),
                'A' | 'a' | '_' => Ok(Mark::Abstain),
                other => Err(format!("unexpected mark `{other}` (expected B, T or A)")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(ExtremeProfile)
    }
}

/// Nonnegative voter weights with positive total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(w) = values.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {w} is not a finite nonnegative number")));
        }
        if exact_sum(values.iter().copied()) <= 0.0 {
            return Err(Error::InvalidWeights("weights must have a positive sum".into()));
        }
        Ok(Self(values))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        exact_sum(self.0.iter().copied())
    }
}

impl TryFrom<Vec<f64>> for Weights {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Weights::new(v)
    }
}

impl From<Weights> for Vec<f64> {
    fn from(w: Weights) -> Self {
        w.0
    }
}

/// Sends ballots strictly below `x` to the bottom and ballots at or above `x`
/// to the top; abstentions pass through.
pub fn theta(profile: &Profile, x: f64) -> ExtremeProfile {
    ExtremeProfile(
        profile
            .ballots()
            .iter()
            .map(|b| match *b {
                Ballot::Peak(r) if r < x => Mark::Bottom,
                Ballot::Peak(_) => Mark::Top,
                Ballot::Abstain => Mark::Abstain,
            })
            .collect(),
    )
}

/// Indices of active voters sorted by decreasing peak; equal peaks keep
/// increasing voter index.
pub fn descending_order(profile: &Profile) -> Vec<usize> {
    let ballots = profile.ballots();
    let peak = |i: usize| ballots[i].peak().unwrap_or(f64::NEG_INFINITY);
    let mut order: Vec<usize> = profile.active().map(|(i, _)| i).collect();
    order.sort_unstable_by(|&a, &b| peak(b).total_cmp(&peak(a)).then(a.cmp(&b)));
    order
}

/// Extreme profile whose top set is the `k` voters with the largest peaks
/// (lowest index wins ties); other active voters go to the bottom.
pub fn build_x_k(profile: &Profile, k: usize) -> Result<ExtremeProfile> {
    let n = profile.active_count();
    if k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut marks: Vec<Mark> = profile
        .ballots()
        .iter()
        .map(|b| match b {
            Ballot::Peak(_) => Mark::Bottom,
            Ballot::Abstain => Mark::Abstain,
        })
        .collect();
    for &i in descending_order(profile).iter().take(k) {
        marks[i] = Mark::Top;
    }
    Ok(ExtremeProfile(marks))
}
