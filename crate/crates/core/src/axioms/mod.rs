//! Exhaustive and sampled auditors for the axioms of voting rules on
//! single-peaked domains.
//!
//! A rule is any [`Rule`]: a map from a list of peaks to an outcome. Fixed
//! electorate audits enumerate every profile of a grid (or a seeded sample
//! when enumeration is too large) and check each axiom against the outcome
//! table. Variable electorate audits do the same for every requested
//! electorate size. Every failure carries a [`Witness`] that is replayed
//! through the rule before the report is returned.

mod fixed;
mod variable;
mod witness;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

pub use fixed::{audit_fixed, sp_distance};
pub use variable::audit_variable;
pub use witness::{Witness, FLOAT_TOL};

use crate::domain::{AlternativeDomain, Profile};
use crate::error::{Error, Result};
use crate::exact::exact_sum;
use crate::phantoms::{GradingCurve, PhantomFunction, VariableRule};
use crate::representations::{eval_curve, Representation};

/// Largest number of rule evaluations an exhaustive audit may perform.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;
/// Largest replication factor in the continuity audit.
pub const CONTINUITY_MAX_COPIES: usize = 64;
/// Largest replication factor in the homogeneity audit.
pub const HOMOGENEITY_MAX_COPIES: usize = 4;

/// A voting rule seen as a black box.
pub trait Rule: Sync {
    /// Outcome for voters with the given peaks.
    fn outcome(&self, peaks: &[f64]) -> Result<f64>;

    /// Phantom function of the rule, when it is known.
    fn phantom(&self) -> Option<PhantomFunction> {
        None
    }

    fn describe(&self) -> String;
}

/// Rule given by a phantom function and an evaluator.
#[derive(Debug, Clone)]
pub struct PhantomRule {
    alpha: PhantomFunction,
    representation: Representation,
}

impl PhantomRule {
    pub fn new(alpha: PhantomFunction) -> Self {
        Self::with_representation(alpha, Representation::Curve)
    }

    pub fn with_representation(alpha: PhantomFunction, representation: Representation) -> Self {
        Self { alpha, representation }
    }

    pub fn alpha(&self) -> &PhantomFunction {
        &self.alpha
    }
}

impl Rule for PhantomRule {
    fn outcome(&self, peaks: &[f64]) -> Result<f64> {
        let profile = Profile::from_peaks(peaks)?;
        Ok(self.representation.evaluate(&self.alpha, &profile)?.value)
    }

    fn phantom(&self) -> Option<PhantomFunction> {
        Some(self.alpha.clone())
    }

    fn describe(&self) -> String {
        format!("{} via {}", self.alpha.kind(), self.representation)
    }
}

impl Rule for VariableRule {
    fn outcome(&self, peaks: &[f64]) -> Result<f64> {
        let profile = Profile::from_peaks(peaks)?;
        Ok(eval_curve(&self.phantom(), &profile)?.value)
    }

    fn describe(&self) -> String {
        format!("variable curve {} with empty value {}", self.curve(), self.empty_value())
    }
}

/// Rule defined by a closure.
pub struct FnRule<F> {
    name: String,
    f: F,
}

impl<F> FnRule<F>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

fn arithmetic_mean(peaks: &[f64]) -> Result<f64> {
    if peaks.is_empty() {
        return Err(Error::ZeroActiveVoters);
    }
    Ok(exact_sum(peaks.iter().copied()) / peaks.len() as f64)
}

/// The arithmetic mean of the peaks.
pub fn mean_rule() -> FnRule<fn(&[f64]) -> Result<f64>> {
    FnRule::new("arithmetic mean", arithmetic_mean)
}

impl<F> Rule for FnRule<F>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn outcome(&self, peaks: &[f64]) -> Result<f64> {
        (self.f)(peaks)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

type CurveFamily = Box<dyn Fn(usize) -> Result<GradingCurve> + Send + Sync>;

/// Anonymous rule whose grading curve depends on the electorate size.
pub struct SizeDependentRule {
    name: String,
    empty_value: f64,
    family: CurveFamily,
}

impl SizeDependentRule {
    pub fn new(
        name: impl Into<String>,
        empty_value: f64,
        family: impl Fn(usize) -> Result<GradingCurve> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            empty_value,
            family: Box::new(family),
        }
    }

    /// Phantoms `(k/n)^p_n` where the exponent may vary with `n`.
    pub fn power(domain: AlternativeDomain, empty_value: f64, exponent: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        let name = format!("power family on {domain:?}");
        Self::new(name, empty_value, move |n| {
            let p = exponent(n);
            let alphas: Vec<f64> = (0..=n).map(|k| domain.lerp((k as f64 / n as f64).powf(p))).collect();
            crate::phantoms::curve_from_phantoms(domain, &alphas)
        })
    }
}

impl Rule for SizeDependentRule {
    fn outcome(&self, peaks: &[f64]) -> Result<f64> {
        if peaks.is_empty() {
            return Ok(self.empty_value);
        }
        let alpha = PhantomFunction::curve((self.family)(peaks.len())?);
        Ok(eval_curve(&alpha, &Profile::from_peaks(peaks)?)?.value)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Axioms understood by the auditors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    StrategyProofness,
    WeakResponsiveness,
    Lipschitz,
    Sovereignty,
    Pareto,
    StrictResponsiveness,
    Ordinality,
    Anonymity,
    /// Voter index (0-based) that should never affect the outcome.
    Dummy(usize),
    Participation,
    Consistency,
    Homogeneity,
    Proportionality,
    ContinuityNewMembers,
}

impl Axiom {
    /// Default fixed-electorate set; dummy voters are opt-in.
    pub const FIXED: [Axiom; 8] = [
        Axiom::StrategyProofness,
        Axiom::WeakResponsiveness,
        Axiom::Lipschitz,
        Axiom::Sovereignty,
        Axiom::Pareto,
        Axiom::StrictResponsiveness,
        Axiom::Ordinality,
        Axiom::Anonymity,
    ];

    pub const VARIABLE: [Axiom; 6] = [
        Axiom::Participation,
        Axiom::Consistency,
        Axiom::Homogeneity,
        Axiom::Sovereignty,
        Axiom::Proportionality,
        Axiom::ContinuityNewMembers,
    ];

    pub fn is_fixed(self) -> bool {
        !matches!(
            self,
            Axiom::Participation
                | Axiom::Consistency
                | Axiom::Homogeneity
                | Axiom::Proportionality
                | Axiom::ContinuityNewMembers
        )
    }

    pub fn is_variable(self) -> bool {
        !self.is_fixed() || self == Axiom::Sovereignty
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::StrategyProofness => "strategy_proofness",
            Axiom::WeakResponsiveness => "weak_responsiveness",
            Axiom::Lipschitz => "lipschitz",
            Axiom::Sovereignty => "sovereignty",
            Axiom::Pareto => "pareto",
            Axiom::StrictResponsiveness => "strict_responsiveness",
            Axiom::Ordinality => "ordinality",
            Axiom::Anonymity => "anonymity",
            Axiom::Dummy(i) => return write!(f, "dummy:{i}"),
            Axiom::Participation => "participation",
            Axiom::Consistency => "consistency",
            Axiom::Homogeneity => "homogeneity",
            Axiom::Proportionality => "proportionality",
            Axiom::ContinuityNewMembers => "continuity_new_members",
        };
        f.write_str(s)
    }
}

impl FromStr for Axiom {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        if let Some(i) = s.strip_prefix("dummy:") {
            return i.parse().map(Axiom::Dummy).map_err(|_| format!("bad voter index in `{s}`"));
        }
        Ok(match s.as_str() {
            "sp" | "strategy_proofness" => Axiom::StrategyProofness,
            "weak_responsiveness" | "monotonicity" => Axiom::WeakResponsiveness,
            "lipschitz" => Axiom::Lipschitz,
            "sovereignty" => Axiom::Sovereignty,
            "pareto" => Axiom::Pareto,
            "strict_responsiveness" => Axiom::StrictResponsiveness,
            "ordinality" => Axiom::Ordinality,
            "anonymity" => Axiom::Anonymity,
            "participation" => Axiom::Participation,
            "consistency" => Axiom::Consistency,
            "homogeneity" => Axiom::Homogeneity,
            "proportionality" => Axiom::Proportionality,
            "continuity" | "continuity_new_members" => Axiom::ContinuityNewMembers,
            _ => return Err(format!("unknown axiom `{s}`")),
        })
    }
}

impl Serialize for Axiom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Outcome of auditing one axiom.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum Status {
    #[serde(rename = "PASS_EXHAUSTIVE")]
    PassExhaustive { checks: u64 },
    #[serde(rename = "PASS_SAMPLED")]
    PassSampled { samples: u64 },
    #[serde(rename = "FAIL")]
    Fail { witness: Box<Witness> },
}

impl Status {
    pub fn passed(&self) -> bool {
        !matches!(self, Status::Fail { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Status::Fail { witness } => Some(witness),
            _ => None,
        }
    }

    fn fail(w: Witness) -> Self {
        Status::Fail { witness: Box::new(w) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomResult {
    pub axiom: Axiom,
    #[serde(flatten)]
    pub status: Status,
    /// Set when the check is only an approximation of the axiom on a grid.
    pub approximate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Electorate {
    Fixed { voters: usize },
    Variable { sizes: Vec<usize> },
}

/// Per-axiom verdicts of one audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub rule: String,
    pub domain: AlternativeDomain,
    pub grid_points: usize,
    pub electorate: Electorate,
    pub results: Vec<AxiomResult>,
}

impl AuditReport {
    /// Builds the report after replaying every witness. `attained` holds
    /// the outcome table of each audited electorate size.
    fn certified(
        rule: &dyn Rule,
        domain: AlternativeDomain,
        grid_points: usize,
        electorate: Electorate,
        results: Vec<AxiomResult>,
        attained: &HashMap<usize, Vec<f64>>,
    ) -> Result<Self> {
        for r in &results {
            if let Some(w) = r.status.witness() {
                let table = match w {
                    Witness::Unattained { voters, .. } => attained.get(voters).map(Vec::as_slice),
                    _ => None,
                };
                w.replay(rule, table)?;
            }
        }
        Ok(Self {
            rule: rule.describe(),
            domain,
            grid_points,
            electorate,
            results,
        })
    }

    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.status.passed())
    }

    pub fn result(&self, axiom: Axiom) -> Option<&AxiomResult> {
        self.results.iter().find(|r| r.axiom == axiom)
    }

    pub fn status(&self, axiom: Axiom) -> Option<&Status> {
        self.result(axiom).map(|r| &r.status)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomResult> {
        self.results.iter().filter(|r| !r.status.passed())
    }
}

/// Knobs shared by the auditors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    /// Fall back to seeded sampling when exhaustive enumeration is too large.
    pub sampled_fallback: bool,
    pub samples: usize,
    pub seed: u64,
    /// Increasing bijections tried by the ordinality audit.
    pub ordinality_maps: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            sampled_fallback: false,
            samples: 10_000,
            seed: 0,
            ordinality_maps: 200,
        }
    }
}

/// Profiles of `n` voters over the points of a grid, indexed
/// lexicographically with voter 0 most significant.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    points: Vec<f64>,
    n: usize,
    count: Option<usize>,
}

impl Grid {
    pub(crate) fn new(points: Vec<f64>, n: usize) -> Self {
        let count = u32::try_from(n).ok().and_then(|n| points.len().checked_pow(n));
        Self { points, n, count }
    }

    pub(crate) fn base(&self) -> usize {
        self.points.len()
    }

    pub(crate) fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of profiles, or `None` when it overflows.
    pub(crate) fn count(&self) -> Option<usize> {
        self.count
    }

    pub(crate) fn count_u128(&self) -> u128 {
        (self.points.len() as u128).saturating_pow(self.n as u32)
    }

    pub(crate) fn decode(&self, mut idx: usize, digits: &mut [usize]) {
        for d in digits.iter_mut().rev() {
            *d = idx % self.base();
            idx /= self.base();
        }
    }

    pub(crate) fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &d| acc * self.base() + d)
    }

    pub(crate) fn peaks(&self, digits: &[usize]) -> Vec<f64> {
        digits.iter().map(|&d| self.points[d]).collect()
    }

    /// All outcomes in index order.
    pub(crate) fn table(&self, rule: &dyn Rule) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        let count = self.count.ok_or(Error::Infeasible {
            evaluations: self.count_u128(),
            limit: EXHAUSTIVE_LIMIT,
        })?;
        (0..count)
            .into_par_iter()
            .map_init(
                || vec![0usize; self.n],
                |digits, idx| {
                    self.decode(idx, digits);
                    rule.outcome(&self.peaks(digits))
                },
            )
            .collect()
    }
}

/// Ordering wrapper for witness keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Keeps the candidate with the smaller key.
pub(crate) fn min_keyed<K: Ord, W>(a: Option<(K, W)>, b: Option<(K, W)>) -> Option<(K, W)> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.0 < a.0 { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

pub(crate) fn infeasible(evaluations: u128) -> Error {
    Error::Infeasible {
        evaluations,
        limit: EXHAUSTIVE_LIMIT,
    }
}
