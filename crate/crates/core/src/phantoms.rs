//! Phantom functions `α: Γ → Λ` and grading curves `g: [0, 1] → Λ`.
//!
//! A [`PhantomFunction`] assigns an alternative to every extreme profile and
//! is weakly increasing in the `Bottom < Top` order. Every strategy-proof
//! rule on single-peaked ballots is generated by exactly one of them; the
//! evaluators in [`crate::representations`] turn a phantom function and a
//! profile into the rule's outcome.
//!
//! Anonymous rules are described by a [`GradingCurve`] applied to the share
//! of voters (or of total weight) at the top.

use std::collections::HashMap;
use std::fmt;

use crate::domain::{AlternativeDomain, Ballot, ExtremeProfile, Mark, Profile, Weights};
use crate::error::{Error, Result};
use crate::exact::{exact_sum, ExactSum};
use crate::welfare::{big_g, PriorSpec};

/// Largest table arity accepted; tables hold `2^n` values.
pub const MAX_TABLE_VOTERS: usize = 24;
/// Largest arity for exhaustive monotonicity validation.
pub const MAX_VALIDATE_VOTERS: usize = 12;
/// Knots per tabulated inverse of `G`, at `y = k / NUMERIC_STEPS`.
pub const NUMERIC_STEPS: usize = 1024;
pub(crate) const NUMERIC_X_TOL: f64 = 1e-9;

/// Tabulated optimal grading curve `g = G^{-1}` with exact knots.
#[derive(Debug, Clone)]
pub struct NumericCurve {
    prior: PriorSpec,
    q: f64,
    knots: Vec<f64>,
}

impl NumericCurve {
    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `knots[k] = g(k / NUMERIC_STEPS)`.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn eval(&self, y: f64) -> Result<f64> {
        let last = self.knots.len() - 1;
        if y <= 0.0 {
            return Ok(self.knots[0]);
        }
        if y >= 1.0 {
            return Ok(self.knots[last]);
        }
        let pos = y * last as f64;
        let k = (pos.floor() as usize).min(last - 1);
        if pos == k as f64 {
            return Ok(self.knots[k]);
        }
        let (mut lo, mut hi) = (self.knots[k], self.knots[k + 1]);
        while hi - lo > NUMERIC_X_TOL {
            let mid = 0.5 * (lo + hi);
            if big_g(&self.prior, self.q, mid)? < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Parametric family of a grading curve.
#[derive(Debug, Clone)]
pub enum CurveKind {
    /// `t ↦ μ− + t (μ+ − μ−)`.
    Linear,
    /// `low` below `threshold`, `high` above it, `at_threshold` on it.
    Step {
        threshold: f64,
        low: f64,
        high: f64,
        at_threshold: f64,
    },
    /// Right-continuous step through `(t_j, v_j)`; `t_0 = 0`.
    Piecewise { knots: Vec<(f64, f64)> },
    /// Closed-form welfare-optimal curve for a uniform prior.
    ClosedFormUniform { q: f64 },
    /// Numerically inverted welfare-optimal curve for an arbitrary prior.
    Numeric(NumericCurve),
}

/// Weakly increasing map from `[0, 1]` into the alternative domain.
#[derive(Debug, Clone)]
pub struct GradingCurve {
    kind: CurveKind,
    domain: AlternativeDomain,
}

impl GradingCurve {
    pub fn linear(domain: AlternativeDomain) -> Self {
        Self {
            kind: CurveKind::Linear,
            domain,
        }
    }

    /// Step curve. `at_threshold` defaults to the domain midpoint, clamped
    /// into `[low, high]`.
    pub fn step(
        domain: AlternativeDomain,
        threshold: f64,
        low: f64,
        high: f64,
        at_threshold: Option<f64>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidCurve(format!("step threshold {threshold} is outside [0, 1]")));
        }
        let at = at_threshold.unwrap_or_else(|| domain.midpoint().clamp(low.min(high), high.max(low)));
        for v in [low, high, at] {
            domain.check_value(v)?;
        }
        if !(low <= at && at <= high) {
            return Err(Error::InvalidCurve(format!(
                "step values must satisfy low <= at_threshold <= high, got {low}, {at}, {high}"
            )));
        }
        Ok(Self {
            kind: CurveKind::Step {
                threshold,
                low,
                high,
                at_threshold: at,
            },
            domain,
        })
    }

    /// Right-continuous step curve through the given knots.
    pub fn piecewise(domain: AlternativeDomain, knots: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(t0, _)) = knots.first() else {
            return Err(Error::InvalidCurve("piecewise curve needs at least one knot".into()));
        };
        if t0 != 0.0 {
            return Err(Error::InvalidCurve(format!("first knot must sit at t = 0, got {t0}")));
        }
        for (i, &(t, v)) in knots.iter().enumerate() {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidCurve(format!("knot position {t} is outside [0, 1]")));
            }
            domain.check_value(v)?;
            if i > 0 {
                let (tp, vp) = knots[i - 1];
                if t <= tp {
                    return Err(Error::InvalidCurve(format!(
                        "knot positions must increase strictly ({tp} then {t})"
                    )));
                }
                if v < vp {
                    return Err(Error::InvalidCurve(format!(
                        "knot values must be nondecreasing ({vp} then {v})"
                    )));
                }
            }
        }
        Ok(Self {
            kind: CurveKind::Piecewise { knots },
            domain,
        })
    }

    pub fn closed_form_uniform(domain: AlternativeDomain, q: f64) -> Result<Self> {
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::InvalidNorm(q));
        }
        Ok(Self {
            kind: CurveKind::ClosedFormUniform { q },
            domain,
        })
    }

    /// Numeric curve from exact knots `g(k / NUMERIC_STEPS)`; used by the
    /// welfare optimizer.
    pub fn numeric(domain: AlternativeDomain, prior: PriorSpec, q: f64, knots: Vec<f64>) -> Result<Self> {
        if knots.len() != NUMERIC_STEPS + 1 {
            return Err(Error::InvalidCurve(format!(
                "numeric curve needs {} knots, got {}",
                NUMERIC_STEPS + 1,
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidCurve("numeric knots must be nondecreasing".into()));
        }
        for &v in &knots {
            domain.check_value(v)?;
        }
        Ok(Self {
            kind: CurveKind::Numeric(NumericCurve { prior, q, knots }),
            domain,
        })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn domain(&self) -> &AlternativeDomain {
        &self.domain
    }

    /// `g(t)`; arguments outside `[0, 1]` are clamped.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = t.clamp(0.0, 1.0);
        let d = &self.domain;
        Ok(match &self.kind {
            CurveKind::Linear => d.lerp(t),
            CurveKind::Step {
                threshold,
                low,
                high,
                at_threshold,
            } => {
                if t < *threshold {
                    *low
                } else if t > *threshold {
                    *high
                } else {
                    *at_threshold
                }
            }
            CurveKind::Piecewise { knots } => {
                let j = knots.partition_point(|&(tj, _)| tj <= t);
                knots[j - 1].1
            }
            CurveKind::ClosedFormUniform { q } => {
                if t <= 0.0 {
                    d.mu_minus()
                } else if t >= 1.0 {
                    d.mu_plus()
                } else {
                    let share = 1.0 / (1.0 + (1.0 / t - 1.0).powf(1.0 / (q - 1.0)));
                    d.mu_minus() + d.width() * share
                }
            }
            CurveKind::Numeric(c) => c.eval(t)?,
        })
    }

    /// Largest jump of the curve on `[0, 1]`; zero iff continuous.
    pub fn max_jump(&self) -> (f64, f64) {
        match &self.kind {
            CurveKind::Linear | CurveKind::ClosedFormUniform { .. } | CurveKind::Numeric(_) => (0.0, 0.0),
            CurveKind::Step {
                threshold, low, high, ..
            } => {
                if *threshold <= 0.0 || *threshold >= 1.0 {
                    // only one side of the jump is inside [0, 1]
                    let inside = if *threshold <= 0.0 { high } else { low };
                    let at = self.eval(*threshold).unwrap_or(*inside);
                    (*threshold, (at - inside).abs())
                } else {
                    (*threshold, high - low)
                }
            }
            CurveKind::Piecewise { knots } => knots
                .windows(2)
                .map(|w| (w[1].0, w[1].1 - w[0].1))
                .fold((0.0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best }),
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.max_jump().1 == 0.0
    }
}

impl fmt::Display for GradingCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CurveKind::Linear => write!(f, "linear"),
            CurveKind::Step {
                threshold,
                low,
                high,
                at_threshold,
            } => write!(f, "step(threshold={threshold}, low={low}, high={high}, at={at_threshold})"),
            CurveKind::Piecewise { knots } => write!(f, "piecewise({} knots)", knots.len()),
            CurveKind::ClosedFormUniform { q } => write!(f, "uniform_optimal(q={q})"),
            CurveKind::Numeric(c) => write!(f, "optimal({}, q={})", c.prior, c.q),
        }
    }
}

/// Parametric family of a phantom function.
#[derive(Debug, Clone)]
pub enum PhantomKind {
    /// `values[mask]`, where bit `i` of `mask` set means voter `i` is at the top.
    Table { n: usize, values: Vec<f64> },
    /// `g(share at the top)`; share counts active voters or their weights.
    Curve {
        curve: GradingCurve,
        weights: Option<Weights>,
        empty_value: Option<f64>,
    },
    Constant(f64),
    /// The voter at this index decides alone.
    Dictator(usize),
    /// `μ+` iff at least `k` active voters are at the top: the `k`-th largest ballot.
    OrderStatistic(usize),
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhantomKind::Table { n, .. } => write!(f, "table over {n} voters"),
            PhantomKind::Curve {
                curve,
                weights,
                empty_value,
            } => {
                write!(f, "curve {curve}")?;
                if let Some(w) = weights {
                    write!(f, " weighted {:?}", w.values())?;
                }
                if let Some(x) = empty_value {
                    write!(f, " empty={x}")?;
                }
                Ok(())
            }
            PhantomKind::Constant(c) => write!(f, "constant {c}"),
            PhantomKind::Dictator(i) => write!(f, "dictator voter {i}"),
            PhantomKind::OrderStatistic(k) => write!(f, "order statistic k={k}"),
        }
    }
}

/// Weakly increasing map from extreme profiles into the domain.
#[derive(Debug, Clone)]
pub struct PhantomFunction {
    kind: PhantomKind,
    domain: AlternativeDomain,
}

impl PhantomFunction {
    pub fn table(domain: AlternativeDomain, n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_TABLE_VOTERS {
            return Err(Error::TooManyVoters {
                what: "phantom table",
                n,
                max: MAX_TABLE_VOTERS,
            });
        }
        if values.len() != 1usize << n {
            return Err(Error::MalformedPhantom(format!(
                "table over {n} voters needs {} entries, got {}",
                1usize << n,
                values.len()
            )));
        }
        for &v in &values {
            domain.check_value(v)?;
        }
        Ok(Self {
            kind: PhantomKind::Table { n, values },
            domain,
        })
    }

    /// Table from explicit extreme-profile entries; every profile over `n`
    /// voters must be present.
    pub fn table_from_map(domain: AlternativeDomain, n: usize, entries: &HashMap<ExtremeProfile, f64>) -> Result<Self> {
        if n > MAX_TABLE_VOTERS {
            return Err(Error::TooManyVoters {
                what: "phantom table",
                n,
                max: MAX_TABLE_VOTERS,
            });
        }
        if let Some(bad) = entries.keys().find(|x| x.len() != n || x.has_abstentions()) {
            return Err(Error::MalformedPhantom(format!("entry {bad} does not describe {n} voters")));
        }
        let values = (0..1u64 << n)
            .map(|mask| {
                let x = ExtremeProfile::from_mask(n, mask);
                entries.get(&x).copied().ok_or_else(|| Error::TableLookupMiss(x.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::table(domain, n, values)
    }

    pub fn curve(curve: GradingCurve) -> Self {
        let domain = *curve.domain();
        Self {
            kind: PhantomKind::Curve {
                curve,
                weights: None,
                empty_value: None,
            },
            domain,
        }
    }

    /// Weighted curve phantom; the curve must be continuous.
    pub fn weighted_curve(curve: GradingCurve, weights: Weights) -> Result<Self> {
        let (at, jump) = curve.max_jump();
        if jump > 0.0 {
            return Err(Error::DiscontinuousWeightedCurve { at, jump });
        }
        let domain = *curve.domain();
        Ok(Self {
            kind: PhantomKind::Curve {
                curve,
                weights: Some(weights),
                empty_value: None,
            },
            domain,
        })
    }

    /// Sets the value taken on an electorate with no active voter.
    pub fn with_empty_value(mut self, x: f64) -> Result<Self> {
        self.domain.check_value(x)?;
        match &mut self.kind {
            PhantomKind::Curve { empty_value, .. } => {
                *empty_value = Some(x);
                Ok(self)
            }
            _ => Err(Error::MalformedPhantom(
                "only curve phantoms carry an empty-electorate value".into(),
            )),
        }
    }

    pub fn constant(domain: AlternativeDomain, c: f64) -> Result<Self> {
        domain.check_value(c)?;
        Ok(Self {
            kind: PhantomKind::Constant(c),
            domain,
        })
    }

    pub fn dictator(domain: AlternativeDomain, voter: usize) -> Self {
        Self {
            kind: PhantomKind::Dictator(voter),
            domain,
        }
    }

    /// The `k`-th largest ballot, `k >= 1`.
    pub fn order_statistic(domain: AlternativeDomain, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::KOutOfRange { k, n: 0 });
        }
        Ok(Self {
            kind: PhantomKind::OrderStatistic(k),
            domain,
        })
    }

    pub fn kind(&self) -> &PhantomKind {
        &self.kind
    }

    pub fn domain(&self) -> &AlternativeDomain {
        &self.domain
    }

    /// Number of voters the phantom is tied to, if any.
    pub fn arity(&self) -> Option<usize> {
        match &self.kind {
            PhantomKind::Table { n, .. } => Some(*n),
            PhantomKind::Curve { weights: Some(w), .. } => Some(w.len()),
            _ => None,
        }
    }

    pub fn empty_value(&self) -> Option<f64> {
        match &self.kind {
            PhantomKind::Curve { empty_value, .. } => *empty_value,
            _ => None,
        }
    }

    /// Whether abstaining voters are understood by this phantom.
    pub fn accepts_abstentions(&self) -> bool {
        matches!(
            self.kind,
            PhantomKind::Curve { weights: None, .. } | PhantomKind::Constant(_) | PhantomKind::OrderStatistic(_)
        )
    }

    fn check_len(&self, len: usize) -> Result<()> {
        match self.arity() {
            Some(n) if n != len => Err(Error::ProfileLengthMismatch { expected: n, found: len }),
            _ => Ok(()),
        }
    }

    /// `α(X)`.
    pub fn eval(&self, x: &ExtremeProfile) -> Result<f64> {
        self.check_len(x.len())?;
        let d = &self.domain;
        match &self.kind {
            PhantomKind::Table { values, .. } => {
                let mask = x.to_mask().ok_or(Error::AbstentionNotSupported("a phantom table"))?;
                Ok(values[mask as usize])
            }
            PhantomKind::Curve {
                curve,
                weights,
                empty_value,
            } => {
                let active = x.active_count();
                if active == 0 {
                    return empty_value.ok_or(Error::ZeroActiveVoters);
                }
                let share = match weights {
                    None => x.top_count() as f64 / active as f64,
                    Some(w) => {
                        let w = w.values();
                        let top = exact_sum(x.tops().map(|i| w[i]));
                        let all = exact_sum(x.marks().iter().zip(w).filter(|(m, _)| **m != Mark::Abstain).map(|(_, &wi)| wi));
                        weighted_share(top, all)?
                    }
                };
                curve.eval(share)
            }
            PhantomKind::Constant(c) => Ok(*c),
            PhantomKind::Dictator(i) => match x.marks().get(*i) {
                Some(Mark::Top) => Ok(d.mu_plus()),
                Some(Mark::Bottom) => Ok(d.mu_minus()),
                Some(Mark::Abstain) => Err(Error::AbstentionNotSupported("an abstaining dictator")),
                None => Err(Error::ProfileLengthMismatch {
                    expected: i + 1,
                    found: x.len(),
                }),
            },
            PhantomKind::OrderStatistic(k) => {
                let n = x.active_count();
                if *k > n {
                    return Err(Error::KOutOfRange { k: *k, n });
                }
                Ok(if x.top_count() >= *k { d.mu_plus() } else { d.mu_minus() })
            }
        }
    }

    /// `α` on the abstention-free profile over `n` voters encoded by `mask`.
    /// Agrees exactly with [`eval`](Self::eval) on the decoded profile.
    pub(crate) fn eval_mask(&self, n: usize, mask: u64) -> Result<f64> {
        self.check_len(n)?;
        let d = &self.domain;
        let tops = mask.count_ones() as usize;
        match &self.kind {
            PhantomKind::Table { values, .. } => Ok(values[mask as usize]),
            PhantomKind::Curve {
                curve,
                weights,
                empty_value,
            } => {
                if n == 0 {
                    return empty_value.ok_or(Error::ZeroActiveVoters);
                }
                let share = match weights {
                    None => tops as f64 / n as f64,
                    Some(w) => {
                        let w = w.values();
                        let top = exact_sum((0..n).filter(|i| mask >> i & 1 == 1).map(|i| w[i]));
                        weighted_share(top, exact_sum(w.iter().copied()))?
                    }
                };
                curve.eval(share)
            }
            PhantomKind::Constant(c) => Ok(*c),
            PhantomKind::Dictator(i) => {
                if *i >= n {
                    return Err(Error::ProfileLengthMismatch {
                        expected: i + 1,
                        found: n,
                    });
                }
                Ok(if mask >> i & 1 == 1 { d.mu_plus() } else { d.mu_minus() })
            }
            PhantomKind::OrderStatistic(k) => {
                if *k > n {
                    return Err(Error::KOutOfRange { k: *k, n });
                }
                Ok(if tops >= *k { d.mu_plus() } else { d.mu_minus() })
            }
        }
    }

    /// Checks `α` on every pair of extreme profiles differing in one voter.
    /// Returns the first violating pair `(X, Y)` with `X ≤ Y` and `α(X) > α(Y)`.
    pub fn validate_monotone(&self) -> Result<Option<(ExtremeProfile, ExtremeProfile)>> {
        match &self.kind {
            PhantomKind::Table { n, values } => {
                if *n > MAX_VALIDATE_VOTERS {
                    return Err(Error::TooManyVoters {
                        what: "monotonicity validation",
                        n: *n,
                        max: MAX_VALIDATE_VOTERS,
                    });
                }
                for mask in 0..values.len() {
                    for bit in 0..*n {
                        let up = mask | 1 << bit;
                        if up != mask && values[mask] > values[up] {
                            return Ok(Some((
                                ExtremeProfile::from_mask(*n, mask as u64),
                                ExtremeProfile::from_mask(*n, up as u64),
                            )));
                        }
                    }
                }
                Ok(None)
            }
            _ => Ok(None),
        }
    }

    /// Error form of [`validate_monotone`](Self::validate_monotone).
    pub fn ensure_monotone(&self) -> Result<()> {
        match self.validate_monotone()? {
            None => Ok(()),
            Some((x, y)) => Err(Error::NotMonotone {
                lower_value: self.eval(&x)?,
                upper_value: self.eval(&y)?,
                lower: x.to_string(),
                upper: y.to_string(),
            }),
        }
    }

    /// `α` along the chain `X_0 ≤ X_1 ≤ … ≤ X_n` where `X_k` puts the first
    /// `k` voters of `order` at the top.
    pub(crate) fn chain<'a>(&'a self, profile: &Profile, order: &[usize]) -> Result<PhantomChain<'a>> {
        self.check_len(profile.len())?;
        let n = order.len();
        let chain = match &self.kind {
            PhantomKind::Table { values, .. } => {
                if profile.has_abstentions() {
                    return Err(Error::AbstentionNotSupported("a phantom table"));
                }
                let mut masks = Vec::with_capacity(n + 1);
                let mut mask = 0usize;
                masks.push(mask);
                for &i in order {
                    mask |= 1 << i;
                    masks.push(mask);
                }
                ChainKind::Table { values, masks }
            }
            PhantomKind::Curve {
                curve,
                weights,
                empty_value,
            } => {
                if n == 0 {
                    ChainKind::Fixed(empty_value.ok_or(Error::ZeroActiveVoters)?)
                } else {
                    match weights {
                        None => ChainKind::Share { curve, n },
                        Some(w) => {
                            let w = w.values();
                            let all = exact_sum(order.iter().map(|&i| w[i]));
                            let mut acc = ExactSum::new();
                            let mut shares = Vec::with_capacity(n + 1);
                            shares.push(weighted_share(0.0, all)?);
                            for &i in order {
                                acc.add(w[i]);
                                shares.push(weighted_share(acc.value(), all)?);
                            }
                            ChainKind::Weighted { curve, shares }
                        }
                    }
                }
            }
            PhantomKind::Constant(c) => ChainKind::Fixed(*c),
            PhantomKind::Dictator(d) => {
                match profile.ballots().get(*d) {
                    Some(Ballot::Peak(_)) => {}
                    Some(Ballot::Abstain) => return Err(Error::AbstentionNotSupported("an abstaining dictator")),
                    None => {
                        return Err(Error::ProfileLengthMismatch {
                            expected: d + 1,
                            found: profile.len(),
                        })
                    }
                }
                let pos = order.iter().position(|i| i == d).expect("active dictator is in the order");
                ChainKind::Threshold {
                    k: pos + 1,
                    lo: self.domain.mu_minus(),
                    hi: self.domain.mu_plus(),
                }
            }
            PhantomKind::OrderStatistic(k) => {
                if *k > n {
                    return Err(Error::KOutOfRange { k: *k, n });
                }
                ChainKind::Threshold {
                    k: *k,
                    lo: self.domain.mu_minus(),
                    hi: self.domain.mu_plus(),
                }
            }
        };
        Ok(PhantomChain { kind: chain, n })
    }
}

fn weighted_share(top: f64, all: f64) -> Result<f64> {
    if all <= 0.0 {
        return Err(Error::InvalidWeights("active voters carry zero total weight".into()));
    }
    Ok(top / all)
}

enum ChainKind<'a> {
    Table { values: &'a [f64], masks: Vec<usize> },
    Share { curve: &'a GradingCurve, n: usize },
    Weighted { curve: &'a GradingCurve, shares: Vec<f64> },
    Fixed(f64),
    Threshold { k: usize, lo: f64, hi: f64 },
}

/// Random access to `α(X_k)` for `k = 0..=n`.
pub(crate) struct PhantomChain<'a> {
    kind: ChainKind<'a>,
    n: usize,
}

impl PhantomChain<'_> {
    pub(crate) fn len(&self) -> usize {
        self.n
    }

    pub(crate) fn at(&self, k: usize) -> Result<f64> {
        debug_assert!(k <= self.n);
        match &self.kind {
            ChainKind::Table { values, masks } => Ok(values[masks[k]]),
            ChainKind::Share { curve, n } => curve.eval(k as f64 / *n as f64),
            ChainKind::Weighted { curve, shares } => curve.eval(shares[k]),
            ChainKind::Fixed(c) => Ok(*c),
            ChainKind::Threshold { k: t, lo, hi } => Ok(if k >= *t { *hi } else { *lo }),
        }
    }
}

/// Piecewise curve with `g(i/n) = alphas[i]`, where `n = alphas.len() - 1`.
pub fn curve_from_phantoms(domain: AlternativeDomain, alphas: &[f64]) -> Result<GradingCurve> {
    if alphas.is_empty() {
        return Err(Error::InvalidCurve("need at least one phantom value".into()));
    }
    if let Some(w) = alphas.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::InvalidCurve(format!(
            "phantom values must be nondecreasing ({} then {})",
            w[0], w[1]
        )));
    }
    let n = alphas.len() - 1;
    let knots = alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| (if n == 0 { 0.0 } else { i as f64 / n as f64 }, a))
        .collect();
    GradingCurve::piecewise(domain, knots)
}

/// `(g(0/n), g(1/n), …, g(n/n))`.
pub fn phantoms_from_curve(curve: &GradingCurve, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::KOutOfRange { k: 0, n: 0 });
    }
    (0..=n).map(|k| curve.eval(k as f64 / n as f64)).collect()
}

/// Size-independent anonymous rule over variable electorates: grading curve
/// plus the outcome `x` for an empty electorate.
#[derive(Debug, Clone)]
pub struct VariableRule {
    curve: GradingCurve,
    empty_value: f64,
}

impl VariableRule {
    pub fn new(curve: GradingCurve, empty_value: f64) -> Result<Self> {
        curve.domain().check_value(empty_value)?;
        Ok(Self { curve, empty_value })
    }

    pub fn curve(&self) -> &GradingCurve {
        &self.curve
    }

    pub fn empty_value(&self) -> f64 {
        self.empty_value
    }

    pub fn domain(&self) -> &AlternativeDomain {
        self.curve.domain()
    }

    /// Phantom over `Γ*`, abstentions included.
    pub fn phantom(&self) -> PhantomFunction {
        PhantomFunction::curve(self.curve.clone())
            .with_empty_value(self.empty_value)
            .expect("empty value validated at construction")
    }

    /// Whether the induced phantom on `Γ*` is weakly increasing under
    /// `Bottom < Abstain < Top`, i.e. `g(0) ≤ x ≤ g(1)`.
    pub fn satisfies_participation(&self) -> Result<bool> {
        Ok(self.curve.eval(0.0)? <= self.empty_value && self.empty_value <= self.curve.eval(1.0)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representations::eval_median;
    use proptest::prelude::*;

    fn ep(s: &str) -> ExtremeProfile {
        s.parse().unwrap()
    }

    fn unit() -> AlternativeDomain {
        AlternativeDomain::unit()
    }

    #[test]
    fn linear_curve_share() {
        let a = PhantomFunction::curve(GradingCurve::linear(unit()));
        assert_eq!(a.eval(&ep("TTTB")).unwrap(), 0.75);
    }

    #[test]
    fn dictator_reads_its_voter() {
        let a = PhantomFunction::dictator(unit(), 0);
        assert_eq!(a.eval(&ep("TB")).unwrap(), 1.0);
        assert_eq!(a.eval(&ep("BT")).unwrap(), 0.0);
    }

    #[test]
    fn weighted_share_matches_replicated_voter() {
        let w = Weights::new(vec![2.0, 1.0]).unwrap();
        let a = PhantomFunction::weighted_curve(GradingCurve::linear(unit()), w).unwrap();
        let weighted = a.eval(&ep("TB")).unwrap();
        assert!((weighted - 2.0 / 3.0).abs() < 1e-15);
        // voter 1 replicated twice: phantom value of the unweighted linear median
        let replicated = PhantomFunction::curve(GradingCurve::linear(unit()));
        assert_eq!(replicated.eval(&ep("TTB")).unwrap(), weighted);
        // and the same for outcomes on a few profiles
        for (r1, r2) in [(0.9, 0.1), (0.2, 0.7), (0.5, 0.5)] {
            let wp = Profile::from_peaks(&[r1, r2]).unwrap();
            let rp = Profile::from_peaks(&[r1, r1, r2]).unwrap();
            assert_eq!(
                eval_median(&a, &wp).unwrap().value,
                eval_median(&replicated, &rp).unwrap().value
            );
        }
    }

    #[test]
    fn weighted_curves_must_be_continuous() {
        let step = GradingCurve::step(unit(), 0.5, 0.0, 1.0, None).unwrap();
        let err = PhantomFunction::weighted_curve(step, Weights::uniform(2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DiscontinuousWeightedCurve { .. }));
    }

    #[test]
    fn validate_monotone_examples() {
        let good = PhantomFunction::table(unit(), 2, vec![0.0, 0.6, 0.4, 1.0]).unwrap();
        assert_eq!(good.validate_monotone().unwrap(), None);
        let bad = PhantomFunction::table(unit(), 2, vec![0.0, 0.6, 0.4, 0.5]).unwrap();
        assert_eq!(bad.validate_monotone().unwrap(), Some((ep("TB"), ep("TT"))));
        assert!(matches!(bad.ensure_monotone(), Err(Error::NotMonotone { .. })));
        let big = PhantomFunction::table(unit(), 13, vec![0.0; 1 << 13]).unwrap();
        assert!(matches!(big.validate_monotone(), Err(Error::TooManyVoters { .. })));
        let curve = PhantomFunction::curve(GradingCurve::closed_form_uniform(unit(), 3.0).unwrap());
        assert_eq!(curve.validate_monotone().unwrap(), None);
    }

    #[test]
    fn table_from_map_reports_missing_entry() {
        let mut m = HashMap::new();
        m.insert(ep("BB"), 0.0);
        m.insert(ep("TT"), 1.0);
        m.insert(ep("TB"), 0.5);
        assert!(matches!(
            PhantomFunction::table_from_map(unit(), 2, &m),
            Err(Error::TableLookupMiss(s)) if s == "BT"
        ));
        m.insert(ep("BT"), 0.5);
        let t = PhantomFunction::table_from_map(unit(), 2, &m).unwrap();
        assert_eq!(t.eval(&ep("BT")).unwrap(), 0.5);
    }

    #[test]
    fn table_rejects_abstention() {
        let t = PhantomFunction::table(unit(), 2, vec![0.0, 0.5, 0.5, 1.0]).unwrap();
        assert!(matches!(t.eval(&ep("TA")), Err(Error::AbstentionNotSupported(_))));
    }

    #[test]
    fn zero_active_voters() {
        let bare = PhantomFunction::curve(GradingCurve::linear(unit()));
        assert_eq!(bare.eval(&ep("AA")), Err(Error::ZeroActiveVoters));
        let with = bare.with_empty_value(0.4).unwrap();
        assert_eq!(with.eval(&ep("AA")).unwrap(), 0.4);
        assert_eq!(with.eval(&ExtremeProfile::new(vec![])).unwrap(), 0.4);
    }

    #[test]
    fn phantoms_from_linear_curve() {
        let g = GradingCurve::linear(unit());
        assert_eq!(phantoms_from_curve(&g, 2).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(phantoms_from_curve(&g, 4).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn phantoms_from_step_curve() {
        let g = GradingCurve::step(unit(), 0.5, 0.0, 1.0, Some(0.3)).unwrap();
        assert_eq!(phantoms_from_curve(&g, 2).unwrap(), vec![0.0, 0.3, 1.0]);
        let default = GradingCurve::step(unit(), 0.5, 0.0, 1.0, None).unwrap();
        assert_eq!(default.eval(0.5).unwrap(), 0.5);
    }

    #[test]
    fn curve_from_phantoms_knots() {
        let g = curve_from_phantoms(unit(), &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        assert_eq!(g.eval(0.5).unwrap(), 0.5);
        assert_eq!(g.eval(1.0).unwrap(), 1.0);
        assert_eq!(g.eval(0.49).unwrap(), 0.0);
        assert!(curve_from_phantoms(unit(), &[0.5, 0.2]).is_err());
    }

    #[test]
    fn step_phantoms_give_middle_order_statistic() {
        let d = unit();
        let a = PhantomFunction::curve(curve_from_phantoms(d, &[0.0, 0.0, 1.0, 1.0]).unwrap());
        let grid: Vec<f64> = (0..5).map(|j| d.grid_point(j, 4)).collect();
        for i in 0..125 {
            let r = [grid[i / 25], grid[i / 5 % 5], grid[i % 5]];
            let mut s = r;
            s.sort_by(f64::total_cmp);
            let p = Profile::from_peaks(&r).unwrap();
            assert_eq!(eval_median(&a, &p).unwrap().value, s[1]);
        }
    }

    #[test]
    fn constant_phantoms_give_constant_rule() {
        use rand::{Rng, SeedableRng};
        let a = PhantomFunction::curve(curve_from_phantoms(unit(), &[0.4, 0.4, 0.4]).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let r: Vec<f64> = (0..2).map(|_| rng.random::<f64>()).collect();
            let p = Profile::from_peaks(&r).unwrap();
            assert_eq!(eval_median(&a, &p).unwrap().value, 0.4);
        }
    }

    #[test]
    fn participation_condition() {
        let lin = VariableRule::new(GradingCurve::linear(unit()), 0.5).unwrap();
        assert!(lin.satisfies_participation().unwrap());
        let step = GradingCurve::step(unit(), 0.5, 0.2, 0.8, None).unwrap();
        assert!(!VariableRule::new(step.clone(), 0.9).unwrap().satisfies_participation().unwrap());
        // a value in the curve's gap still keeps the phantom monotone
        assert!(VariableRule::new(step, 0.4).unwrap().satisfies_participation().unwrap());
    }

    #[test]
    fn closed_form_values() {
        let g = GradingCurve::closed_form_uniform(unit(), 3.0).unwrap();
        assert!((g.eval(0.8).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.eval(0.5).unwrap(), 0.5);
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        assert_eq!(g.eval(1.0).unwrap(), 1.0);
        let g2 = GradingCurve::closed_form_uniform(unit(), 2.0).unwrap();
        for k in 0..=100 {
            let y = k as f64 / 100.0;
            assert!((g2.eval(y).unwrap() - y).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn curve_phantoms_are_monotone(q in 1.01f64..8.0, n in 1usize..40) {
            let g = GradingCurve::closed_form_uniform(unit(), q).unwrap();
            let a = phantoms_from_curve(&g, n).unwrap();
            prop_assert!(a.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn round_trip_at_knots(raw in prop::collection::vec(0.0f64..=1.0, 2..12)) {
            let mut alphas = raw.clone();
            alphas.sort_by(f64::total_cmp);
            let n = alphas.len() - 1;
            let g = curve_from_phantoms(unit(), &alphas).unwrap();
            let back = phantoms_from_curve(&g, n).unwrap();
            prop_assert_eq!(back, alphas);
        }

        #[test]
        fn size_independent_curves_are_consistent(
            q in 1.1f64..6.0,
            x in prop::collection::vec(any::<bool>(), 1..8),
            y in prop::collection::vec(any::<bool>(), 1..8),
        ) {
            let a = PhantomFunction::curve(GradingCurve::closed_form_uniform(unit(), q).unwrap());
            let to = |v: &[bool]| ExtremeProfile::new(v.iter().map(|&b| if b { Mark::Top } else { Mark::Bottom }).collect());
            let (ax, ay) = (a.eval(&to(&x)).unwrap(), a.eval(&to(&y)).unwrap());
            let merged: Vec<bool> = x.iter().chain(&y).copied().collect();
            let axy = a.eval(&to(&merged)).unwrap();
            let (lo, hi) = if ax <= ay { (ax, ay) } else { (ay, ax) };
            prop_assert!(lo <= axy && axy <= hi);
        }

        #[test]
        fn participation_phantom_is_monotone_on_gamma_star(
            marks in prop::collection::vec(0u8..3, 1..7),
            flip in 0usize..7,
            x in 0.0f64..=1.0,
        ) {
            let rule = VariableRule::new(GradingCurve::closed_form_uniform(unit(), 2.5).unwrap(), x).unwrap();
            let a = rule.phantom();
            let to_mark = |m: u8| [Mark::Bottom, Mark::Abstain, Mark::Top][m as usize];
            let lower: Vec<Mark> = marks.iter().map(|&m| to_mark(m)).collect();
            let i = flip % lower.len();
            if lower[i] != Mark::Top {
                let mut upper = lower.clone();
                upper[i] = if lower[i] == Mark::Bottom { Mark::Abstain } else { Mark::Top };
                let lo = a.eval(&ExtremeProfile::new(lower)).unwrap();
                let hi = a.eval(&ExtremeProfile::new(upper)).unwrap();
                prop_assert!(lo <= hi);
            }
        }
    }
}
