use std::cmp::Reverse;
use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::witness::{gain, pl_map, uncompromising};
use super::{
    infeasible, min_keyed, AuditOptions, AuditReport, Axiom, AxiomResult, Electorate, Grid, OrdF64, Rule, Status,
    Witness, EXHAUSTIVE_LIMIT, FLOAT_TOL,
};
use crate::domain::{AlternativeDomain, ExtremeProfile};
use crate::error::{Error, Result};
use crate::representations::MAX_EXPONENTIAL_VOTERS;

/// Interior knots of each sampled increasing bijection.
const ORDINAL_KNOTS: usize = 3;

enum Bases {
    All(usize),
    Sampled(Vec<Vec<usize>>),
}

struct Ctx<'a> {
    rule: &'a dyn Rule,
    grid: Grid,
    table: Option<Vec<f64>>,
    bases: Bases,
    opts: AuditOptions,
}

type Found<K> = Option<(K, Witness)>;

impl Ctx<'_> {
    fn n(&self) -> usize {
        self.grid.n
    }

    fn at(&self, digits: &[usize]) -> Result<f64> {
        match &self.table {
            Some(t) => Ok(t[self.grid.encode(digits)]),
            None => self.rule.outcome(&self.grid.peaks(digits)),
        }
    }

    fn base_count(&self) -> u64 {
        match &self.bases {
            Bases::All(c) => *c as u64,
            Bases::Sampled(v) => v.len() as u64,
        }
    }

    fn exhaustive(&self) -> bool {
        matches!(self.bases, Bases::All(_))
    }

    fn pass(&self, per_base: u64) -> Status {
        let checks = self.base_count() * per_base;
        if self.exhaustive() {
            Status::PassExhaustive { checks }
        } else {
            Status::PassSampled { samples: checks }
        }
    }

    /// Smallest-key violation over all base profiles.
    fn scan<K, F>(&self, f: F) -> Result<Found<K>>
    where
        K: Ord + Send,
        F: Fn(usize, &[usize]) -> Result<Found<K>> + Sync,
    {
        let n = self.n();
        match &self.bases {
            Bases::All(count) => (0..*count)
                .into_par_iter()
                .map_init(
                    || vec![0usize; n],
                    |digits, idx| {
                        self.grid.decode(idx, digits);
                        f(idx, digits)
                    },
                )
                .try_reduce(|| None, |a, b| Ok(min_keyed(a, b))),
            Bases::Sampled(list) => list
                .par_iter()
                .enumerate()
                .map(|(j, d)| f(j, d))
                .try_reduce(|| None, |a, b| Ok(min_keyed(a, b))),
        }
    }

    fn verdict<K>(&self, found: Found<K>, per_base: u64) -> Status {
        match found {
            Some((_, w)) => Status::fail(w),
            None => self.pass(per_base),
        }
    }

    fn strategy_proofness(&self) -> Result<Status> {
        let pts = self.grid.points();
        let found = self.scan(|ord, r| {
            let t = self.at(r)?;
            let mut s = r.to_vec();
            let mut best = None;
            for i in 0..r.len() {
                let p = pts[r[i]];
                for d in 0..pts.len() {
                    if d == r[i] {
                        continue;
                    }
                    s[i] = d;
                    let v = self.at(&s)?;
                    if !uncompromising(p, t, v) {
                        let g = gain(p, t, v);
                        let w = Witness::Manipulation {
                            profile: self.grid.peaks(r),
                            voter: i,
                            deviation: pts[d],
                            truthful_outcome: t,
                            deviated_outcome: v,
                            gain: g,
                        };
                        best = min_keyed(best, Some(((Reverse(OrdF64(g)), i, d, ord), w)));
                    }
                }
                s[i] = r[i];
            }
            Ok(best)
        })?;
        Ok(self.verdict(found, (self.n() * (pts.len() - 1)) as u64))
    }

    fn weak_responsiveness(&self) -> Result<Status> {
        let pts = self.grid.points();
        let found = self.scan(|ord, r| {
            let t = self.at(r)?;
            let mut s = r.to_vec();
            for i in 0..r.len() {
                if r[i] + 1 == pts.len() {
                    continue;
                }
                s[i] = r[i] + 1;
                let v = self.at(&s)?;
                if v < t {
                    let w = Witness::NotResponsive {
                        profile: self.grid.peaks(r),
                        voter: i,
                        raised_to: pts[s[i]],
                        before: t,
                        after: v,
                    };
                    return Ok(Some(((ord, i), w)));
                }
                s[i] = r[i];
            }
            Ok(None)
        })?;
        Ok(self.verdict(found, self.n() as u64))
    }

    fn lipschitz(&self) -> Result<Status> {
        let pts = self.grid.points();
        let found = self.scan(|ord, r| {
            let t = self.at(r)?;
            let mut s = r.to_vec();
            for i in 0..r.len() {
                for d in 0..pts.len() {
                    s[i] = d;
                    let v = self.at(&s)?;
                    if (t - v).abs() > (pts[r[i]] - pts[d]).abs() + FLOAT_TOL {
                        let w = Witness::NotLipschitz {
                            profile: self.grid.peaks(r),
                            voter: i,
                            changed_to: pts[d],
                            before: t,
                            after: v,
                        };
                        return Ok(Some(((ord, i, d), w)));
                    }
                }
                s[i] = r[i];
            }
            Ok(None)
        })?;
        Ok(self.verdict(found, (self.n() * pts.len()) as u64))
    }

    fn pareto(&self) -> Result<Status> {
        let found = self.scan(|ord, r| {
            let t = self.at(r)?;
            let peaks = self.grid.peaks(r);
            let lo = peaks.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = peaks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok((t < lo || t > hi).then(|| (ord, Witness::NotPareto { profile: peaks, outcome: t })))
        })?;
        Ok(self.verdict(found, 1))
    }

    fn anonymity(&self) -> Result<Status> {
        // adjacent transpositions generate the symmetric group
        let found = self.scan(|ord, r| {
            let t = self.at(r)?;
            let mut s = r.to_vec();
            for j in 0..r.len().saturating_sub(1) {
                if r[j] == r[j + 1] {
                    continue;
                }
                s.swap(j, j + 1);
                let v = self.at(&s)?;
                if v != t {
                    let w = Witness::NotAnonymous {
                        profile: self.grid.peaks(r),
                        swapped: (j, j + 1),
                        before: t,
                        after: v,
                    };
                    return Ok(Some(((ord, j), w)));
                }
                s.swap(j, j + 1);
            }
            Ok(None)
        })?;
        Ok(self.verdict(found, self.n().saturating_sub(1) as u64))
    }

    fn dummy(&self, i: usize) -> Result<Status> {
        if i >= self.n() {
            return Err(Error::UnsupportedAxiom(format!(
                "dummy voter {i} does not exist among {} voters",
                self.n()
            )));
        }
        let pts = self.grid.points();
        let found = self.scan(|ord, r| {
            let t = self.at(r)?;
            let mut s = r.to_vec();
            for d in 0..pts.len() {
                s[i] = d;
                let v = self.at(&s)?;
                if v != t {
                    let w = Witness::NotDummy {
                        profile: self.grid.peaks(r),
                        voter: i,
                        changed_to: pts[d],
                        before: t,
                        after: v,
                    };
                    return Ok(Some(((ord, d), w)));
                }
            }
            Ok(None)
        })?;
        Ok(self.verdict(found, pts.len() as u64))
    }

    /// Outcomes the audit has observed, for sovereignty.
    fn attained(&self) -> Result<Vec<f64>> {
        match (&self.table, &self.bases) {
            (Some(t), _) => Ok(t.clone()),
            (None, Bases::Sampled(list)) => {
                let n = self.n();
                let unanimous = (0..self.grid.base()).map(|d| vec![d; n]);
                list.iter()
                    .cloned()
                    .chain(unanimous)
                    .map(|d| self.rule.outcome(&self.grid.peaks(&d)))
                    .collect()
            }
            (None, Bases::All(_)) => unreachable!("exhaustive bases always come with a table"),
        }
    }

    fn sovereignty(&self, attained: &[f64]) -> Status {
        let seen: HashSet<u64> = attained.iter().map(|x| x.to_bits()).collect();
        match self.grid.points().iter().find(|p| !seen.contains(&p.to_bits())) {
            Some(&p) => Status::fail(Witness::Unattained {
                voters: self.n(),
                unattained: p,
            }),
            None => self.pass(1),
        }
    }

    fn strict_responsiveness(&self) -> Result<Status> {
        let base = self.grid.base();
        let half = (base * (base - 1) / 2) as u128;
        let pairs = half.saturating_pow(self.n() as u32);
        let n = self.n();
        if self.table.is_some() && pairs <= EXHAUSTIVE_LIMIT {
            let found = self.scan(|ord, r| {
                if r.iter().any(|&d| d + 1 == base) {
                    return Ok(None);
                }
                let t = self.at(r)?;
                let mut s: Vec<usize> = r.iter().map(|&d| d + 1).collect();
                loop {
                    let v = self.at(&s)?;
                    if t >= v {
                        let w = Witness::NotStrictlyResponsive {
                            lower: self.grid.peaks(r),
                            upper: self.grid.peaks(&s),
                            lower_outcome: t,
                            upper_outcome: v,
                        };
                        return Ok(Some(((ord, self.grid.encode(&s)), w)));
                    }
                    // odometer over s_j in (r_j, base)
                    let mut j = n;
                    loop {
                        if j == 0 {
                            return Ok(None);
                        }
                        j -= 1;
                        if s[j] + 1 < base {
                            s[j] += 1;
                            break;
                        }
                        s[j] = r[j] + 1;
                    }
                }
            })?;
            return Ok(match found {
                Some((_, w)) => Status::fail(w),
                None => Status::PassExhaustive { checks: pairs as u64 },
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x5354_5249_4354);
        let samples: Vec<(Vec<usize>, Vec<usize>)> = (0..self.opts.samples)
            .map(|_| {
                let r: Vec<usize> = (0..n).map(|_| rng.random_range(0..base - 1)).collect();
                let s = r.iter().map(|&d| rng.random_range(d + 1..base)).collect();
                (r, s)
            })
            .collect();
        let found = samples
            .par_iter()
            .enumerate()
            .map(|(j, (r, s))| {
                let (t, v) = (self.at(r)?, self.at(s)?);
                Ok((t >= v).then(|| {
                    let w = Witness::NotStrictlyResponsive {
                        lower: self.grid.peaks(r),
                        upper: self.grid.peaks(s),
                        lower_outcome: t,
                        upper_outcome: v,
                    };
                    (j, w)
                }))
            })
            .try_reduce(|| None, |a, b| Ok(min_keyed(a, b)))?;
        Ok(match found {
            Some((_, w)) => Status::fail(w),
            None => Status::PassSampled {
                samples: samples.len() as u64,
            },
        })
    }

    fn ordinality(&self) -> Result<Status> {
        let (lo, hi) = {
            let p = self.grid.points();
            (p[0], p[p.len() - 1])
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x4f52_4449_4e41);
        let maps: Vec<Vec<(f64, f64)>> = (0..self.opts.ordinality_maps)
            .map(|_| random_bijection(&mut rng, lo, hi))
            .collect();
        let mut checks = 0u64;
        for knots in &maps {
            let found = self.scan(|ord, r| {
                let peaks = self.grid.peaks(r);
                let mapped: Vec<f64> = peaks.iter().map(|&x| pl_map(knots, x)).collect();
                let lhs = self.rule.outcome(&mapped)?;
                let rhs = pl_map(knots, self.at(r)?);
                Ok(((lhs - rhs).abs() > FLOAT_TOL).then(|| {
                    let w = Witness::NotOrdinal {
                        profile: peaks,
                        knots: knots.clone(),
                        outcome_of_mapped: lhs,
                        mapped_outcome: rhs,
                    };
                    (ord, w)
                }))
            })?;
            if let Some((_, w)) = found {
                return Ok(Status::fail(w));
            }
            checks += self.base_count();
        }
        if let Some(w) = self.interior_phantom()? {
            return Ok(Status::fail(w));
        }
        Ok(Status::PassSampled { samples: checks })
    }

    /// First extreme profile whose phantom lies strictly inside the domain.
    fn interior_phantom(&self) -> Result<Option<Witness>> {
        let Some(alpha) = self.rule.phantom() else {
            return Ok(None);
        };
        let n = self.n();
        if alpha.arity().is_some_and(|a| a != n) || n > MAX_EXPONENTIAL_VOTERS {
            return Ok(None);
        }
        let domain = alpha.domain();
        for mask in 0..1u64 << n {
            let x = ExtremeProfile::from_mask(n, mask);
            let v = alpha.eval(&x)?;
            if v != domain.mu_minus() && v != domain.mu_plus() {
                return Ok(Some(Witness::InteriorPhantom {
                    extreme_profile: x.to_string(),
                    value: v,
                }));
            }
        }
        Ok(None)
    }
}

/// Piecewise-linear increasing bijection of `[lo, hi]` with random knots.
fn random_bijection(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    loop {
        let mut xs: Vec<f64> = (0..ORDINAL_KNOTS).map(|_| rng.random_range(lo..hi)).collect();
        let mut ys: Vec<f64> = (0..ORDINAL_KNOTS).map(|_| rng.random_range(lo..hi)).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let mut knots = vec![(lo, lo)];
        knots.extend(xs.into_iter().zip(ys));
        knots.push((hi, hi));
        if knots.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1) {
            return knots;
        }
    }
}

fn build_ctx<'a>(rule: &'a dyn Rule, domain: &AlternativeDomain, n: usize, opts: &AuditOptions) -> Result<Ctx<'a>> {
    if n == 0 {
        return Err(Error::UnsupportedAxiom("fixed-electorate audits need at least one voter".into()));
    }
    let grid = Grid::new(domain.grid_points()?, n);
    let total = grid.count_u128();
    let (table, bases) = if total <= EXHAUSTIVE_LIMIT {
        let table = grid.table(rule)?;
        (Some(table), Bases::All(total as usize))
    } else if opts.sampled_fallback {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let base = grid.base();
        let list = (0..opts.samples)
            .map(|_| (0..n).map(|_| rng.random_range(0..base)).collect())
            .collect();
        (None, Bases::Sampled(list))
    } else {
        return Err(infeasible(total));
    };
    Ok(Ctx {
        rule,
        grid,
        table,
        bases,
        opts: *opts,
    })
}

/// Audits `rule` on every profile of `n` voters over the grid of `domain`;
/// falls back to sampling when allowed and enumeration is too large.
pub fn audit_fixed(
    rule: &dyn Rule,
    domain: &AlternativeDomain,
    n: usize,
    axioms: &[Axiom],
    opts: &AuditOptions,
) -> Result<AuditReport> {
    if let Some(a) = axioms.iter().find(|a| !a.is_fixed()) {
        return Err(Error::UnsupportedAxiom(format!("{a} needs a variable electorate")));
    }
    let ctx = build_ctx(rule, domain, n, opts)?;
    let mut attained = HashMap::new();
    let mut results = Vec::with_capacity(axioms.len());
    for &axiom in axioms {
        let mut note = None;
        let status = match axiom {
            Axiom::StrategyProofness => ctx.strategy_proofness()?,
            Axiom::WeakResponsiveness => ctx.weak_responsiveness()?,
            Axiom::Lipschitz => ctx.lipschitz()?,
            Axiom::Pareto => ctx.pareto()?,
            Axiom::Anonymity => ctx.anonymity()?,
            Axiom::Dummy(i) => ctx.dummy(i)?,
            Axiom::StrictResponsiveness => ctx.strict_responsiveness()?,
            Axiom::Sovereignty => {
                let seen = attained.entry(n).or_insert(ctx.attained()?);
                ctx.sovereignty(seen)
            }
            Axiom::Ordinality => {
                note = Some(format!(
                    "{} sampled increasing bijections; grid audits approximate ordinality",
                    opts.ordinality_maps
                ));
                ctx.ordinality()?
            }
            _ => unreachable!("variable-electorate axioms are rejected above"),
        };
        results.push(AxiomResult {
            axiom,
            status,
            approximate: axiom == Axiom::Ordinality,
            note,
        });
    }
    AuditReport::certified(
        rule,
        *domain,
        ctx.grid.base(),
        Electorate::Fixed { voters: n },
        results,
        &attained,
    )
}

/// Largest improvement in peak distance any voter obtains by a unilateral
/// deviation on the grid; zero for strategy-proof rules.
pub fn sp_distance(rule: &dyn Rule, domain: &AlternativeDomain, n: usize) -> Result<f64> {
    let ctx = build_ctx(rule, domain, n, &AuditOptions::default())?;
    let pts = ctx.grid.points();
    let best = (0..ctx.grid.count().expect("checked by build_ctx"))
        .into_par_iter()
        .map_init(
            || vec![0usize; n],
            |r, idx| {
                ctx.grid.decode(idx, r);
                let t = ctx.at(r)?;
                let mut s = r.clone();
                let mut best = 0.0f64;
                for i in 0..n {
                    for d in 0..pts.len() {
                        s[i] = d;
                        best = best.max(gain(pts[r[i]], t, ctx.at(&s)?));
                    }
                    s[i] = r[i];
                }
                Ok(best)
            },
        )
        .try_reduce(|| 0.0, |a: f64, b: f64| Ok(a.max(b)))?;
    Ok(best)
}
