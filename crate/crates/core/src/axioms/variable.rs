use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use super::witness::{diverges, replicated_with_newcomer, uncompromising};
use super::{
    infeasible, min_keyed, AuditOptions, AuditReport, Axiom, AxiomResult, Electorate, Grid, Rule, Status, Witness,
    CONTINUITY_MAX_COPIES, EXHAUSTIVE_LIMIT, HOMOGENEITY_MAX_COPIES,
};
use crate::domain::AlternativeDomain;
use crate::error::{Error, Result};

/// Largest electorate enumerated by the proportionality audit.
const MAX_PROPORTIONALITY_VOTERS: usize = 20;

struct Tables<'a> {
    rule: &'a dyn Rule,
    sizes: Vec<usize>,
    by_size: HashMap<usize, (Grid, Vec<f64>)>,
}

type Found<K> = Option<(K, Witness)>;

impl Tables<'_> {
    fn get(&self, n: usize) -> &(Grid, Vec<f64>) {
        &self.by_size[&n]
    }

    /// Smallest-key violation over every grid profile of size `n`.
    fn scan<K, F>(&self, n: usize, f: F) -> Result<Found<K>>
    where
        K: Ord + Send,
        F: Fn(usize, &[usize], f64) -> Result<Found<K>> + Sync,
    {
        let (grid, table) = self.get(n);
        (0..table.len())
            .into_par_iter()
            .map_init(
                || vec![0usize; n],
                |digits, idx| {
                    grid.decode(idx, digits);
                    f(idx, digits, table[idx])
                },
            )
            .try_reduce(|| None, |a, b| Ok(min_keyed(a, b)))
    }

    fn profiles(&self) -> u64 {
        self.sizes.iter().map(|n| self.get(*n).1.len() as u64).sum()
    }

    fn participation(&self) -> Result<Status> {
        let mut checks = 0;
        for &n in &self.sizes {
            let (grid, _) = self.get(n);
            let (smaller, below) = self.get(n - 1);
            let found = self.scan(n, |ord, r, with_voter| {
                let mut rest = Vec::with_capacity(n - 1);
                for i in 0..n {
                    rest.clear();
                    rest.extend(r.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &d)| d));
                    let without_voter = below[smaller.encode(&rest)];
                    if !uncompromising(grid.points()[r[i]], with_voter, without_voter) {
                        let w = Witness::NoShow {
                            profile: grid.peaks(r),
                            voter: i,
                            with_voter,
                            without_voter,
                        };
                        return Ok(Some(((ord, i), w)));
                    }
                }
                Ok(None)
            })?;
            if let Some((_, w)) = found {
                return Ok(Status::fail(w));
            }
            checks += self.get(n).1.len() as u64 * n as u64;
        }
        Ok(Status::PassExhaustive { checks })
    }

    fn consistency(&self) -> Result<Status> {
        let mut groups: HashMap<usize, HashMap<u64, Vec<usize>>> = HashMap::new();
        for &n in &self.sizes {
            let g = groups.entry(n).or_default();
            for (idx, x) in self.get(n).1.iter().enumerate() {
                g.entry(x.to_bits()).or_default().push(idx);
            }
        }
        let mut pairs: u128 = 0;
        for &a in &self.sizes {
            for &b in &self.sizes {
                for (bits, left) in &groups[&a] {
                    let right = groups[&b].get(bits).map_or(0, Vec::len);
                    pairs += (left.len() * right) as u128;
                }
            }
        }
        if pairs > EXHAUSTIVE_LIMIT {
            return Err(infeasible(pairs));
        }
        for &a in &self.sizes {
            for &b in &self.sizes {
                let (right_grid, _) = self.get(b);
                let found = self.scan(a, |ord, r, outcome| {
                    let Some(partners) = groups[&b].get(&outcome.to_bits()) else {
                        return Ok(None);
                    };
                    let left = self.get(a).0.peaks(r);
                    let mut digits = vec![0usize; b];
                    for &s in partners {
                        right_grid.decode(s, &mut digits);
                        let right = right_grid.peaks(&digits);
                        let merged: Vec<f64> = left.iter().chain(&right).copied().collect();
                        let merged_outcome = self.rule.outcome(&merged)?;
                        if merged_outcome != outcome {
                            let w = Witness::Inconsistent {
                                left: left.clone(),
                                right,
                                outcome,
                                merged_outcome,
                            };
                            return Ok(Some(((ord, s), w)));
                        }
                    }
                    Ok(None)
                })?;
                if let Some((_, w)) = found {
                    return Ok(Status::fail(w));
                }
            }
        }
        Ok(Status::PassExhaustive { checks: pairs as u64 })
    }

    fn homogeneity(&self) -> Result<Status> {
        for &n in &self.sizes {
            let grid = &self.get(n).0;
            let found = self.scan(n, |ord, r, outcome| {
                let peaks = grid.peaks(r);
                for copies in 2..=HOMOGENEITY_MAX_COPIES {
                    let rep: Vec<f64> = peaks.iter().copied().cycle().take(n * copies).collect();
                    let replicated_outcome = self.rule.outcome(&rep)?;
                    if replicated_outcome != outcome {
                        let w = Witness::NotHomogeneous {
                            profile: peaks,
                            copies,
                            outcome,
                            replicated_outcome,
                        };
                        return Ok(Some(((ord, copies), w)));
                    }
                }
                Ok(None)
            })?;
            if let Some((_, w)) = found {
                return Ok(Status::fail(w));
            }
        }
        Ok(Status::PassExhaustive {
            checks: self.profiles() * (HOMOGENEITY_MAX_COPIES as u64 - 1),
        })
    }

    fn sovereignty(&self) -> Status {
        for &n in &self.sizes {
            let (grid, table) = self.get(n);
            let seen: HashSet<u64> = table.iter().map(|x| x.to_bits()).collect();
            if let Some(&p) = grid.points().iter().find(|p| !seen.contains(&p.to_bits())) {
                return Status::fail(Witness::Unattained {
                    voters: n,
                    unattained: p,
                });
            }
        }
        Status::PassExhaustive {
            checks: self.profiles(),
        }
    }

    fn proportionality(&self, domain: &AlternativeDomain) -> Result<Status> {
        let largest = *self.sizes.last().expect("sizes are nonempty");
        if largest > MAX_PROPORTIONALITY_VOTERS {
            return Err(infeasible(1u128 << largest.min(127)));
        }
        let (lo, hi) = (domain.mu_minus(), domain.mu_plus());
        let mut checks = 0u64;
        for n in 1..=largest {
            let found = (0..1u64 << n)
                .into_par_iter()
                .map(|mask| {
                    let profile: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { hi } else { lo }).collect();
                    let expected = domain.lerp(mask.count_ones() as f64 / n as f64);
                    let outcome = self.rule.outcome(&profile)?;
                    Ok((outcome != expected).then(|| {
                        let w = Witness::NotProportional {
                            profile,
                            expected,
                            outcome,
                        };
                        (mask, w)
                    }))
                })
                .try_reduce(|| None, |a, b| Ok(min_keyed(a, b)))?;
            if let Some((_, w)) = found {
                return Ok(Status::fail(w));
            }
            checks += 1 << n;
        }
        Ok(Status::PassExhaustive { checks })
    }

    fn continuity(&self) -> Result<Status> {
        let half = CONTINUITY_MAX_COPIES / 2;
        let mut samples = 0u64;
        for &n in &self.sizes {
            let grid = &self.get(n).0;
            let found = self.scan(n, |ord, r, target| {
                let base = grid.peaks(r);
                for (j, &newcomer) in grid.points().iter().enumerate() {
                    let d_half = (replicated_with_newcomer(self.rule, &base, half, newcomer)? - target).abs();
                    let d_full =
                        (replicated_with_newcomer(self.rule, &base, CONTINUITY_MAX_COPIES, newcomer)? - target).abs();
                    if diverges(d_half, d_full) {
                        let w = Witness::DiscontinuousInNewMembers {
                            base,
                            newcomer,
                            target,
                            distance_32: d_half,
                            distance_64: d_full,
                        };
                        return Ok(Some(((ord, j), w)));
                    }
                }
                Ok(None)
            })?;
            if let Some((_, w)) = found {
                return Ok(Status::fail(w));
            }
            samples += self.get(n).1.len() as u64 * grid.base() as u64;
        }
        Ok(Status::PassSampled { samples })
    }
}

/// Audits `rule` over electorates of every size in `sizes`, enumerating all
/// grid profiles of each size.
pub fn audit_variable(
    rule: &dyn Rule,
    domain: &AlternativeDomain,
    sizes: &[usize],
    axioms: &[Axiom],
    _opts: &AuditOptions,
) -> Result<AuditReport> {
    if let Some(a) = axioms.iter().find(|a| !a.is_variable()) {
        return Err(Error::UnsupportedAxiom(format!("{a} is a fixed-electorate axiom")));
    }
    let sizes: Vec<usize> = sizes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if sizes.is_empty() || sizes[0] == 0 {
        return Err(Error::UnsupportedAxiom("electorate sizes must be positive".into()));
    }
    let points = domain.grid_points()?;
    let mut needed: BTreeSet<usize> = sizes.iter().copied().collect();
    if axioms.contains(&Axiom::Participation) {
        needed.extend(sizes.iter().map(|n| n - 1));
    }
    let total: u128 = needed
        .iter()
        .map(|&n| Grid::new(points.clone(), n).count_u128())
        .fold(0u128, u128::saturating_add);
    if total > EXHAUSTIVE_LIMIT {
        return Err(infeasible(total));
    }
    let mut by_size = HashMap::new();
    for n in needed {
        let grid = Grid::new(points.clone(), n);
        let table = grid.table(rule)?;
        by_size.insert(n, (grid, table));
    }
    let tables = Tables { rule, sizes, by_size };

    let mut results = Vec::with_capacity(axioms.len());
    for &axiom in axioms {
        let mut note = None;
        let status = match axiom {
            Axiom::Participation => tables.participation()?,
            Axiom::Consistency => tables.consistency()?,
            Axiom::Homogeneity => tables.homogeneity()?,
            Axiom::Sovereignty => tables.sovereignty(),
            Axiom::Proportionality => tables.proportionality(domain)?,
            Axiom::ContinuityNewMembers => {
                note = Some(format!(
                    "replication up to {CONTINUITY_MAX_COPIES} copies, convergence tolerance 1e-6"
                ));
                tables.continuity()?
            }
            _ => unreachable!("fixed-electorate axioms are rejected above"),
        };
        results.push(AxiomResult {
            axiom,
            status,
            approximate: axiom == Axiom::ContinuityNewMembers,
            note,
        });
    }
    let attained: HashMap<usize, Vec<f64>> = tables
        .sizes
        .iter()
        .map(|&n| (n, tables.get(n).1.clone()))
        .collect();
    AuditReport::certified(
        rule,
        *domain,
        points.len(),
        Electorate::Variable {
            sizes: tables.sizes.clone(),
        },
        results,
        &attained,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::SizeDependentRule;
    use crate::phantoms::{GradingCurve, VariableRule};

    fn grid6() -> AlternativeDomain {
        AlternativeDomain::unit().with_grid(5).unwrap()
    }

    #[test]
    fn linear_median_passes_everything_but_is_only_sampled_for_continuity() {
        let rule = VariableRule::new(GradingCurve::linear(AlternativeDomain::unit()), 0.5).unwrap();
        let report = audit_variable(&rule, &grid6(), &[1, 2, 3], &Axiom::VARIABLE, &AuditOptions::default()).unwrap();
        assert!(report.all_passed(), "{report:#?}");
        for r in &report.results {
            let exhaustive = matches!(r.status, Status::PassExhaustive { .. });
            assert_eq!(exhaustive, r.axiom != Axiom::ContinuityNewMembers, "{:?}", r.axiom);
        }
    }

    #[test]
    fn empty_value_outside_the_curve_range_fails_participation() {
        let curve = GradingCurve::step(AlternativeDomain::unit(), 0.5, 0.2, 0.8, None).unwrap();
        let rule = VariableRule::new(curve, 0.9).unwrap();
        let report = audit_variable(&rule, &grid6(), &[1, 2, 3], &[Axiom::Participation], &AuditOptions::default()).unwrap();
        match report.status(Axiom::Participation).unwrap().witness() {
            Some(Witness::NoShow {
                with_voter,
                without_voter,
                ..
            }) => {
                assert_eq!(*without_voter, 0.9);
                assert_eq!(*with_voter, 0.8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn squared_even_sizes_break_consistency() {
        let rule = SizeDependentRule::power(AlternativeDomain::unit(), 0.5, |n| if n % 2 == 0 { 2.0 } else { 1.0 });
        let report = audit_variable(&rule, &grid6(), &[1, 2, 3], &[Axiom::Consistency], &AuditOptions::default()).unwrap();
        assert!(matches!(
            report.status(Axiom::Consistency).unwrap().witness(),
            Some(Witness::Inconsistent { .. })
        ));
    }

    #[test]
    fn step_curve_is_discontinuous_in_new_members() {
        let curve = GradingCurve::step(AlternativeDomain::unit(), 0.5, 0.0, 1.0, None).unwrap();
        let rule = VariableRule::new(curve, 0.5).unwrap();
        let axes = [Axiom::ContinuityNewMembers, Axiom::Proportionality];
        let report = audit_variable(&rule, &grid6(), &[1, 2, 3], &axes, &AuditOptions::default()).unwrap();
        assert_eq!(report.failures().count(), 2, "{report:#?}");
    }

    #[test]
    fn fixed_axioms_are_rejected() {
        let rule = VariableRule::new(GradingCurve::linear(AlternativeDomain::unit()), 0.5).unwrap();
        let err = audit_variable(&rule, &grid6(), &[1], &[Axiom::StrategyProofness], &AuditOptions::default());
        assert!(matches!(err, Err(Error::UnsupportedAxiom(_))));
    }
}
