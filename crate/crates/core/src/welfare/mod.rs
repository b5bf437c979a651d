//! Ex-post welfare, welfare-optimal strategy-proof rules and Monte Carlo
//! estimation of ex-ante loss.
//!
//! Social welfare of outcome `x` is `−Σ_i w_i |x − r_i|^q`. The functions
//! here cover three settings:
//!
//! * ex post, where the best outcome for a known profile is a (weighted)
//!   median for `q = 1` and the root of a convex first-order condition
//!   otherwise;
//! * ex ante under a prior `p`, where the best anonymous sovereign
//!   strategy-proof rule has grading curve `g = G^{-1}` (see [`big_g`]);
//! * minimax, where the optimum is the uniform-prior curve applied to the
//!   weighted share at the top.

mod prior;
pub mod quadrature;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use prior::{Density, PriorSpec, Sampler};

use crate::axioms::Rule;
use crate::domain::{AlternativeDomain, Profile, Weights};
use crate::error::{Error, Result};
use crate::exact::{exact_sum, pairwise_sum, ExactSum};
use crate::phantoms::{GradingCurve, PhantomFunction, NUMERIC_STEPS, NUMERIC_X_TOL};
use quadrature::adaptive_simpson;

/// Absolute tolerance of every quadrature behind [`big_g`].
pub const QUADRATURE_TOL: f64 = 1e-8;
/// Points in the monotonicity scan of `G` (plus one).
pub const SCAN_POINTS: usize = 1024;
const LQ_TOL: f64 = 1e-12;

fn check_q(q: f64) -> Result<()> {
    if q >= 1.0 && !q.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidNorm(q))
    }
}

fn weight_of(weights: Option<&Weights>, profile: &Profile, i: usize) -> Result<f64> {
    match weights {
        None => Ok(1.0),
        Some(w) if w.len() == profile.len() => Ok(w.values()[i]),
        Some(w) => Err(Error::ProfileLengthMismatch {
            expected: w.len(),
            found: profile.len(),
        }),
    }
}

/// `−Σ_i w_i |outcome − r_i|^q`; for `q = ∞`, `−max_i |outcome − r_i|` over
/// voters of positive weight. Abstainers contribute nothing.
pub fn ex_post_welfare(outcome: f64, profile: &Profile, q: f64, weights: Option<&Weights>) -> Result<f64> {
    check_q(q)?;
    let mut terms = Vec::with_capacity(profile.len());
    for (i, r) in profile.active() {
        let w = weight_of(weights, profile, i)?;
        terms.push((w, (outcome - r).abs()));
    }
    if q.is_infinite() {
        return Ok(-terms.iter().filter(|(w, _)| *w > 0.0).map(|&(_, d)| d).fold(0.0, f64::max));
    }
    Ok(-exact_sum(terms.iter().map(|&(w, d)| w * d.powf(q))))
}

fn active_pairs(profile: &Profile, weights: Option<&Weights>) -> Result<Vec<(f64, f64)>> {
    let pairs = profile
        .active()
        .map(|(i, r)| weight_of(weights, profile, i).map(|w| (r, w)))
        .collect::<Result<Vec<_>>>()?;
    if pairs.is_empty() {
        return Err(Error::ZeroActiveVoters);
    }
    if exact_sum(pairs.iter().map(|p| p.1)) <= 0.0 {
        return Err(Error::InvalidWeights("active voters carry zero total weight".into()));
    }
    Ok(pairs)
}

/// Lower and upper weighted medians: the smallest `L` with at least half the
/// weight at or below it and the largest `U` with at least half at or above.
pub fn weighted_medians(profile: &Profile, weights: Option<&Weights>) -> Result<(f64, f64)> {
    let mut pairs = active_pairs(profile, weights)?;
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = exact_sum(pairs.iter().map(|p| p.1));
    let first_reaching = |iter: &mut dyn Iterator<Item = &(f64, f64)>| -> f64 {
        let mut acc = ExactSum::new();
        let mut last = f64::NAN;
        for &(r, w) in iter {
            acc.add(w);
            last = r;
            if 2.0 * acc.value() >= total {
                return r;
            }
        }
        last
    };
    let lower = first_reaching(&mut pairs.iter());
    let upper = first_reaching(&mut pairs.iter().rev());
    Ok((lower, upper))
}

/// L1-optimal outcome `med(L, U, alpha_even)`: the median for odd `n`, the
/// tie value clamped into the median interval otherwise.
pub fn l1_optimal_outcome(profile: &Profile, alpha_even: f64, weights: Option<&Weights>) -> Result<f64> {
    let (lower, upper) = weighted_medians(profile, weights)?;
    Ok(alpha_even.clamp(lower, upper))
}

/// Unique minimizer of `Σ w_i |x − r_i|^q` for `q > 1`, by bisection on the
/// derivative over `[min r, max r]`. `q = ∞` gives the midrange.
pub fn lq_optimal_outcome(profile: &Profile, q: f64, weights: Option<&Weights>) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::InvalidNorm(q));
    }
    let pairs = active_pairs(profile, weights)?;
    let pairs: Vec<(f64, f64)> = pairs.into_iter().filter(|p| p.1 > 0.0).collect();
    let lo0 = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi0 = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if q.is_infinite() {
        return Ok(0.5 * (lo0 + hi0));
    }
    let slope = |x: f64| exact_sum(pairs.iter().map(|&(r, w)| w * (x - r).signum() * (x - r).abs().powf(q - 1.0)));
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > LQ_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `G_p^q(x)`: the share of voters at the top whose phantom value `x` is
/// ex-ante optimal under prior `p` and loss exponent `q`.
///
/// Each of the four integrals is taken on `[0, 1]` after substituting
/// `t = x ± s·(distance to the endpoint)`, so the ratio reads
/// `((M−x)/(x−m))^{q−1} · (I_up / P_up) / (I_down / P_down)`.
pub fn big_g(prior: &PriorSpec, q: f64, x: f64) -> Result<f64> {
    check_q(q)?;
    if !q.is_finite() {
        return Err(Error::InvalidNorm(q));
    }
    let (m, upper) = prior.support();
    if x <= m {
        return Ok(0.0);
    }
    if x >= upper {
        return Ok(1.0);
    }
    let width = upper - m;
    let (above, below) = (upper - x, x - m);
    let p = |t: f64| prior.density(t).map(|v| v * width);
    let moment_up = adaptive_simpson(|s: f64| Ok(s.powf(q - 1.0) * p(x + above * s)?), 0.0, 1.0, QUADRATURE_TOL)?;
    let mass_up = adaptive_simpson(|s| p(x + above * s), 0.0, 1.0, QUADRATURE_TOL)?;
    let moment_down = adaptive_simpson(|s: f64| Ok(s.powf(q - 1.0) * p(x - below * s)?), 0.0, 1.0, QUADRATURE_TOL)?;
    let mass_down = adaptive_simpson(|s| p(x - below * s), 0.0, 1.0, QUADRATURE_TOL)?;
    if !(mass_up > 0.0 && mass_down > 0.0 && moment_down > 0.0) {
        return Err(Error::DensityEvaluation {
            x,
            reason: "no probability mass on one side of x".into(),
        });
    }
    let ratio = (above / below).powf(q - 1.0) * (moment_up / mass_up) / (moment_down / mass_down);
    Ok(1.0 / (1.0 + ratio))
}

/// Closed form of `G` for the uniform prior on `[m, M]`.
#[allow(non_snake_case)]
pub fn big_g_uniform(m: f64, M: f64, q: f64, x: f64) -> f64 {
    if x <= m {
        0.0
    } else if x >= M {
        1.0
    } else {
        1.0 / (1.0 + ((M - x) / (x - m)).powf(q - 1.0))
    }
}

/// Closed-form optimal curve for the uniform prior on `[m, M]`.
#[allow(non_snake_case)]
pub fn uniform_optimal_curve(m: f64, M: f64, q: f64) -> Result<GradingCurve> {
    GradingCurve::closed_form_uniform(AlternativeDomain::new(m, M)?, q)
}

/// Ex-ante optimal grading curve `g = G^{-1}`, tabulated at `y = k/1024` and
/// refined by bisection on `G` between knots.
pub fn optimal_curve(prior: &PriorSpec, q: f64) -> Result<GradingCurve> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidNorm(q));
    }
    let (m, upper) = prior.support();
    let domain = AlternativeDomain::new(m, upper)?;
    let xs: Vec<f64> = (0..=SCAN_POINTS).map(|j| domain.grid_point(j, SCAN_POINTS)).collect();
    let gs = xs.par_iter().map(|&x| big_g(prior, q, x)).collect::<Result<Vec<f64>>>()?;
    if let Some(j) = (0..SCAN_POINTS).find(|&j| gs[j + 1] <= gs[j]) {
        return Err(Error::NotStrictlyIncreasing {
            x_lo: xs[j],
            x_hi: xs[j + 1],
            g_lo: gs[j],
            g_hi: gs[j + 1],
        });
    }
    let knots = (0..=NUMERIC_STEPS)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                return Ok(m);
            }
            if k == NUMERIC_STEPS {
                return Ok(upper);
            }
            let y = k as f64 / NUMERIC_STEPS as f64;
            let j = gs.partition_point(|&g| g < y);
            if gs[j] == y {
                return Ok(xs[j]);
            }
            let (mut lo, mut hi) = (xs[j - 1], xs[j]);
            while hi - lo > NUMERIC_X_TOL {
                let mid = 0.5 * (lo + hi);
                if big_g(prior, q, mid)? < y {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect::<Result<Vec<f64>>>()?;
    GradingCurve::numeric(domain, prior.clone(), q, knots)
}

/// The q = 1 optimum: a step at share 1/2 with value `alpha` on the step.
pub fn l1_optimal_curve(domain: AlternativeDomain, alpha: f64) -> Result<GradingCurve> {
    GradingCurve::step(domain, 0.5, domain.mu_minus(), domain.mu_plus(), Some(alpha))
}

/// Minimax-optimal phantoms: the uniform-prior curve applied to the weighted
/// share at the top.
#[allow(non_snake_case)]
pub fn minimax_optimal_phantoms(weights: &Weights, q: f64, m: f64, M: f64) -> Result<PhantomFunction> {
    PhantomFunction::weighted_curve(uniform_optimal_curve(m, M, q)?, weights.clone())
}

/// Monte Carlo estimate of ex-ante loss `E Σ w_i |r_i − φ(r)|^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelfareEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    pub norm_q: f64,
}

/// Draws the profile for sample `index` of the stream keyed by `seed`.
pub fn sample_profile(sampler: &Sampler, n: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..n).map(|_| sampler.sample(&mut rng)).collect()
}

/// Mean loss over `samples` i.i.d. profiles of `n` voters drawn from the
/// prior; sample `i` is generated by stream `i` of a ChaCha generator seeded
/// with `seed`, so results do not depend on parallel scheduling.
pub fn monte_carlo_ex_ante(
    rule: &dyn Rule,
    prior: &PriorSpec,
    q: f64,
    n: usize,
    samples: usize,
    seed: u64,
    weights: Option<&Weights>,
) -> Result<WelfareEstimate> {
    check_q(q)?;
    if samples < 2 {
        return Err(Error::InvalidSampleCount(samples));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::ProfileLengthMismatch {
                expected: w.len(),
                found: n,
            });
        }
    }
    let sampler = prior.sampler()?;
    let losses = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let r = sample_profile(&sampler, n, seed, i);
            let x = rule.outcome(&r)?;
            let profile = Profile::from_peaks(&r)?;
            Ok(-ex_post_welfare(x, &profile, q, weights)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(&losses, seed, q))
}

fn summarize(losses: &[f64], seed: u64, q: f64) -> WelfareEstimate {
    let count = losses.len() as f64;
    let mean = pairwise_sum(losses) / count;
    let dev: Vec<f64> = losses.iter().map(|l| (l - mean) * (l - mean)).collect();
    let var = pairwise_sum(&dev) / (count - 1.0);
    WelfareEstimate {
        mean,
        std_error: (var / count).sqrt(),
        samples: losses.len(),
        seed,
        norm_q: q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{FnRule, PhantomRule};
    use crate::domain::Mark;
    use crate::domain::ExtremeProfile;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn p(r: &[f64]) -> Profile {
        Profile::from_peaks(r).unwrap()
    }

    #[test]
    fn ex_post_examples() {
        let prof = p(&[0.2, 0.8]);
        assert!((ex_post_welfare(0.5, &prof, 1.0, None).unwrap() + 0.6).abs() < 1e-15);
        assert!((ex_post_welfare(0.5, &prof, 2.0, None).unwrap() + 0.18).abs() < 1e-15);
        let w = Weights::new(vec![2.0, 1.0]).unwrap();
        assert!((ex_post_welfare(0.5, &prof, 1.0, Some(&w)).unwrap() + 0.9).abs() < 1e-15);
        assert!((ex_post_welfare(0.5, &prof, f64::INFINITY, None).unwrap() + 0.3).abs() < 1e-15);
        assert!(matches!(ex_post_welfare(0.5, &prof, 0.5, None), Err(Error::InvalidNorm(_))));
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_optimal_outcome(&p(&[0.1, 0.5, 0.9]), 0.5, None).unwrap(), 0.5);
        assert_eq!(l1_optimal_outcome(&p(&[0.2, 0.8]), 0.5, None).unwrap(), 0.5);
        assert_eq!(l1_optimal_outcome(&p(&[0.2, 0.8]), 0.0, None).unwrap(), 0.2);
        let w = Weights::new(vec![3.0, 1.0, 1.0]).unwrap();
        assert_eq!(l1_optimal_outcome(&p(&[0.1, 0.5, 0.9]), 0.5, Some(&w)).unwrap(), 0.1);
    }

    #[test]
    fn lq_examples() {
        assert!((lq_optimal_outcome(&p(&[0.2, 0.8]), 2.0, None).unwrap() - 0.5).abs() < 1e-12);
        let w = Weights::new(vec![3.0, 1.0]).unwrap();
        assert!((lq_optimal_outcome(&p(&[0.0, 1.0]), 2.0, Some(&w)).unwrap() - 0.25).abs() < 1e-12);
        let x = lq_optimal_outcome(&p(&[0.0, 0.0, 1.0]), 4.0, None).unwrap();
        let root = 1.0 / (1.0 + 2f64.powf(1.0 / 3.0));
        assert!((x - root).abs() < 1e-11);
        // dense scan oracle
        let loss = |y: f64| 2.0 * y.powi(4) + (1.0 - y).powi(4);
        let best = (0..=100_000).map(|k| k as f64 * 1e-5).min_by(|a, b| loss(*a).total_cmp(&loss(*b))).unwrap();
        assert!((best - x).abs() <= 1e-5);
        assert!(matches!(lq_optimal_outcome(&p(&[0.5]), 1.0, None), Err(Error::InvalidNorm(_))));
    }

    #[test]
    fn big_g_uniform_examples() {
        let u = PriorSpec::uniform(0.0, 1.0).unwrap();
        assert!((big_g(&u, 2.0, 0.3).unwrap() - 0.3).abs() < 1e-9);
        assert!((big_g(&u, 3.0, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert!((big_g(&u, 3.0, 0.8).unwrap() - 16.0 / 17.0).abs() < 1e-6);
        assert_eq!(big_g(&u, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(big_g(&u, 3.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn big_g_custom_flat_matches_closed_form() {
        let flat = PriorSpec::custom(0.0, 2.0, "flat", Arc::new(|_| 0.5)).unwrap();
        for &x in &[0.1, 0.7, 1.3, 1.9] {
            assert!((big_g(&flat, 2.5, x).unwrap() - big_g_uniform(0.0, 2.0, 2.5, x)).abs() < 1e-7);
        }
    }

    #[test]
    fn optimal_curve_uniform() {
        let u = PriorSpec::uniform(0.0, 1.0).unwrap();
        let g = optimal_curve(&u, 3.0).unwrap();
        assert!((g.eval(0.8).unwrap() - 2.0 / 3.0).abs() < 1e-6);
        let u24 = PriorSpec::uniform(2.0, 4.0).unwrap();
        let g2 = optimal_curve(&u24, 2.0).unwrap();
        assert!((g2.eval(0.25).unwrap() - 2.5).abs() < 1e-6);
        assert_eq!(g2.eval(0.0).unwrap(), 2.0);
        assert_eq!(g2.eval(1.0).unwrap(), 4.0);
    }

    #[test]
    fn round_trip_inversion() {
        let ramp = PriorSpec::custom_normalized(0.0, 1.0, "ramp", Arc::new(|x| 0.5 + x)).unwrap();
        let g = optimal_curve(&ramp, 2.0).unwrap();
        for k in 0..=20 {
            let x = 1e-3 + (1.0 - 1e-3) * k as f64 / 20.0;
            let y = big_g(&ramp, 2.0, x).unwrap();
            assert!((g.eval(y).unwrap() - x).abs() < 1e-6);
        }
    }

    #[test]
    fn uniform_closed_form_examples() {
        let g = uniform_optimal_curve(0.0, 1.0, 3.0).unwrap();
        assert_eq!(g.eval(0.5).unwrap(), 0.5);
        assert!((g.eval(0.8).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let g = uniform_optimal_curve(2.0, 6.0, 4.0).unwrap();
        assert_eq!(g.eval(0.5).unwrap(), 4.0);
    }

    #[test]
    fn minimax_examples() {
        let w = Weights::new(vec![2.0, 1.0]).unwrap();
        let a = minimax_optimal_phantoms(&w, 2.0, 0.0, 1.0).unwrap();
        let x = ExtremeProfile::new(vec![Mark::Top, Mark::Bottom]);
        assert!((a.eval(&x).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let bottom = ExtremeProfile::new(vec![Mark::Bottom, Mark::Bottom]);
        assert_eq!(a.eval(&bottom).unwrap(), 0.0);
    }

    #[test]
    fn constant_rule_loss_is_one_twelfth() {
        let rule = FnRule::new("constant", |_: &[f64]| Ok(0.5));
        let u = PriorSpec::uniform(0.0, 1.0).unwrap();
        let est = monte_carlo_ex_ante(&rule, &u, 2.0, 1, 20_000, 9, None).unwrap();
        assert!((est.mean - 1.0 / 12.0).abs() < 3.0 * est.std_error, "{est:?}");
        let again = monte_carlo_ex_ante(&rule, &u, 2.0, 1, 20_000, 9, None).unwrap();
        assert_eq!(est, again);
        assert!(matches!(
            monte_carlo_ex_ante(&rule, &u, 2.0, 1, 1, 9, None),
            Err(Error::InvalidSampleCount(1))
        ));
    }

    #[test]
    fn mean_beats_linear_median() {
        let u = PriorSpec::uniform(0.0, 1.0).unwrap();
        let mean = FnRule::new("mean", |r: &[f64]| Ok(r.iter().sum::<f64>() / r.len() as f64));
        let lin = PhantomRule::new(PhantomFunction::curve(GradingCurve::linear(AlternativeDomain::unit())));
        let a = monte_carlo_ex_ante(&mean, &u, 2.0, 5, 5_000, 1, None).unwrap();
        let b = monte_carlo_ex_ante(&lin, &u, 2.0, 5, 5_000, 1, None).unwrap();
        assert!(a.mean < b.mean);
    }

    proptest! {
        #[test]
        fn lq_optimum_is_a_lower_bound(r in prop::collection::vec(0.0f64..=1.0, 1..8), q in 1.5f64..4.0) {
            let prof = Profile::from_peaks(&r).unwrap();
            let best = lq_optimal_outcome(&prof, q, None).unwrap();
            let rule = PhantomRule::new(PhantomFunction::curve(GradingCurve::linear(AlternativeDomain::unit())));
            let sp = rule.outcome(&r).unwrap();
            let w_best = ex_post_welfare(best, &prof, q, None).unwrap();
            let w_sp = ex_post_welfare(sp, &prof, q, None).unwrap();
            prop_assert!(w_best >= w_sp - 1e-12);
        }
    }
}
