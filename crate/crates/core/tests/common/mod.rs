//! Helpers shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use spvote::domain::AlternativeDomain;
use spvote::phantoms::{GradingCurve, PhantomFunction};
use spvote::welfare::{l1_optimal_curve, optimal_curve, PriorSpec};
use std::sync::{Arc, OnceLock};

pub fn unit() -> AlternativeDomain {
    AlternativeDomain::unit()
}

/// Random monotone table over `n` voters with values on the `steps` grid.
pub fn random_monotone_table<R: Rng>(rng: &mut R, n: usize, steps: usize) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..1usize << n).map(|_| rng.random_range(0..=steps)).collect();
    // upward closure: α(S) = max over subsets of S
    for i in 0..n {
        for mask in 0..idx.len() {
            if mask >> i & 1 == 1 {
                idx[mask] = idx[mask].max(idx[mask ^ (1 << i)]);
            }
        }
    }
    let d = unit();
    idx.into_iter().map(|j| d.grid_point(j, steps)).collect()
}

/// `max_S min(α(1_S), min_{i∈S} r_i)` with `table[mask]` the phantom of top set `mask`.
pub fn oracle_maxmin(table: &[f64], peaks: &[f64]) -> f64 {
    let n = peaks.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 0..1usize << n {
        let mut v = table[mask];
        for (i, &r) in peaks.iter().enumerate() {
            if mask >> i & 1 == 1 {
                v = v.min(r);
            }
        }
        best = best.max(v);
    }
    best
}

/// `min_S max(α(1_{N∖S}), max_{i∈S} r_i)`, the dual form.
pub fn oracle_minmax(table: &[f64], peaks: &[f64]) -> f64 {
    let n = peaks.len();
    let full = (1usize << n) - 1;
    let mut best = f64::INFINITY;
    for mask in 0..1usize << n {
        let mut v = table[full ^ mask];
        for (i, &r) in peaks.iter().enumerate() {
            if mask >> i & 1 == 1 {
                v = v.max(r);
            }
        }
        best = best.min(v);
    }
    best
}

/// Named grading curves on `[0, 1]`, with whether each is the identity.
pub fn curve_corpus() -> Vec<(&'static str, GradingCurve, bool)> {
    static CORPUS: OnceLock<Vec<(&'static str, GradingCurve, bool)>> = OnceLock::new();
    CORPUS.get_or_init(build_corpus).clone()
}

fn build_corpus() -> Vec<(&'static str, GradingCurve, bool)> {
    let d = unit();
    let tent = PriorSpec::custom(0.0, 1.0, "tent", Arc::new(|x: f64| 2.0 - 4.0 * (x - 0.5).abs())).unwrap();
    vec![
        ("linear", GradingCurve::linear(d), true),
        ("step_0.6", GradingCurve::step(d, 0.6, 0.0, 1.0, None).unwrap(), false),
        ("step_0.5_narrow", GradingCurve::step(d, 0.5, 0.2, 0.8, None).unwrap(), false),
        ("l1_optimal", l1_optimal_curve(d, 0.5).unwrap(), false),
        (
            "piecewise",
            GradingCurve::piecewise(d, vec![(0.0, 0.0), (0.3, 0.2), (0.7, 0.9)]).unwrap(),
            false,
        ),
        ("uniform_q1.5", GradingCurve::closed_form_uniform(d, 1.5).unwrap(), false),
        ("uniform_q3", GradingCurve::closed_form_uniform(d, 3.0).unwrap(), false),
        ("uniform_q5", GradingCurve::closed_form_uniform(d, 5.0).unwrap(), false),
        ("tent_q2", optimal_curve(&tent, 2.0).unwrap(), false),
    ]
}

pub fn curve_rule(g: &GradingCurve) -> PhantomFunction {
    PhantomFunction::curve(g.clone())
}

/// `Σ |r_i − x|^q`.
pub fn raw_loss(peaks: &[f64], x: f64, q: f64) -> f64 {
    peaks.iter().map(|r| (r - x).abs().powf(q)).sum()
}

/// Closed-form `G` for the uniform prior on `[0, 1]`.
pub fn g_uniform(q: f64, x: f64) -> f64 {
    let a = x.powf(q - 1.0);
    a / (a + (1.0 - x).powf(q - 1.0))
}

/// Closed-form inverse of [`g_uniform`].
pub fn g_inverse_uniform(q: f64, t: f64) -> f64 {
    let a = t.powf(1.0 / (q - 1.0));
    a / (a + (1.0 - t).powf(1.0 / (q - 1.0)))
}
