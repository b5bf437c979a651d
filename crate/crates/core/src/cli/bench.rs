//! Timing harness comparing the evaluators on seeded random profiles.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::Profile;
use crate::error::Result;
use crate::phantoms::PhantomFunction;
use crate::representations::Representation;

/// Largest electorate timed for the exponential evaluators.
pub const EXPONENTIAL_BENCH_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchRow {
    pub representation: Representation,
    pub n: usize,
    pub median_ns: u128,
}

/// Peaks drawn uniformly from the phantom's domain; repeat `r` of size `n`
/// uses its own stream.
pub fn bench_profile(alpha: &PhantomFunction, n: usize, seed: u64, repeat: usize) -> Result<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 20) | repeat as u64);
    let d = alpha.domain();
    let peaks: Vec<f64> = (0..n).map(|_| d.lerp(rng.random::<f64>())).collect();
    Profile::from_peaks(&peaks)
}

/// Median wall time of one evaluation over `repeat` profiles.
pub fn time_evaluator(rep: Representation, alpha: &PhantomFunction, n: usize, repeat: usize, seed: u64) -> Result<u128> {
    let mut times = Vec::with_capacity(repeat);
    for r in 0..repeat.max(1) {
        let profile = bench_profile(alpha, n, seed, r)?;
        let start = Instant::now();
        let out = rep.evaluate(alpha, &profile)?;
        times.push(start.elapsed().as_nanos());
        std::hint::black_box(out);
    }
    times.sort_unstable();
    Ok(times[times.len() / 2])
}

/// One row per evaluator and size, in input order; exponential evaluators
/// skip sizes above [`EXPONENTIAL_BENCH_CAP`].
pub fn run_bench(
    alpha: &PhantomFunction,
    representations: &[Representation],
    sizes: &[usize],
    repeat: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &rep in representations {
        for &n in sizes {
            if rep.is_exponential() && n > EXPONENTIAL_BENCH_CAP {
                continue;
            }
            rows.push(BenchRow {
                representation: rep,
                n,
                median_ns: time_evaluator(rep, alpha, n, repeat, seed)?,
            });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("representation,n,median_ns\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.representation, r.n, r.median_ns));
    }
    out
}
