use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{even_odd_margin, hardy_check, picone_check, picone_scale};
use crate::error::Result;
use crate::exec::{map_slice, shard_bounds, ExecMode};
use crate::operator::ExponentParams;

/// Relative slack allowed for round-off in every suite.
pub const SUITE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub trials: usize,
    pub seed: u64,
    pub mode: ExecMode,
    /// Fixed shard count; results do not depend on the execution mode.
    pub shards: usize,
}

impl SuiteOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        SuiteOptions {
            trials,
            seed,
            mode: ExecMode::default(),
            shards: 64,
        }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub trial: usize,
    /// Exponents: `(p, σ)` for Picone, `(r)` for Hardy.
    pub params: Vec<f64>,
    pub inputs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyTally {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Smallest normalized margin; negative beyond `−SUITE_TOLERANCE` is a violation.
    pub worst_margin: f64,
    pub witness: Option<Witness>,
}

impl PropertyTally {
    fn new(name: &str) -> Self {
        PropertyTally {
            name: name.into(),
            checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            witness: None,
        }
    }

    fn record(&mut self, margin: f64, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        if margin < -SUITE_TOLERANCE {
            self.violations += 1;
        }
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.witness = Some(witness());
        }
    }

    fn merge(&mut self, other: PropertyTally) {
        self.checked += other.checked;
        self.violations += other.violations;
        if other.worst_margin < self.worst_margin {
            self.worst_margin = other.worst_margin;
            self.witness = other.witness;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub properties: Vec<PropertyTally>,
    pub passed: bool,
}

fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

/// Log-uniform on `[1e−6, 1e3]`.
fn magnitude(rng: &mut impl Rng) -> f64 {
    let lo = 1e-6f64.ln();
    let hi = 1e3f64.ln();
    (lo + (hi - lo) * rng.random::<f64>()).exp()
}

/// Uniform on the half-open interval `(lo, hi]`.
fn open_closed(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    hi - (hi - lo) * rng.random::<f64>()
}

fn run_sharded<F>(options: &SuiteOptions, names: &[&str], shard_fn: F) -> Vec<PropertyTally>
where
    F: Fn(&mut ChaCha8Rng, usize, usize, &mut [PropertyTally]) + Sync,
{
    let shards: Vec<(usize, (usize, usize))> = shard_bounds(options.trials, options.shards.max(1))
        .into_iter()
        .enumerate()
        .collect();
    let results = map_slice(options.mode, &shards, |&(shard, (start, len))| {
        let mut rng = shard_rng(options.seed, shard);
        let mut tallies: Vec<PropertyTally> = names.iter().map(|n| PropertyTally::new(n)).collect();
        shard_fn(&mut rng, start, len, &mut tallies);
        tallies
    });
    let mut merged: Vec<PropertyTally> = names.iter().map(|n| PropertyTally::new(n)).collect();
    for shard in results {
        for (acc, t) in merged.iter_mut().zip(shard) {
            acc.merge(t);
        }
    }
    merged
}

fn finish(suite: &str, options: &SuiteOptions, properties: Vec<PropertyTally>) -> SuiteReport {
    let passed = properties.iter().all(|t| t.violations == 0);
    SuiteReport {
        suite: suite.into(),
        trials: options.trials,
        seed: options.seed,
        properties,
        passed,
    }
}

/// Random Picone tuples with `p ∈ (1, 4]`, `σ ∈ (p−1, 6]` and magnitudes
/// log-uniform in `[1e−6, 1e3]`; one trial in 32 forces `s = t` and one in
/// 32 forces a zero argument.
pub fn picone_suite(options: &SuiteOptions) -> Result<SuiteReport> {
    let tallies = run_sharded(options, &["picone"], |rng, start, len, tallies| {
        for trial in start..start + len {
            let p = open_closed(rng, 1.0, 4.0);
            let sigma = open_closed(rng, p - 1.0, 6.0);
            let params = ExponentParams::new(p, sigma).expect("sampled inside the valid range");
            let mut x = [
                magnitude(rng),
                magnitude(rng),
                magnitude(rng),
                magnitude(rng),
            ];
            match rng.random_range(0..32u32) {
                0 => x[3] = x[2],
                1 => x[rng.random_range(0..4usize)] = 0.0,
                _ => {}
            }
            let [a, b, s, t] = x;
            let (lhs, rhs) = picone_check(a, b, s, t, &params).expect("inputs are nonnegative");
            let scale = picone_scale(a, b, s, t, &params);
            let margin = if scale > 0.0 {
                (rhs - lhs) / scale
            } else {
                0.0
            };
            tallies[0].record(margin, || Witness {
                trial,
                params: vec![p, sigma],
                inputs: x.to_vec(),
            });
        }
    });
    Ok(finish("picone", options, tallies))
}

/// Random positive arrays of length `1..=200` with `r ∈ (0, 5]`. Checks the
/// inequality as drawn, after increasing sort, after a shuffle, and the
/// even/odd prefix bounds on the sorted array.
pub fn hardy_suite(options: &SuiteOptions) -> Result<SuiteReport> {
    let names = ["hardy", "hardy-sorted", "hardy-shuffled", "even-odd"];
    let tallies = run_sharded(options, &names, |rng, start, len, tallies| {
        for trial in start..start + len {
            let r = open_closed(rng, 0.0, 5.0);
            let n = rng.random_range(1..=200usize);
            let a: Vec<f64> = (0..n).map(|_| magnitude(rng)).collect();
            let mut sorted = a.clone();
            sorted.sort_by(f64::total_cmp);
            let mut shuffled = a.clone();
            shuffled.shuffle(rng);
            let witness = |v: &[f64]| Witness {
                trial,
                params: vec![r],
                inputs: v.to_vec(),
            };
            for (k, arr) in [&a, &sorted, &shuffled].into_iter().enumerate() {
                let (lhs, rhs) = hardy_check(arr, r).expect("entries are positive");
                tallies[k].record((lhs - rhs) / lhs, || witness(arr));
            }
            let scale = sorted.iter().sum::<f64>();
            tallies[3].record(even_odd_margin(&sorted) / scale, || witness(&sorted));
        }
    });
    Ok(finish("hardy", options, tallies))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_are_mode_independent() {
        let base = SuiteOptions::new(4000, 11);
        let seq = picone_suite(&base.with_mode(ExecMode::Sequential)).unwrap();
        let par = picone_suite(&base.with_mode(ExecMode::Parallel)).unwrap();
        assert!(seq.passed, "{seq:?}");
        assert_eq!(seq, par);

        let opts = SuiteOptions::new(500, 3);
        let h = hardy_suite(&opts).unwrap();
        assert!(h.passed, "{h:?}");
        assert_eq!(
            h,
            hardy_suite(&opts.with_mode(ExecMode::Sequential)).unwrap()
        );
        assert!(h.properties.iter().all(|t| t.checked == 500));
    }

    #[test]
    fn seeds_change_samples() {
        let a = picone_suite(&SuiteOptions::new(200, 1)).unwrap();
        let b = picone_suite(&SuiteOptions::new(200, 2)).unwrap();
        assert_ne!(a.properties[0].witness, b.properties[0].witness);
    }
}
