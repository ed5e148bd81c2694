//! Monte Carlo simulation of the distinguishing game.
//!
//! Each trial flips a fair truth bit, draws a run count `k`, and reports the
//! largest of `k` run scores. Under truth 0 every score is N(0, 1); under
//! truth 1 run `i` is shifted by `Bin(N, τ)/N · √N/σ`, drawn per run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::runcount::RunCountDist;
use crate::special::normal_ppf;
use crate::tradeoff::DpSgdConfig;

/// Trials per independent random stream.
pub const BLOCK: u64 = 1 << 16;

/// Max-scores split by truth bit, each sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSamples {
    pub negatives: Vec<f64>,
    pub positives: Vec<f64>,
}

// max of k iid N(0, 1): the upper order statistic −Φ⁻¹(1 − U^{1/k})
fn max_of_normals<R: Rng>(rng: &mut R, k: u64) -> f64 {
    let u: f64 = rng.random();
    let tail = -(u.ln() / k as f64).exp_m1();
    -normal_ppf(tail)
}

struct Sampler<'a> {
    dist: &'a RunCountDist<f64>,
    full_batch: bool,
    scale: f64,
    binomial: Option<Binomial>,
    n: f64,
}

impl Sampler<'_> {
    fn trial<R: Rng>(&self, rng: &mut R) -> (bool, f64) {
        let truth: bool = rng.random();
        let k = self.dist.sample(rng);
        if !truth {
            return (false, max_of_normals(rng, k));
        }
        if self.full_batch {
            return (true, self.scale + max_of_normals(rng, k));
        }
        let bin = self.binomial.as_ref().expect("binomial for tau < 1");
        let mut best = f64::NEG_INFINITY;
        for _ in 0..k {
            let shift = bin.sample(rng) as f64 / self.n * self.scale;
            let z: f64 = StandardNormal.sample(rng);
            best = best.max(shift + z);
        }
        (true, best)
    }
}

/// Plays `trials` rounds. Block `b` of [`BLOCK`] trials draws from stream `b`
/// of a ChaCha8 generator seeded with `seed`, so the output does not depend
/// on how blocks are scheduled.
pub fn simulate_game(config: &DpSgdConfig<f64>, dist: &RunCountDist<f64>, trials: u64, seed: u64) -> GameSamples {
    let n = config.n_iters as f64;
    let sampler = Sampler {
        dist,
        full_batch: config.tau == 1.0,
        scale: n.sqrt() / config.sigma,
        binomial: (config.tau < 1.0).then(|| Binomial::new(config.n_iters, config.tau).expect("tau validated")),
        n,
    };
    let blocks = trials.div_ceil(BLOCK);
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let len = BLOCK.min(trials - b * BLOCK);
            let mut neg = Vec::with_capacity(len as usize / 2 + 64);
            let mut pos = Vec::with_capacity(len as usize / 2 + 64);
            for _ in 0..len {
                let (truth, s) = sampler.trial(&mut rng);
                if truth {
                    pos.push(s);
                } else {
                    neg.push(s);
                }
            }
            (neg, pos)
        })
        .collect();
    let mut negatives = Vec::with_capacity(trials as usize / 2 + 1024);
    let mut positives = Vec::with_capacity(trials as usize / 2 + 1024);
    for (neg, pos) in parts {
        negatives.extend(neg);
        positives.extend(pos);
    }
    negatives.par_sort_unstable_by(f64::total_cmp);
    positives.par_sort_unstable_by(f64::total_cmp);
    GameSamples { negatives, positives }
}

impl GameSamples {
    pub fn trials(&self) -> u64 {
        (self.negatives.len() + self.positives.len()) as u64
    }

    /// `(false positives, false negatives)` when guessing truth 1 for
    /// scores at or above `threshold`.
    pub fn errors_at(&self, threshold: f64) -> (u64, u64) {
        let fp = self.negatives.len() - self.negatives.partition_point(|&s| s < threshold);
        let fnc = self.positives.partition_point(|&s| s < threshold);
        (fp as u64, fnc as u64)
    }

    /// Element of rank `r` (0-based) of the pooled sample.
    pub fn pooled_rank(&self, r: usize) -> f64 {
        kth_of_two(&self.negatives, &self.positives, r)
    }

    /// Largest vertical gap between the empirical ROC and the trade-off
    /// curve `f`, checked at `points` pooled quantiles.
    pub fn roc_sup_distance<C: Fn(f64) -> f64>(&self, f: C, points: usize) -> f64 {
        let total = self.negatives.len() + self.positives.len();
        let (n0, n1) = (self.negatives.len() as f64, self.positives.len() as f64);
        (1..points)
            .map(|i| {
                let t = self.pooled_rank(i * (total - 1) / points);
                let (fp, fnc) = self.errors_at(t);
                (fnc as f64 / n1 - f(fp as f64 / n0)).abs()
            })
            .fold(0.0, f64::max)
    }
}

// k-th smallest (0-based) of the union of two sorted slices
fn kth_of_two(a: &[f64], b: &[f64], k: usize) -> f64 {
    assert!(k < a.len() + b.len(), "rank out of range");
    // take i elements from a and c − i from b
    let c = k + 1;
    let (mut lo, mut hi) = (c.saturating_sub(b.len()), c.min(a.len()));
    while lo < hi {
        let i = (lo + hi) / 2;
        let j = c - i;
        if a[i] < b[j - 1] {
            lo = i + 1;
        } else {
            hi = i;
        }
    }
    let (i, j) = (lo, c - lo);
    let from_a = if i > 0 { a[i - 1] } else { f64::NEG_INFINITY };
    let from_b = if j > 0 { b[j - 1] } else { f64::NEG_INFINITY };
    from_a.max(from_b)
}
