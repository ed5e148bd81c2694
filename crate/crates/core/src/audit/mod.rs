//! Empirical lower bound on the privacy of the selection protocol from a
//! simulated distinguishing game.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::runcount::RunCountDist;
use crate::tradeoff::DpSgdConfig;

pub mod game;
pub mod stats;

pub use game::{simulate_game, GameSamples};
pub use stats::{clopper_pearson_upper, eps_lower_bound};

pub const DEFAULT_TRIALS: u64 = 10_000_000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;
pub const DEFAULT_DELTA: f64 = 1e-5;
pub const DEFAULT_THRESHOLDS: usize = 512;
pub const DEFAULT_TAIL_COUNT: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub config: DpSgdConfig<f64>,
    pub dist: RunCountDist<f64>,
    pub trials: u64,
    pub seed: u64,
    /// One-sided level of the Clopper–Pearson limits on FP and FN.
    pub confidence: f64,
    pub delta: f64,
    pub thresholds: usize,
    /// Expected pooled count beyond the most extreme threshold.
    pub tail_count: f64,
}

impl GameConfig {
    pub fn new(config: DpSgdConfig<f64>, dist: RunCountDist<f64>, trials: u64, seed: u64) -> Result<Self> {
        let cfg = Self {
            config,
            dist,
            trials,
            seed,
            confidence: DEFAULT_CONFIDENCE,
            delta: DEFAULT_DELTA,
            thresholds: DEFAULT_THRESHOLDS,
            tail_count: DEFAULT_TAIL_COUNT,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Domain {
                name: "confidence",
                value: self.confidence,
                expected: "(0, 1)",
            });
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::Domain {
                name: "delta",
                value: self.delta,
                expected: "[0, 1)",
            });
        }
        if self.thresholds < 2 {
            return Err(Error::Parameter("at least two thresholds are needed".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub true_positive: u64,
    pub false_positive: u64,
    pub true_negative: u64,
    pub false_negative: u64,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub threshold: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fnr: f64,
    pub fp_upper: f64,
    pub fn_upper: f64,
    #[serde(with = "crate::serde_float")]
    pub eps_lower: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub trials: u64,
    pub seed: u64,
    pub confidence: f64,
    pub delta: f64,
    pub best_threshold: f64,
    pub counts: Counts,
    pub fp_upper: f64,
    pub fn_upper: f64,
    #[serde(with = "crate::serde_float")]
    pub eps_lower: f64,
    pub sweep: Vec<ThresholdRow>,
}

/// Quantile levels of the threshold sweep: a quarter of the budget on a
/// geometric grid in each tail (down to 1e-7) and half spread uniformly.
pub fn threshold_levels(count: usize, floor: f64) -> Vec<f64> {
    let tail = count / 4;
    let mid = count - 2 * tail;
    let (t_lo, t_hi) = (floor, 0.05f64);
    let geo = |i: usize| {
        if tail < 2 {
            t_hi
        } else {
            t_lo * (t_hi / t_lo).powf(i as f64 / (tail - 1) as f64)
        }
    };
    let mut levels: Vec<f64> = (0..tail).map(geo).collect();
    levels.extend((1..=mid).map(|i| t_hi + (1.0 - 2.0 * t_hi) * i as f64 / (mid + 1) as f64));
    levels.extend((0..tail).rev().map(|i| 1.0 - geo(i)));
    levels
}

/// Plays the game and reports the threshold with the largest ε lower bound.
pub fn run_audit(cfg: &GameConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let samples = simulate_game(&cfg.config, &cfg.dist, cfg.trials, cfg.seed);
    audit_samples(cfg, &samples)
}

/// The threshold sweep on already simulated scores.
pub fn audit_samples(cfg: &GameConfig, samples: &GameSamples) -> Result<AuditReport> {
    let total = samples.negatives.len() + samples.positives.len();
    let (n0, n1) = (samples.negatives.len() as u64, samples.positives.len() as u64);
    let floor = (cfg.tail_count / total as f64).min(0.01);
    let mut ranks: Vec<usize> = threshold_levels(cfg.thresholds, floor)
        .into_iter()
        .map(|l| ((l * (total - 1) as f64).round() as usize).min(total - 1))
        .collect();
    ranks.dedup();
    let mut thresholds: Vec<f64> = ranks.into_iter().map(|r| samples.pooled_rank(r)).collect();
    thresholds.dedup();

    let rate = |c: u64, n: u64| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let mut sweep = Vec::with_capacity(thresholds.len());
    let mut best: Option<(usize, u64, u64, f64)> = None;
    for t in thresholds {
        let (fp, fnc) = samples.errors_at(t);
        let fp_upper = clopper_pearson_upper(fp, n0, cfg.confidence)?;
        let fn_upper = clopper_pearson_upper(fnc, n1, cfg.confidence)?;
        let eps = eps_lower_bound(fp_upper, fn_upper, cfg.delta);
        if best.is_none_or(|b| eps > b.3) {
            best = Some((sweep.len(), fp, fnc, eps));
        }
        sweep.push(ThresholdRow {
            threshold: t,
            fp: rate(fp, n0),
            fnr: rate(fnc, n1),
            fp_upper,
            fn_upper,
            eps_lower: eps,
        });
    }
    let (i, fp, fnc, _) = best.expect("at least one threshold");
    let row = sweep[i];
    Ok(AuditReport {
        trials: samples.trials(),
        seed: cfg.seed,
        confidence: cfg.confidence,
        delta: cfg.delta,
        best_threshold: row.threshold,
        counts: Counts {
            true_positive: n1 - fnc,
            false_positive: fp,
            true_negative: n0 - fp,
            false_negative: fnc,
        },
        fp_upper: row.fp_upper,
        fn_upper: row.fn_upper,
        eps_lower: row.eps_lower,
        sweep,
    })
}
