//! Privacy upper bounds for running a base algorithm a random number of
//! times and releasing the best run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::golden_max;
use crate::rdp::{default_orders, eps_from_rdp, gaussian_rdp_fn, rdp_selection_bound, RdpConversion};
use crate::runcount::{RunCountDist, RunCountSpec};
use crate::scalar::Real;
use crate::tradeoff::{fdp_to_eps_delta, DpSgdConfig, TradeoffCurve};

/// Uniform grid size of the scan over `a ∈ [0, 1]`.
pub const LOG_RATIO_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    FdpOurs,
    RdpPrior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct AccountantReport<F> {
    #[serde(with = "crate::serde_float")]
    pub eps_h: F,
    #[serde(with = "crate::serde_float")]
    pub delta_h: F,
    /// ε of the base algorithm at the per-run δ (f-DP), or at δ_H (RDP).
    #[serde(with = "crate::serde_float")]
    pub eps_base: F,
    #[serde(with = "crate::serde_float")]
    pub log_ratio: F,
    /// Maximiser of the log-ratio term; f-DP reports only.
    #[serde(with = "crate::serde_float::option", default)]
    pub argmax_a: Option<F>,
    /// Optimal `(α, α′)`; RDP reports only.
    #[serde(default)]
    pub orders: Option<(f64, f64)>,
    pub method: Method,
}

impl<F: Real> AccountantReport<F> {
    pub fn is_finite(&self) -> bool {
        self.eps_h.is_finite()
    }
}

// log ω(1−a) − log ω(f(a)), with a and 1 − a passed separately
fn log_ratio_at<F: Real>(curve: &TradeoffCurve<F>, dist: &RunCountDist<F>, a: f64, ac: f64) -> f64 {
    let (b, bc) = curve.eval_with_complement(F::lit(a));
    let num = dist.omega_at(ac, a);
    let den = dist.omega_at(b.f64(), bc.f64());
    if num == den {
        return 0.0;
    }
    (num / den).ln()
}

/// `max_{a∈[0,1]} log(ω(1−a)/ω(f(a)))` and its maximiser.
///
/// A uniform grid plus log-spaced points towards both ends is scanned, then
/// the best cell is refined by golden-section search.
pub fn log_ratio_max<F: Real>(curve: &TradeoffCurve<F>, dist: &RunCountDist<F>) -> (F, F) {
    if let RunCountSpec::PointMass { k: 1 } = dist.spec() {
        return (F::zero(), F::zero());
    }
    // (a, 1 − a) pairs, sorted by a
    let mut grid: Vec<(f64, f64)> = Vec::with_capacity(LOG_RATIO_GRID + 200);
    for j in (1..=64).rev() {
        let t = 10f64.powf(-16.0 * j as f64 / 64.0);
        grid.push((t, 1.0 - t));
    }
    for i in 0..=LOG_RATIO_GRID {
        let a = i as f64 / LOG_RATIO_GRID as f64;
        grid.push((a, 1.0 - a));
    }
    for j in 1..=64 {
        let t = 10f64.powf(-16.0 * j as f64 / 64.0);
        grid.push((1.0 - t, t));
    }
    grid.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.total_cmp(&x.1)));
    grid.dedup_by(|x, y| x.0 == y.0);

    let values: Vec<f64> = grid.iter().map(|&(a, ac)| log_ratio_at(curve, dist, a, ac)).collect();
    let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            best_i = i;
        }
    }
    if best == f64::INFINITY {
        return (F::infinity(), F::lit(grid[best_i].0));
    }
    let mut arg = grid[best_i].0;
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    if hi.0 > lo.0 {
        // refine in whichever parametrisation keeps the small side exact
        let near_one = lo.1 < 0.5;
        let (s_lo, s_hi) = if near_one { (hi.1, lo.1) } else { (lo.0, hi.0) };
        let h = |s: f64| {
            if near_one {
                log_ratio_at(curve, dist, 1.0 - s, s)
            } else {
                log_ratio_at(curve, dist, s, 1.0 - s)
            }
        };
        let (s, v) = golden_max(h, s_lo, s_hi, (s_hi - s_lo) * 1e-9);
        if v > best {
            best = v;
            arg = if near_one { 1.0 - s } else { s };
        }
    }
    (F::lit(best.max(0.0)), F::lit(arg))
}

/// f-DP accountant: `ε_H = ε(f, δ_H/ω(1)) + max_a log(ω(1−a)/ω(f(a)))`.
pub fn select_epsilon_fdp<F: Real>(
    curve: &TradeoffCurve<F>,
    dist: &RunCountDist<F>,
    delta_h: F,
) -> Result<AccountantReport<F>> {
    let dh = delta_h.f64();
    if !(dh > 0.0 && dh < 1.0) {
        return Err(Error::Domain {
            name: "delta_h",
            value: dh,
            expected: "(0, 1)",
        });
    }
    let per_run = dh / dist.omega_at(1.0, 0.0);
    if per_run > 1.0 {
        return Err(Error::Parameter(format!(
            "per-run delta delta_h/omega(1) = {per_run} exceeds 1"
        )));
    }
    let eps_base = fdp_to_eps_delta(curve, F::lit(per_run))?;
    let (log_ratio, argmax) = log_ratio_max(curve, dist);
    Ok(AccountantReport {
        eps_h: eps_base + log_ratio,
        delta_h,
        eps_base,
        log_ratio,
        argmax_a: Some(argmax),
        orders: None,
        method: Method::FdpOurs,
    })
}

/// Prior RDP-based bound for TNB run counts, using the improved RDP to DP
/// conversion over [`default_orders`].
pub fn select_epsilon_rdp<F: Real>(
    config: &DpSgdConfig<F>,
    dist: &RunCountDist<F>,
    delta_h: F,
) -> Result<AccountantReport<F>> {
    select_epsilon_rdp_with(config, dist, delta_h, RdpConversion::Improved, &default_orders())
}

pub fn select_epsilon_rdp_with<F: Real>(
    config: &DpSgdConfig<F>,
    dist: &RunCountDist<F>,
    delta_h: F,
    conversion: RdpConversion,
    orders: &[f64],
) -> Result<AccountantReport<F>> {
    let dh = delta_h.f64();
    let gamma = gaussian_rdp_fn(config);
    let sel = rdp_selection_bound(&gamma, dist, dh, orders, conversion)?;
    let (eps_base, _) = eps_from_rdp(&gamma, orders, dh, conversion);
    Ok(AccountantReport {
        eps_h: F::lit(sel.epsilon),
        delta_h,
        eps_base: F::lit(eps_base),
        log_ratio: F::lit(sel.epsilon - eps_base),
        argmax_a: None,
        orders: sel.epsilon.is_finite().then_some((sel.alpha, sel.alpha_prime)),
        method: Method::RdpPrior,
    })
}

/// One cell of the bound comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Real")]
pub struct BoundsRow<F> {
    /// ε of the base curve alone at δ_H.
    #[serde(with = "crate::serde_float")]
    pub eps_base: F,
    #[serde(with = "crate::serde_float")]
    pub eps_ours: F,
    /// Absent for run counts the prior bound does not cover.
    #[serde(with = "crate::serde_float::option", default)]
    pub eps_prior: Option<F>,
    #[serde(with = "crate::serde_float")]
    pub mean_runs: F,
}

/// Both upper bounds for a DP-SGD base whose trade-off curve is `G_μ` with
/// `μ = config.gdp_mu()`.
pub fn compare_bounds<F: Real>(config: &DpSgdConfig<F>, dist: &RunCountDist<F>, delta_h: F) -> Result<BoundsRow<F>> {
    let curve = TradeoffCurve::gaussian(config.gdp_mu()?)?;
    let eps_base = fdp_to_eps_delta(&curve, delta_h)?;
    let ours = select_epsilon_fdp(&curve, dist, delta_h)?;
    let eps_prior = match dist.spec() {
        RunCountSpec::Tnb { .. } => Some(select_epsilon_rdp(config, dist, delta_h)?.eps_h),
        RunCountSpec::PointMass { .. } => None,
    };
    Ok(BoundsRow {
        eps_base,
        eps_ours: ours.eps_h,
        eps_prior,
        mean_runs: dist.mean(),
    })
}
