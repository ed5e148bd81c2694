//! Rényi-DP accounting used for the prior selection bound and for mapping a
//! target base budget ε_B to a noise multiplier.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::runcount::{RunCountDist, RunCountSpec};
use crate::scalar::Real;
use crate::tradeoff::DpSgdConfig;

/// Conversion from an (α, γ)-RDP guarantee to (ε, δ)-DP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RdpConversion {
    /// `ε = γ + log(1/δ)/(α − 1)`
    Classic,
    /// `ε = γ + log((α − 1)/α) − (log δ + log α)/(α − 1)`
    #[default]
    Improved,
}

impl RdpConversion {
    pub fn epsilon(self, gamma: f64, alpha: f64, delta: f64) -> f64 {
        match self {
            Self::Classic => gamma + (1.0 / delta).ln() / (alpha - 1.0),
            Self::Improved => gamma + ((alpha - 1.0) / alpha).ln() - (delta.ln() + alpha.ln()) / (alpha - 1.0),
        }
    }
}

/// Orders `{1.1, 1.2, …, 2.0} ∪ {3, 4, …, 256}`.
pub fn default_orders() -> Vec<f64> {
    (11..=20)
        .map(|i| i as f64 / 10.0)
        .chain((3..=256).map(|i| i as f64))
        .collect()
}

fn is_integer(alpha: f64) -> bool {
    alpha.fract() == 0.0
}

/// RDP of `N` compositions of the (possibly Poisson-subsampled) Gaussian
/// mechanism with noise multiplier σ at order α.
///
/// Full batch: `Nα/(2σ²)`. Subsampled (integer α only):
/// `N/(α−1) · log Σ_j C(α,j) (1−τ)^{α−j} τ^j e^{j(j−1)/(2σ²)}`.
pub fn rdp_gaussian_curve<F: Real>(config: &DpSgdConfig<F>, alpha: F) -> Result<F> {
    let a = alpha.f64();
    if !(a > 1.0) {
        return Err(Error::Domain {
            name: "alpha",
            value: a,
            expected: "(1, inf)",
        });
    }
    let sigma = config.sigma.f64();
    let tau = config.tau.f64();
    let n = config.n_iters as f64;
    if tau == 1.0 {
        return Ok(F::lit(n * a / (2.0 * sigma * sigma)));
    }
    if !is_integer(a) {
        return Err(Error::Domain {
            name: "alpha",
            value: a,
            expected: "integer orders when tau < 1",
        });
    }
    let order = a as u64;
    let lg_a = ln_gamma(a + 1.0);
    let terms: Vec<f64> = (0..=order)
        .map(|j| {
            let jf = j as f64;
            let ln_binom = lg_a - ln_gamma(jf + 1.0) - ln_gamma(a - jf + 1.0);
            let ln_rest = if j == order { 0.0 } else { (a - jf) * (-tau).ln_1p() };
            ln_binom + ln_rest + jf * tau.ln() + jf * (jf - 1.0) / (2.0 * sigma * sigma)
        })
        .collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
    Ok(F::lit(n * lse / (a - 1.0)))
}

/// Tight RDP of an ε-DP mechanism at order α (attained by randomized
/// response): `log[(sinh(αε) − sinh((α−1)ε)) / sinh ε] / (α − 1)`.
pub fn pure_dp_rdp(epsilon: f64, alpha: f64) -> f64 {
    if epsilon == 0.0 {
        return 0.0;
    }
    let am1 = alpha - 1.0;
    (am1 * epsilon + (-(2.0 * alpha - 1.0) * epsilon).exp().ln_1p() - (-epsilon).exp().ln_1p()) / am1
}

/// Smallest ε over the order grid; returns `(ε, α)`.
pub fn eps_from_rdp<G>(gamma: G, orders: &[f64], delta: f64, conversion: RdpConversion) -> (f64, f64)
where
    G: Fn(f64) -> Option<f64>,
{
    orders
        .iter()
        .filter_map(|&a| gamma(a).map(|g| (conversion.epsilon(g, a, delta), a)))
        .filter(|(e, _)| !e.is_nan())
        .fold((f64::INFINITY, f64::NAN), |best, c| if c.0 < best.0 { c } else { best })
}

/// The selection bound for TNB run counts from an (α, γ) and (α′, γ′) RDP
/// pair of the base algorithm:
/// `γ + (1+η)(1 − 1/α′)γ′ + (1+η) log(1/ν)/α′ + log(E_ξ)/(α − 1)`.
pub fn tnb_rdp_bound(gamma: f64, alpha: f64, gamma_p: f64, alpha_p: f64, eta: f64, nu: f64, mean: f64) -> f64 {
    gamma
        + (1.0 + eta) * (1.0 - 1.0 / alpha_p) * gamma_p
        + (1.0 + eta) * (1.0 / nu).ln() / alpha_p
        + mean.ln() / (alpha - 1.0)
}

/// Result of the RDP selection bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdpSelection {
    #[serde(with = "crate::serde_float")]
    pub epsilon: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
    #[serde(with = "crate::serde_float")]
    pub gamma_hat: f64,
}

/// Minimises the converted TNB bound over all `(α, α′)` pairs of `orders`
/// for a base whose RDP curve is `base_rdp`.
pub fn rdp_selection_bound<G, F>(
    base_rdp: G,
    dist: &RunCountDist<F>,
    delta_h: f64,
    orders: &[f64],
    conversion: RdpConversion,
) -> Result<RdpSelection>
where
    G: Fn(f64) -> Option<f64>,
    F: Real,
{
    let (eta, nu) = match dist.spec() {
        RunCountSpec::Tnb { eta, nu } => (eta.f64(), nu.f64()),
        RunCountSpec::PointMass { .. } => {
            return Err(Error::Parameter(
                "the RDP selection bound is defined for TNB run counts only".into(),
            ))
        }
    };
    if !(delta_h > 0.0 && delta_h < 1.0) {
        return Err(Error::Domain {
            name: "delta_h",
            value: delta_h,
            expected: "(0, 1)",
        });
    }
    let mean = dist.mean().f64();
    let curve: Vec<(f64, f64)> = orders
        .iter()
        .filter_map(|&a| base_rdp(a).filter(|g| g.is_finite()).map(|g| (a, g)))
        .collect();
    let mut best = RdpSelection {
        epsilon: f64::INFINITY,
        alpha: f64::NAN,
        alpha_prime: f64::NAN,
        gamma_hat: f64::INFINITY,
    };
    for &(a, g) in &curve {
        for &(ap, gp) in &curve {
            let hat = tnb_rdp_bound(g, a, gp, ap, eta, nu, mean);
            let eps = conversion.epsilon(hat, a, delta_h);
            if eps < best.epsilon {
                best = RdpSelection {
                    epsilon: eps,
                    alpha: a,
                    alpha_prime: ap,
                    gamma_hat: hat,
                };
            }
        }
    }
    Ok(best)
}

/// The subsampled-Gaussian RDP curve as an order → γ closure; non-integer
/// orders are skipped when τ < 1.
pub fn gaussian_rdp_fn<F: Real>(config: &DpSgdConfig<F>) -> impl Fn(f64) -> Option<f64> + '_ {
    move |a| rdp_gaussian_curve(config, F::lit(a)).ok().map(|g| g.f64())
}
