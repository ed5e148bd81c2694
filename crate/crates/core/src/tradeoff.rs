//! Trade-off functions and their (ε, δ) conversions.
//!
//! A trade-off function maps a false-positive rate `x` of a test between the
//! outputs on two neighbouring datasets to the smallest achievable
//! false-negative rate. Two families are supported: the piecewise-linear
//! curve of an (ε, δ)-DP mechanism and the Gaussian curve
//! `G_μ(x) = Φ(Φ⁻¹(1 − x) − μ)` of a μ-GDP mechanism.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::numeric::{bisect, bisect_predicate, golden_max};
use crate::scalar::Real;
use crate::special::{normal_cdf, normal_ppf, normal_sf};

/// Upper end of the ε search bracket.
pub const EPS_SEARCH_MAX: f64 = 100.0;
/// Absolute tolerance of every ε search.
pub const EPS_TOL: f64 = 1e-9;

/// An evaluable trade-off function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TradeoffCurve<F> {
    /// `f(x) = max(0, 1 − δ − e^ε x, e^{−ε}(1 − δ − x))`
    EpsDelta { epsilon: F, delta: F },
    /// `G_μ`
    Gaussian { mu: F },
}

impl<F: Real> TradeoffCurve<F> {
    pub fn eps_delta(epsilon: F, delta: F) -> Result<Self> {
        if !(epsilon >= F::zero()) || epsilon.is_infinite() {
            return Err(Error::Domain {
                name: "epsilon",
                value: epsilon.f64(),
                expected: "[0, inf)",
            });
        }
        check_unit("delta", delta.f64())?;
        Ok(Self::EpsDelta { epsilon, delta })
    }

    pub fn gaussian(mu: F) -> Result<Self> {
        if !(mu >= F::zero()) || mu.is_infinite() {
            return Err(Error::Domain {
                name: "mu",
                value: mu.f64(),
                expected: "[0, inf)",
            });
        }
        Ok(Self::Gaussian { mu })
    }

    /// `f(x)`; `x` must lie in `[0, 1]`.
    pub fn eval(&self, x: F) -> Result<F> {
        check_unit("x", x.f64())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: F) -> F {
        self.eval_with_complement(x).0
    }

    /// `(f(x), 1 − f(x))`, with the complement evaluated without
    /// cancellation when `f(x)` is close to one.
    pub fn eval_with_complement(&self, x: F) -> (F, F) {
        let one = F::one();
        match *self {
            Self::EpsDelta { epsilon, delta } => {
                let e = epsilon.exp();
                let steep = one - delta - e * x;
                let flat = (one - delta - x) / e;
                if steep >= flat && steep > F::zero() {
                    (steep, delta + e * x)
                } else if flat > F::zero() {
                    (flat, one - flat)
                } else {
                    (F::zero(), one)
                }
            }
            Self::Gaussian { mu } => {
                let z = normal_ppf(x);
                (normal_sf(z + mu), normal_cdf(z + mu))
            }
        }
    }

    /// `f(0)`.
    pub fn at_zero(&self) -> F {
        F::one() - self.free_mass()
    }

    /// `1 − f(0)`, the mass the curve leaves for free.
    pub fn free_mass(&self) -> F {
        match *self {
            Self::EpsDelta { delta, .. } => delta,
            Self::Gaussian { .. } => F::zero(),
        }
    }
}

/// `f_{ε,δ}(x)`.
pub fn eval_eps_delta_curve<F: Real>(epsilon: F, delta: F, x: F) -> Result<F> {
    TradeoffCurve::eps_delta(epsilon, delta)?.eval(x)
}

/// `G_μ(x)`.
pub fn eval_gdp_curve<F: Real>(mu: F, x: F) -> Result<F> {
    TradeoffCurve::gaussian(mu)?.eval(x)
}

/// The δ(ε) curve of a μ-GDP mechanism:
/// `Φ(−ε/μ + μ/2) − e^ε Φ(−ε/μ − μ/2)`.
pub fn gdp_delta_of_eps<F: Real>(mu: F, epsilon: F) -> Result<F> {
    let (m, e) = (mu.f64(), epsilon.f64());
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Domain {
            name: "mu",
            value: m,
            expected: "(0, inf)",
        });
    }
    if !(e >= 0.0) {
        return Err(Error::Domain {
            name: "epsilon",
            value: e,
            expected: "[0, inf)",
        });
    }
    Ok(F::lit(gdp_delta_f64(m, e)))
}

pub(crate) fn gdp_delta_f64(mu: f64, eps: f64) -> f64 {
    if eps.is_infinite() {
        return 0.0;
    }
    let first: f64 = normal_cdf(-eps / mu + 0.5 * mu);
    let tail: f64 = normal_cdf(-eps / mu - 0.5 * mu);
    let second = if tail > 0.0 { (eps + tail.ln()).exp() } else { 0.0 };
    (first - second).clamp(0.0, 1.0)
}

/// Smallest ε ≥ 0 such that a mechanism with trade-off `curve` is (ε, δ)-DP.
///
/// Returns `+∞` when `δ < 1 − f(0)`. Gaussian curves are converted through
/// the exact δ(ε) relation; other curves go through the generic supporting
/// line search, see [`fdp_to_eps_delta_search`].
pub fn fdp_to_eps_delta<F: Real>(curve: &TradeoffCurve<F>, delta: F) -> Result<F> {
    check_unit("delta", delta.f64())?;
    match *curve {
        TradeoffCurve::Gaussian { mu } => {
            let (m, d) = (mu.f64(), delta.f64());
            if m == 0.0 || d >= 1.0 {
                return Ok(F::zero());
            }
            if gdp_delta_f64(m, 0.0) <= d {
                return Ok(F::zero());
            }
            if d <= 0.0 {
                return Ok(F::infinity());
            }
            if gdp_delta_f64(m, EPS_SEARCH_MAX) > d {
                return Err(Error::Convergence {
                    what: format!("epsilon for mu={m}, delta={d} exceeds the search bracket"),
                    lo: 0.0,
                    hi: EPS_SEARCH_MAX,
                });
            }
            let eps = bisect(|e| gdp_delta_f64(m, e) - d, 0.0, EPS_SEARCH_MAX, EPS_TOL, "gdp epsilon")?;
            Ok(F::lit(eps))
        }
        TradeoffCurve::EpsDelta { .. } => fdp_to_eps_delta_search(curve, delta),
    }
}

/// Generic conversion by binary search on ε: the candidate `a` is accepted
/// when the line `1 − δ − e^a x` stays below `f` on `[0, 1]`.
///
/// Since `f` is convex the gap `1 − δ − e^a x − f(x)` is concave, so its
/// maximum is located by golden-section search.
pub fn fdp_to_eps_delta_search<F: Real>(curve: &TradeoffCurve<F>, delta: F) -> Result<F> {
    check_unit("delta", delta.f64())?;
    let d = delta.f64();
    if d < curve.free_mass().f64() {
        return Ok(F::infinity());
    }
    if d >= 1.0 {
        return Ok(F::zero());
    }
    let supported = |a: f64| {
        let slope = a.exp();
        let gap = |x: f64| {
            let fx = curve.eval_unchecked(F::lit(x)).f64();
            (1.0 - d - slope * x) - fx
        };
        let (_, worst) = golden_max(gap, 0.0, 1.0, 1e-13);
        worst.max(gap(0.0)) <= 1e-14
    };
    if !supported(EPS_SEARCH_MAX) {
        return Err(Error::Convergence {
            what: format!("no epsilon below the bracket end supports delta={d}"),
            lo: 0.0,
            hi: EPS_SEARCH_MAX,
        });
    }
    Ok(F::lit(bisect_predicate(supported, 0.0, EPS_SEARCH_MAX, EPS_TOL)))
}

/// The μ with `gdp_delta_of_eps(μ, ε) = δ`.
pub fn gdp_mu_from_eps_delta<F: Real>(epsilon: F, delta: F) -> Result<F> {
    let (e, d) = (epsilon.f64(), delta.f64());
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::Domain {
            name: "epsilon",
            value: e,
            expected: "(0, inf)",
        });
    }
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::Domain {
            name: "delta",
            value: d,
            expected: "(0, 1)",
        });
    }
    let (lo, hi) = (1e-8, 200.0);
    let mu = bisect(|m| gdp_delta_f64(m, e) - d, lo, hi, 1e-14, "mu from (epsilon, delta)")?;
    Ok(F::lit(mu))
}

/// Noise multiplier, sampling ratio and iteration count of a DP-SGD run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpSgdConfig<F> {
    pub sigma: F,
    pub tau: F,
    pub n_iters: u64,
}

impl<F: Real> DpSgdConfig<F> {
    pub fn new(sigma: F, tau: F, n_iters: u64) -> Result<Self> {
        if !(sigma > F::zero()) || sigma.is_infinite() {
            return Err(Error::Domain {
                name: "sigma",
                value: sigma.f64(),
                expected: "(0, inf)",
            });
        }
        if !(tau > F::zero() && tau <= F::one()) {
            return Err(Error::Domain {
                name: "tau",
                value: tau.f64(),
                expected: "(0, 1]",
            });
        }
        if n_iters == 0 {
            return Err(Error::Parameter("n_iters must be at least 1".into()));
        }
        Ok(Self { sigma, tau, n_iters })
    }

    /// GDP parameter used as the base curve. Full-batch training is a plain
    /// composition of Gaussian mechanisms and is exactly `√N/σ`-GDP; with
    /// subsampling the central-limit approximation applies.
    pub fn gdp_mu(&self) -> Result<F> {
        if self.tau == F::one() {
            Ok(F::lit((self.n_iters as f64).sqrt() / self.sigma.f64()))
        } else {
            gdp_approx_mu(self)
        }
    }
}

/// Central-limit GDP parameter of DP-SGD:
/// `√2 τ √N · √(e^{σ⁻²} Φ(1.5/σ) + 3 Φ(−0.5/σ) − 2)`.
pub fn gdp_approx_mu<F: Real>(config: &DpSgdConfig<F>) -> Result<F> {
    let s = 1.0 / config.sigma.f64();
    let growth = s * s;
    if growth > 700.0 {
        return Err(Error::Range(format!(
            "exp(sigma^-2) overflows for sigma = {}",
            config.sigma
        )));
    }
    let inner = growth.exp() * normal_cdf(1.5 * s) + 3.0 * normal_cdf(-0.5 * s) - 2.0;
    let mu = 2f64.sqrt() * config.tau.f64() * (config.n_iters as f64).sqrt() * inner.max(0.0).sqrt();
    if !mu.is_finite() {
        return Err(Error::Range(format!("mu overflows for sigma = {}", config.sigma)));
    }
    Ok(F::lit(mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_delta_examples() {
        assert!((eval_eps_delta_curve(0.0, 0.0, 0.3).unwrap() - 0.7f64).abs() < 1e-15);
        assert!((eval_eps_delta_curve(1.0, 0.1, 0.0).unwrap() - 0.9f64).abs() < 1e-15);
        // branches at x = 0.2: 0, 0.9 − 0.2e (< 0), 0.7/e
        let oracle = [0.0, 0.9 - 1f64.exp() * 0.2, 0.7 / 1f64.exp()]
            .into_iter()
            .fold(f64::MIN, f64::max);
        let v = eval_eps_delta_curve(1.0, 0.1, 0.2).unwrap();
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 0.35634).abs() < 1e-5);
    }

    #[test]
    fn gdp_examples() {
        assert!((eval_gdp_curve(0.0, 0.42).unwrap() - 0.58f64).abs() < 1e-15);
        assert_eq!(eval_gdp_curve(1.0f64, 0.0).unwrap(), 1.0);
        assert_eq!(eval_gdp_curve(1.0f64, 1.0).unwrap(), 0.0);
        // Φ(−1)
        assert!((eval_gdp_curve(1.0, 0.5).unwrap() - 0.158_655_253_931_457f64).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(eval_eps_delta_curve(1.0, 0.1, 1.5f64).is_err());
        assert!(eval_eps_delta_curve(1.0, 1.1, 0.5f64).is_err());
        assert!(eval_gdp_curve(1.0, -0.1f64).is_err());
        assert!(gdp_delta_of_eps(0.0, 1.0f64).is_err());
        assert!(DpSgdConfig::new(0.0, 0.5, 10).is_err());
        assert!(DpSgdConfig::new(1.0, 1.5, 10).is_err());
        assert!(DpSgdConfig::new(1.0f64, 0.5, 0).is_err());
    }

    #[test]
    fn delta_of_eps_examples() {
        // ε = 0: 2Φ(μ/2) − 1
        for &mu in &[0.3f64, 1.0, 2.5] {
            let want = 2.0 * normal_cdf(mu / 2.0) - 1.0;
            assert!((gdp_delta_of_eps(mu, 0.0).unwrap() - want).abs() < 1e-15);
        }
        // μ = 0.5, ε = 1 through independently written normal CDF terms
        let want = normal_cdf(-1.75f64) - 1f64.exp() * normal_cdf(-2.25f64);
        let got = gdp_delta_of_eps(0.5f64, 1.0).unwrap();
        assert!((got - want).abs() < 1e-15);
        assert!((got - 0.006_829_594_983).abs() < 1e-11);
        // 1-GDP against the (4.36, 1e-5) pairing
        let d = gdp_delta_of_eps(1.0f64, 4.36).unwrap();
        assert!((d - 1e-5).abs() < 1e-6, "{d}");
    }

    #[test]
    fn eps_of_own_curve_is_epsilon() {
        for &(e, d) in &[(0.5f64, 1e-3), (1.0, 0.0), (2.3, 1e-5), (4.36, 1e-5)] {
            let c = TradeoffCurve::eps_delta(e, d).unwrap();
            let got = fdp_to_eps_delta(&c, d).unwrap();
            assert!((got - e).abs() < 1e-8, "{e} {d} -> {got}");
        }
    }

    #[test]
    fn infinite_when_delta_below_gap() {
        let c = TradeoffCurve::eps_delta(1.0f64, 1e-3).unwrap();
        assert!(fdp_to_eps_delta(&c, 1e-4).unwrap().is_infinite());
        let g = TradeoffCurve::gaussian(1.0f64).unwrap();
        assert!(fdp_to_eps_delta(&g, 0.0).unwrap().is_infinite());
    }

    #[test]
    fn degenerate_gaussian_is_free() {
        let g = TradeoffCurve::gaussian(0.0f64).unwrap();
        assert_eq!(fdp_to_eps_delta(&g, 0.0).unwrap(), 0.0);
        assert_eq!(fdp_to_eps_delta(&g, 1e-5).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_closed_form_matches_generic_search() {
        for &mu in &[0.5f64, 1.0, 2.0] {
            for &d in &[1e-3f64, 1e-5] {
                let g = TradeoffCurve::gaussian(mu).unwrap();
                let a = fdp_to_eps_delta(&g, d).unwrap();
                let b = fdp_to_eps_delta_search(&g, d).unwrap();
                assert!((a - b).abs() < 1e-6, "mu={mu} d={d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn g2_conversion_matches_independent_bisection() {
        // plain bisection on δ(ε) written inline
        let target = 1e-6;
        let (mut lo, mut hi) = (0.0f64, 50.0f64);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            let d = normal_cdf(-mid / 2.0 + 1.0) - mid.exp() * normal_cdf(-mid / 2.0 - 1.0);
            if d > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let got = fdp_to_eps_delta(&TradeoffCurve::gaussian(2.0f64).unwrap(), target).unwrap();
        assert!((got - 0.5 * (lo + hi)).abs() < 1e-9);
    }

    #[test]
    fn mu_inversion_round_trips() {
        for &(e, d) in &[(4.36f64, 1e-5f64), (1.0, 1e-5), (0.3, 0.2), (8.0, 1e-10)] {
            let mu = gdp_mu_from_eps_delta(e, d).unwrap();
            let back = gdp_delta_of_eps(mu, e).unwrap();
            assert!((back - d).abs() < 1e-9, "({e},{d}) -> {mu} -> {back}");
        }
        let mu = gdp_mu_from_eps_delta(4.36f64, 1e-5).unwrap();
        assert!((mu - 1.0).abs() < 0.01);
        // the mu for (1, 1e-5) from a 40-digit evaluation of the δ(ε) curve
        let mu = gdp_mu_from_eps_delta(1.0f64, 1e-5).unwrap();
        assert!((mu - 0.268_051_123_211_294).abs() < 1e-9, "{mu}");
    }

    #[test]
    fn gdp_approx_examples() {
        let c = DpSgdConfig::new(1.0f64, 1.0, 1).unwrap();
        let manual = 2f64.sqrt() * (1f64.exp() * normal_cdf(1.5f64) + 3.0 * normal_cdf(-0.5f64) - 2.0).sqrt();
        let mu = gdp_approx_mu(&c).unwrap();
        assert!((mu - manual).abs() < 1e-14);
        assert!((mu - 1.710_142_475_595).abs() < 1e-9);

        let a = gdp_approx_mu(&DpSgdConfig::new(3.0f64, 0.3, 250).unwrap()).unwrap();
        let b = gdp_approx_mu(&DpSgdConfig::new(3.0f64, 0.3, 1000).unwrap()).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);

        let tiny = gdp_approx_mu(&DpSgdConfig::new(3.0f64, 1e-9, 250).unwrap()).unwrap();
        assert!(tiny < 1e-8);

        assert!(matches!(
            gdp_approx_mu(&DpSgdConfig::new(0.01f64, 1.0, 1).unwrap()),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn full_batch_mu_is_exact() {
        let c = DpSgdConfig::new(10.0f64, 1.0, 400).unwrap();
        assert_eq!(c.gdp_mu().unwrap(), 2.0);
        let s = DpSgdConfig::new(10.0f64, 0.5, 400).unwrap();
        assert_eq!(s.gdp_mu().unwrap(), gdp_approx_mu(&s).unwrap());
    }

    #[test]
    fn f32_instantiation() {
        let v = eval_gdp_curve(1.0f32, 0.5).unwrap();
        assert!((v - 0.158_655_26).abs() < 1e-6);
        let e = fdp_to_eps_delta(&TradeoffCurve::gaussian(1.0f32).unwrap(), 1e-5).unwrap();
        assert!((e - 4.377_178).abs() < 1e-4);
    }
}
