//! Noise multipliers for a target base budget ε_B.

use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::rdp::{default_orders, eps_from_rdp, gaussian_rdp_fn, RdpConversion};
use crate::scalar::Real;
use crate::tradeoff::{gdp_approx_mu, gdp_mu_from_eps_delta, DpSgdConfig};

const SIGMA_LO: f64 = 0.05;
const SIGMA_HI: f64 = 1e4;

fn check_target(eps_b: f64, delta: f64) -> Result<()> {
    if !(eps_b > 0.0 && eps_b.is_finite()) {
        return Err(Error::Domain {
            name: "eps_b",
            value: eps_b,
            expected: "(0, inf)",
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            expected: "(0, 1)",
        });
    }
    Ok(())
}

/// RDP-accounted ε of DP-SGD at δ over [`default_orders`].
pub fn rdp_epsilon<F: Real>(config: &DpSgdConfig<F>, delta: f64, conversion: RdpConversion) -> f64 {
    eps_from_rdp(gaussian_rdp_fn(config), &default_orders(), delta, conversion).0
}

/// σ making `N` steps of DP-SGD exactly (ε_B, δ)-DP under the RDP accountant.
pub fn sigma_for_rdp<F: Real>(
    eps_b: F,
    delta: F,
    tau: F,
    n_iters: u64,
    conversion: RdpConversion,
) -> Result<DpSgdConfig<F>> {
    let (e, d) = (eps_b.f64(), delta.f64());
    check_target(e, d)?;
    let eps_at = |ln_sigma: f64| {
        let cfg = DpSgdConfig::new(F::lit(ln_sigma.exp()), tau, n_iters).expect("validated");
        rdp_epsilon(&cfg, d, conversion) - e
    };
    DpSgdConfig::new(F::one(), tau, n_iters)?;
    let ln_sigma = bisect(eps_at, SIGMA_LO.ln(), SIGMA_HI.ln(), 1e-13, "sigma from RDP epsilon")?;
    DpSgdConfig::new(F::lit(ln_sigma.exp()), tau, n_iters)
}

/// σ whose central-limit GDP parameter is the μ of an (ε_B, δ)-DP Gaussian
/// curve.
pub fn sigma_for_gdp<F: Real>(eps_b: F, delta: F, tau: F, n_iters: u64) -> Result<DpSgdConfig<F>> {
    let (e, d) = (eps_b.f64(), delta.f64());
    check_target(e, d)?;
    DpSgdConfig::new(F::one(), tau, n_iters)?;
    let mu: f64 = gdp_mu_from_eps_delta(e, d)?;
    let mu_at = |ln_sigma: f64| {
        let cfg = DpSgdConfig::new(ln_sigma.exp(), tau.f64(), n_iters).expect("validated");
        gdp_approx_mu(&cfg).map(|m| m - mu).unwrap_or(f64::INFINITY)
    };
    // σ⁻² ≤ 700 keeps exp(σ⁻²) finite
    let lo = (1.0 / 700f64.sqrt()).max(SIGMA_LO * 0.8);
    let ln_sigma = bisect(mu_at, (lo * 1.0001).ln(), SIGMA_HI.ln(), 1e-13, "sigma from GDP mu")?;
    DpSgdConfig::new(F::lit(ln_sigma.exp()), tau, n_iters)
}
