//! Distribution of the number of base runs in private selection.
//!
//! The run count `k ≥ 1` is either fixed or follows the truncated negative
//! binomial (TNB) family `ξ_{η,ν}`. Besides the pmf the accountant needs
//! `ω_ξ(x) = Σ_k k Pr(k) x^{k−1}`, the derivative of the probability
//! generating function; it is evaluated in closed form.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tail mass left out by the truncation horizon.
pub const TAIL_MASS: f64 = 1e-12;
/// Hard cap on the truncation horizon.
pub const K_MAX_CAP: u64 = 10_000_000;

/// Parameters of a run-count distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunCountSpec<F> {
    PointMass { k: u64 },
    Tnb { eta: F, nu: F },
}

impl<F: Real> fmt::Display for RunCountSpec<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointMass { k } => write!(f, "pointmass:k={k}"),
            Self::Tnb { eta, nu } => write!(f, "tnb:eta={eta},nu={nu}"),
        }
    }
}

/// A run-count distribution with its truncation horizon and cumulative
/// table. Immutable once built; clones share the table.
#[derive(Debug, Clone)]
pub struct RunCountDist<F> {
    spec: RunCountSpec<F>,
    k_max: u64,
    pmf: Arc<[f64]>,
    cdf: Arc<[f64]>,
}

impl<F: Real> RunCountDist<F> {
    pub fn point_mass(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("point mass run count must be >= 1".into()));
        }
        Ok(Self {
            spec: RunCountSpec::PointMass { k },
            k_max: k,
            pmf: Arc::from(Vec::new()),
            cdf: Arc::from(Vec::new()),
        })
    }

    /// Truncated negative binomial with `η > −1`, `0 < ν < 1`.
    pub fn tnb(eta: F, nu: F) -> Result<Self> {
        let (e, n) = (eta.f64(), nu.f64());
        if !(e > -1.0) || !e.is_finite() {
            return Err(Error::Domain {
                name: "eta",
                value: e,
                expected: "(-1, inf)",
            });
        }
        if !(n > 0.0 && n < 1.0) {
            return Err(Error::Domain {
                name: "nu",
                value: n,
                expected: "(0, 1)",
            });
        }
        let (pmf, cdf) = tnb_tables(e, n)?;
        Ok(Self {
            spec: RunCountSpec::Tnb { eta, nu },
            k_max: pmf.len() as u64,
            pmf: Arc::from(pmf),
            cdf: Arc::from(cdf),
        })
    }

    /// The geometric distribution `Pr(k) = ν(1 − ν)^{k−1}`.
    pub fn geometric(nu: F) -> Result<Self> {
        Self::tnb(F::one(), nu)
    }

    pub fn from_spec(spec: RunCountSpec<F>) -> Result<Self> {
        match spec {
            RunCountSpec::PointMass { k } => Self::point_mass(k),
            RunCountSpec::Tnb { eta, nu } => Self::tnb(eta, nu),
        }
    }

    pub fn spec(&self) -> RunCountSpec<F> {
        self.spec
    }

    /// Largest run count kept in tables and series.
    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    pub fn pmf(&self, k: u64) -> Result<F> {
        if k == 0 {
            return Err(Error::Domain {
                name: "k",
                value: 0.0,
                expected: "{1, 2, ...}",
            });
        }
        Ok(F::lit(self.pmf_f64(k)))
    }

    pub(crate) fn pmf_f64(&self, k: u64) -> f64 {
        match self.spec {
            RunCountSpec::PointMass { k: m } => f64::from(u8::from(k == m)),
            RunCountSpec::Tnb { eta, nu } => {
                if k <= self.k_max {
                    self.pmf[(k - 1) as usize]
                } else {
                    tnb_pmf_direct(eta.f64(), nu.f64(), k)
                }
            }
        }
    }

    /// Expected run count `E_ξ`.
    pub fn mean(&self) -> F {
        F::lit(match self.spec {
            RunCountSpec::PointMass { k } => k as f64,
            RunCountSpec::Tnb { eta, nu } => {
                let (e, n) = (eta.f64(), nu.f64());
                if e == 0.0 {
                    (1.0 - n) / (n * (1.0 / n).ln())
                } else {
                    // η(1 − ν) / (ν (1 − ν^η))
                    e * (1.0 - n) / (n * -(e * n.ln()).exp_m1())
                }
            }
        })
    }

    /// `ω_ξ(x)` for `x ∈ [0, 1]`.
    pub fn omega(&self, x: F) -> F {
        let x = x.f64();
        F::lit(self.omega_at(x, 1.0 - x))
    }

    /// `ω_ξ(1 − y)`, accurate when `y` is tiny.
    pub fn omega_complement(&self, y: F) -> F {
        let y = y.f64();
        F::lit(self.omega_at(1.0 - y, y))
    }

    // x and y = 1 − x are both supplied so whichever is small keeps precision
    pub(crate) fn omega_at(&self, x: f64, y: f64) -> f64 {
        match self.spec {
            RunCountSpec::PointMass { k } => {
                if k == 1 {
                    1.0
                } else if x <= 0.0 {
                    0.0
                } else {
                    k as f64 * ((k - 1) as f64 * (-y).ln_1p()).exp()
                }
            }
            RunCountSpec::Tnb { eta, nu } => {
                let (e, n) = (eta.f64(), nu.f64());
                // 1 − (1 − ν)x = ν + (1 − ν)(1 − x)
                let base = if y < 0.5 {
                    n + (1.0 - n) * y
                } else {
                    1.0 - (1.0 - n) * x
                };
                if e == 0.0 {
                    (1.0 - n) / (base * (1.0 / n).ln())
                } else {
                    let denom = (-e * n.ln()).exp_m1();
                    e * (1.0 - n) * (-(e + 1.0) * base.ln()).exp() / denom
                }
            }
        }
    }

    /// `ω_ξ(x)` as the truncated power series `Σ_{k ≤ K_max} k Pr(k) x^{k−1}`.
    pub fn omega_series(&self, x: F) -> F {
        let x = x.f64();
        let s = match self.spec {
            RunCountSpec::PointMass { k } => k as f64 * x.powi((k - 1) as i32),
            RunCountSpec::Tnb { .. } => {
                let mut pow = 1.0;
                let mut acc = 0.0;
                for (i, p) in self.pmf.iter().enumerate() {
                    acc += (i + 1) as f64 * p * pow;
                    pow *= x;
                }
                acc
            }
        };
        F::lit(s)
    }

    /// `(k, Pr(k))` for every run count with nonzero mass up to `K_max`.
    pub fn run_weights(&self) -> Vec<(u64, F)> {
        match self.spec {
            RunCountSpec::PointMass { k } => vec![(k, F::one())],
            RunCountSpec::Tnb { .. } => self
                .pmf
                .iter()
                .enumerate()
                .map(|(i, &p)| ((i + 1) as u64, F::lit(p)))
                .collect(),
        }
    }

    /// Draw a run count by inverse-CDF lookup.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.spec {
            RunCountSpec::PointMass { k } => k,
            RunCountSpec::Tnb { .. } => {
                let u: f64 = rng.random();
                let idx = self.cdf.partition_point(|&c| c <= u);
                (idx as u64 + 1).min(self.k_max)
            }
        }
    }
}

fn tnb_log_norm(eta: f64, nu: f64) -> f64 {
    if eta == 0.0 {
        (1.0 / nu).ln().ln()
    } else {
        // |ν^{−η} − 1|
        (-eta * nu.ln()).exp_m1().abs().ln()
    }
}

fn tnb_pmf_direct(eta: f64, nu: f64, k: u64) -> f64 {
    let kf = k as f64;
    let lp = if eta == 0.0 {
        kf * (1.0 - nu).ln() - kf.ln() - tnb_log_norm(eta, nu)
    } else {
        // |Π_{ℓ<k} (ℓ + η)/(ℓ + 1)| = Γ(k + η) |η| / (Γ(η + 1) Γ(k + 1))
        let log_prod = ln_gamma(kf + eta) + eta.abs().ln() - ln_gamma(eta + 1.0) - ln_gamma(kf + 1.0);
        kf * (1.0 - nu).ln() + log_prod - tnb_log_norm(eta, nu)
    };
    lp.exp()
}

// Running-product pmf table up to the truncation horizon.
fn tnb_tables(eta: f64, nu: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mean = if eta == 0.0 {
        (1.0 - nu) / (nu * (1.0 / nu).ln())
    } else {
        eta * (1.0 - nu) / (nu * -(eta * nu.ln()).exp_m1())
    };
    let log_q = (1.0 - nu).ln();
    let log_norm = tnb_log_norm(eta, nu);
    let mut pmf = Vec::new();
    let mut cdf = Vec::new();
    let mut log_prod = 0.0;
    let mut total = 0.0;
    let mut k: u64 = 0;
    loop {
        k += 1;
        let kf = k as f64;
        let lp = if eta == 0.0 {
            kf * log_q - kf.ln() - log_norm
        } else {
            let l = kf - 1.0;
            log_prod += ((l + eta) / (l + 1.0)).abs().ln();
            kf * log_q + log_prod - log_norm
        };
        let p = lp.exp();
        total += p;
        pmf.push(p);
        cdf.push(total);
        let geometric_tail = (kf * log_q).exp() * (kf + mean) / nu;
        if geometric_tail < TAIL_MASS && 1.0 - total < TAIL_MASS && kf > mean {
            break;
        }
        if k >= K_MAX_CAP {
            return Err(Error::Parameter(format!(
                "run-count tail does not fall below {TAIL_MASS} within {K_MAX_CAP} terms"
            )));
        }
    }
    Ok((pmf, cdf))
}
