//! Confidence limits and the ε lower bound from error rates.

use crate::error::{Error, Result};
use crate::special::beta_quantile;

/// One-sided upper Clopper–Pearson limit at level `confidence` for
/// `successes` out of `trials`: the `confidence` quantile of
/// Beta(successes + 1, trials − successes), or 1 when every trial succeeds.
pub fn clopper_pearson_upper(successes: u64, trials: u64, confidence: f64) -> Result<f64> {
    if successes > trials {
        return Err(Error::Parameter(format!(
            "{successes} successes out of {trials} trials"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain {
            name: "confidence",
            value: confidence,
            expected: "(0, 1)",
        });
    }
    if successes == trials {
        return Ok(1.0);
    }
    Ok(beta_quantile(
        (successes + 1) as f64,
        (trials - successes) as f64,
        confidence,
    ))
}

/// `max(log((1 − δ − FP)/FN), log((1 − δ − FN)/FP), 0)`.
pub fn eps_lower_bound(fp: f64, fnr: f64, delta: f64) -> f64 {
    let branch = |num: f64, den: f64| {
        let num = 1.0 - delta - num;
        if num <= 0.0 {
            0.0
        } else if den <= 0.0 {
            f64::INFINITY
        } else {
            (num / den).ln()
        }
    };
    branch(fp, fnr).max(branch(fnr, fp)).max(0.0)
}
