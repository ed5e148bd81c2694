//! One-dimensional root finding and maximization.

use crate::error::{Error, Result};

/// Bisection for a function that changes sign on `[lo, hi]`.
///
/// Returns the midpoint of the final bracket once its width is at most `tol`.
pub fn bisect<G>(mut g: G, mut lo: f64, mut hi: f64, tol: f64, what: &str) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let (glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.is_nan() || ghi.is_nan() || glo.signum() == ghi.signum() {
        return Err(Error::Convergence {
            what: what.to_string(),
            lo,
            hi,
        });
    }
    let lo_negative = glo < 0.0;
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest point of `[lo, hi]` where a monotone predicate turns true,
/// to within `tol`. `pred(hi)` must hold.
pub fn bisect_predicate<P>(mut pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    P: FnMut(f64) -> bool,
{
    if pred(lo) {
        return lo;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_max<G>(mut g: G, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    G: FnMut(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    for _ in 0..300 {
        if hi - lo <= tol {
            break;
        }
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + INV_PHI * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - INV_PHI * (hi - lo);
            g1 = g(x1);
        }
    }
    let (glo, ghi) = (g(lo), g(hi));
    [(x1, g1), (x2, g2), (lo, glo), (hi, ghi)]
        .into_iter()
        .filter(|(_, v)| !v.is_nan())
        .fold((lo, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}
