//! Finite-alphabet mechanisms: the output distribution of best-of-k
//! selection, and exact privacy measures between two discrete distributions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::runcount::RunCountDist;
use crate::scalar::{powi, Field, Real};

pub mod theorem4;
pub mod tightness;

pub use theorem4::{theorem4_campaign, theorem4_check, CampaignConfig, CampaignReport, Theorem4Outcome};
pub use tightness::{approx_tightness, pure_tightness, three_symbol_pair, ApproxTightness, PureTightness};

/// Groups of symbol indices sharing a score, in increasing score order.
pub type Partition = Vec<Vec<usize>>;

/// Output distributions of a base mechanism on two adjacent inputs, with
/// the score ordering used by the selection step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMechanismPair<T> {
    pub alphabet: Vec<String>,
    pub p: Vec<T>,
    pub p_prime: Vec<T>,
    pub score_partition: Partition,
}

impl<T: Field> FiniteMechanismPair<T> {
    pub fn new(alphabet: Vec<String>, p: Vec<T>, p_prime: Vec<T>, score_partition: Partition) -> Result<Self> {
        let m = alphabet.len();
        if p.len() != m || p_prime.len() != m {
            return Err(Error::Parameter(format!(
                "probability vectors of length {} and {} for an alphabet of {m}",
                p.len(),
                p_prime.len()
            )));
        }
        check_probability_vector("p", &p)?;
        check_probability_vector("p_prime", &p_prime)?;
        check_partition(&score_partition, m)?;
        Ok(Self {
            alphabet,
            p,
            p_prime,
            score_partition,
        })
    }

    /// The same pair with every group split into singletons in listed order.
    pub fn refined(&self) -> Self {
        Self {
            score_partition: refine(&self.score_partition),
            ..self.clone()
        }
    }

    /// Selection outputs `(q, q′)` under run-count weights `(k, Pr(k))`.
    pub fn select(&self, weights: &[(u64, T)]) -> (Vec<T>, Vec<T>) {
        (
            selection_distribution(&self.p, &self.score_partition, weights),
            selection_distribution(&self.p_prime, &self.score_partition, weights),
        )
    }
}

fn check_probability_vector<T: Field>(name: &str, v: &[T]) -> Result<()> {
    let mut total = 0.0;
    for x in v {
        let f = x.to_f64().unwrap_or(f64::NAN);
        if !(f >= 0.0) {
            return Err(Error::Parameter(format!("{name} has a negative or NaN entry")));
        }
        total += f;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!("{name} sums to {total}, not 1")));
    }
    Ok(())
}

pub(crate) fn check_partition(partition: &[Vec<usize>], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for g in partition {
        if g.is_empty() {
            return Err(Error::Parameter("empty score group".into()));
        }
        for &i in g {
            if i >= m || seen[i] {
                return Err(Error::Parameter(format!(
                    "symbol index {i} is out of range or appears twice in the partition"
                )));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Parameter("partition does not cover the alphabet".into()));
    }
    Ok(())
}

pub fn refine(partition: &[Vec<usize>]) -> Partition {
    partition.iter().flatten().map(|&i| vec![i]).collect()
}

/// Strict order partition `[[0], [1], …, [m−1]]`.
pub fn strict_order(m: usize) -> Partition {
    (0..m).map(|i| vec![i]).collect()
}

// Σ_k Pr(k) x^k, walking the powers upwards
fn pgf<T: Field>(weights: &[(u64, T)], x: &T) -> T {
    let mut acc = T::zero();
    let mut pow = T::one();
    let mut at = 0u64;
    for (k, w) in weights {
        pow = pow * powi(x, k - at);
        at = *k;
        acc = acc + w.clone() * pow.clone();
    }
    acc
}

/// Distribution of the released symbol when `k ~ weights` draws are taken
/// from `probs` and one with the highest score is returned, ties broken
/// uniformly within a group.
///
/// `q(y) = Σ_k Pr(k)(F≤^k − F<^k)/|group(y)|`, where `F≤`, `F<` are the
/// masses of groups scoring at most / strictly less than `y`.
pub fn selection_distribution<T: Field>(probs: &[T], partition: &[Vec<usize>], weights: &[(u64, T)]) -> Vec<T> {
    let mut q = vec![T::zero(); probs.len()];
    let mut below = T::zero();
    let mut psi_below = pgf(weights, &below);
    for group in partition {
        let upto = group.iter().fold(below.clone(), |acc, &i| acc + probs[i].clone());
        let psi_upto = pgf(weights, &upto);
        let size = group.iter().fold(T::zero(), |acc, _| acc + T::one());
        let share = (psi_upto.clone() - psi_below) / size;
        for &i in group {
            q[i] = share.clone();
        }
        below = upto;
        psi_below = psi_upto;
    }
    q
}

/// [`selection_distribution`] for an `f64` vector with weights read from a
/// run-count distribution.
pub fn selection_distribution_for<F: Real>(
    probs: &[f64],
    partition: &[Vec<usize>],
    dist: &RunCountDist<F>,
) -> Vec<f64> {
    let weights: Vec<(u64, f64)> = dist.run_weights().into_iter().map(|(k, w)| (k, w.f64())).collect();
    selection_distribution(probs, partition, &weights)
}

/// `max_y |log(q(y)/q′(y))|`; infinite when the supports differ.
pub fn pure_dp_epsilon(q: &[f64], q_prime: &[f64]) -> f64 {
    pure_dp_argmax(q, q_prime).0
}

/// [`pure_dp_epsilon`] together with the attaining symbol index.
pub fn pure_dp_argmax(q: &[f64], q_prime: &[f64]) -> (f64, usize) {
    let mut best = (0.0, 0);
    for (i, (&a, &b)) in q.iter().zip(q_prime).enumerate() {
        let v = match (a > 0.0, b > 0.0) {
            (false, false) => continue,
            (true, true) => (a / b).ln().abs(),
            _ => f64::INFINITY,
        };
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}

/// Smallest δ making the pair (ε, δ)-indistinguishable in both directions:
/// `max(Σ (q − e^ε q′)⁺, Σ (q′ − e^ε q)⁺)`.
pub fn approx_dp_delta(q: &[f64], q_prime: &[f64], epsilon: f64) -> f64 {
    let e = epsilon.exp();
    let one_way = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(&x, &y)| (x - e * y).max(0.0)).sum() };
    one_way(q, q_prime).max(one_way(q_prime, q))
}

/// Smallest ε with `approx_dp_delta(q, q′, ε) ≤ δ`, to within 1e-12.
pub fn approx_dp_epsilon(q: &[f64], q_prime: &[f64], delta: f64) -> f64 {
    let hi = pure_dp_epsilon(q, q_prime);
    if approx_dp_delta(q, q_prime, 0.0) <= delta {
        return 0.0;
    }
    if !hi.is_finite() {
        // only the support mismatch remains; search a generous bracket
        if approx_dp_delta(q, q_prime, 700.0) > delta {
            return f64::INFINITY;
        }
        return crate::numeric::bisect_predicate(|e| approx_dp_delta(q, q_prime, e) <= delta, 0.0, 700.0, 1e-12);
    }
    crate::numeric::bisect_predicate(|e| approx_dp_delta(q, q_prime, e) <= delta, 0.0, hi, 1e-12)
}

/// `D_α(q‖q′) = log(Σ q^α q′^{1−α})/(α − 1)`.
pub fn renyi_divergence(q: &[f64], q_prime: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "(1, inf)",
        });
    }
    let mut logs = Vec::with_capacity(q.len());
    for (&a, &b) in q.iter().zip(q_prime) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            logs.push(alpha * a.ln() + (1.0 - alpha) * b.ln());
        }
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    Ok((lse / (alpha - 1.0)).max(0.0))
}

/// `Σ q^α / q′^{α−1}` for integer α, exactly in the scalar's arithmetic;
/// `None` when `q` puts mass where `q′` has none.
pub fn renyi_moment<T: Field>(q: &[T], q_prime: &[T], alpha: u64) -> Option<T> {
    let mut acc = T::zero();
    for (a, b) in q.iter().zip(q_prime) {
        if a.is_zero() {
            continue;
        }
        if b.is_zero() {
            return None;
        }
        acc = acc + powi(a, alpha) / powi(b, alpha - 1);
    }
    Some(acc)
}

/// Runs the selection protocol `trials` times and counts how often each
/// symbol is released. The winning group is the highest-scoring one among
/// the draws; the released symbol is uniform over that group.
pub fn simulate_selection<F: Real, R: Rng + ?Sized>(
    probs: &[f64],
    partition: &[Vec<usize>],
    dist: &RunCountDist<F>,
    trials: u64,
    rng: &mut R,
) -> Vec<u64> {
    let mut rank = vec![0usize; probs.len()];
    for (r, g) in partition.iter().enumerate() {
        for &i in g {
            rank[i] = r;
        }
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..trials {
        let k = dist.sample(rng);
        let mut top: Option<usize> = None;
        for _ in 0..k {
            let u: f64 = rng.random::<f64>() * acc;
            let y = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
            top = top.max(Some(rank[y]));
        }
        if let Some(r) = top {
            let group = &partition[r];
            counts[group[rng.random_range(0..group.len())]] += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn point_mass_one_returns_input() {
        let p = [0.2f64, 0.5, 0.3];
        let q = selection_distribution(&p, &[vec![1], vec![0], vec![2]], &[(1, 1.0)]);
        for (a, b) in q.iter().zip(p) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn two_symbol_pair_of_runs() {
        let q = selection_distribution(&[0.5, 0.5], &strict_order(2), &[(2, 1.0)]);
        assert_eq!(q, vec![0.25, 0.75]);
    }

    #[test]
    fn exact_rationals() {
        let half = Rational::new(1.into(), 2.into());
        let third = Rational::new(1.into(), 3.into());
        let p = vec![half.clone(), third.clone(), Rational::new(1.into(), 6.into())];
        let q = selection_distribution(&p, &[vec![0], vec![1, 2]], &[(3, Rational::from_integer(1.into()))]);
        // top group mass 1/2: 1 − (1/2)³ = 7/8 split in two
        assert_eq!(q[0], Rational::new(1.into(), 8.into()));
        assert_eq!(q[1], Rational::new(7.into(), 16.into()));
        assert_eq!(q[1], q[2]);
    }

    #[test]
    fn single_group_is_uniform() {
        let p = [0.1f64, 0.6, 0.3];
        let q = selection_distribution(&p, &[vec![0, 1, 2]], &[(4, 1.0)]);
        for v in q {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn renyi_two_symbol_example() {
        let d = renyi_divergence(&[0.9, 0.1], &[0.5, 0.5], 2.0).unwrap();
        assert!((d - 1.64f64.ln()).abs() < 1e-14);
        assert!((d - 0.4947).abs() < 1e-4);
        assert_eq!(renyi_divergence(&[0.3, 0.7], &[0.3, 0.7], 3.0).unwrap(), 0.0);
        assert!(renyi_divergence(&[0.5, 0.5], &[1.0, 0.0], 2.0).unwrap().is_infinite());
    }

    #[test]
    fn renyi_moment_agrees_with_float() {
        let m = renyi_moment(&[0.9f64, 0.1], &[0.5, 0.5], 2).unwrap();
        assert!((m - 1.64).abs() < 1e-14);
        assert!(renyi_moment(&[0.5, 0.5], &[1.0, 0.0], 2).is_none());
    }

    #[test]
    fn approx_delta_matches_event_enumeration() {
        let q = [8.66e-3, 2.60e-4, 1.0 - 8.66e-3 - 2.60e-4];
        let qp = [2.66e-3, 1.34e-5, 1.0 - 2.66e-3 - 1.34e-5];
        for &eps in &[0.0, 0.5, 1.0, 2.0] {
            let e: f64 = eps;
            let mut brute: f64 = 0.0;
            for mask in 0u32..8 {
                let (mut a, mut b) = (0.0, 0.0);
                for i in 0..3 {
                    if mask & (1 << i) != 0 {
                        a += q[i];
                        b += qp[i];
                    }
                }
                brute = brute.max(a - e.exp() * b).max(b - e.exp() * a);
            }
            assert!((approx_dp_delta(&q, &qp, eps) - brute).abs() < 1e-15);
        }
        let pure = pure_dp_epsilon(&q, &qp);
        assert_eq!(approx_dp_delta(&q, &qp, pure), 0.0);
    }

    #[test]
    fn pure_epsilon_identities() {
        assert_eq!(pure_dp_epsilon(&[0.2, 0.8], &[0.2, 0.8]), 0.0);
        assert!(pure_dp_epsilon(&[0.2, 0.8], &[0.0, 1.0]).is_infinite());
    }

    #[test]
    fn validation() {
        let ab = vec!["a".to_string(), "b".to_string()];
        assert!(FiniteMechanismPair::new(ab.clone(), vec![0.5, 0.5], vec![0.4, 0.6], vec![vec![0], vec![1]]).is_ok());
        assert!(FiniteMechanismPair::new(ab.clone(), vec![0.5, 0.6], vec![0.4, 0.6], vec![vec![0], vec![1]]).is_err());
        assert!(FiniteMechanismPair::new(ab.clone(), vec![0.5, 0.5], vec![0.4, 0.6], vec![vec![0]]).is_err());
        assert!(FiniteMechanismPair::new(ab, vec![0.5, 0.5], vec![0.4, 0.6], vec![vec![0, 1], vec![1]]).is_err());
    }
}
