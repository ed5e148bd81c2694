//! The three-symbol construction showing the selection bound is nearly
//! attained, for pure and approximate DP.

use serde::{Deserialize, Serialize};

use super::{approx_dp_epsilon, pure_dp_argmax, selection_distribution_for, strict_order, FiniteMechanismPair};
use crate::error::Result;
use crate::rdp::{default_orders, pure_dp_rdp, rdp_selection_bound, RdpConversion};
use crate::runcount::{RunCountDist, RunCountSpec};
use crate::scalar::Real;

/// Base pair over `{A, B, C}` with scores `A < B < C`:
/// `P = (1 − be^ε − db, be^ε, db)`, `P′ = (1 − b − dbe^ε, b, dbe^ε)`.
pub fn three_symbol_pair(b: f64, d: f64, epsilon: f64) -> Result<FiniteMechanismPair<f64>> {
    let e = epsilon.exp();
    FiniteMechanismPair::new(
        ["A", "B", "C"].map(String::from).to_vec(),
        vec![1.0 - b * e - d * b, b * e, d * b],
        vec![1.0 - b - d * b * e, b, d * b * e],
        strict_order(3),
    )
}

/// The pure-DP bound the prior analysis gives for this run-count family.
pub fn generic_pure_bound<F: Real>(epsilon: f64, dist: &RunCountDist<F>) -> f64 {
    match dist.spec() {
        RunCountSpec::Tnb { eta, .. } => (2.0 + eta.f64()) * epsilon,
        RunCountSpec::PointMass { k } => k as f64 * epsilon,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureTightness {
    pub alphabet: Vec<String>,
    pub base_p: Vec<f64>,
    pub base_p_prime: Vec<f64>,
    pub tuned_q: Vec<f64>,
    pub tuned_q_prime: Vec<f64>,
    pub eps_base: f64,
    #[serde(with = "crate::serde_float")]
    pub eps_tuned: f64,
    pub argmax_symbol: String,
    pub generic_bound: f64,
    #[serde(with = "crate::serde_float")]
    pub gap: f64,
}

pub fn pure_tightness<F: Real>(pair: &FiniteMechanismPair<f64>, dist: &RunCountDist<F>, epsilon: f64) -> PureTightness {
    let q = selection_distribution_for(&pair.p, &pair.score_partition, dist);
    let qp = selection_distribution_for(&pair.p_prime, &pair.score_partition, dist);
    let (eps_base, _) = pure_dp_argmax(&pair.p, &pair.p_prime);
    let (eps_tuned, at) = pure_dp_argmax(&q, &qp);
    let generic_bound = generic_pure_bound(epsilon, dist);
    PureTightness {
        alphabet: pair.alphabet.clone(),
        base_p: pair.p.clone(),
        base_p_prime: pair.p_prime.clone(),
        tuned_q: q,
        tuned_q_prime: qp,
        eps_base,
        eps_tuned,
        argmax_symbol: pair.alphabet[at].clone(),
        generic_bound,
        gap: generic_bound - eps_tuned,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxTightness {
    pub delta: f64,
    /// ε of the base pair at δ.
    pub eps_base: f64,
    /// ε of the tuned pair at δ.
    #[serde(with = "crate::serde_float")]
    pub eps_tuned: f64,
    /// RDP-based prediction for the tuned algorithm at δ.
    #[serde(with = "crate::serde_float")]
    pub eps_predicted: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
}

/// Compares the exact (ε, δ) of the tuned pair with the RDP selection bound
/// applied to a pure ε-DP base (classic conversion).
pub fn approx_tightness<F: Real>(
    pair: &FiniteMechanismPair<f64>,
    dist: &RunCountDist<F>,
    epsilon: f64,
    delta: f64,
) -> Result<ApproxTightness> {
    let q = selection_distribution_for(&pair.p, &pair.score_partition, dist);
    let qp = selection_distribution_for(&pair.p_prime, &pair.score_partition, dist);
    let sel = rdp_selection_bound(
        |a| Some(pure_dp_rdp(epsilon, a)),
        dist,
        delta,
        &default_orders(),
        RdpConversion::Classic,
    )?;
    Ok(ApproxTightness {
        delta,
        eps_base: approx_dp_epsilon(&pair.p, &pair.p_prime, delta),
        eps_tuned: approx_dp_epsilon(&q, &qp, delta),
        eps_predicted: sel.epsilon,
        alpha: sel.alpha,
        alpha_prime: sel.alpha_prime,
    })
}
