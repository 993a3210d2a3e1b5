//! Information as a signed change of belief, measured in bits, over finite
//! discrete distributions; the three-part parsimony objective; and closed
//! forms for leaves carrying a flat Dirichlet prior over label probabilities.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{digamma, ln_gamma, log2_gamma};

/// Tolerance on `Σ weights = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("weights sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("weight {0} is negative or not finite")]
    InvalidWeight(f64),
    #[error("distribution is empty")]
    Empty,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("information is indeterminate: the two beliefs rule out different outcomes")]
    Indeterminate,
    #[error("feasible set is empty")]
    EmptyFeasibleSet,
    #[error("lengths violate the Kraft inequality: Σ 2^-L = {0}")]
    KraftViolation(f64),
    #[error("label counts need at least two labels, got {0}")]
    TooFewLabels(usize),
}

pub type Result<T> = std::result::Result<T, InfoError>;

/// Finite nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscreteDist(Vec<f64>);

impl DiscreteDist {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(InfoError::Empty);
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(InfoError::InvalidWeight(w));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(InfoError::NotNormalized(total));
        }
        Ok(DiscreteDist(weights))
    }

    /// Rescales nonnegative weights with a positive total.
    pub fn normalize(weights: Vec<f64>) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(InfoError::InvalidWeight(w));
        }
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || total <= 0.0 {
            return Err(InfoError::Empty);
        }
        Ok(DiscreteDist(weights.into_iter().map(|w| w / total).collect()))
    }

    /// Normalizes `2^(log2 w_i)` stably.
    pub fn from_log2_weights(log2_weights: &[f64]) -> Result<Self> {
        let max = log2_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(InfoError::Empty);
        }
        Self::normalize(log2_weights.iter().map(|w| (w - max).exp2()).collect())
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        DiscreteDist(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        assert!(at < n);
        let mut w = vec![0.0; n];
        w[at] = 1.0;
        DiscreteDist(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, _)| i)
    }

    /// Inverse participation ratio `1 / Σ w²`.
    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.0.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `log2 Σ 2^v`, stable for large magnitudes; `-∞` for an empty or all `-∞` input.
pub fn log2_sum_exp2(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp2()).sum::<f64>().log2()
}

/// Shannon entropy in bits, with `0 · log(1/0) = 0`.
pub fn entropy(p: &DiscreteDist) -> f64 {
    p.weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.log2())
        .sum()
}

/// Information gained moving from belief `base` to `target`, in the view of
/// `view`: `Σ_z R(z) log2(Q1(z) / Q0(z))`.
///
/// Outcomes outside the view's support contribute nothing. Where the view
/// deems an outcome possible and exactly one belief rules it out, the result
/// is a signed infinity; if both infinities occur the change is
/// [`InfoError::Indeterminate`].
pub fn info(view: &DiscreteDist, target: &DiscreteDist, base: &DiscreteDist) -> Result<f64> {
    if view.len() != target.len() {
        return Err(InfoError::DimensionMismatch(view.len(), target.len()));
    }
    if view.len() != base.len() {
        return Err(InfoError::DimensionMismatch(view.len(), base.len()));
    }
    let mut finite = 0.0;
    let (mut pos_inf, mut neg_inf) = (false, false);
    for z in view.support() {
        let r = view.0[z];
        let (q1, q0) = (target.0[z], base.0[z]);
        match (q1 > 0.0, q0 > 0.0) {
            (true, true) => finite += r * (q1 / q0).log2(),
            (true, false) => pos_inf = true,
            (false, true) => neg_inf = true,
            (false, false) => {}
        }
    }
    match (pos_inf, neg_inf) {
        (true, true) => Err(InfoError::Indeterminate),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        (false, false) => Ok(finite),
    }
}

/// Kullback-Leibler divergence `KL(R ‖ Q)` in bits; `+∞` when `R` charges an
/// outcome that `Q` rules out.
pub fn kl(r: &DiscreteDist, q: &DiscreteDist) -> Result<f64> {
    info(r, r, q)
}

/// Closest belief to the length-induced prior `2^-L` among beliefs confined
/// to `feasible`, and its divergence from that prior.
///
/// The minimizer is the prior restricted and renormalized; its divergence is
/// `log2(1 / P(B))` where `P(B)` is the prior mass of the feasible set.
pub fn restricted_minimizer(lengths: &[f64], feasible: &[bool]) -> Result<(DiscreteDist, f64)> {
    if lengths.len() != feasible.len() {
        return Err(InfoError::DimensionMismatch(lengths.len(), feasible.len()));
    }
    let prior: Vec<f64> = lengths.iter().map(|&l| (-l).exp2()).collect();
    let kraft: f64 = prior.iter().sum();
    if kraft > 1.0 + 1e-12 {
        return Err(InfoError::KraftViolation(kraft));
    }
    let mass: f64 = prior
        .iter()
        .zip(feasible)
        .filter(|(_, &f)| f)
        .map(|(p, _)| p)
        .sum();
    if !feasible.iter().any(|&f| f) || mass <= 0.0 {
        return Err(InfoError::EmptyFeasibleSet);
    }
    let q: Vec<f64> = prior
        .iter()
        .zip(feasible)
        .map(|(&p, &f)| if f { p / mass } else { 0.0 })
        .collect();
    Ok((DiscreteDist(q), -mass.log2()))
}

/// Divergence of `q` from a possibly sub-normalized prior measure.
pub fn kl_to_measure(q: &DiscreteDist, measure: &[f64]) -> Result<f64> {
    if q.len() != measure.len() {
        return Err(InfoError::DimensionMismatch(q.len(), measure.len()));
    }
    let mut total = 0.0;
    for z in q.support() {
        if measure[z] <= 0.0 {
            return Ok(f64::INFINITY);
        }
        total += q.0[z] * (q.0[z] / measure[z]).log2();
    }
    Ok(total)
}

/// Per-label training counts inside one partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelCounts(Vec<u64>);

impl LabelCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(InfoError::TooFewLabels(counts.len()));
        }
        Ok(LabelCounts(counts))
    }

    pub fn zeros(labels: usize) -> Result<Self> {
        Self::new(vec![0; labels])
    }

    /// Tallies `labels` (indices below `n_labels`).
    pub fn tally(labels: impl IntoIterator<Item = usize>, n_labels: usize) -> Result<Self> {
        let mut counts = vec![0u64; n_labels];
        for y in labels {
            counts[y] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn labels(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn is_pure(&self) -> bool {
        self.0.iter().filter(|&&c| c > 0).count() <= 1
    }
}

/// `log2 P(Y)` for labels drawn from a leaf with a flat Dirichlet prior:
/// `log2(Γ(ℓ)/Γ(c+ℓ)) + Σ_y log2 Γ(C_y + 1)`.
pub fn dirichlet_log_marginal(k: &LabelCounts) -> f64 {
    let l = k.labels() as f64;
    let c = k.total() as f64;
    let mut total = log2_gamma(l) - log2_gamma(c + l);
    for &n in k.counts() {
        total += log2_gamma(n as f64 + 1.0);
    }
    total
}

/// `KL(Dir(C + 1) ‖ Dir(1))` in bits: information gained by leaf inference.
pub fn dirichlet_inference_info(k: &LabelCounts) -> f64 {
    if k.total() == 0 {
        return 0.0;
    }
    let l = k.labels() as f64;
    let c = k.total() as f64;
    let mut nats = ln_gamma(c + l) - ln_gamma(l) - c * digamma(c + l);
    for &n in k.counts() {
        let n = n as f64;
        nats += n * digamma(n + 1.0) - ln_gamma(n + 1.0);
    }
    nats / std::f64::consts::LN_2
}

/// Expected information about the training labels gained by the leaf
/// posterior, relative to uniform label probabilities.
pub fn dirichlet_prediction_info(k: &LabelCounts) -> f64 {
    if k.total() == 0 {
        return 0.0;
    }
    let l = k.labels() as f64;
    let c = k.total() as f64;
    let mut nats = c * l.ln() - c * digamma(c + l);
    for &n in k.counts() {
        let n = n as f64;
        nats += n * digamma(n + 1.0);
    }
    nats / std::f64::consts::LN_2
}

/// Laplace's rule of succession: `(C_y + 1) / (c + ℓ)`.
pub fn laplace_rule(k: &LabelCounts) -> DiscreteDist {
    let denom = k.total() as f64 + k.labels() as f64;
    DiscreteDist(k.counts().iter().map(|&n| (n as f64 + 1.0) / denom).collect())
}

/// One sampled description with its information terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    /// Identity of the description; equal keys are merged.
    pub key: String,
    pub length_bits: f64,
    pub inference_bits: f64,
    pub prediction_bits: f64,
}

/// Decomposition of the parsimony objective for an ensemble belief.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsimonyReport {
    pub prediction_info: f64,
    pub inference_info: f64,
    pub description_length_expected: f64,
    pub q_entropy: f64,
    pub omega: f64,
    pub chi: f64,
}

/// Evaluates the objective for belief `q_weights` over `members`. Members
/// with equal keys are merged before the description entropy is taken.
pub fn parsimony_report(members: &[EnsembleMember], q_weights: &DiscreteDist) -> Result<ParsimonyReport> {
    if members.len() != q_weights.len() {
        return Err(InfoError::DimensionMismatch(members.len(), q_weights.len()));
    }
    let total: f64 = q_weights.weights().iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(InfoError::NotNormalized(total));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut merged: Vec<(&EnsembleMember, f64)> = Vec::new();
    for (m, &w) in members.iter().zip(q_weights.weights()) {
        match index.get(m.key.as_str()) {
            Some(&at) => merged[at].1 += w,
            None => {
                index.insert(&m.key, merged.len());
                merged.push((m, w));
            }
        }
    }
    let mut report = ParsimonyReport {
        prediction_info: 0.0,
        inference_info: 0.0,
        description_length_expected: 0.0,
        q_entropy: 0.0,
        omega: 0.0,
        chi: 0.0,
    };
    for &(m, w) in &merged {
        if w <= 0.0 {
            continue;
        }
        report.prediction_info += w * m.prediction_bits;
        report.inference_info += w * m.inference_bits;
        report.description_length_expected += w * m.length_bits;
        report.q_entropy -= w * w.log2();
    }
    report.chi = report.inference_info + report.description_length_expected - report.q_entropy;
    report.omega = report.prediction_info - report.chi;
    Ok(report)
}
