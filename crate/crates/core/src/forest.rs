//! Parsimonious decision trees sampled node by node, corrected to the exact
//! hyperposterior with importance weights, plus entropy-split trees and
//! bagging as the conventional comparison.
//!
//! Each node is coded as one leaf/branch bit, then for a branch a
//! `log2 k`-bit feature index and a binary-fraction threshold. Leaves carry a
//! flat Dirichlet prior over label probabilities, so a leaf's likelihood is
//! the Dirichlet marginal of its label counts and its predictive is Laplace's
//! rule. While growing a tree, every option at a node is weighted by
//! `P(Y|option)^α_d · P(option)`, where a split's likelihood treats both
//! children as leaves. The product of the chosen option probabilities is the
//! proposal probability `S(ψ)`, and `P(Y|ψ) P(ψ) / S(ψ)` is the tree's
//! importance weight.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codecs::{fraction_length, precision_representable, BinaryFraction, CodecError, IntCodeScheme};
use crate::information::{dirichlet_log_marginal, laplace_rule, log2_sum_exp2, DiscreteDist, InfoError, LabelCounts};
use crate::rng::{sample_log2, stream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForestError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, ForestError>;

/// Per-dimension affine maps from the training range onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| ForestError::InvalidData("no rows".into()))?;
        if k == 0 {
            return Err(ForestError::InvalidData("rows have no features".into()));
        }
        let mut mins = vec![f64::INFINITY; k];
        let mut maxs = vec![f64::NEG_INFINITY; k];
        for row in rows {
            if row.len() != k {
                return Err(ForestError::InvalidData(format!("row has {} features, expected {k}", row.len())));
            }
            for (d, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ForestError::InvalidData("non-finite feature".into()));
                }
                mins[d] = mins[d].min(v);
                maxs[d] = maxs[d].max(v);
            }
        }
        Ok(FeatureScaler { mins, maxs })
    }

    pub fn dims(&self) -> usize {
        self.mins.len()
    }

    /// Affine map of one dimension; a constant dimension is shifted onto `1/2`.
    pub fn scale(&self, d: usize, v: f64) -> f64 {
        let span = self.maxs[d] - self.mins[d];
        if span > 0.0 {
            (v - self.mins[d]) / span
        } else {
            0.5 + (v - self.mins[d])
        }
    }

    pub fn unscale(&self, d: usize, u: f64) -> f64 {
        let span = self.maxs[d] - self.mins[d];
        if span > 0.0 {
            self.mins[d] + u * span
        } else {
            self.mins[d] + u - 0.5
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(d, &v)| self.scale(d, v)).collect()
    }
}

/// Training rows scaled to the unit cube with label indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    scaler: FeatureScaler,
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    labels: usize,
}

impl LabeledData {
    pub fn new(rows: &[Vec<f64>], y: &[usize], labels: usize) -> Result<Self> {
        if rows.len() != y.len() {
            return Err(ForestError::InvalidData(format!("{} rows but {} labels", rows.len(), y.len())));
        }
        if labels < 2 {
            return Err(ForestError::InvalidData("at least two labels are required".into()));
        }
        if let Some(&bad) = y.iter().find(|&&v| v >= labels) {
            return Err(ForestError::InvalidData(format!("label index {bad} out of range")));
        }
        let scaler = FeatureScaler::fit(rows)?;
        let x = rows.iter().map(|r| scaler.transform(r)).collect();
        Ok(LabeledData {
            scaler,
            x,
            y: y.to_vec(),
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.scaler.dims()
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn scaler(&self) -> &FeatureScaler {
        &self.scaler
    }

    pub fn scaled_rows(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn targets(&self) -> &[usize] {
        &self.y
    }

    fn counts(&self, idx: &[usize]) -> LabelCounts {
        LabelCounts::tally(idx.iter().map(|&i| self.y[i]), self.labels).expect("labels >= 2")
    }
}

/// Per-depth likelihood exponents; the last entry repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnnealSchedule(Vec<f64>);

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule(vec![0.0, 0.0, 1.0])
    }
}

impl AnnealSchedule {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() || alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(ForestError::InvalidConfig("anneal exponents must lie in [0, 1]".into()));
        }
        if *alphas.last().unwrap() != 1.0 {
            return Err(ForestError::InvalidConfig("anneal schedule must end at 1".into()));
        }
        Ok(AnnealSchedule(alphas))
    }

    pub fn alpha(&self, depth: usize) -> f64 {
        self.0[depth.min(self.0.len() - 1)]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SplitMode {
    /// One shortest threshold per gap between adjacent distinct values.
    GapMinimal,
    /// Every representable threshold with precision up to `z_cap` that separates the node.
    Exhaustive { z_cap: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub schedule: AnnealSchedule,
    pub threshold_code: IntCodeScheme,
    pub split_mode: SplitMode,
    /// Highest threshold precision searched in gap mode.
    pub z_cap: u32,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 1000,
            schedule: AnnealSchedule::default(),
            threshold_code: IntCodeScheme::LengthSymbol(4),
            split_mode: SplitMode::GapMinimal,
            z_cap: 10,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        self.threshold_code.validate()?;
        if self.trees == 0 {
            return Err(ForestError::InvalidConfig("trees must be at least 1".into()));
        }
        if self.z_cap > 40 {
            return Err(ForestError::InvalidConfig("z_cap above 40 is not supported".into()));
        }
        Ok(())
    }

    fn precision_cap(&self) -> u32 {
        match self.split_mode {
            SplitMode::GapMinimal => self.z_cap,
            SplitMode::Exhaustive { z_cap } => z_cap,
        }
    }
}

/// A candidate branch: go left when `x[feature] < threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: BinaryFraction,
}

fn fractions_in(lo: f64, hi: f64, z: u32) -> impl Iterator<Item = BinaryFraction> {
    // q = (2i - 1) / 2^(z+1) with lo < q < hi.
    let scale = (z as f64 + 1.0).exp2();
    let first = (((lo * scale + 1.0) / 2.0).floor() as i64).max(1) as u64;
    let last = (((hi * scale + 1.0) / 2.0).ceil() as i64).min(1i64 << z) as u64;
    (first..=last.max(first))
        .filter_map(move |i| BinaryFraction::new(z, i).ok())
        .filter(move |f| f.value() > lo && f.value() < hi)
}

/// Thresholds that split the node's points into two nonempty sides.
pub fn candidate_splits(data: &LabeledData, idx: &[usize], cfg: &ForestConfig) -> Vec<Split> {
    let cap = cfg.precision_cap();
    let precisions: Vec<u32> = (0..=cap)
        .filter(|&z| precision_representable(cfg.threshold_code, z))
        .collect();
    let mut out = Vec::new();
    for feature in 0..data.dims() {
        let mut values: Vec<f64> = idx.iter().map(|&i| data.x[i][feature]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        if values.len() < 2 {
            continue;
        }
        match cfg.split_mode {
            SplitMode::GapMinimal => {
                for w in values.windows(2) {
                    let (lo, hi) = (w[0], w[1]);
                    let mid = 0.5 * (lo + hi);
                    let best = precisions.iter().find_map(|&z| {
                        fractions_in(lo, hi, z).min_by(|a, b| {
                            (a.value() - mid)
                                .abs()
                                .total_cmp(&(b.value() - mid).abs())
                                .then(a.value().total_cmp(&b.value()))
                        })
                    });
                    if let Some(threshold) = best {
                        out.push(Split { feature, threshold });
                    }
                }
            }
            SplitMode::Exhaustive { .. } => {
                let (lo, hi) = (values[0], values[values.len() - 1]);
                let mut all: Vec<BinaryFraction> = precisions
                    .iter()
                    .flat_map(|&z| BinaryFraction::with_precision(z))
                    .filter(|f| f.value() > lo && f.value() <= hi)
                    .collect();
                all.sort_by(|a, b| a.value().total_cmp(&b.value()));
                out.extend(all.into_iter().map(|threshold| Split { feature, threshold }));
            }
        }
    }
    out
}

/// Log2 prior of a node option: `-1` for a leaf, `-(1 + log2 k + L(q))` for a branch.
pub fn node_prior_log2(split: Option<&Split>, k: usize, threshold_code: IntCodeScheme) -> Result<f64> {
    match split {
        None => Ok(-1.0),
        Some(s) => Ok(-(1.0 + (k as f64).log2() + fraction_length(threshold_code, s.threshold)?)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Node {
    Leaf {
        counts: LabelCounts,
    },
    Branch {
        feature: usize,
        threshold: BinaryFraction,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    /// Description length in bits.
    pub fn length(&self, k: usize, threshold_code: IntCodeScheme) -> Result<f64> {
        match self {
            Node::Leaf { .. } => Ok(1.0),
            Node::Branch {
                threshold, left, right, ..
            } => Ok(1.0
                + (k as f64).log2()
                + fraction_length(threshold_code, *threshold)?
                + left.length(k, threshold_code)?
                + right.length(k, threshold_code)?),
        }
    }

    /// Sum of leaf Dirichlet marginals.
    pub fn log2_likelihood(&self) -> f64 {
        match self {
            Node::Leaf { counts } => dirichlet_log_marginal(counts),
            Node::Branch { left, right, .. } => left.log2_likelihood() + right.log2_likelihood(),
        }
    }

    /// Leaf reached by a point in scaled coordinates.
    pub fn leaf_for(&self, x: &[f64]) -> &LabelCounts {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { counts } => return counts,
                Node::Branch {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] < threshold.value() { left } else { right },
            }
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Branch { left, right, .. } => left.leaves() + right.leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Branch { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// A sampled tree with its bookkeeping totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDescription {
    pub root: Node,
    pub length_bits: f64,
    /// Log2 probability that the node-by-node proposal produced this tree.
    pub log2_proposal: f64,
    /// Log2 of `P(Y|ψ) 2^-L(ψ)`.
    pub log2_posterior: f64,
}

impl TreeDescription {
    pub fn predict_scaled(&self, x: &[f64]) -> DiscreteDist {
        laplace_rule(self.root.leaf_for(x))
    }
}

fn partition(data: &LabeledData, idx: &[usize], s: &Split) -> (Vec<usize>, Vec<usize>) {
    idx.iter()
        .partition(|&&i| data.x[i][s.feature] < s.threshold.value())
}

/// Options at a node with their annealed log2 proposal scores.
struct NodeOptions {
    splits: Vec<Split>,
    /// Index 0 is the leaf, `1 + i` is `splits[i]`.
    scores: Vec<f64>,
    log2_total: f64,
    priors: Vec<f64>,
}

fn node_options(data: &LabeledData, idx: &[usize], depth: usize, cfg: &ForestConfig) -> Result<NodeOptions> {
    let splits = candidate_splits(data, idx, cfg);
    let alpha = cfg.schedule.alpha(depth);
    let k = data.dims();
    let mut scores = Vec::with_capacity(splits.len() + 1);
    let mut priors = Vec::with_capacity(splits.len() + 1);
    let leaf_prior = node_prior_log2(None, k, cfg.threshold_code)?;
    priors.push(leaf_prior);
    scores.push(alpha * dirichlet_log_marginal(&data.counts(idx)) + leaf_prior);
    for s in &splits {
        let (l, r) = partition(data, idx, s);
        let prior = node_prior_log2(Some(s), k, cfg.threshold_code)?;
        let lik = dirichlet_log_marginal(&data.counts(&l)) + dirichlet_log_marginal(&data.counts(&r));
        priors.push(prior);
        scores.push(alpha * lik + prior);
    }
    let log2_total = if splits.is_empty() { scores[0] } else { log2_sum_exp2(&scores) };
    Ok(NodeOptions {
        splits,
        scores,
        log2_total,
        priors,
    })
}

/// Grows a subtree over `idx`, returning the node, its log2 proposal
/// probability and its log2 unnormalized hyperposterior.
pub fn parsimony_node(
    data: &LabeledData,
    idx: &[usize],
    depth: usize,
    cfg: &ForestConfig,
    rng: &mut impl Rng,
) -> Result<(Node, f64, f64)> {
    let opts = node_options(data, idx, depth, cfg)?;
    let counts = data.counts(idx);
    if opts.splits.is_empty() {
        let post = dirichlet_log_marginal(&counts) + opts.priors[0];
        return Ok((Node::Leaf { counts }, 0.0, post));
    }
    let pick = sample_log2(&opts.scores, opts.log2_total, rng);
    let log2_s = opts.scores[pick] - opts.log2_total;
    if pick == 0 {
        let post = dirichlet_log_marginal(&counts) + opts.priors[0];
        return Ok((Node::Leaf { counts }, log2_s, post));
    }
    let split = opts.splits[pick - 1];
    let (l, r) = partition(data, idx, &split);
    let (left, sl, pl) = parsimony_node(data, &l, depth + 1, cfg, rng)?;
    let (right, sr, pr) = parsimony_node(data, &r, depth + 1, cfg, rng)?;
    Ok((
        Node::Branch {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(left),
            right: Box::new(right),
        },
        log2_s + sl + sr,
        opts.priors[pick] + pl + pr,
    ))
}

fn all_indices(data: &LabeledData) -> Vec<usize> {
    (0..data.len()).collect()
}

pub fn sample_tree(data: &LabeledData, cfg: &ForestConfig, rng: &mut impl Rng) -> Result<TreeDescription> {
    let (root, log2_proposal, log2_posterior) = parsimony_node(data, &all_indices(data), 0, cfg, rng)?;
    let length_bits = root.length(data.dims(), cfg.threshold_code)?;
    Ok(TreeDescription {
        root,
        length_bits,
        log2_proposal,
        log2_posterior,
    })
}

/// Importance-weighted trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedForest {
    pub trees: Vec<TreeDescription>,
    pub weights: DiscreteDist,
    pub scaler: FeatureScaler,
    pub labels: usize,
}

impl WeightedForest {
    /// Self-normalized weights `∝ 2^(log2 posterior - log2 S)`.
    pub fn from_trees(trees: Vec<TreeDescription>, scaler: FeatureScaler, labels: usize) -> Result<Self> {
        let log_w: Vec<f64> = trees.iter().map(|t| t.log2_posterior - t.log2_proposal).collect();
        let weights = DiscreteDist::from_log2_weights(&log_w)?;
        Ok(WeightedForest {
            trees,
            weights,
            scaler,
            labels,
        })
    }

    pub fn effective_sample_size(&self) -> f64 {
        self.weights.effective_sample_size()
    }

    pub fn predict_scaled(&self, x: &[f64]) -> DiscreteDist {
        let mut out = vec![0.0; self.labels];
        for (t, &w) in self.trees.iter().zip(self.weights.weights()) {
            for (o, p) in out.iter_mut().zip(t.predict_scaled(x).weights()) {
                *o += w * p;
            }
        }
        DiscreteDist::normalize(out).expect("mixture of positive predictives")
    }

    /// Label distribution at a point in original feature units.
    pub fn predict(&self, x: &[f64]) -> DiscreteDist {
        self.predict_scaled(&self.scaler.transform(x))
    }
}

/// Samples `cfg.trees` trees in parallel, tree `t` on its own seed stream.
pub fn sample_forest(data: &LabeledData, cfg: &ForestConfig) -> Result<WeightedForest> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(ForestError::InvalidData("no training points".into()));
    }
    let trees = (0..cfg.trees)
        .into_par_iter()
        .map(|t| sample_tree(data, cfg, &mut stream(cfg.seed, "forest", t as u64)))
        .collect::<Result<Vec<_>>>()?;
    WeightedForest::from_trees(trees, data.scaler.clone(), data.labels)
}

/// Every tree the proposal can produce, with its log2 proposal probability
/// and log2 posterior. Exponential in the data size; for small oracles.
pub fn enumerate_trees(data: &LabeledData, cfg: &ForestConfig) -> Result<Vec<TreeDescription>> {
    let all = enumerate_node(data, &all_indices(data), 0, cfg)?;
    all.into_iter()
        .map(|(root, s, p)| {
            let length_bits = root.length(data.dims(), cfg.threshold_code)?;
            Ok(TreeDescription {
                root,
                length_bits,
                log2_proposal: s,
                log2_posterior: p,
            })
        })
        .collect()
}

fn enumerate_node(data: &LabeledData, idx: &[usize], depth: usize, cfg: &ForestConfig) -> Result<Vec<(Node, f64, f64)>> {
    let opts = node_options(data, idx, depth, cfg)?;
    let counts = data.counts(idx);
    let leaf_post = dirichlet_log_marginal(&counts) + opts.priors[0];
    if opts.splits.is_empty() {
        return Ok(vec![(Node::Leaf { counts }, 0.0, leaf_post)]);
    }
    let mut out = vec![(Node::Leaf { counts }, opts.scores[0] - opts.log2_total, leaf_post)];
    for (i, split) in opts.splits.iter().enumerate() {
        let log2_s = opts.scores[i + 1] - opts.log2_total;
        let (l, r) = partition(data, idx, split);
        let lefts = enumerate_node(data, &l, depth + 1, cfg)?;
        let rights = enumerate_node(data, &r, depth + 1, cfg)?;
        for (ln, ls, lp) in &lefts {
            for (rn, rs, rp) in &rights {
                out.push((
                    Node::Branch {
                        feature: split.feature,
                        threshold: split.threshold,
                        left: Box::new(ln.clone()),
                        right: Box::new(rn.clone()),
                    },
                    log2_s + ls + rs,
                    opts.priors[i + 1] + lp + rp,
                ));
            }
        }
    }
    Ok(out)
}

/// Hyperposterior predictive at a scaled point, by exact enumeration.
pub fn exact_predictive(data: &LabeledData, cfg: &ForestConfig, x: &[f64]) -> Result<DiscreteDist> {
    let trees = enumerate_trees(data, cfg)?;
    let post = DiscreteDist::from_log2_weights(&trees.iter().map(|t| t.log2_posterior).collect::<Vec<_>>())?;
    let mut out = vec![0.0; data.labels];
    for (t, &w) in trees.iter().zip(post.weights()) {
        for (o, p) in out.iter_mut().zip(t.predict_scaled(x).weights()) {
            *o += w * p;
        }
    }
    Ok(DiscreteDist::normalize(out)?)
}

/// Entropy in bits of the empirical label frequencies.
fn count_entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// Entropy reduction `S(parent) - Σ_side (c_side / c) S(side)`.
pub fn entropy_reduction(left: &[u64], right: &[u64]) -> f64 {
    let parent: Vec<u64> = left.iter().zip(right).map(|(a, b)| a + b).collect();
    let (cl, cr) = (left.iter().sum::<u64>() as f64, right.iter().sum::<u64>() as f64);
    let c = cl + cr;
    if c == 0.0 {
        return 0.0;
    }
    count_entropy(&parent) - (cl / c) * count_entropy(left) - (cr / c) * count_entropy(right)
}

/// Conventional tree node over raw feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ConventionalNode {
    Leaf {
        counts: Vec<u64>,
    },
    Branch {
        feature: usize,
        threshold: f64,
        left: Box<ConventionalNode>,
        right: Box<ConventionalNode>,
    },
}

impl ConventionalNode {
    /// Sample label frequencies of the leaf reached by `x`.
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConventionalNode::Leaf { counts } => {
                let total: u64 = counts.iter().sum();
                counts.iter().map(|&c| c as f64 / total as f64).collect()
            }
            ConventionalNode::Branch {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] < *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            ConventionalNode::Leaf { .. } => 0,
            ConventionalNode::Branch { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Greedy tree: each branch takes the midpoint threshold with the largest
/// entropy reduction (ties: lower feature, then lower threshold) and growth
/// continues while the node is impure and any separating threshold exists.
pub fn entropy_split_tree(rows: &[Vec<f64>], y: &[usize], labels: usize) -> Result<ConventionalNode> {
    if rows.is_empty() || rows.len() != y.len() {
        return Err(ForestError::InvalidData("need matching nonempty rows and labels".into()));
    }
    Ok(grow_conventional(rows, y, labels, &(0..rows.len()).collect::<Vec<_>>()))
}

fn grow_conventional(rows: &[Vec<f64>], y: &[usize], labels: usize, idx: &[usize]) -> ConventionalNode {
    let tally = |ids: &[usize]| {
        let mut c = vec![0u64; labels];
        for &i in ids {
            c[y[i]] += 1;
        }
        c
    };
    let counts = tally(idx);
    if counts.iter().filter(|&&c| c > 0).count() <= 1 {
        return ConventionalNode::Leaf { counts };
    }
    let mut best: Option<(f64, usize, f64)> = None;
    let dims = rows[idx[0]].len();
    for feature in 0..dims {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][feature]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][feature] < t);
            let gain = entropy_reduction(&tally(&l), &tally(&r));
            if best.is_none_or(|(g, _, _)| gain > g) {
                best = Some((gain, feature, t));
            }
        }
    }
    match best {
        None => ConventionalNode::Leaf { counts },
        Some((_, feature, threshold)) => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][feature] < threshold);
            ConventionalNode::Branch {
                feature,
                threshold,
                left: Box::new(grow_conventional(rows, y, labels, &l)),
                right: Box::new(grow_conventional(rows, y, labels, &r)),
            }
        }
    }
}

/// Uniformly weighted conventional trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggedForest {
    pub trees: Vec<ConventionalNode>,
    pub labels: usize,
}

impl BaggedForest {
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.labels];
        for t in &self.trees {
            for (o, p) in out.iter_mut().zip(t.predict(x)) {
                *o += p / self.trees.len() as f64;
            }
        }
        out
    }
}

/// Trees trained on the given resamples (row index lists).
pub fn bag_trees(rows: &[Vec<f64>], y: &[usize], labels: usize, resamples: &[Vec<usize>]) -> Result<BaggedForest> {
    let trees = resamples
        .iter()
        .map(|ids| {
            let r: Vec<Vec<f64>> = ids.iter().map(|&i| rows[i].clone()).collect();
            let l: Vec<usize> = ids.iter().map(|&i| y[i]).collect();
            entropy_split_tree(&r, &l, labels)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaggedForest { trees, labels })
}

/// Bootstrap aggregation: `trees` resamples of size n drawn with replacement.
pub fn bagging(rows: &[Vec<f64>], y: &[usize], labels: usize, trees: usize, seed: u64) -> Result<BaggedForest> {
    if trees == 0 {
        return Err(ForestError::InvalidConfig("trees must be at least 1".into()));
    }
    let n = rows.len();
    let resamples: Vec<Vec<usize>> = (0..trees)
        .map(|t| {
            let mut rng = stream(seed, "bagging", t as u64);
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        })
        .collect();
    bag_trees(rows, y, labels, &resamples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn data1d(xs: &[f64], ys: &[usize]) -> LabeledData {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        LabeledData::new(&rows, ys, 2).unwrap()
    }

    fn frac(s: &str) -> BinaryFraction {
        BinaryFraction::parse(s).unwrap()
    }

    #[test]
    fn candidate_split_examples() {
        let cfg = ForestConfig::default();
        let d = data1d(&[0.2, 0.8], &[0, 1]);
        let s = candidate_splits(&d, &[0, 1], &cfg);
        assert_eq!(s, vec![Split { feature: 0, threshold: frac("1/2") }]);
        assert!(candidate_splits(&d, &[0], &cfg).is_empty());

        // Scaled to {0, 0.125, 1}: gaps (0, 1/8) and (1/8, 1).
        let d = data1d(&[0.1, 0.2, 0.9], &[0, 0, 1]);
        let s = candidate_splits(&d, &[0, 1, 2], &cfg);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].threshold, frac("1/16"));
        assert_eq!(s[1].threshold, frac("1/2"));
    }

    #[test]
    fn gap_representative_is_shortest_then_nearest() {
        let cfg = ForestConfig::default();
        // Scaled values 0, 0.3, 1: gap (0.3, 1) holds 1/2; gap (0, 0.3) holds 1/4.
        let d = data1d(&[0.0, 0.3, 1.0], &[0, 1, 0]);
        let s = candidate_splits(&d, &[0, 1, 2], &cfg);
        assert_eq!(s[0].threshold, frac("1/4"));
        assert_eq!(s[1].threshold, frac("1/2"));
        // A brute-force scan agrees on the minimal precision in each gap.
        for (sp, (lo, hi)) in s.iter().zip([(0.0, 0.3), (0.3, 1.0)]) {
            let zmin = (0..=3)
                .find(|&z| BinaryFraction::with_precision(z).any(|f| f.value() > lo && f.value() < hi))
                .unwrap();
            assert_eq!(sp.threshold.precision(), zmin);
        }
    }

    #[test]
    fn node_prior_examples() {
        let code = IntCodeScheme::LengthSymbol(4);
        assert_eq!(node_prior_log2(None, 2, code).unwrap(), -1.0);
        let s = Split { feature: 0, threshold: frac("1/2") };
        assert_eq!(node_prior_log2(Some(&s), 2, code).unwrap(), -4.0);
        let s = Split { feature: 1, threshold: frac("3/8") };
        assert_eq!(node_prior_log2(Some(&s), 4, code).unwrap(), -7.0);
    }

    #[test]
    fn prior_only_leaf_probability() {
        let d = data1d(&[0.0, 0.3, 1.0], &[0, 1, 0]);
        let cfg = ForestConfig::default();
        let opts = node_options(&d, &[0, 1, 2], 0, &cfg).unwrap();
        // Splits 1/4 and 1/2 in one dimension cost 4 and 3 bits.
        let expected = 0.5 / (0.5 + (-4.0f64).exp2() + (-3.0f64).exp2());
        assert_abs_diff_eq!((opts.scores[0] - opts.log2_total).exp2(), expected, epsilon = 1e-12);
    }

    #[test]
    fn two_point_branch_weight_ratio() {
        let d = data1d(&[0.0, 1.0], &[0, 1]);
        let trees = enumerate_trees(&d, &ForestConfig::default()).unwrap();
        let leaf = trees.iter().find(|t| t.root.leaves() == 1).unwrap();
        let branch = trees.iter().find(|t| t.root.leaves() == 2).unwrap();
        // P(Y) = 1/6 at the root, 1/2 per child; branch costs 1 + 0 + 2 bits plus two leaf bits.
        assert_abs_diff_eq!(leaf.log2_posterior, (1.0f64 / 6.0).log2() - 1.0, epsilon = 1e-12);
        let ratio = branch.log2_posterior - leaf.log2_posterior;
        let expected = (0.25f64).log2() - 3.0 - 2.0 - ((1.0f64 / 6.0).log2() - 1.0);
        assert_abs_diff_eq!(ratio, expected, epsilon = 1e-12);
    }

    #[test]
    fn pure_point_is_forced_leaf() {
        let d = data1d(&[0.4, 0.4], &[1, 1]);
        let mut rng = crate::rng::StreamRng::seed_from_u64(1);
        let t = sample_tree(&d, &ForestConfig::default(), &mut rng).unwrap();
        assert_eq!(t.root, Node::Leaf { counts: LabelCounts::new(vec![0, 2]).unwrap() });
        assert_eq!(t.log2_proposal, 0.0);
    }

    #[test]
    fn proposal_sums_to_one_over_enumeration() {
        for mode in [SplitMode::GapMinimal, SplitMode::Exhaustive { z_cap: 3 }] {
            let d = data1d(&[0.0, 0.45, 1.0], &[0, 1, 1]);
            let cfg = ForestConfig {
                split_mode: mode,
                ..ForestConfig::default()
            };
            let trees = enumerate_trees(&d, &cfg).unwrap();
            let total: f64 = trees.iter().map(|t| t.log2_proposal.exp2()).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            for t in &trees {
                assert_eq!(t.root.length(1, cfg.threshold_code).unwrap(), t.length_bits);
                assert_abs_diff_eq!(
                    t.log2_posterior,
                    t.root.log2_likelihood() - t.length_bits,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn node_prior_is_subnormalized_in_exhaustive_mode() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * 7 % 12) as f64]).collect();
        let y: Vec<usize> = (0..12).map(|i| i % 2).collect();
        let d = LabeledData::new(&rows, &y, 2).unwrap();
        let cfg = ForestConfig {
            split_mode: SplitMode::Exhaustive { z_cap: 10 },
            ..ForestConfig::default()
        };
        let splits = candidate_splits(&d, &all_indices(&d), &cfg);
        let mass: f64 = 0.5
            + splits
                .iter()
                .map(|s| node_prior_log2(Some(s), 2, cfg.threshold_code).unwrap().exp2())
                .sum::<f64>();
        assert!(mass <= 1.0 + 1e-12, "{mass}");
    }

    #[test]
    fn forest_weights_and_prediction() {
        let d = data1d(&[0.0, 1.0], &[0, 0]);
        let cfg = ForestConfig {
            trees: 1,
            ..ForestConfig::default()
        };
        let f = sample_forest(&d, &cfg).unwrap();
        assert_eq!(f.weights.weights(), &[1.0]);

        let t = TreeDescription {
            root: Node::Leaf { counts: LabelCounts::new(vec![2, 0]).unwrap() },
            length_bits: 1.0,
            log2_proposal: -1.0,
            log2_posterior: -3.0,
        };
        let f = WeightedForest::from_trees(vec![t.clone(), t.clone()], d.scaler().clone(), 2).unwrap();
        assert_eq!(f.weights.weights(), &[0.5, 0.5]);
        assert_eq!(f.predict(&[0.3]).weights(), &[0.75, 0.25]);

        let mut u = t.clone();
        u.root = Node::Leaf { counts: LabelCounts::new(vec![0, 2]).unwrap() };
        let f = WeightedForest::from_trees(vec![t.clone(), u], d.scaler().clone(), 2).unwrap();
        assert_abs_diff_eq!(f.predict(&[0.3]).weights()[0], 0.5, epsilon = 1e-15);

        let mut shifted = t.clone();
        shifted.log2_posterior += 100.0;
        let mut other = t;
        other.log2_proposal = -2.0;
        other.log2_posterior += 100.0;
        let a = WeightedForest::from_trees(vec![shifted, other], d.scaler().clone(), 2).unwrap();
        assert_abs_diff_eq!(a.weights.weights()[0], 1.0 / 3.0, epsilon = 1e-12);

        let empty = LabeledData::new(&[vec![0.0]], &[0], 2).unwrap();
        let one = WeightedForest::from_trees(
            vec![TreeDescription {
                root: Node::Leaf { counts: LabelCounts::zeros(2).unwrap() },
                length_bits: 1.0,
                log2_proposal: 0.0,
                log2_posterior: -1.0,
            }],
            empty.scaler().clone(),
            2,
        )
        .unwrap();
        assert_eq!(one.predict(&[5.0]).weights(), &[0.5, 0.5]);
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = data1d(&[0.0, 0.2, 0.5, 0.9, 1.0], &[0, 1, 0, 1, 1]);
        let cfg = ForestConfig {
            trees: 50,
            seed: 4,
            ..ForestConfig::default()
        };
        assert_eq!(sample_forest(&d, &cfg).unwrap(), sample_forest(&d, &cfg).unwrap());
    }

    #[test]
    fn schedule_validation() {
        assert!(AnnealSchedule::new(vec![0.0, 0.5]).is_err());
        assert!(AnnealSchedule::new(vec![1.5, 1.0]).is_err());
        let s = AnnealSchedule::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(s.alpha(0), 0.0);
        assert_eq!(s.alpha(9), 1.0);
    }

    #[test]
    fn scaler_constant_dimension() {
        let s = FeatureScaler::fit(&[vec![3.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.transform(&[3.0, 2.0]), vec![0.5, 0.5]);
        assert_eq!(s.unscale(0, s.scale(0, 7.0)), 7.0);
        assert_eq!(s.unscale(1, s.scale(1, 7.0)), 7.0);
    }

    #[test]
    fn entropy_reduction_examples() {
        assert_abs_diff_eq!(entropy_reduction(&[2, 0], &[0, 2]), 1.0, epsilon = 1e-15);
        assert_eq!(entropy_reduction(&[2, 2], &[0, 0]), 0.0);
    }

    #[test]
    fn conventional_tree_examples() {
        let t = entropy_split_tree(&[vec![1.0], vec![2.0]], &[1, 1], 2).unwrap();
        assert_eq!(t.predict(&[5.0]), vec![0.0, 1.0]);
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let t = entropy_split_tree(&rows, &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict(&[0.4]), vec![1.0, 0.0]);
        // XOR along one axis needs a zero-gain first split.
        let t = entropy_split_tree(&rows, &[0, 1, 1, 0], 2).unwrap();
        for (r, y) in rows.iter().zip([0, 1, 1, 0]) {
            assert_eq!(t.predict(r)[y], 1.0);
        }
    }

    #[test]
    fn bagging_examples() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let y = [0, 0, 1, 1];
        let single = bag_trees(&rows, &y, 2, &[vec![0, 1, 2, 3]]).unwrap();
        let tree = entropy_split_tree(&rows, &y, 2).unwrap();
        assert_eq!(single.predict(&[2.2]), tree.predict(&[2.2]));

        let one = bagging(&[vec![1.0]], &[0], 2, 5, 3).unwrap();
        assert!(one.trees.windows(2).all(|w| w[0] == w[1]));

        let pair = BaggedForest {
            trees: vec![
                ConventionalNode::Leaf { counts: vec![1, 0] },
                ConventionalNode::Leaf { counts: vec![0, 1] },
            ],
            labels: 2,
        };
        assert_eq!(pair.predict(&[0.0]), vec![0.5, 0.5]);
        assert_eq!(bagging(&rows, &y, 2, 3, 9).unwrap(), bagging(&rows, &y, 2, 3, 9).unwrap());
    }
}
