//! JSON artifacts. Every artifact carries `version` and `kind`; the schemas
//! under `schemas/` describe each kind.

use parsimony::forest::{ConventionalNode, FeatureScaler, ForestConfig, Node};
use parsimony::information::ParsimonyReport;
use parsimony::polyreg::{AxisMap, RegressionConfig, SamplerStats, SamplingMode};
use serde::{Deserialize, Serialize};

pub const VERSION: u32 = 1;

pub const REGRESS: &str = "regress_ensemble";
pub const REGRESS_BASELINE: &str = "regress_baseline";
pub const FOREST: &str = "forest";
pub const TREE_BASELINE: &str = "tree_baseline";
pub const BAGGING: &str = "bagging";
pub const REPORT: &str = "parsimony_report";
pub const INTERPRETERS: &str = "interpreter_prior";

/// Just enough to dispatch on an artifact.
#[derive(Debug, Deserialize)]
pub struct Header {
    pub version: u32,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressMember {
    pub degree: usize,
    /// `(z, i)` per coefficient, constant term first.
    pub fractions: Vec<(u32, u64)>,
    pub bits: String,
    pub length_bits: f64,
    pub log2_likelihood: f64,
    pub log2_weight: f64,
    /// Log2 likelihood gain over the zero polynomial.
    pub prediction_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressArtifact {
    pub version: u32,
    pub kind: String,
    pub seed: u64,
    pub mode: SamplingMode,
    pub config: RegressionConfig,
    pub axis_map: AxisMap,
    pub data_points: usize,
    pub zero_log2_likelihood: f64,
    pub sampler: SamplerStats,
    pub members: Vec<RegressMember>,
    pub report: ParsimonyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressBaselineArtifact {
    pub version: u32,
    pub kind: String,
    pub max_degree: usize,
    pub noise_sigma: f64,
    pub axis_map: AxisMap,
    pub selected_degree: usize,
    pub holdout_log2_likelihood: Vec<f64>,
    /// Chebyshev coefficients per fold, in noise units on the mapped axis.
    pub folds: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestTree {
    pub structure: Node,
    pub length_bits: f64,
    #[serde(rename = "log2_S")]
    pub log2_s: f64,
    pub log2_posterior: f64,
    pub weight: f64,
    pub inference_bits: f64,
    pub prediction_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestArtifact {
    pub version: u32,
    pub kind: String,
    pub seed: u64,
    pub config: ForestConfig,
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
    pub scaler: FeatureScaler,
    pub effective_sample_size: f64,
    pub trees: Vec<ForestTree>,
    pub report: ParsimonyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionalArtifact {
    pub version: u32,
    pub kind: String,
    pub seed: Option<u64>,
    pub feature_names: Vec<String>,
    pub label_names: Vec<String>,
    /// Training bounds per feature, used for prediction grids.
    pub bounds: FeatureScaler,
    pub trees: Vec<ConventionalNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub version: u32,
    pub kind: String,
    pub source_kind: String,
    pub baseline: String,
    pub members: usize,
    pub distinct_members: usize,
    pub report: ParsimonyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpreterArtifact {
    pub version: u32,
    pub kind: String,
    pub names: Vec<String>,
    pub tol: f64,
    /// Column-stochastic transition matrix, row-major.
    pub transition: Vec<Vec<f64>>,
    pub prior: Vec<f64>,
    pub residual: f64,
}
