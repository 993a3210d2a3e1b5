use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parsimony::codecs::IntCodeScheme;

#[derive(Debug, Parser)]
#[command(name = "parsimony", version, about = "Parsimonious inference with code-length hyperpriors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the codeword of an integer, or of a fraction with --fraction.
    Encode(EncodeArgs),
    /// Decode the leading codeword of a bit string.
    Decode(DecodeArgs),
    /// Kraft sum of a code over its range, or up to a value.
    Kraft(KraftArgs),
    /// Sample the hyperposterior over encoded Chebyshev polynomials.
    Regress(RegressArgs),
    /// Leave-one-out least-squares ensemble of the best degree.
    RegressBaseline(RegressBaselineArgs),
    /// Sample an importance-weighted forest of parsimonious trees.
    Forest(ForestArgs),
    /// Entropy-split decision tree.
    TreeBaseline(TreeBaselineArgs),
    /// Bootstrap-aggregated entropy-split trees.
    Bagging(BaggingArgs),
    /// Parsimony report for an ensemble artifact.
    Objective(ObjectiveArgs),
    /// Consistent prior over interpreters from simulator lengths.
    Interpreters(InterpretersArgs),
    /// Write a synthetic dataset.
    Synth(SynthArgs),
    /// Evaluate a fitted model on a grid, as CSV.
    PredictGrid(PredictGridArgs),
}

fn scheme(s: &str) -> Result<IntCodeScheme, String> {
    s.parse().map_err(|e: parsimony::codecs::CodecError| e.to_string())
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long, value_parser = scheme)]
    pub scheme: IntCodeScheme,
    #[arg(long, conflicts_with = "fraction", required_unless_present = "fraction")]
    pub value: Option<u64>,
    /// A fraction written `3/8`; the scheme codes its precision.
    #[arg(long)]
    pub fraction: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long, value_parser = scheme)]
    pub scheme: IntCodeScheme,
    #[arg(long)]
    pub bits: String,
    /// Decode a binary fraction instead of an integer.
    #[arg(long)]
    pub fraction: bool,
}

#[derive(Debug, Args)]
pub struct KraftArgs {
    #[arg(long, value_parser = scheme)]
    pub scheme: IntCodeScheme,
    #[arg(long)]
    pub up_to: Option<u64>,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Destination file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: Output,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 20)]
    pub max_degree: usize,
    #[arg(long, default_value_t = 4)]
    pub zmax: u32,
    #[arg(long, default_value = "lensym4", value_parser = scheme)]
    pub degree_code: IntCodeScheme,
    #[arg(long, default_value = "lensym4", value_parser = scheme)]
    pub fraction_code: IntCodeScheme,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sigma: f64,
    /// Weight descriptions by likelihood alone.
    #[arg(long)]
    pub flat_hyperprior: bool,
    /// Run the literal slice draw without the reverse-slice acceptance step.
    #[arg(long)]
    pub no_slice_correction: bool,
}

#[derive(Debug, Args)]
pub struct RegressBaselineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: Output,
    #[arg(long, default_value_t = 20)]
    pub max_degree: usize,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sigma: f64,
}

#[derive(Debug, Args)]
pub struct ForestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: Output,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trees: usize,
    /// Per-depth likelihood exponents, e.g. "0,0,1".
    #[arg(long, default_value = "0,0,1")]
    pub anneal: String,
    /// Highest threshold precision searched.
    #[arg(long, default_value_t = 10)]
    pub zmax: u32,
    #[arg(long, default_value = "lensym4", value_parser = scheme)]
    pub fraction_code: IntCodeScheme,
    /// Propose every representable threshold instead of one per gap.
    #[arg(long)]
    pub exhaustive: bool,
}

#[derive(Debug, Args)]
pub struct TreeBaselineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct BaggingArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: Output,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    /// The zero polynomial, for regression ensembles.
    Zero,
    /// Uniform label probabilities, for forests.
    Uniform,
}

#[derive(Debug, Args)]
pub struct ObjectiveArgs {
    #[arg(long)]
    pub ensemble: PathBuf,
    #[arg(long, value_enum)]
    pub baseline: Baseline,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct InterpretersArgs {
    /// Square CSV of simulator lengths with a header row of names.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: Output,
    #[arg(long, default_value_t = parsimony::interpreters::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Regress1d,
    Blocks2d,
    Mixed2d,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: SynthKind,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// blocks2d: extra share of points drawn from the label-a blocks, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub skew: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct PredictGridArgs {
    /// A regress, regress-baseline, forest, tree-baseline or bagging artifact.
    #[arg(long)]
    pub model: PathBuf,
    /// Grid size `N` for one input dimension or `NxM` for two.
    #[arg(long, default_value = "20x20")]
    pub grid: String,
    #[command(flatten)]
    pub out: Output,
}
