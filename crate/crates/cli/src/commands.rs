use std::collections::HashSet;
use std::path::Path;

use parsimony::codecs::{
    fraction_decode, fraction_encode, integer_decode, integer_encode, kraft_sum, parse_bits, BinaryFraction,
};
use parsimony::forest::{
    bagging, entropy_split_tree, sample_forest, AnnealSchedule, BaggedForest, ForestConfig, LabeledData, Node,
    SplitMode, TreeDescription, WeightedForest,
};
use parsimony::information::{
    dirichlet_inference_info, dirichlet_prediction_info, parsimony_report, DiscreteDist, EnsembleMember,
    ParsimonyReport,
};
use parsimony::interpreters::{stationary_prior, transition_matrix, SimulatorLengths};
use parsimony::polyreg::{
    description_length, log2_likelihood, log_posterior_weight, loo_baseline, sample_ensemble, LooEnsemble,
    PolyDescription, PolyEnsemble, RegressionConfig, RegressionDataset, SamplingMode,
};
use serde::Serialize;

use crate::args::*;
use crate::artifacts::*;
use crate::data::{csv_bytes, parse_classification, parse_matrix, parse_regression, read_text, write_output};
use crate::error::{CliError, Result};
use crate::synth;

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Kraft(a) => kraft(a),
        Command::Regress(a) => regress(a),
        Command::RegressBaseline(a) => regress_baseline(a),
        Command::Forest(a) => forest(a),
        Command::TreeBaseline(a) => tree_baseline(a),
        Command::Bagging(a) => bagging_cmd(a),
        Command::Objective(a) => objective(a),
        Command::Interpreters(a) => interpreters(a),
        Command::Synth(a) => synth_cmd(a),
        Command::PredictGrid(a) => predict_grid(a),
    }
}

fn print_line(s: &str) -> Result<()> {
    write_output(None, format!("{s}\n").as_bytes())
}

fn write_json<T: Serialize>(out: &Output, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_output(out.output.as_deref(), text.as_bytes())
}

fn encode(a: EncodeArgs) -> Result<()> {
    let code = match (&a.fraction, a.value) {
        (Some(f), _) => fraction_encode(a.scheme, BinaryFraction::parse(f).map_err(CliError::flag)?),
        (None, Some(z)) => integer_encode(a.scheme, z),
        (None, None) => return Err(CliError::BadFlag("one of --value or --fraction is required".into())),
    }
    .map_err(CliError::input)?;
    let bits = code
        .bits()
        .ok_or_else(|| CliError::BadFlag(format!("{} has no binary rendering", a.scheme)))?;
    print_line(&bits)
}

fn decode(a: DecodeArgs) -> Result<()> {
    let bits = parse_bits(&a.bits).map_err(CliError::flag)?;
    if a.fraction {
        let (f, used) = fraction_decode(a.scheme, &bits).map_err(CliError::input)?;
        print_line(&format!("{f} {used}"))
    } else {
        let (z, used) = integer_decode(a.scheme, &bits).map_err(CliError::input)?;
        print_line(&format!("{z} {used}"))
    }
}

fn kraft(a: KraftArgs) -> Result<()> {
    let sum = kraft_sum(a.scheme, a.up_to).map_err(CliError::flag)?;
    print_line(&format!("{sum}"))
}

fn regress(a: RegressArgs) -> Result<()> {
    let cfg = RegressionConfig {
        max_degree: a.max_degree,
        z_max: a.zmax,
        degree_code: a.degree_code,
        fraction_code: a.fraction_code,
        noise_sigma: a.noise_sigma,
        samples: a.samples,
        seed: a.seed,
        slice_correction: !a.no_slice_correction,
        ..RegressionConfig::default()
    };
    cfg.validate().map_err(CliError::flag)?;
    if a.samples == 0 {
        return Err(CliError::BadFlag("--samples must be at least 1".into()));
    }
    let mode = if a.flat_hyperprior {
        SamplingMode::FlatHyperprior
    } else {
        SamplingMode::Parsimonious
    };
    let points = parse_regression(&read_text(&a.input)?)?;
    let data = RegressionDataset::new(&points, cfg.noise_sigma).map_err(CliError::input)?;
    let ens = sample_ensemble(&data, &cfg, mode).map_err(CliError::flag)?;
    let artifact = regress_artifact(&data, &ens)?;
    write_json(&a.out, &artifact)
}

/// Members, weights and report of a regression ensemble against the zero polynomial.
pub fn regress_artifact(data: &RegressionDataset, ens: &PolyEnsemble) -> Result<RegressArtifact> {
    let cfg = &ens.config;
    let zero = log2_likelihood(&PolyDescription::zero(), data, cfg);
    let members = ens
        .members
        .iter()
        .map(|d| {
            let lik = log2_likelihood(d, data, cfg);
            Ok(RegressMember {
                degree: d.degree(),
                fractions: d.coeffs().iter().map(|f| (f.precision(), f.index())).collect(),
                bits: d
                    .encode(cfg)
                    .map_err(CliError::flag)?
                    .bits()
                    .ok_or_else(|| CliError::BadFlag("codes must be binary".into()))?,
                length_bits: description_length(d, cfg).map_err(CliError::flag)?,
                log2_likelihood: lik,
                log2_weight: log_posterior_weight(d, data, cfg, ens.mode).map_err(CliError::flag)?,
                prediction_bits: lik - zero,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = regress_report(&members)?;
    Ok(RegressArtifact {
        version: VERSION,
        kind: REGRESS.into(),
        seed: cfg.seed,
        mode: ens.mode,
        config: cfg.clone(),
        axis_map: ens.map,
        data_points: data.len(),
        zero_log2_likelihood: zero,
        sampler: ens.stats,
        members,
        report,
    })
}

fn regress_report(members: &[RegressMember]) -> Result<ParsimonyReport> {
    let ens: Vec<EnsembleMember> = members
        .iter()
        .map(|m| EnsembleMember {
            key: m.bits.clone(),
            length_bits: m.length_bits,
            inference_bits: 0.0,
            prediction_bits: m.prediction_bits,
        })
        .collect();
    parsimony_report(&ens, &DiscreteDist::uniform(ens.len())).map_err(CliError::input)
}

fn regress_baseline(a: RegressBaselineArgs) -> Result<()> {
    if !(a.noise_sigma > 0.0 && a.noise_sigma.is_finite()) {
        return Err(CliError::BadFlag("--noise-sigma must be positive".into()));
    }
    let points = parse_regression(&read_text(&a.input)?)?;
    let data = RegressionDataset::new(&points, a.noise_sigma).map_err(CliError::input)?;
    let loo = loo_baseline(&data, a.max_degree).map_err(CliError::input)?;
    write_json(
        &a.out,
        &RegressBaselineArtifact {
            version: VERSION,
            kind: REGRESS_BASELINE.into(),
            max_degree: a.max_degree,
            noise_sigma: a.noise_sigma,
            axis_map: loo.map,
            selected_degree: loo.degree,
            holdout_log2_likelihood: loo.holdout_log2_likelihood,
            folds: loo.folds,
        },
    )
}

pub fn parse_schedule(s: &str) -> Result<AnnealSchedule> {
    let alphas = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| CliError::BadFlag(format!("--anneal '{s}' is not a comma-separated list of numbers")))?;
    AnnealSchedule::new(alphas).map_err(CliError::flag)
}

fn leaf_terms(node: &Node) -> (f64, f64) {
    match node {
        Node::Leaf { counts } => (dirichlet_inference_info(counts), dirichlet_prediction_info(counts)),
        Node::Branch { left, right, .. } => {
            let (a, b) = leaf_terms(left);
            let (c, d) = leaf_terms(right);
            (a + c, b + d)
        }
    }
}

fn forest(a: ForestArgs) -> Result<()> {
    let cfg = ForestConfig {
        trees: a.trees,
        schedule: parse_schedule(&a.anneal)?,
        threshold_code: a.fraction_code,
        split_mode: if a.exhaustive {
            SplitMode::Exhaustive { z_cap: a.zmax }
        } else {
            SplitMode::GapMinimal
        },
        z_cap: a.zmax,
        seed: a.seed,
    };
    cfg.validate().map_err(CliError::flag)?;
    let c = parse_classification(&read_text(&a.input)?)?;
    let data = LabeledData::new(&c.rows, &c.y, c.label_names.len()).map_err(CliError::input)?;
    let f = sample_forest(&data, &cfg).map_err(CliError::input)?;
    write_json(&a.out, &forest_artifact(&f, &cfg, c.feature_names, c.label_names)?)
}

pub fn forest_artifact(
    f: &WeightedForest,
    cfg: &ForestConfig,
    feature_names: Vec<String>,
    label_names: Vec<String>,
) -> Result<ForestArtifact> {
    let trees: Vec<ForestTree> = f
        .trees
        .iter()
        .zip(f.weights.weights())
        .map(|(t, &w)| {
            let (inference_bits, prediction_bits) = leaf_terms(&t.root);
            ForestTree {
                structure: t.root.clone(),
                length_bits: t.length_bits,
                log2_s: t.log2_proposal,
                log2_posterior: t.log2_posterior,
                weight: w,
                inference_bits,
                prediction_bits,
            }
        })
        .collect();
    let report = forest_report(&trees)?;
    Ok(ForestArtifact {
        version: VERSION,
        kind: FOREST.into(),
        seed: cfg.seed,
        config: cfg.clone(),
        feature_names,
        label_names,
        scaler: f.scaler.clone(),
        effective_sample_size: f.effective_sample_size(),
        trees,
        report,
    })
}

fn tree_key(node: &Node) -> Result<String> {
    serde_json::to_string(node).map_err(|e| CliError::Io(e.to_string()))
}

fn forest_report(trees: &[ForestTree]) -> Result<ParsimonyReport> {
    let members = trees
        .iter()
        .map(|t| {
            Ok(EnsembleMember {
                key: tree_key(&t.structure)?,
                length_bits: t.length_bits,
                inference_bits: t.inference_bits,
                prediction_bits: t.prediction_bits,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = DiscreteDist::normalize(trees.iter().map(|t| t.weight).collect()).map_err(CliError::input)?;
    parsimony_report(&members, &weights).map_err(CliError::input)
}

fn tree_baseline(a: TreeBaselineArgs) -> Result<()> {
    let c = parse_classification(&read_text(&a.input)?)?;
    let tree = entropy_split_tree(&c.rows, &c.y, c.label_names.len()).map_err(CliError::input)?;
    let bounds = parsimony::forest::FeatureScaler::fit(&c.rows).map_err(CliError::input)?;
    write_json(
        &a.out,
        &ConventionalArtifact {
            version: VERSION,
            kind: TREE_BASELINE.into(),
            seed: None,
            feature_names: c.feature_names,
            label_names: c.label_names,
            bounds,
            trees: vec![tree],
        },
    )
}

fn bagging_cmd(a: BaggingArgs) -> Result<()> {
    if a.trees == 0 {
        return Err(CliError::BadFlag("--trees must be at least 1".into()));
    }
    let c = parse_classification(&read_text(&a.input)?)?;
    let bag = bagging(&c.rows, &c.y, c.label_names.len(), a.trees, a.seed).map_err(CliError::input)?;
    let bounds = parsimony::forest::FeatureScaler::fit(&c.rows).map_err(CliError::input)?;
    write_json(
        &a.out,
        &ConventionalArtifact {
            version: VERSION,
            kind: BAGGING.into(),
            seed: Some(a.seed),
            feature_names: c.feature_names,
            label_names: c.label_names,
            bounds,
            trees: bag.trees,
        },
    )
}

fn read_artifact(path: &Path) -> Result<(Header, String)> {
    let text = read_text(path)?;
    let header: Header = serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))?;
    if header.version != VERSION {
        return Err(CliError::BadInput(format!("unsupported artifact version {}", header.version)));
    }
    Ok((header, text))
}

fn parse_as<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(CliError::input)
}

fn objective(a: ObjectiveArgs) -> Result<()> {
    let (header, text) = read_artifact(&a.ensemble)?;
    let (report, members, distinct) = match (header.kind.as_str(), a.baseline) {
        (REGRESS, Baseline::Zero) => {
            let art: RegressArtifact = parse_as(&text)?;
            let distinct = art.members.iter().map(|m| &m.bits).collect::<HashSet<_>>().len();
            (regress_report(&art.members)?, art.members.len(), distinct)
        }
        (FOREST, Baseline::Uniform) => {
            let art: ForestArtifact = parse_as(&text)?;
            let keys = art.trees.iter().map(|t| tree_key(&t.structure)).collect::<Result<HashSet<_>>>()?;
            (forest_report(&art.trees)?, art.trees.len(), keys.len())
        }
        (REGRESS, Baseline::Uniform) | (FOREST, Baseline::Zero) => {
            return Err(CliError::BadFlag(format!(
                "baseline {:?} does not apply to a {} artifact",
                format!("{:?}", a.baseline).to_lowercase(), header.kind
            )))
        }
        (other, _) => return Err(CliError::BadInput(format!("no objective for artifact kind '{other}'"))),
    };
    write_json(
        &a.out,
        &ReportArtifact {
            version: VERSION,
            kind: REPORT.into(),
            source_kind: header.kind,
            baseline: format!("{:?}", a.baseline).to_lowercase(),
            members,
            distinct_members: distinct,
            report,
        },
    )
}

fn interpreters(a: InterpretersArgs) -> Result<()> {
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(CliError::BadFlag("--tol must be positive".into()));
    }
    let (names, m) = parse_matrix(&read_text(&a.input)?)?;
    let lengths = SimulatorLengths::new(m).map_err(CliError::input)?;
    let t = transition_matrix(&lengths);
    let prior = stationary_prior(&t, a.tol).map_err(CliError::input)?;
    let residual = t
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let tp: f64 = row.iter().zip(prior.weights()).map(|(x, y)| x * y).sum();
            (tp - prior.weights()[i]).abs()
        })
        .fold(0.0, f64::max);
    write_json(
        &a.out,
        &InterpreterArtifact {
            version: VERSION,
            kind: INTERPRETERS.into(),
            names,
            tol: a.tol,
            transition: t,
            prior: prior.into_inner(),
            residual,
        },
    )
}

fn synth_cmd(a: SynthArgs) -> Result<()> {
    let d = synth::generate(a.kind, a.n, a.seed, a.skew)?;
    write_output(a.out.output.as_deref(), &csv_bytes(&d.header, &d.rows, &d.comments)?)
}

/// Parses `N` or `NxM`.
pub fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let dims = s
        .split('x')
        .map(|v| v.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| CliError::BadFlag(format!("--grid '{s}' must look like N or NxM")))?;
    if dims.is_empty() || dims.len() > 2 || dims.contains(&0) {
        return Err(CliError::BadFlag(format!("--grid '{s}' must look like N or NxM with N, M >= 1")));
    }
    Ok(dims)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Grid points over the training bounds, the last dimension varying fastest.
/// A feature with a single observed value gets a unit-wide range around it,
/// matching how the scaler treats it.
fn feature_grid(bounds: &parsimony::forest::FeatureScaler, dims: &[usize]) -> Result<Vec<Vec<f64>>> {
    let k = bounds.dims();
    let axis = |d: usize, n: usize| {
        let (lo, hi) = (bounds.mins[d], bounds.maxs[d]);
        if hi > lo {
            linspace(lo, hi, n)
        } else {
            linspace(lo - 0.5, lo + 0.5, n)
        }
    };
    match (k, dims) {
        (1, [n]) => Ok(axis(0, *n).into_iter().map(|x| vec![x]).collect()),
        (2, [n, m]) => {
            let (xs, ys) = (axis(0, *n), axis(1, *m));
            Ok(xs.iter().flat_map(|&x| ys.iter().map(move |&y| vec![x, y])).collect())
        }
        _ => Err(CliError::BadFlag(format!(
            "--grid has {} dimensions but the model has {k} features",
            dims.len()
        ))),
    }
}

fn regression_grid(dims: &[usize], map: parsimony::polyreg::AxisMap) -> Result<Vec<f64>> {
    match dims {
        // Twice the data range, centred on it, to show extrapolation.
        [n] => Ok(linspace(map.inverse(-2.0), map.inverse(2.0), *n)),
        _ => Err(CliError::BadFlag("regression models take a one-dimensional --grid N".into())),
    }
}

fn predict_grid(a: PredictGridArgs) -> Result<()> {
    let dims = parse_grid(&a.grid)?;
    let (header, text) = read_artifact(&a.model)?;
    let (head, rows): (Vec<String>, Vec<Vec<String>>) = match header.kind.as_str() {
        REGRESS => {
            let art: RegressArtifact = parse_as(&text)?;
            let members = art
                .members
                .iter()
                .map(|m| {
                    m.fractions
                        .iter()
                        .map(|&(z, i)| BinaryFraction::new(z, i))
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map(PolyDescription::from_coeffs)
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(CliError::input)?;
            let ens = PolyEnsemble {
                members,
                map: art.axis_map,
                config: art.config,
                mode: art.mode,
                stats: art.sampler,
            };
            let rows = regression_grid(&dims, ens.map)?
                .into_iter()
                .map(|x| {
                    let p = ens.predict(x).map_err(CliError::input)?;
                    Ok(predictive_row(x, &p))
                })
                .collect::<Result<Vec<_>>>()?;
            (predictive_header(), rows)
        }
        REGRESS_BASELINE => {
            let art: RegressBaselineArtifact = parse_as(&text)?;
            let loo = LooEnsemble {
                degree: art.selected_degree,
                folds: art.folds,
                holdout_log2_likelihood: art.holdout_log2_likelihood,
                map: art.axis_map,
                noise_sigma: art.noise_sigma,
            };
            let rows = regression_grid(&dims, loo.map)?
                .into_iter()
                .map(|x| {
                    let p = loo.predict(x).map_err(CliError::input)?;
                    Ok(predictive_row(x, &p))
                })
                .collect::<Result<Vec<_>>>()?;
            (predictive_header(), rows)
        }
        FOREST => {
            let art: ForestArtifact = parse_as(&text)?;
            let trees = art
                .trees
                .iter()
                .map(|t| TreeDescription {
                    root: t.structure.clone(),
                    length_bits: t.length_bits,
                    log2_proposal: t.log2_s,
                    log2_posterior: t.log2_posterior,
                })
                .collect();
            let weights = DiscreteDist::normalize(art.trees.iter().map(|t| t.weight).collect())
                .map_err(CliError::input)?;
            let f = WeightedForest {
                trees,
                weights,
                scaler: art.scaler.clone(),
                labels: art.label_names.len(),
            };
            let grid = feature_grid(&art.scaler, &dims)?;
            let rows = grid
                .iter()
                .map(|x| class_row(x, f.predict(x).weights()))
                .collect();
            (class_header(&art.feature_names, &art.label_names), rows)
        }
        TREE_BASELINE | BAGGING => {
            let art: ConventionalArtifact = parse_as(&text)?;
            let bag = BaggedForest {
                trees: art.trees,
                labels: art.label_names.len(),
            };
            let grid = feature_grid(&art.bounds, &dims)?;
            let rows = grid.iter().map(|x| class_row(x, &bag.predict(x))).collect();
            (class_header(&art.feature_names, &art.label_names), rows)
        }
        other => return Err(CliError::BadInput(format!("cannot predict from artifact kind '{other}'"))),
    };
    write_output(a.out.output.as_deref(), &csv_bytes(&head, &rows, &[])?)
}

fn predictive_header() -> Vec<String> {
    ["x", "mean", "sd", "q05", "q50", "q95"].map(String::from).to_vec()
}

fn predictive_row(x: f64, p: &parsimony::polyreg::Predictive) -> Vec<String> {
    vec![
        fmt(x),
        fmt(p.mean()),
        fmt(p.std_dev()),
        fmt(p.quantile(0.05)),
        fmt(p.quantile(0.5)),
        fmt(p.quantile(0.95)),
    ]
}

fn class_header(features: &[String], labels: &[String]) -> Vec<String> {
    features
        .iter()
        .cloned()
        .chain(labels.iter().map(|l| format!("p_{l}")))
        .collect()
}

fn class_row(x: &[f64], probs: &[f64]) -> Vec<String> {
    x.iter().chain(probs).map(|&v| fmt(v)).collect()
}
