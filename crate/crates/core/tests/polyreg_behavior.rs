//! Statistical behavior of the regression sampler on fixed-seed data.

use parsimony::codecs::BinaryFraction;
use parsimony::polyreg::{
    description_length, sample_ensemble, PolyDescription, RegressionConfig, RegressionDataset, SamplingMode,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn noisy(n: usize, offset: f64, spread: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            (i as f64 / n as f64, offset + spread * e)
        })
        .collect()
}

fn mean_length(members: &[PolyDescription], cfg: &RegressionConfig) -> f64 {
    members.iter().map(|d| description_length(d, cfg).unwrap()).sum::<f64>() / members.len() as f64
}

#[test]
fn pure_noise_settles_on_zero_polynomial() {
    let data = RegressionDataset::new(&noisy(50, 0.0, 1.0, 1), 1.0).unwrap();
    let cfg = RegressionConfig {
        samples: 20,
        seed: 3,
        ..RegressionConfig::default()
    };
    let ens = sample_ensemble(&data, &cfg, SamplingMode::Parsimonious).unwrap();
    let zeros = ens.members.iter().filter(|d| d.is_zero()).count();
    assert!(zeros as f64 >= 0.8 * 20.0, "zero polynomial in {zeros} of 20 sweeps");
}

#[test]
fn flat_hyperprior_prefers_longer_descriptions() {
    let data = RegressionDataset::new(&noisy(50, 0.0, 1.0, 1), 1.0).unwrap();
    let cfg = RegressionConfig {
        samples: 20,
        seed: 3,
        ..RegressionConfig::default()
    };
    let pars = sample_ensemble(&data, &cfg, SamplingMode::Parsimonious).unwrap();
    let flat = sample_ensemble(&data, &cfg, SamplingMode::FlatHyperprior).unwrap();
    assert!(mean_length(&flat.members, &cfg) > mean_length(&pars.members, &cfg));
}

#[test]
fn constant_signal_recovers_nearest_coefficient() {
    // y ≈ 1, exactly tan(π/4), the fraction 3/4; the data are quieter than the assumed unit noise.
    let data = RegressionDataset::new(&noisy(60, 1.0, 0.1, 9), 1.0).unwrap();
    let cfg = RegressionConfig {
        samples: 40,
        seed: 4,
        ..RegressionConfig::default()
    };
    let ens = sample_ensemble(&data, &cfg, SamplingMode::Parsimonious).unwrap();
    let target = BinaryFraction::new(1, 2).unwrap();
    let hits = ens
        .members
        .iter()
        .filter(|d| d.degree() == 0 && d.coeffs()[0] == target)
        .count();
    assert!(hits as f64 >= 0.9 * 40.0, "constant 3/4 in {hits} of 40 sweeps");
}

#[test]
fn empty_data_samples_the_prior_around_its_mode() {
    let data = RegressionDataset::new(&[], 1.0).unwrap();
    let cfg = RegressionConfig {
        samples: 400,
        seed: 8,
        ..RegressionConfig::default()
    };
    let ens = sample_ensemble(&data, &cfg, SamplingMode::Parsimonious).unwrap();
    let mut counts = std::collections::HashMap::new();
    for d in &ens.members {
        *counts.entry(d.clone()).or_insert(0usize) += 1;
    }
    let (mode, _) = counts.iter().max_by_key(|(_, c)| **c).unwrap();
    assert!(mode.is_zero());
    let one = RegressionConfig { samples: 1, ..cfg };
    assert_eq!(sample_ensemble(&data, &one, SamplingMode::Parsimonious).unwrap().members.len(), 1);
}

#[test]
fn predictive_widens_outside_the_data() {
    let pts: Vec<(f64, f64)> = noisy(12, 0.0, 1.0, 21)
        .into_iter()
        .map(|(x, e)| (x, 2.0 * x - 1.0 + 0.5 * e))
        .collect();
    let data = RegressionDataset::new(&pts, 0.5).unwrap();
    let cfg = RegressionConfig {
        samples: 100,
        seed: 2,
        noise_sigma: 0.5,
        ..RegressionConfig::default()
    };
    let ens = sample_ensemble(&data, &cfg, SamplingMode::Parsimonious).unwrap();
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    let median = 0.5 * (xs[5] + xs[6]);
    let outside = data.map().inverse(2.0);
    let inside_sd = ens.predict(median).unwrap().std_dev();
    let outside_sd = ens.predict(outside).unwrap().std_dev();
    assert!(outside_sd >= inside_sd, "{outside_sd} vs {inside_sd}");
}
