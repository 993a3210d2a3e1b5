//! Hyperposterior sampling over encoded Chebyshev polynomials.
//!
//! A description is a degree followed by one binary fraction per basis
//! coefficient. Fractions map to reals through [`FractionMap`], and `q = 1/2`
//! is the zero coefficient, so short codes favor sparse, low-degree
//! polynomials. [`sample_ensemble`] runs a Gibbs-style sampler that, for each
//! basis index `j` in a fresh random order, enumerates every joint value of
//! coefficient `j` and the current leading coefficient `k`, and draws from the
//! hyperposterior restricted to that slice.
//!
//! The slice depends on the state's leading index, so two states in one slice
//! need not share it. With `slice_correction` enabled (the default) each draw
//! is accepted with probability `min(1, Z_A / Z_B)`, where `Z_A` and `Z_B` are
//! the total weight of the forward and reverse slices, and rejected outright
//! when the reverse slice cannot reach the current state. This keeps the
//! hyperposterior exactly invariant; when both slices coincide it reduces to
//! the plain conditional draw.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::codecs::{
    fraction_encode, fraction_length, fraction_to_real, integer_encode, precision_representable,
    BinaryFraction, Code, CodecError, FractionMap, IntCodeScheme,
};
use crate::information::log2_sum_exp2;
use crate::rng::{sample_log2, stream, StreamRng};

const LOG2_SQRT_2PI: f64 = 1.325_748_064_736_159;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("ensemble is empty")]
    EmptyEnsemble,
}

pub type Result<T> = std::result::Result<T, RegressionError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Weights `P(Y|ψ) 2^-L(ψ)`.
    Parsimonious,
    /// Weights `P(Y|ψ)`: the hyperprior replaced by a uniform one.
    FlatHyperprior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    /// Highest Chebyshev basis index considered.
    pub max_degree: usize,
    /// Highest fraction precision proposed for a coefficient.
    pub z_max: u32,
    pub degree_code: IntCodeScheme,
    pub fraction_code: IntCodeScheme,
    pub coeff_map: FractionMap,
    pub coeff_scale: f64,
    pub noise_sigma: f64,
    pub samples: usize,
    pub seed: u64,
    pub slice_correction: bool,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            max_degree: 20,
            z_max: 4,
            degree_code: IntCodeScheme::LengthSymbol(4),
            fraction_code: IntCodeScheme::LengthSymbol(4),
            coeff_map: FractionMap::Tangent,
            coeff_scale: 1.0,
            noise_sigma: 1.0,
            samples: 50,
            seed: 0,
            slice_correction: true,
        }
    }
}

impl RegressionConfig {
    pub fn validate(&self) -> Result<()> {
        self.degree_code.validate()?;
        self.fraction_code.validate()?;
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return Err(RegressionError::InvalidConfig("noise_sigma must be positive".into()));
        }
        if !(self.coeff_scale > 0.0 && self.coeff_scale.is_finite()) {
            return Err(RegressionError::InvalidConfig("coeff_scale must be positive".into()));
        }
        if self.z_max > 20 {
            return Err(RegressionError::InvalidConfig("z_max above 20 is not supported".into()));
        }
        if !self.degree_code.represents(0) {
            return Err(RegressionError::InvalidConfig("degree code cannot state degree 0".into()));
        }
        Ok(())
    }

    /// Highest degree that is both allowed and representable by the degree code.
    pub fn degree_cap(&self) -> usize {
        match self.degree_code.max_value() {
            Some(max) => self.max_degree.min(max.min(usize::MAX as u64) as usize),
            None => self.max_degree,
        }
    }

    /// Fractions with precision `<= z_max` that the fraction code can state.
    pub fn fraction_alphabet(&self) -> Vec<BinaryFraction> {
        (0..=self.z_max)
            .filter(|&z| precision_representable(self.fraction_code, z))
            .flat_map(BinaryFraction::with_precision)
            .collect()
    }

    pub fn coefficient_value(&self, f: BinaryFraction) -> f64 {
        fraction_to_real(f.value(), self.coeff_map, self.coeff_scale)
    }
}

/// Affine map from the observed abscissa range onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisMap {
    pub center: f64,
    pub half_width: f64,
}

impl AxisMap {
    pub fn identity() -> Self {
        AxisMap {
            center: 0.0,
            half_width: 1.0,
        }
    }

    /// Maps `[min, max]` onto `[-1, 1]`; a degenerate range is only shifted.
    pub fn fit(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self::identity();
        }
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            AxisMap {
                center: 0.5 * (lo + hi),
                half_width: 0.5 * (hi - lo),
            }
        } else {
            AxisMap {
                center: lo,
                half_width: 1.0,
            }
        }
    }

    pub fn forward(&self, x: f64) -> f64 {
        (x - self.center) / self.half_width
    }

    pub fn inverse(&self, u: f64) -> f64 {
        u * self.half_width + self.center
    }
}

/// Observations with abscissas mapped to `[-1, 1]` and ordinates divided by
/// the noise scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    xs: Vec<f64>,
    ys: Vec<f64>,
    map: AxisMap,
    noise_sigma: f64,
}

impl RegressionDataset {
    pub fn new(points: &[(f64, f64)], noise_sigma: f64) -> Result<Self> {
        if !(noise_sigma > 0.0 && noise_sigma.is_finite()) {
            return Err(RegressionError::InvalidConfig("noise_sigma must be positive".into()));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(RegressionError::InvalidData("non-finite coordinate".into()));
        }
        let raw_x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let map = AxisMap::fit(&raw_x);
        Ok(RegressionDataset {
            xs: raw_x.iter().map(|&x| map.forward(x)).collect(),
            ys: points.iter().map(|p| p.1 / noise_sigma).collect(),
            map,
            noise_sigma,
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Abscissas on `[-1, 1]`.
    pub fn scaled_x(&self) -> &[f64] {
        &self.xs
    }

    /// Ordinates in noise units.
    pub fn scaled_y(&self) -> &[f64] {
        &self.ys
    }

    pub fn map(&self) -> AxisMap {
        self.map
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }
}

/// `Σ c_n T_n(x)` by the three-term recurrence. Outside `[-1, 1]` this is
/// the polynomial's analytic continuation.
pub fn chebyshev_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    let (mut prev, mut cur) = (1.0, x);
    for (n, &c) in coeffs.iter().enumerate() {
        let t = match n {
            0 => 1.0,
            1 => x,
            _ => {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
                next
            }
        };
        sum += c * t;
    }
    sum
}

/// `T_0(x) .. T_degree(x)`.
pub fn chebyshev_basis(degree: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(degree + 1);
    out.push(1.0);
    if degree >= 1 {
        out.push(x);
    }
    for n in 2..=degree {
        let next = 2.0 * x * out[n - 1] - out[n - 2];
        out.push(next);
    }
    out
}

/// A polynomial description in canonical form: trailing zero coefficients
/// (`q = 1/2`) are dropped, so the degree is the highest index with a
/// nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolyDescription {
    coeffs: Vec<BinaryFraction>,
}

impl PolyDescription {
    pub fn zero() -> Self {
        PolyDescription {
            coeffs: vec![BinaryFraction::half()],
        }
    }

    /// Canonicalizes an arbitrary coefficient list.
    pub fn from_coeffs(mut coeffs: Vec<BinaryFraction>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(BinaryFraction::is_half) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BinaryFraction::half());
        }
        PolyDescription { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BinaryFraction] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_half()
    }

    pub fn real_coeffs(&self, cfg: &RegressionConfig) -> Vec<f64> {
        self.coeffs.iter().map(|&f| cfg.coefficient_value(f)).collect()
    }

    /// Value in noise units at a scaled abscissa.
    pub fn eval_scaled(&self, cfg: &RegressionConfig, u: f64) -> f64 {
        chebyshev_eval(&self.real_coeffs(cfg), u)
    }

    pub fn encode(&self, cfg: &RegressionConfig) -> Result<Code> {
        let mut code = integer_encode(cfg.degree_code, self.degree() as u64)?;
        for &f in &self.coeffs {
            code.append(&fraction_encode(cfg.fraction_code, f)?);
        }
        Ok(code)
    }
}

/// Generalized length of the degree code plus every coefficient code.
pub fn description_length(d: &PolyDescription, cfg: &RegressionConfig) -> Result<f64> {
    let mut total = cfg.degree_code.length_of(d.degree() as u64)?;
    for &f in d.coeffs() {
        total += fraction_length(cfg.fraction_code, f)?;
    }
    Ok(total)
}

/// `Σ_i log2 N(y_i | p(x_i), 1)` in noise units.
pub fn log2_likelihood(d: &PolyDescription, data: &RegressionDataset, cfg: &RegressionConfig) -> f64 {
    let coeffs = d.real_coeffs(cfg);
    data.xs
        .iter()
        .zip(&data.ys)
        .map(|(&x, &y)| gaussian_log2(y - chebyshev_eval(&coeffs, x)))
        .sum()
}

fn gaussian_log2(residual: f64) -> f64 {
    -LOG2_SQRT_2PI - residual * residual / (2.0 * std::f64::consts::LN_2)
}

/// Unnormalized log2 hyperposterior weight.
pub fn log_posterior_weight(
    d: &PolyDescription,
    data: &RegressionDataset,
    cfg: &RegressionConfig,
    mode: SamplingMode,
) -> Result<f64> {
    let lik = log2_likelihood(d, data, cfg);
    Ok(match mode {
        SamplingMode::Parsimonious => lik - description_length(d, cfg)?,
        SamplingMode::FlatHyperprior => lik,
    })
}

/// Enumerated slice sampler over alphabet indices.
pub struct GibbsSampler<'a> {
    data: &'a RegressionDataset,
    cfg: &'a RegressionConfig,
    mode: SamplingMode,
    alphabet: Vec<BinaryFraction>,
    values: Vec<f64>,
    frac_len: Vec<f64>,
    degree_len: Vec<f64>,
    /// `basis[j][i] = T_j(x_i)`.
    basis: Vec<Vec<f64>>,
    half: usize,
    /// Alphabet index per basis coefficient, `degree_cap + 1` entries.
    state: Vec<usize>,
    /// Current polynomial values at the data abscissas.
    fitted: Vec<f64>,
    accepted: u64,
    proposed: u64,
}

/// Counters from a sampling run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(data: &'a RegressionDataset, cfg: &'a RegressionConfig, mode: SamplingMode) -> Result<Self> {
        cfg.validate()?;
        if (data.noise_sigma - cfg.noise_sigma).abs() > 0.0 {
            return Err(RegressionError::InvalidConfig(
                "dataset was scaled with a different noise_sigma".into(),
            ));
        }
        let alphabet = cfg.fraction_alphabet();
        let half = alphabet
            .iter()
            .position(BinaryFraction::is_half)
            .ok_or_else(|| RegressionError::InvalidConfig("fraction code cannot state 1/2".into()))?;
        let values = alphabet.iter().map(|&f| cfg.coefficient_value(f)).collect();
        let frac_len = alphabet
            .iter()
            .map(|&f| fraction_length(cfg.fraction_code, f))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let cap = cfg.degree_cap();
        let degree_len = (0..=cap)
            .map(|d| cfg.degree_code.length_of(d as u64))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut basis = vec![Vec::with_capacity(data.len()); cap + 1];
        for &x in &data.xs {
            for (j, t) in chebyshev_basis(cap, x).into_iter().enumerate() {
                basis[j].push(t);
            }
        }
        Ok(GibbsSampler {
            data,
            cfg,
            mode,
            alphabet,
            values,
            frac_len,
            degree_len,
            basis,
            half,
            state: vec![half; cap + 1],
            fitted: vec![0.0; data.len()],
            accepted: 0,
            proposed: 0,
        })
    }

    /// Number of entries in the coefficient alphabet.
    pub fn alphabet_len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn stats(&self) -> SamplerStats {
        SamplerStats {
            proposed: self.proposed,
            accepted: self.accepted,
        }
    }

    pub fn set_state(&mut self, d: &PolyDescription) -> Result<()> {
        if d.degree() > self.cfg.degree_cap() {
            return Err(RegressionError::InvalidConfig("state degree exceeds the cap".into()));
        }
        let mut state = vec![self.half; self.state.len()];
        for (j, f) in d.coeffs().iter().enumerate() {
            state[j] = self
                .alphabet
                .iter()
                .position(|a| a == f)
                .ok_or_else(|| RegressionError::InvalidConfig(format!("coefficient {f} not in alphabet")))?;
        }
        self.state = state;
        self.fitted = (0..self.data.len())
            .map(|i| (0..self.state.len()).map(|j| self.values[self.state[j]] * self.basis[j][i]).sum())
            .collect();
        Ok(())
    }

    pub fn description(&self) -> PolyDescription {
        PolyDescription::from_coeffs(self.state.iter().map(|&a| self.alphabet[a]).collect())
    }

    fn leading(state: &[usize], half: usize) -> usize {
        state.iter().rposition(|&a| a != half).unwrap_or(0)
    }

    /// Log2 weight of the current state with coordinates `j`, `k` replaced.
    fn weight_with(&self, j: usize, a: usize, k: usize, b: usize) -> f64 {
        let coord = |idx: usize| {
            if idx == j {
                a
            } else if idx == k {
                b
            } else {
                self.state[idx]
            }
        };
        let (dj, dk) = (
            self.values[a] - self.values[self.state[j]],
            if k == j { 0.0 } else { self.values[b] - self.values[self.state[k]] },
        );
        let (bj, bk) = (&self.basis[j], &self.basis[k]);
        let mut lik = 0.0;
        for i in 0..self.fitted.len() {
            let mu = self.fitted[i] + dj * bj[i] + dk * bk[i];
            lik += gaussian_log2(self.data.ys[i] - mu);
        }
        match self.mode {
            SamplingMode::FlatHyperprior => lik,
            SamplingMode::Parsimonious => {
                let degree = (0..self.state.len())
                    .rev()
                    .find(|&idx| coord(idx) != self.half)
                    .unwrap_or(0);
                let mut len = self.degree_len[degree];
                for idx in 0..=degree {
                    len += self.frac_len[coord(idx)];
                }
                lik - len
            }
        }
    }

    /// All joint values of coordinates `j` and `k` (just `j` when equal),
    /// as `(a, b, log2 weight)`.
    fn slice(&self, j: usize, k: usize) -> Vec<(usize, usize, f64)> {
        let n = self.alphabet.len();
        if j == k {
            (0..n).map(|a| (a, a, self.weight_with(j, a, j, a))).collect()
        } else {
            let mut out = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    out.push((a, b, self.weight_with(j, a, k, b)));
                }
            }
            out
        }
    }

    fn apply(&mut self, j: usize, a: usize, k: usize, b: usize) {
        let dj = self.values[a] - self.values[self.state[j]];
        let dk = if k == j { 0.0 } else { self.values[b] - self.values[self.state[k]] };
        for i in 0..self.fitted.len() {
            self.fitted[i] += dj * self.basis[j][i] + dk * self.basis[k][i];
        }
        self.state[j] = a;
        if k != j {
            self.state[k] = b;
        }
    }

    /// One conditional update of basis index `j` jointly with the leading index.
    pub fn update(&mut self, j: usize, rng: &mut impl Rng) {
        let k = Self::leading(&self.state, self.half);
        let forward = self.slice(j, k);
        let weights: Vec<f64> = forward.iter().map(|p| p.2).collect();
        let z_forward = log2_sum_exp2(&weights);
        let pick = sample_log2(&weights, z_forward, rng);
        let (a, b, _) = forward[pick];
        self.proposed += 1;

        let before = self.state.clone();
        let fitted_before = self.fitted.clone();
        self.apply(j, a, k, b);
        if self.cfg.slice_correction {
            let k_new = Self::leading(&self.state, self.half);
            if k_new != k {
                let reachable = before
                    .iter()
                    .zip(&self.state)
                    .enumerate()
                    .all(|(idx, (x, y))| x == y || idx == j || idx == k_new);
                let accept = reachable && {
                    let reverse: Vec<f64> = self.slice(j, k_new).iter().map(|p| p.2).collect();
                    let log_ratio = z_forward - log2_sum_exp2(&reverse);
                    log_ratio >= 0.0 || rng.gen::<f64>() < log_ratio.exp2()
                };
                if !accept {
                    self.state = before;
                    self.fitted = fitted_before;
                    return;
                }
            }
        }
        self.accepted += 1;
    }

    /// Visits every basis index once in a fresh random order.
    pub fn sweep(&mut self, rng: &mut impl Rng) -> PolyDescription {
        let mut order: Vec<usize> = (0..self.state.len()).collect();
        order.shuffle(rng);
        for j in order {
            self.update(j, rng);
        }
        self.description()
    }
}

/// One sweep from `state`, for callers that manage their own chain.
pub fn gibbs_sweep(
    state: &PolyDescription,
    data: &RegressionDataset,
    cfg: &RegressionConfig,
    mode: SamplingMode,
    rng: &mut impl Rng,
) -> Result<PolyDescription> {
    let mut sampler = GibbsSampler::new(data, cfg, mode)?;
    sampler.set_state(state)?;
    Ok(sampler.sweep(rng))
}

/// Sampled descriptions plus what is needed to predict from them.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyEnsemble {
    pub members: Vec<PolyDescription>,
    pub map: AxisMap,
    pub config: RegressionConfig,
    pub mode: SamplingMode,
    pub stats: SamplerStats,
}

/// Runs `cfg.samples` sweeps from the zero polynomial, recording the state
/// after each.
pub fn sample_ensemble(data: &RegressionDataset, cfg: &RegressionConfig, mode: SamplingMode) -> Result<PolyEnsemble> {
    if cfg.samples == 0 {
        return Err(RegressionError::InvalidConfig("samples must be at least 1".into()));
    }
    let mut rng: StreamRng = stream(cfg.seed, "polyreg", 0);
    let mut sampler = GibbsSampler::new(data, cfg, mode)?;
    let members = (0..cfg.samples).map(|_| sampler.sweep(&mut rng)).collect();
    Ok(PolyEnsemble {
        members,
        map: data.map(),
        config: cfg.clone(),
        mode,
        stats: sampler.stats(),
    })
}

/// Equal-weight Gaussian mixture predictive, in original ordinate units.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictive {
    means: Vec<f64>,
    sigma: f64,
}

impl Predictive {
    pub fn new(means: Vec<f64>, sigma: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(RegressionError::EmptyEnsemble);
        }
        Ok(Predictive { means, sigma })
    }

    pub fn component_means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self) -> f64 {
        self.means.iter().sum::<f64>() / self.means.len() as f64
    }

    /// Noise variance plus the between-member variance of the means.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let between = self.means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.means.len() as f64;
        self.sigma * self.sigma + between
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn density(&self, y: f64) -> f64 {
        let norm = 1.0 / (self.sigma * (2.0 * std::f64::consts::PI).sqrt());
        self.means
            .iter()
            .map(|m| norm * (-0.5 * ((y - m) / self.sigma).powi(2)).exp())
            .sum::<f64>()
            / self.means.len() as f64
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        self.means.iter().map(|m| std.cdf((y - m) / self.sigma)).sum::<f64>() / self.means.len() as f64
    }

    /// Mixture quantile by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        assert!(p > 0.0 && p < 1.0, "quantile level must lie in (0, 1)");
        let lo_mean = self.means.iter().copied().fold(f64::INFINITY, f64::min);
        let hi_mean = self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut lo, mut hi) = (lo_mean - 40.0 * self.sigma, hi_mean + 40.0 * self.sigma);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

impl PolyEnsemble {
    pub fn predict(&self, x: f64) -> Result<Predictive> {
        let u = self.map.forward(x);
        let sigma = self.config.noise_sigma;
        let means = self
            .members
            .iter()
            .map(|d| d.eval_scaled(&self.config, u) * sigma)
            .collect();
        Predictive::new(means, sigma)
    }

    /// Member with the largest parsimonious log2 weight; ties go to the first.
    pub fn map_member(&self, data: &RegressionDataset) -> Result<&PolyDescription> {
        let mut best: Option<(&PolyDescription, f64)> = None;
        for d in &self.members {
            let w = log_posterior_weight(d, data, &self.config, SamplingMode::Parsimonious)?;
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((d, w));
            }
        }
        best.map(|b| b.0).ok_or(RegressionError::EmptyEnsemble)
    }
}

/// Coordinate ascent on `log2 likelihood - L` from `start`: each pass sets
/// every coefficient slot up to one past the current degree to its best
/// alphabet value, until a pass changes nothing. Returns a local MAP.
pub fn map_search(
    start: &PolyDescription,
    data: &RegressionDataset,
    cfg: &RegressionConfig,
) -> Result<PolyDescription> {
    cfg.validate()?;
    let alphabet = cfg.fraction_alphabet();
    let cap = cfg.degree_cap();
    let score = |d: &PolyDescription| log_posterior_weight(d, data, cfg, SamplingMode::Parsimonious);
    let mut best = start.clone();
    let mut best_score = score(&best)?;
    loop {
        let mut improved = false;
        for j in 0..=(best.degree() + 1).min(cap) {
            let mut coeffs = best.coeffs().to_vec();
            coeffs.resize(j.max(coeffs.len() - 1) + 1, BinaryFraction::half());
            for &f in &alphabet {
                coeffs[j] = f;
                let cand = PolyDescription::from_coeffs(coeffs.clone());
                let s = score(&cand)?;
                if s > best_score {
                    best_score = s;
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            return Ok(best);
        }
    }
}

/// Leave-one-out least-squares ensembles, one candidate per degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooEnsemble {
    pub degree: usize,
    /// Real Chebyshev coefficients per fold, in noise units on the scaled axis.
    pub folds: Vec<Vec<f64>>,
    /// Mean holdout log2 likelihood for each candidate degree.
    pub holdout_log2_likelihood: Vec<f64>,
    pub map: AxisMap,
    pub noise_sigma: f64,
}

/// Ties within this margin of the best mean holdout score go to the smaller degree.
const HOLDOUT_TIE_TOL: f64 = 1e-9;

/// Minimum-norm least-squares Chebyshev fit of the given degree.
pub fn least_squares_fit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let n = xs.len();
    let design = DMatrix::from_fn(n, degree + 1, |i, j| chebyshev_basis(degree, xs[i])[j]);
    let rhs = DVector::from_column_slice(ys);
    let svd = design.svd(true, true);
    let max_sv = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (max_sv * 1e-10).max(f64::MIN_POSITIVE);
    svd.solve(&rhs, eps)
        .map(|v| v.iter().copied().collect())
        .unwrap_or_else(|_| vec![0.0; degree + 1])
}

pub fn loo_baseline(data: &RegressionDataset, max_degree: usize) -> Result<LooEnsemble> {
    let n = data.len();
    if n < 2 {
        return Err(RegressionError::InvalidData("leave-one-out needs at least 2 points".into()));
    }
    let mut scores = Vec::with_capacity(max_degree + 1);
    let mut fits_by_degree = Vec::with_capacity(max_degree + 1);
    for degree in 0..=max_degree {
        let mut folds = Vec::with_capacity(n);
        let mut total = 0.0;
        for held in 0..n {
            let (xs, ys): (Vec<f64>, Vec<f64>) = (0..n)
                .filter(|&i| i != held)
                .map(|i| (data.xs[i], data.ys[i]))
                .unzip();
            let coeffs = least_squares_fit(&xs, &ys, degree);
            total += gaussian_log2(data.ys[held] - chebyshev_eval(&coeffs, data.xs[held]));
            folds.push(coeffs);
        }
        scores.push(total / n as f64);
        fits_by_degree.push(folds);
    }
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let degree = scores
        .iter()
        .position(|&s| s >= best - HOLDOUT_TIE_TOL)
        .expect("at least one degree");
    Ok(LooEnsemble {
        degree,
        folds: fits_by_degree.swap_remove(degree),
        holdout_log2_likelihood: scores,
        map: data.map(),
        noise_sigma: data.noise_sigma(),
    })
}

impl LooEnsemble {
    pub fn predict(&self, x: f64) -> Result<Predictive> {
        let u = self.map.forward(x);
        let means = self
            .folds
            .iter()
            .map(|c| chebyshev_eval(c, u) * self.noise_sigma)
            .collect();
        Predictive::new(means, self.noise_sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn frac(s: &str) -> BinaryFraction {
        BinaryFraction::parse(s).unwrap()
    }

    #[test]
    fn chebyshev_examples() {
        assert_abs_diff_eq!(chebyshev_eval(&[0.0, 0.0, 1.0], 0.5), -0.5, epsilon = 1e-15);
        assert_eq!(chebyshev_eval(&[2.5], 0.9), 2.5);
        assert_eq!(chebyshev_eval(&[0.0, 1.0], 0.3), 0.3);
        for k in 0..=20 {
            let x = -1.0 + k as f64 * 0.1;
            let t = chebyshev_basis(6, x);
            for (n, tn) in t.iter().enumerate() {
                assert_abs_diff_eq!(*tn, (n as f64 * x.acos()).cos(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn canonical_form() {
        let d = PolyDescription::from_coeffs(vec![frac("3/4"), frac("1/2"), frac("1/2")]);
        assert_eq!(d.degree(), 0);
        let d = PolyDescription::from_coeffs(vec![frac("1/2"), frac("1/4"), frac("1/2")]);
        assert_eq!(d.degree(), 1);
        assert_eq!(PolyDescription::from_coeffs(d.coeffs().to_vec()), d);
        assert!(PolyDescription::from_coeffs(vec![]).is_zero());
    }

    #[test]
    fn description_length_examples() {
        let cfg = RegressionConfig::default();
        assert_eq!(description_length(&PolyDescription::zero(), &cfg).unwrap(), 4.0);
        let d = PolyDescription::from_coeffs(vec![frac("1/2"), frac("3/4")]);
        assert_eq!(description_length(&d, &cfg).unwrap(), 8.0);
        assert_eq!(d.encode(&cfg).unwrap().bits().unwrap(), "01000011");
        let mut c = vec![frac("1/2"); 7];
        c.push(frac("3/4"));
        let d = PolyDescription::from_coeffs(c);
        assert_eq!(description_length(&d, &cfg).unwrap(), 22.0);
        assert_eq!(d.encode(&cfg).unwrap().length(), 22.0);
    }

    #[test]
    fn posterior_weight_examples() {
        let cfg = RegressionConfig::default();
        let data = RegressionDataset::new(&[(0.0, 0.0)], 1.0).unwrap();
        let w = log_posterior_weight(&PolyDescription::zero(), &data, &cfg, SamplingMode::Parsimonious).unwrap();
        assert_abs_diff_eq!(w, -LOG2_SQRT_2PI - 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w, -5.3257, epsilon = 1e-4);

        let empty = RegressionDataset::new(&[], 1.0).unwrap();
        let w = log_posterior_weight(&PolyDescription::zero(), &empty, &cfg, SamplingMode::Parsimonious).unwrap();
        assert_eq!(w, -4.0);

        let data = RegressionDataset::new(&[(0.0, 1.0)], 1.0).unwrap();
        let one = PolyDescription::from_coeffs(vec![frac("3/4")]);
        let diff = log_posterior_weight(&one, &data, &cfg, SamplingMode::Parsimonious).unwrap()
            - log_posterior_weight(&PolyDescription::zero(), &data, &cfg, SamplingMode::Parsimonious).unwrap();
        let delta_len = description_length(&one, &cfg).unwrap() - 4.0;
        assert_abs_diff_eq!(diff, 1.0 / (2.0 * std::f64::consts::LN_2) - delta_len, epsilon = 1e-12);
    }

    #[test]
    fn proposal_counts() {
        let data = RegressionDataset::new(&[(0.0, 0.0), (1.0, 1.0)], 1.0).unwrap();
        let cfg = RegressionConfig {
            fraction_code: IntCodeScheme::Rissanen(2),
            ..RegressionConfig::default()
        };
        let s = GibbsSampler::new(&data, &cfg, SamplingMode::Parsimonious).unwrap();
        assert_eq!(s.alphabet_len(), 31);
        assert_eq!(s.slice(3, 0).len(), 961);
        assert_eq!(s.slice(0, 0).len(), 31);
        // The default fraction code states precisions up to 3 only.
        let cfg = RegressionConfig::default();
        let s = GibbsSampler::new(&data, &cfg, SamplingMode::Parsimonious).unwrap();
        assert_eq!(s.alphabet_len(), 15);
        assert_eq!(s.slice(2, 0).len(), 225);
        assert_eq!(cfg.degree_cap(), 14);
    }

    #[test]
    fn slice_weights_match_direct_evaluation() {
        let pts: Vec<(f64, f64)> = (0..9).map(|i| (i as f64, (i as f64 * 0.7).sin() * 2.0)).collect();
        let data = RegressionDataset::new(&pts, 1.0).unwrap();
        let cfg = RegressionConfig {
            max_degree: 4,
            ..RegressionConfig::default()
        };
        let mut s = GibbsSampler::new(&data, &cfg, SamplingMode::Parsimonious).unwrap();
        let start = PolyDescription::from_coeffs(vec![frac("1/4"), frac("1/2"), frac("5/8")]);
        s.set_state(&start).unwrap();
        for (a, b, w) in s.slice(1, 2) {
            let mut c: Vec<BinaryFraction> = start.coeffs().to_vec();
            c[1] = s.alphabet[a];
            c[2] = s.alphabet[b];
            let d = PolyDescription::from_coeffs(c);
            let direct = log_posterior_weight(&d, &data, &cfg, SamplingMode::Parsimonious).unwrap();
            assert_abs_diff_eq!(w, direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn sweeps_stay_canonical_and_reproducible() {
        let pts: Vec<(f64, f64)> = (0..12).map(|i| (i as f64, 0.3 * i as f64)).collect();
        let data = RegressionDataset::new(&pts, 1.0).unwrap();
        let cfg = RegressionConfig {
            samples: 10,
            seed: 11,
            ..RegressionConfig::default()
        };
        let a = sample_ensemble(&data, &cfg, SamplingMode::Parsimonious).unwrap();
        let b = sample_ensemble(&data, &cfg, SamplingMode::Parsimonious).unwrap();
        assert_eq!(a.members, b.members);
        for d in &a.members {
            assert_eq!(PolyDescription::from_coeffs(d.coeffs().to_vec()), *d);
            assert!(d.degree() <= cfg.degree_cap());
        }
        let mut rng = StreamRng::seed_from_u64(3);
        let next = gibbs_sweep(&a.members[9], &data, &cfg, SamplingMode::Parsimonious, &mut rng).unwrap();
        assert!(next.degree() <= cfg.degree_cap());
    }

    #[test]
    fn predictive_mixture() {
        let p = Predictive::new(vec![1.5], 1.0).unwrap();
        assert_eq!(p.mean(), 1.5);
        assert_eq!(p.variance(), 1.0);
        assert_abs_diff_eq!(p.quantile(0.5), 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(p.density(1.5), 1.0 / (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-12);
        let p = Predictive::new(vec![-1.0, 1.0], 1.0).unwrap();
        assert_abs_diff_eq!(p.variance(), 2.0);
        assert_abs_diff_eq!(p.quantile(0.5), 0.0, epsilon = 1e-9);
        assert!(Predictive::new(vec![], 1.0).is_err());
    }

    #[test]
    fn loo_examples() {
        let data = RegressionDataset::new(&[(0.0, 1.0), (1.0, 3.0)], 1.0).unwrap();
        let loo = loo_baseline(&data, 1).unwrap();
        assert_eq!(loo.folds.len(), 2);
        // Degree-0 folds are the retained point.
        let data0 = loo_baseline(&data, 0).unwrap();
        assert_abs_diff_eq!(data0.folds[0][0], 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(data0.folds[1][0], 1.0, epsilon = 1e-9);

        let line: Vec<(f64, f64)> = (0..7).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        let data = RegressionDataset::new(&line, 1.0).unwrap();
        let loo = loo_baseline(&data, 3).unwrap();
        assert_eq!(loo.degree, 1);
        assert_eq!(loo.folds.len(), 7);
        let p = loo.predict(10.0).unwrap();
        assert_abs_diff_eq!(p.mean(), -3.0, epsilon = 1e-6);
        assert!(loo_baseline(&RegressionDataset::new(&[(0.0, 0.0)], 1.0).unwrap(), 2).is_err());
    }

    #[test]
    fn rank_deficient_fit_is_minimum_norm() {
        // Two points, cubic: underdetermined, still interpolates.
        let c = least_squares_fit(&[-0.5, 0.5], &[1.0, 2.0], 3);
        assert_abs_diff_eq!(chebyshev_eval(&c, -0.5), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(chebyshev_eval(&c, 0.5), 2.0, epsilon = 1e-9);
    }

    #[test]
    fn config_validation() {
        let bad = RegressionConfig {
            noise_sigma: 0.0,
            ..RegressionConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(RegressionDataset::new(&[(f64::NAN, 0.0)], 1.0).is_err());
        let m = AxisMap::fit(&[3.0, 3.0]);
        assert_eq!(m.inverse(m.forward(3.0)), 3.0);
        assert_eq!(m.forward(3.0), 0.0);
    }

    #[test]
    fn map_search_finds_enumerated_map() {
        let cfg = RegressionConfig {
            max_degree: 1,
            z_max: 1,
            ..RegressionConfig::default()
        };
        let data = RegressionDataset::new(&[(0.0, 1.2), (1.0, 2.9), (2.0, 4.1)], 0.5).unwrap();
        let alphabet = cfg.fraction_alphabet();
        let score = |d: &PolyDescription| log_posterior_weight(d, &data, &cfg, SamplingMode::Parsimonious).unwrap();
        let mut all = Vec::new();
        for &a in &alphabet {
            all.push(PolyDescription::from_coeffs(vec![a]));
            for &b in &alphabet {
                all.push(PolyDescription::from_coeffs(vec![a, b]));
            }
        }
        let best = all.iter().map(score).fold(f64::NEG_INFINITY, f64::max);
        let found = map_search(&PolyDescription::zero(), &data, &cfg).unwrap();
        assert_eq!(score(&found), best);
    }
}
