//! Parsimonious inference.
//!
//! Universal prefix codes induce a complexity hyperprior `P(ψ) = 2^-L(ψ)` over
//! descriptions. This crate provides the codes, the information measure and
//! parsimony objective built on them, a Gibbs sampler over encoded Chebyshev
//! polynomials, an annealed importance sampler over encoded decision trees,
//! conventional baselines for both, and the consistent prior over a finite
//! ensemble of interpreters.

pub mod codecs;
pub mod forest;
pub mod information;
pub mod interpreters;
pub mod polyreg;
pub mod rng;
pub mod special;
