//! Self-consistent prior over a finite set of interpreters.
//!
//! `L[i][j]` is the length of the shortest simulator that runs language `i`
//! on language `j`. Column `j` of the transition matrix is `2^-L[·][j]`
//! normalized, and the prior is its stationary vector.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::information::DiscreteDist;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterpreterError {
    #[error("length matrix must be square and nonempty, got {0} rows with a row of {1}")]
    NotSquare(usize, usize),
    #[error("length L[{0}][{1}] = {2} is negative or not finite")]
    InvalidLength(usize, usize, f64),
    #[error("self-simulator L[{0}][{0}] = {1} must be 0")]
    NonzeroDiagonal(usize, f64),
    #[error("start vector has {0} entries for {1} interpreters")]
    DimensionMismatch(usize, usize),
    #[error("power iteration did not reach tolerance {tol} in {iterations} iterations")]
    NonConvergence { tol: f64, iterations: usize },
}

pub type Result<T> = std::result::Result<T, InterpreterError>;

pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100_000;
const MAX_POLISH: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimulatorLengths(Vec<Vec<f64>>);

impl SimulatorLengths {
    /// Requires a zero diagonal.
    pub fn new(lengths: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self::with_offsets(lengths)?;
        for (i, row) in m.0.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(InterpreterError::NonzeroDiagonal(i, row[i]));
            }
        }
        Ok(m)
    }

    /// Allows any finite nonnegative diagonal, e.g. lengths shifted by a constant.
    pub fn with_offsets(lengths: Vec<Vec<f64>>) -> Result<Self> {
        let n = lengths.len();
        if n == 0 {
            return Err(InterpreterError::NotSquare(0, 0));
        }
        for (i, row) in lengths.iter().enumerate() {
            if row.len() != n {
                return Err(InterpreterError::NotSquare(n, row.len()));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(InterpreterError::InvalidLength(i, j, v));
                }
            }
        }
        Ok(SimulatorLengths(lengths))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }
}

/// Column-stochastic `T[i][j] ∝ 2^-L[i][j]`.
pub fn transition_matrix(lengths: &SimulatorLengths) -> Vec<Vec<f64>> {
    let n = lengths.len();
    let rows = lengths.rows();
    let mut t = vec![vec![0.0; n]; n];
    for j in 0..n {
        // Shift by the column minimum so large lengths do not underflow.
        let min = (0..n).map(|i| rows[i][j]).fold(f64::INFINITY, f64::min);
        let col: Vec<f64> = (0..n).map(|i| (min - rows[i][j]).exp2()).collect();
        let total: f64 = col.iter().sum();
        for i in 0..n {
            t[i][j] = col[i] / total;
        }
    }
    t
}

fn apply(t: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    t.iter().map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum()).collect()
}

/// Stationary vector by power iteration from the uniform start.
pub fn stationary_prior(t: &[Vec<f64>], tol: f64) -> Result<DiscreteDist> {
    let n = t.len();
    stationary_prior_from(t, &vec![1.0 / n as f64; n], tol)
}

/// Power iteration from a given normalized start; stops when `‖Tp - p‖∞ ≤ tol`.
pub fn stationary_prior_from(t: &[Vec<f64>], start: &[f64], tol: f64) -> Result<DiscreteDist> {
    let n = t.len();
    if start.len() != n {
        return Err(InterpreterError::DimensionMismatch(start.len(), n));
    }
    let step = |p: &[f64]| -> (Vec<f64>, f64) {
        let next = apply(t, p);
        let total: f64 = next.iter().sum();
        let next: Vec<f64> = next.into_iter().map(|v| v / total).collect();
        let residual = apply(t, &next)
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (next, residual)
    };
    let mut p = start.to_vec();
    for _ in 0..MAX_ITERATIONS {
        let (next, mut residual) = step(&p);
        p = next;
        if residual <= tol {
            // Keep iterating while the residual still shrinks, which takes the
            // error itself, not just the residual, down to rounding level.
            for _ in 0..MAX_POLISH {
                let (next, r) = step(&p);
                if r >= residual {
                    break;
                }
                p = next;
                residual = r;
            }
            return DiscreteDist::normalize(p).map_err(|_| InterpreterError::NonConvergence {
                tol,
                iterations: MAX_ITERATIONS,
            });
        }
    }
    Err(InterpreterError::NonConvergence {
        tol,
        iterations: MAX_ITERATIONS,
    })
}
