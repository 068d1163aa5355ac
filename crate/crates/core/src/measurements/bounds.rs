//! Spectral upper bounds on the random and generalised robustness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{outcome_tuples, CMatrix, MeasurementError, MeasurementSet};

/// Largest `Π_x n_x` enumerated exhaustively.
pub const TUPLE_LIMIT: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperBounds {
    /// Largest eigenvalue of `Σ_x A_{j_x|x}` over outcome tuples.
    pub lambda: f64,
    /// `Σ_{a,x} Tr(A_{a|x}²)/d`.
    pub f: f64,
    pub ub_r: f64,
    pub ub_g: f64,
    /// First maximising tuple in lexicographic order.
    pub argmax: Vec<usize>,
    /// True when λ came from sampled tuples and may be underestimated.
    pub heuristic: bool,
}

fn tuple_eigenvalue(set: &MeasurementSet, tuple: &[usize]) -> f64 {
    let d = set.dim();
    let mut sum = CMatrix::zeros(d, d);
    for (p, &j) in set.povms().iter().zip(tuple) {
        sum += p.effects()[j].matrix();
    }
    sum.symmetric_eigenvalues().max()
}

fn finish(set: &MeasurementSet, lambda: f64, argmax: Vec<usize>, heuristic: bool) -> UpperBounds {
    let d = set.dim() as f64;
    let f: f64 = set.povms().iter().flat_map(|p| p.effects()).map(|e| e.trace_square()).sum::<f64>() / d;
    let inv: f64 = set.povms().iter().map(|p| 1.0 / p.outcomes() as f64).sum();
    let ub_r = if f - inv > 1e-15 { (lambda - inv) / (f - inv) } else { f64::INFINITY };
    UpperBounds { lambda, f, ub_r, ub_g: lambda / f, argmax, heuristic }
}

/// Exhaustive bound over all outcome tuples.
pub fn upper_bound_lambda_f(set: &MeasurementSet) -> Result<UpperBounds, MeasurementError> {
    let count = set.tuple_count();
    if count > TUPLE_LIMIT {
        return Err(MeasurementError::TooManyTuples { count, limit: TUPLE_LIMIT });
    }
    let counts = set.outcome_counts();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for t in outcome_tuples(&counts) {
        let l = tuple_eigenvalue(set, &t);
        if l > best.0 {
            best = (l, t);
        }
    }
    Ok(finish(set, best.0, best.1, false))
}

/// Same bound with λ maximised over `samples` random tuples.
pub fn upper_bound_lambda_f_sampled(set: &MeasurementSet, samples: usize, seed: u64) -> UpperBounds {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = set.outcome_counts();
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for _ in 0..samples.max(1) {
        let t: Vec<usize> = counts.iter().map(|&n| rng.random_range(0..n)).collect();
        let l = tuple_eigenvalue(set, &t);
        if l > best.0 {
            best = (l, t);
        }
    }
    finish(set, best.0, best.1, true)
}
