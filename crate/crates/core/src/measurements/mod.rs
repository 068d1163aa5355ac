//! Finite-dimensional measurement sets.
//!
//! Effects are complex Hermitian matrices; a [`Povm`] is a list of positive
//! effects summing to the identity and a [`MeasurementSet`] is `k` of them on
//! a common space.

mod bounds;
mod families;
mod io;

pub use bounds::{upper_bound_lambda_f, upper_bound_lambda_f_sampled, UpperBounds, TUPLE_LIMIT};
pub use families::{anticommuting_dichotomic, anticommuting_observables, mub_set, pauli_qubit_bases};
pub use io::{load_set, parse_set, save_set, set_to_json};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;

/// Hermiticity tolerance (max entrywise deviation from the adjoint).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Validation tolerance for positivity, completeness and the flags.
pub const VALIDATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("hermiticity violated{at}: max |A − A†| = {residual:e}")]
    Hermiticity { at: String, residual: f64 },
    #[error("positivity violated at measurement {povm}, effect {effect}: minimum eigenvalue {min_eigenvalue:e}")]
    Positivity { povm: usize, effect: usize, min_eigenvalue: f64 },
    #[error("completeness violated at measurement {povm}: max |Σ_a A_a − 1| = {residual:e}")]
    Completeness { povm: usize, residual: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("construction unavailable: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{count} outcome tuples exceed the enumeration limit {limit}; subsample tuples instead (heuristic bound)")]
    TooManyTuples { count: u128, limit: u128 },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOp {
    mat: CMatrix,
}

impl HermitianOp {
    pub fn new(mat: CMatrix) -> Result<Self, MeasurementError> {
        Self::checked(mat, String::new())
    }

    fn checked(mat: CMatrix, at: String) -> Result<Self, MeasurementError> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(MeasurementError::Dimension(format!("{}×{} operator{at}", mat.nrows(), mat.ncols())));
        }
        let residual = max_abs(&(&mat - mat.adjoint()));
        if !(residual <= HERMITIAN_TOL) {
            return Err(MeasurementError::Hermiticity { at, residual });
        }
        Ok(HermitianOp { mat })
    }

    /// `(c₀·1 + c₁·M)` for a Hermitian `M`, exact when the coefficients are.
    pub(crate) fn affine(c0: f64, c1: f64, m: &CMatrix) -> Self {
        let d = m.nrows();
        let mat = CMatrix::identity(d, d) * Complex64::from(c0) + m * Complex64::from(c1);
        HermitianOp { mat }
    }

    pub(crate) fn from_trusted(mat: CMatrix) -> Self {
        HermitianOp { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr(A²) = Σ |A_ij|²`.
    pub fn trace_square(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.mat.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().unwrap()
    }
}

/// A positive operator-valued measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<HermitianOp>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOp>) -> Result<Self, MeasurementError> {
        Self::checked(effects, 0)
    }

    fn checked(effects: Vec<HermitianOp>, index: usize) -> Result<Self, MeasurementError> {
        let d = effects.first().map(HermitianOp::dim).ok_or_else(|| {
            MeasurementError::InvalidArgument(format!("measurement {index} has no effects"))
        })?;
        let mut sum = -CMatrix::identity(d, d);
        for (a, e) in effects.iter().enumerate() {
            if e.dim() != d {
                return Err(MeasurementError::Dimension(format!(
                    "measurement {index}, effect {a} is {}-dimensional, expected {d}",
                    e.dim()
                )));
            }
            let min = e.min_eigenvalue();
            if min < -VALIDATION_TOL {
                return Err(MeasurementError::Positivity { povm: index, effect: a, min_eigenvalue: min });
            }
            sum += e.matrix();
        }
        let residual = max_abs(&sum);
        if !(residual <= VALIDATION_TOL) {
            return Err(MeasurementError::Completeness { povm: index, residual });
        }
        Ok(Povm { effects })
    }

    pub fn effects(&self) -> &[HermitianOp] {
        &self.effects
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    fn is_projective(&self) -> bool {
        self.effects.iter().all(|e| max_abs(&(e.matrix() * e.matrix() - e.matrix())) <= VALIDATION_TOL)
    }

    fn is_rank_one(&self) -> bool {
        self.effects.iter().all(|e| {
            let ev = e.eigenvalues();
            ev.len() < 2 || ev[ev.len() - 2] <= VALIDATION_TOL
        })
    }
}

/// `k` measurements on a common Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    dim: usize,
    povms: Vec<Povm>,
    projective: Vec<bool>,
    rank_one: Vec<bool>,
}

impl MeasurementSet {
    pub fn new(povms: Vec<Povm>) -> Result<Self, MeasurementError> {
        let dim = povms
            .first()
            .map(Povm::dim)
            .ok_or_else(|| MeasurementError::InvalidArgument("a set needs at least one measurement".into()))?;
        if let Some((x, p)) = povms.iter().enumerate().find(|(_, p)| p.dim() != dim) {
            return Err(MeasurementError::Dimension(format!(
                "measurement {x} acts on dimension {}, expected {dim}",
                p.dim()
            )));
        }
        let projective = povms.iter().map(Povm::is_projective).collect();
        let rank_one = povms.iter().map(Povm::is_rank_one).collect();
        Ok(MeasurementSet { dim, povms, projective, rank_one })
    }

    /// Validates raw matrices, reporting the index of the first failure.
    pub fn from_matrices(dim: usize, measurements: Vec<Vec<CMatrix>>) -> Result<Self, MeasurementError> {
        let mut povms = Vec::with_capacity(measurements.len());
        for (x, effects) in measurements.into_iter().enumerate() {
            let mut ops = Vec::with_capacity(effects.len());
            for (a, m) in effects.into_iter().enumerate() {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(MeasurementError::Dimension(format!(
                        "measurement {x}, effect {a} is {}×{}, expected {dim}×{dim}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                ops.push(HermitianOp::checked(m, format!(" at measurement {x}, effect {a}"))?);
            }
            povms.push(Povm::checked(ops, x)?);
        }
        Self::new(povms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of measurements `k`.
    pub fn len(&self) -> usize {
        self.povms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.povms.is_empty()
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.povms.iter().map(Povm::outcomes).collect()
    }

    /// `Π_x n_x`, saturating.
    pub fn tuple_count(&self) -> u128 {
        self.povms.iter().fold(1u128, |acc, p| acc.saturating_mul(p.outcomes() as u128))
    }

    pub fn projective(&self) -> &[bool] {
        &self.projective
    }

    pub fn rank_one(&self) -> &[bool] {
        &self.rank_one
    }

    /// `ηA + (1−η) Tr(A)·1/d` applied to every effect.
    pub fn depolarised(&self, eta: f64) -> Self {
        let d = self.dim as f64;
        let povms = self
            .povms
            .iter()
            .map(|p| Povm {
                effects: p
                    .effects
                    .iter()
                    .map(|e| HermitianOp::affine((1.0 - eta) * e.trace() / d, eta, e.matrix()))
                    .collect(),
            })
            .collect();
        Self::new(povms).expect("depolarising preserves validity")
    }
}

/// Lexicographic enumeration of outcome tuples `(j_1, …, j_k)`.
pub fn outcome_tuples(counts: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = counts.iter().product();
    (0..total).map(move |mut idx| {
        let mut t = vec![0; counts.len()];
        for x in (0..counts.len()).rev() {
            t[x] = idx % counts[x];
            idx /= counts[x];
        }
        t
    })
}
