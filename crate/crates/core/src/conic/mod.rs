//! Solver-agnostic semidefinite programs.
//!
//! A [`ConicProblem`] has free scalar variables and real symmetric PSD block
//! variables; the objective (always maximised) and constraints are sparse
//! linear functionals `Σ a_s x_s + Σ_b tr(F_b X_b)` with each `F_b`
//! symmetric and stored by its upper triangle.

mod backend;
mod embed;
mod sdpa;

pub use backend::{default_backend, solve, solve_with, ConicBackend, DEFAULT_TOL};
#[cfg(feature = "clarabel")]
pub use backend::ClarabelBackend;
pub use embed::embed_complex;
pub use sdpa::{export_sdpa, from_sdpa, parse_sdpa, read_sdpa, to_sdpa, write_sdpa, SdpaData, SdpaEntry};

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("no conic backend is registered (build with the `clarabel` feature)")]
    BackendUnavailable,
    #[error("tolerance {0} outside [1e-10, 1e-2]")]
    InvalidTolerance(f64),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("SDPA parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coefficient `value` of the symmetric matrix `F` at `(row, col)` and
/// `(col, row)`, with `row ≤ col`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Sparse linear functional over scalars and block entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinExpr {
    scalars: BTreeMap<usize, f64>,
    entries: BTreeMap<(usize, usize, usize), f64>,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `c · x_s`.
    pub fn add_scalar(&mut self, s: usize, c: f64) -> &mut Self {
        *self.scalars.entry(s).or_insert(0.0) += c;
        self
    }

    /// Adds `c · X_b[i][j]` (one matrix element, not the symmetric pair).
    pub fn add_element(&mut self, block: usize, i: usize, j: usize, c: f64) -> &mut Self {
        let (r, s) = if i <= j { (i, j) } else { (j, i) };
        let v = if r == s { c } else { 0.5 * c };
        *self.entries.entry((block, r, s)).or_insert(0.0) += v;
        self
    }

    /// Adds `value` to the symmetric coefficient `F_b[i][j] = F_b[j][i]`.
    pub fn add_symmetric(&mut self, block: usize, i: usize, j: usize, value: f64) -> &mut Self {
        let (r, s) = if i <= j { (i, j) } else { (j, i) };
        *self.entries.entry((block, r, s)).or_insert(0.0) += value;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for (&s, &c) in &other.scalars {
            self.add_scalar(s, scale * c);
        }
        for (&key, &c) in &other.entries {
            *self.entries.entry(key).or_insert(0.0) += scale * c;
        }
        self
    }

    /// Nonzero scalar coefficients in index order.
    pub fn scalars(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.scalars.iter().filter(|(_, c)| **c != 0.0).map(|(&s, &c)| (s, c))
    }

    /// Nonzero symmetric block coefficients in (block, row, col) order.
    pub fn entries(&self) -> impl Iterator<Item = BlockEntry> + '_ {
        self.entries
            .iter()
            .filter(|(_, c)| **c != 0.0)
            .map(|(&(block, row, col), &value)| BlockEntry { block, row, col, value })
    }

    pub fn is_empty(&self) -> bool {
        self.scalars().next().is_none() && self.entries().next().is_none()
    }

    /// Value at a point.
    pub fn evaluate(&self, scalars: &[f64], blocks: &[DMatrix<f64>]) -> f64 {
        let mut v: f64 = self.scalars().map(|(s, c)| c * scalars[s]).sum();
        for e in self.entries() {
            let x = blocks[e.block][(e.row, e.col)];
            v += if e.row == e.col { e.value * x } else { 2.0 * e.value * x };
        }
        v
    }
}

/// `expr = rhs` or `expr ≥ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(expr: LinExpr, rhs: f64) -> Self {
        Constraint { expr, rhs }
    }
}

/// Semidefinite program in primal block form: maximise the objective over
/// free scalars and PSD blocks subject to linear equalities and inequalities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConicProblem {
    pub name: String,
    pub provenance: String,
    pub scalar_vars: usize,
    pub psd_blocks: Vec<usize>,
    pub objective: LinExpr,
    pub eq_constraints: Vec<Constraint>,
    pub ineq_constraints: Vec<Constraint>,
}

impl ConicProblem {
    pub fn new(name: impl Into<String>, provenance: impl Into<String>) -> Self {
        ConicProblem { name: name.into(), provenance: provenance.into(), ..Default::default() }
    }

    pub fn add_scalar(&mut self) -> usize {
        self.scalar_vars += 1;
        self.scalar_vars - 1
    }

    pub fn add_block(&mut self, size: usize) -> usize {
        self.psd_blocks.push(size);
        self.psd_blocks.len() - 1
    }

    pub fn add_eq(&mut self, expr: LinExpr, rhs: f64) {
        self.eq_constraints.push(Constraint::new(expr, rhs));
    }

    pub fn add_ineq(&mut self, expr: LinExpr, rhs: f64) {
        self.ineq_constraints.push(Constraint::new(expr, rhs));
    }

    /// Total number of scalar unknowns (scalars plus upper triangles).
    pub fn variable_count(&self) -> usize {
        self.scalar_vars + self.psd_blocks.iter().map(|n| n * (n + 1) / 2).sum::<usize>()
    }

    pub fn constraint_count(&self) -> usize {
        self.eq_constraints.len() + self.ineq_constraints.len()
    }

    /// Checks indices are in range and coefficients finite.
    pub fn validate(&self) -> Result<(), ConicError> {
        let check = |what: &str, e: &LinExpr, rhs: f64| -> Result<(), ConicError> {
            if !rhs.is_finite() {
                return Err(ConicError::InvalidProblem(format!("{what}: non-finite right-hand side")));
            }
            for (s, c) in e.scalars() {
                if s >= self.scalar_vars || !c.is_finite() {
                    return Err(ConicError::InvalidProblem(format!("{what}: bad scalar term x{s} ({c})")));
                }
            }
            for b in e.entries() {
                let size = *self.psd_blocks.get(b.block).ok_or_else(|| {
                    ConicError::InvalidProblem(format!("{what}: block {} does not exist", b.block))
                })?;
                if b.row > b.col || b.col >= size || !b.value.is_finite() {
                    return Err(ConicError::InvalidProblem(format!("{what}: bad entry {b:?}")));
                }
            }
            Ok(())
        };
        if self.psd_blocks.iter().any(|&n| n == 0) {
            return Err(ConicError::InvalidProblem("empty PSD block".into()));
        }
        check("objective", &self.objective, 0.0)?;
        for (i, c) in self.eq_constraints.iter().enumerate() {
            check(&format!("equality {i}"), &c.expr, c.rhs)?;
        }
        for (i, c) in self.ineq_constraints.iter().enumerate() {
            check(&format!("inequality {i}"), &c.expr, c.rhs)?;
        }
        Ok(())
    }

    /// Largest constraint violation at a point, relative to `1 + max |rhs|`,
    /// together with the most negative block eigenvalue (clipped at zero).
    pub fn primal_residual(&self, scalars: &[f64], blocks: &[DMatrix<f64>]) -> f64 {
        let scale = 1.0
            + self
                .eq_constraints
                .iter()
                .chain(self.ineq_constraints.iter())
                .map(|c| c.rhs.abs())
                .fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for c in &self.eq_constraints {
            worst = worst.max((c.expr.evaluate(scalars, blocks) - c.rhs).abs() / scale);
        }
        for c in &self.ineq_constraints {
            worst = worst.max((c.rhs - c.expr.evaluate(scalars, blocks)).max(0.0) / scale);
        }
        for b in blocks {
            let min = b.clone().symmetric_eigenvalues().min();
            worst = worst.max((-min).max(0.0));
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Inaccurate,
    Failed,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Inaccurate => "inaccurate",
            SolveStatus::Failed => "failed",
        };
        f.write_str(s)
    }
}

/// Primal point returned by a backend.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalSolution {
    pub scalars: Vec<f64>,
    pub blocks: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: f64,
    pub primal_residual: f64,
    pub solve_time_s: f64,
    pub backend: String,
    pub iterations: u32,
    /// Backend message for non-optimal outcomes.
    pub message: Option<String>,
    pub solution: Option<PrimalSolution>,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
