//! Depolarising, random and generalised incompatibility robustness as
//! semidefinite programs over an explicit measurement set.
//!
//! One parent effect `G_ȷ` per outcome tuple, in lexicographic order. Each
//! complex `d×d` effect is a real `2d×2d` PSD block `Z`; the effect read off
//! it is `A + iB` with `A = (Z₁₁+Z₂₂)/2`, `B = (Z₂₁−Z₁₂)/2`, which is PSD
//! whenever `Z` is.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::conic::{self, ConicError, ConicProblem, LinExpr, SolveReport, SolveStatus};
use crate::measurements::{outcome_tuples, CMatrix, MeasurementSet};

/// Largest outcome-tuple count compiled into an SDP.
pub const TUPLE_GUARD: u128 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RobustnessMeasure {
    /// Depolarising noise `Tr(A)·1/d`.
    D,
    /// Uniform outcome noise `1/n_x`.
    R,
    /// Arbitrary noise.
    G,
}

impl fmt::Display for RobustnessMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RobustnessMeasure::D => "d",
            RobustnessMeasure::R => "r",
            RobustnessMeasure::G => "g",
        })
    }
}

impl FromStr for RobustnessMeasure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "d" => Ok(RobustnessMeasure::D),
            "r" => Ok(RobustnessMeasure::R),
            "g" => Ok(RobustnessMeasure::G),
            other => Err(format!("unknown robustness measure '{other}' (expected d, r or g)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum RobustnessError {
    #[error("{count} outcome tuples exceed the SDP size guard {limit}")]
    TooManyTuples { count: u128, limit: u128 },
    #[error("solver finished with status {status}: {message}")]
    Solver { status: SolveStatus, message: String, report: Box<SolveReport> },
    #[error("results refer to different measurement sets: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

#[derive(Clone, Debug)]
pub struct RobustnessResult {
    pub measure: RobustnessMeasure,
    pub eta: f64,
    pub report: SolveReport,
    /// Parent effects `G_ȷ`, tuples in lexicographic order.
    pub parent: Option<Vec<CMatrix>>,
    /// Dimension, outcome counts and measurement count of the source set.
    pub shape: (usize, Vec<usize>),
}

impl RobustnessResult {
    /// `{measure, eta, status, residual, time_s}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "measure": self.measure.to_string(),
            "eta": self.eta,
            "status": self.report.status.to_string(),
            "residual": self.report.primal_residual,
            "time_s": self.report.solve_time_s,
        })
    }
}

/// `Re` and `Im` parts of entry `(i, j)` of the effect carried by block `b`.
fn effect_entry(e: &mut LinExpr, b: usize, d: usize, i: usize, j: usize, imag: bool, c: f64) {
    if imag {
        e.add_element(b, d + i, j, 0.5 * c).add_element(b, i, d + j, -0.5 * c);
    } else {
        e.add_element(b, i, j, 0.5 * c).add_element(b, d + i, d + j, 0.5 * c);
    }
}

/// Real coordinates of a Hermitian `d×d` matrix: `Re` on `i ≤ j`, `Im` on `i < j`.
fn coordinates(d: usize) -> impl Iterator<Item = (usize, usize, bool)> {
    (0..d).flat_map(move |i| {
        (i..d).flat_map(move |j| {
            let re = std::iter::once((i, j, false));
            let im = (i < j).then_some((i, j, true));
            re.chain(im)
        })
    })
}

fn part(z: Complex64, imag: bool) -> f64 {
    if imag {
        z.im
    } else {
        z.re
    }
}

pub fn build_robustness_sdp(set: &MeasurementSet, measure: RobustnessMeasure) -> Result<ConicProblem, RobustnessError> {
    let count = set.tuple_count();
    if count > TUPLE_GUARD {
        return Err(RobustnessError::TooManyTuples { count, limit: TUPLE_GUARD });
    }
    let d = set.dim();
    let counts = set.outcome_counts();
    let tuples: Vec<Vec<usize>> = outcome_tuples(&counts).collect();

    let mut p = ConicProblem::new(
        format!("robustness_{measure}"),
        format!("incompatibility robustness ({measure}) of {} measurements in dimension {d}", set.len()),
    );
    let eta = p.add_scalar();
    p.objective.add_scalar(eta, 1.0);
    let blocks: Vec<usize> = tuples.iter().map(|_| p.add_block(2 * d)).collect();

    // Σ_{ȷ : j_x = a} G_ȷ, coordinate by coordinate.
    let marginal = |x: usize, a: usize, i: usize, j: usize, imag: bool| {
        let mut e = LinExpr::new();
        for (t, &b) in tuples.iter().zip(&blocks) {
            if t[x] == a {
                effect_entry(&mut e, b, d, i, j, imag, 1.0);
            }
        }
        e
    };

    match measure {
        RobustnessMeasure::D | RobustnessMeasure::R => {
            for (x, povm) in set.povms().iter().enumerate() {
                let n = povm.outcomes();
                // For x > 0 the last outcome is implied by completeness.
                let outcomes = if x == 0 { n } else { n - 1 };
                for (a, eff) in povm.effects()[..outcomes].iter().enumerate() {
                    let noise = match measure {
                        RobustnessMeasure::D => eff.trace() / d as f64,
                        _ => 1.0 / n as f64,
                    };
                    for (i, j, imag) in coordinates(d) {
                        // Σ G = η A + (1−η) noise·1
                        let target = part(eff.matrix()[(i, j)], imag);
                        let id = if i == j && !imag { noise } else { 0.0 };
                        let mut e = marginal(x, a, i, j, imag);
                        e.add_scalar(eta, -(target - id));
                        p.add_eq(e, id);
                    }
                }
            }
            let mut cap = LinExpr::new();
            cap.add_scalar(eta, -1.0);
            p.add_ineq(cap, -1.0);
        }
        RobustnessMeasure::G => {
            for (i, j, imag) in coordinates(d) {
                let mut e = LinExpr::new();
                for &b in &blocks {
                    effect_entry(&mut e, b, d, i, j, imag, 1.0);
                }
                p.add_eq(e, if i == j && !imag { 1.0 } else { 0.0 });
            }
            for (x, povm) in set.povms().iter().enumerate() {
                for (a, eff) in povm.effects().iter().enumerate() {
                    // Σ G − η A = slack ⪰ 0
                    let slack = p.add_block(2 * d);
                    for (i, j, imag) in coordinates(d) {
                        let mut e = marginal(x, a, i, j, imag);
                        e.add_scalar(eta, -part(eff.matrix()[(i, j)], imag));
                        effect_entry(&mut e, slack, d, i, j, imag, -1.0);
                        p.add_eq(e, 0.0);
                    }
                }
            }
        }
    }
    Ok(p)
}

fn read_effect(z: &nalgebra::DMatrix<f64>, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        Complex64::new(0.5 * (z[(i, j)] + z[(d + i, d + j)]), 0.5 * (z[(d + i, j)] - z[(i, d + j)]))
    })
}

pub fn solve_robustness(set: &MeasurementSet, measure: RobustnessMeasure, tol: f64) -> Result<RobustnessResult, RobustnessError> {
    let problem = build_robustness_sdp(set, measure)?;
    let report = conic::solve(&problem, tol)?;
    if !matches!(report.status, SolveStatus::Optimal | SolveStatus::Inaccurate) {
        return Err(RobustnessError::Solver {
            status: report.status,
            message: report.message.clone().unwrap_or_default(),
            report: Box::new(report),
        });
    }
    let d = set.dim();
    let tuples = set.tuple_count() as usize;
    let parent = report
        .solution
        .as_ref()
        .map(|s| s.blocks[..tuples].iter().map(|z| read_effect(z, d)).collect());
    Ok(RobustnessResult {
        measure,
        eta: report.objective.clamp(0.0, 1.0),
        report,
        parent,
        shape: (d, set.outcome_counts()),
    })
}

/// Largest violation of the defining constraints of `res` by its parent:
/// positivity of every `G_ȷ` and the marginal (in)equalities at the solved η.
pub fn certificate_residual(set: &MeasurementSet, res: &RobustnessResult) -> Option<f64> {
    let parent = res.parent.as_ref()?;
    let d = set.dim();
    let counts = set.outcome_counts();
    let tuples: Vec<Vec<usize>> = outcome_tuples(&counts).collect();
    let max_abs = |m: &CMatrix| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eta = Complex64::from(res.report.objective);
    let mut worst: f64 = 0.0;
    for g in parent {
        worst = worst.max(-g.clone().symmetric_eigenvalues().min());
    }
    let id = CMatrix::identity(d, d);
    if res.measure == RobustnessMeasure::G {
        let total: CMatrix = parent.iter().fold(CMatrix::zeros(d, d), |acc, g| acc + g);
        worst = worst.max(max_abs(&(total - &id)));
    }
    for (x, povm) in set.povms().iter().enumerate() {
        for (a, eff) in povm.effects().iter().enumerate() {
            let mut m = CMatrix::zeros(d, d);
            for (t, g) in tuples.iter().zip(parent) {
                if t[x] == a {
                    m += g;
                }
            }
            let noise = match res.measure {
                RobustnessMeasure::D => eff.trace() / d as f64,
                RobustnessMeasure::R => 1.0 / povm.outcomes() as f64,
                RobustnessMeasure::G => {
                    let gap: CMatrix = m - eff.matrix() * eta;
                    worst = worst.max(-gap.symmetric_eigenvalues().min());
                    continue;
                }
            };
            let target = eff.matrix() * eta + &id * ((Complex64::from(1.0) - eta) * noise);
            worst = worst.max(max_abs(&(m - target)));
        }
    }
    Some(worst.max(0.0))
}

/// Checks `η^d + (1−η^d)/d ≤ η^g` and `η^r + (1−η^r)/n_max ≤ η^g` within 1e-6.
pub fn check_measure_inequalities(
    res_d: &RobustnessResult,
    res_r: &RobustnessResult,
    res_g: &RobustnessResult,
    d: usize,
    n_max: usize,
) -> Result<bool, RobustnessError> {
    let kinds = [
        (res_d, RobustnessMeasure::D),
        (res_r, RobustnessMeasure::R),
        (res_g, RobustnessMeasure::G),
    ];
    if let Some((r, want)) = kinds.iter().find(|(r, want)| r.measure != *want) {
        return Err(RobustnessError::Mismatch(format!("expected a {want} result, got {}", r.measure)));
    }
    if res_d.shape != res_r.shape || res_d.shape != res_g.shape {
        return Err(RobustnessError::Mismatch("dimension or outcome counts differ".into()));
    }
    if res_d.shape.0 != d || res_d.shape.1.iter().copied().max() != Some(n_max) {
        return Err(RobustnessError::Mismatch(format!("d = {d} or n_max = {n_max} does not match the set")));
    }
    let g = res_g.eta + 1e-6;
    let from_d = res_d.eta + (1.0 - res_d.eta) / d as f64;
    let from_r = res_r.eta + (1.0 - res_r.eta) / n_max as f64;
    Ok(from_d <= g && from_r <= g)
}
