//! Closed-form universal bounds on incompatibility robustness.
//!
//! Everything here is generic over the floating-point type; `m` is the
//! number of outcomes or the dimension depending on the reading.

mod mub;
mod steering;

pub use mub::{mub_degree4_bound, mub_moment, quartic_eta, MubDegree4, MubMoment};
pub use steering::{dimension_witness, sr_bound, sr_from_eta};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("steering robustness {sr} ≥ k−1 = {}: no finite dimension excluded", .k - 1)]
    UnboundedWitness { sr: f64, k: u32 },
}

/// Incompatibility measure a bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Depolarising noise `Tr(A)·1/d`.
    D,
    /// Uniform outcome noise `1/n_x`.
    R,
    /// Generalised (arbitrary) noise.
    G,
    /// Probabilistic robustness.
    P,
    /// Jointly-measurable robustness.
    Jm,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Measure::D => "d",
            Measure::R => "r",
            Measure::G => "g",
            Measure::P => "p",
            Measure::Jm => "jm",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Measure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "d" => Ok(Measure::D),
            "r" => Ok(Measure::R),
            "g" => Ok(Measure::G),
            "p" => Ok(Measure::P),
            "jm" => Ok(Measure::Jm),
            other => Err(format!("unknown measure '{other}' (expected d, r, g, p or jm)")),
        }
    }
}

/// How a bound was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Deg2,
    Deg3,
    Deg4Mub,
    Anticommuting,
    Hierarchy,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Construction::Deg2 => "deg2",
            Construction::Deg3 => "deg3",
            Construction::Deg4Mub => "deg4_mub",
            Construction::Anticommuting => "anticommuting",
            Construction::Hierarchy => "hierarchy",
        };
        f.write_str(s)
    }
}

/// A bound value with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult<F> {
    pub value: F,
    pub construction: Construction,
    pub measures: Vec<Measure>,
    pub k: u32,
    /// Outcome count or dimension.
    pub m: u32,
    pub level: Option<u32>,
    pub gammas: Option<(F, F)>,
    /// Set when an optimiser stopped before its tolerance.
    pub warning: Option<String>,
}

impl<F: Real> BoundResult<F> {
    pub(crate) fn closed_form(value: F, construction: Construction, measures: Vec<Measure>, k: u32, m: u32) -> Self {
        BoundResult { value, construction, measures, k, m, level: None, gammas: None, warning: None }
    }
}

fn check_km(k: u32, m: u32) -> Result<(), AnalyticError> {
    if k < 1 {
        return Err(AnalyticError::Domain(format!("k = {k} must be at least 1")));
    }
    if m < 2 {
        return Err(AnalyticError::Domain(format!("m = {m} must be at least 2")));
    }
    Ok(())
}

fn root_alpha<F: Real>(k: u32, m: u32) -> F {
    let (k, m) = (F::from_u32(k).unwrap(), F::from_u32(m).unwrap());
    let four = F::lit(4.0);
    (m * m + four * (k - F::one()) * (m - F::one())).sqrt()
}

fn root_beta<F: Real>(k: u32, m: u32) -> F {
    let (k, m) = (F::from_u32(k).unwrap(), F::from_u32(m).unwrap());
    ((k - F::one()) * (m - F::one()) + F::one()).sqrt()
}

/// Shift of the degree-two parent `(S − α)²`.
pub fn alpha<F: Real>(k: u32, m: u32) -> Result<F, AnalyticError> {
    check_km(k, m)?;
    let (kf, mf) = (F::from_u32(k).unwrap(), F::from_u32(m).unwrap());
    let two = F::lit(2.0);
    Ok(kf / mf * (F::one() - two * (mf - F::one()) / (mf - two + root_alpha::<F>(k, m))))
}

/// Shift of the degree-three parent `S (S − β)²`.
pub fn beta<F: Real>(k: u32, m: u32) -> Result<F, AnalyticError> {
    check_km(k, m)?;
    let (kf, mf) = (F::from_u32(k).unwrap(), F::from_u32(m).unwrap());
    Ok((kf + mf - F::lit(2.0) - root_beta::<F>(k, m)) / mf)
}

/// Degree-two universal bound on the random (fixed outcomes) and
/// depolarising (fixed dimension) robustness.
pub fn degree2_bound<F: Real>(k: u32, m: u32) -> Result<BoundResult<F>, AnalyticError> {
    check_km(k, m)?;
    let (kf, mf) = (F::from_u32(k).unwrap(), F::from_u32(m).unwrap());
    let two = F::lit(2.0);
    let value = (mf - two + root_alpha::<F>(k, m)) / (two * kf * (mf - F::one()));
    Ok(BoundResult::closed_form(value, Construction::Deg2, vec![Measure::R, Measure::D], k, m))
}

/// Degree-three universal bound on the generalised robustness.
pub fn degree3_bound<F: Real>(k: u32, m: u32) -> Result<BoundResult<F>, AnalyticError> {
    check_km(k, m)?;
    let (kf, mf) = (F::from_u32(k).unwrap(), F::from_u32(m).unwrap());
    let value = (kf + mf - F::lit(2.0) + root_beta::<F>(k, m)) / (kf * mf);
    Ok(BoundResult::closed_form(value, Construction::Deg3, vec![Measure::G], k, m))
}

/// Robustness of `k` dichotomic measurements from pairwise anticommuting
/// observables; these values are also the worst case over all dichotomic
/// sets for the measures listed.
pub fn anticommuting_values<F: Real>(k: u32) -> Result<BTreeMap<Measure, F>, AnalyticError> {
    if k < 1 {
        return Err(AnalyticError::Domain("k must be at least 1".into()));
    }
    let rk = F::from_u32(k).unwrap().sqrt();
    let two = F::lit(2.0);
    Ok(BTreeMap::from([
        (Measure::R, F::one() / rk),
        (Measure::G, (F::one() + F::one() / rk) / two),
        (Measure::P, F::one() / rk),
        (Measure::Jm, two / (rk + F::one())),
    ]))
}

/// Lower bound on the generalised robustness from a depolarising
/// (`divisor = d`) or random (`divisor = max n_x`) value.
pub fn transfer_to_g<F: Real>(eta: F, divisor: u32) -> Result<F, AnalyticError> {
    if divisor < 2 {
        return Err(AnalyticError::Domain(format!("divisor {divisor} must be at least 2")));
    }
    if !(eta >= F::zero() && eta <= F::one()) {
        return Err(AnalyticError::Domain(format!("eta {eta:?} outside [0, 1]")));
    }
    Ok(eta + (F::one() - eta) / F::from_u32(divisor).unwrap())
}
