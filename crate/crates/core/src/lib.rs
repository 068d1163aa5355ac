//! Quantitative measurement incompatibility.
//!
//! * [`measurements`]: explicit POVM sets, named families, JSON files and the
//!   spectral upper bounds on robustness.
//! * [`conic`]: a solver-agnostic SDP representation, SDPA export and the
//!   backend adapter.
//! * [`robustness`]: exact depolarising, random and generalised robustness
//!   SDPs for an explicit set.
//! * [`ncpoly`]: rewriting calculus on projector words (normalisation,
//!   marginals, pinching, the mutually-unbiased rewrite).
//! * [`analytic`]: closed-form universal bounds, steering and dimension
//!   witness, and the optimised degree-four MUB bound.
//! * [`hierarchy`]: the pinched-marginalisable sum-of-squares hierarchy.
//! * [`tables`]: reference tables and their generators.

pub mod analytic;
pub mod conic;
pub mod hierarchy;
pub mod measurements;
pub mod ncpoly;
pub mod robustness;
pub mod scalar;
pub mod tables;

pub use scalar::{Coefficient, Real};

/// Exact coefficient field of the rewriting engine.
pub type Rational = num_rational::Rational64;

/// Projector polynomial with exact rational coefficients.
pub type RationalPoly = ncpoly::NcPolynomial<Rational>;
/// Projector polynomial with double-precision coefficients.
pub type FloatPoly = ncpoly::NcPolynomial<f64>;
/// Marginal of a word under exact arithmetic.
pub type RationalMarginal = ncpoly::MarginalResult<Rational>;
/// Closed-form bound evaluated in double precision.
pub type Bound = analytic::BoundResult<f64>;

/// Crate version, reported by the CLI and JSON outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
