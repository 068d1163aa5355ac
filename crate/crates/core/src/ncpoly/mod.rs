//! Rewriting calculus on projector words.
//!
//! One integer `m` stands for the number of outcomes of projective
//! measurements, or for the dimension when the measurements are rank-one;
//! the coefficients are the same in both readings.

mod poly;
mod reduce;
mod word;

pub use poly::{expand_power_of_s, polynomial_in_s, NcPolynomial};
pub use reduce::{is_normalisable, sigma, sigma_x, MarginalResult, Mode};
pub use word::{Letter, Word};

use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::Coefficient;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NcError {
    #[error("monomial {0} is not normalisable")]
    NotNormalisable(Word),
    #[error("monomial {word} has no reducible marginal along measurement {x}")]
    NotMarginalisable { word: Word, x: usize },
    #[error(
        "marginal of {word} along measurement {x} needs the pinching inequality; use eta_g_lower"
    )]
    NonExactMarginal { word: Word, x: usize },
    #[error("pinch-flagged negative coefficient {coefficient} on {word} (measurement {x})")]
    PinchNegativeCoefficient { word: Word, x: usize, coefficient: f64 },
    #[error("negative identity residue {value} in the marginal along measurement {x}")]
    NegativeIdentityResidue { x: usize, value: f64 },
    #[error("marginals differ across measurements ({min} vs {max})")]
    AsymmetricMarginals { min: f64, max: f64 },
    #[error("normalisation {normalisation} disagrees with the marginal sum {marginal_sum}")]
    InconsistentNormalisation { normalisation: f64, marginal_sum: f64 },
    #[error("normalisation is not positive ({0})")]
    DegenerateNormalisation(f64),
}

/// Marginal of a polynomial along one measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMarginal<T> {
    pub c_p: T,
    pub c_id: T,
    /// Terms whose marginal used the pinching inequality, with coefficients.
    pub pinched: Vec<(Word, T)>,
}

impl<T: Coefficient> PolyMarginal<T> {
    pub fn exact(&self) -> bool {
        self.pinched.is_empty()
    }
}

/// `Σ(poly)`: the coefficient of the identity in the sum over all tuples.
pub fn normalisation<T: Coefficient>(
    poly: &NcPolynomial<T>,
    m: u32,
    mode: Mode,
) -> Result<T, NcError> {
    let k = poly.k();
    poly.terms().try_fold(T::zero(), |acc, (w, c)| {
        let s: T = sigma(w, k, m, mode).ok_or_else(|| NcError::NotNormalisable(w.clone()))?;
        Ok(acc + s * c.clone())
    })
}

/// `Σ_x(poly)` aggregated over terms.
pub fn marginal<T: Coefficient>(
    poly: &NcPolynomial<T>,
    x: Letter,
    m: u32,
    mode: Mode,
) -> Result<PolyMarginal<T>, NcError> {
    let k = poly.k();
    let mut out = PolyMarginal { c_p: T::zero(), c_id: T::zero(), pinched: Vec::new() };
    for (w, c) in poly.terms() {
        let r: MarginalResult<T> = sigma_x(w, x, k, m, mode)
            .ok_or_else(|| NcError::NotMarginalisable { word: w.clone(), x: x as usize + 1 })?;
        out.c_p = out.c_p + r.c_p * c.clone();
        out.c_id = out.c_id + r.c_id * c.clone();
        if r.used_pinch {
            out.pinched.push((w.clone(), c.clone()));
        }
    }
    Ok(out)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Noise level of the parent `poly / Σ(poly)` for the depolarising (or
/// random) robustness: with exact marginals `C_P·P + C_id·1`, the parent
/// reproduces `η P + (1−η) 1/m` with `η = C_P / (C_P + m C_id)`.
pub fn eta_exact<T: Coefficient>(
    poly: &NcPolynomial<T>,
    m: u32,
    mode: Mode,
) -> Result<T, NcError> {
    let norm = normalisation(poly, m, mode)?;
    let mm = T::from_int(m as i64);
    let mut etas: Vec<T> = Vec::with_capacity(poly.k());
    for x in 0..poly.k() {
        let marg = marginal(poly, x as Letter, m, mode)?;
        if let Some((w, _)) = marg.pinched.first() {
            return Err(NcError::NonExactMarginal { word: w.clone(), x: x + 1 });
        }
        let total = marg.c_p.clone() + mm.clone() * marg.c_id.clone();
        if !close(total.approx(), norm.approx()) {
            return Err(NcError::InconsistentNormalisation {
                normalisation: norm.approx(),
                marginal_sum: total.approx(),
            });
        }
        if total.approx() <= 0.0 {
            return Err(NcError::DegenerateNormalisation(total.approx()));
        }
        etas.push(marg.c_p / total);
    }
    let (lo, hi) = etas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
        (lo.min(e.approx()), hi.max(e.approx()))
    });
    if !close(lo, hi) {
        return Err(NcError::AsymmetricMarginals { min: lo, max: hi });
    }
    Ok(etas.swap_remove(0))
}

/// Lower bound on the generalised robustness carried by the parent
/// `poly / Σ(poly)`: per measurement the marginal dominates
/// `C_P·P + C_id·1 ⪰ (C_P + C_id)·P` once `C_id ≥ 0`.
///
/// The caller is responsible for the positivity of `poly` itself.
pub fn eta_g_lower<T: Coefficient>(poly: &NcPolynomial<T>, m: u32) -> Result<T, NcError> {
    let norm = normalisation(poly, m, Mode::Generic)?;
    if norm.approx() <= 0.0 {
        return Err(NcError::DegenerateNormalisation(norm.approx()));
    }
    let mut best: Option<T> = None;
    for x in 0..poly.k() {
        let marg = marginal(poly, x as Letter, m, Mode::Generic)?;
        if let Some((w, c)) = marg.pinched.iter().find(|(_, c)| c.is_negative()) {
            return Err(NcError::PinchNegativeCoefficient {
                word: w.clone(),
                x: x + 1,
                coefficient: c.approx(),
            });
        }
        if marg.c_id.is_negative() {
            return Err(NcError::NegativeIdentityResidue { x: x + 1, value: marg.c_id.approx() });
        }
        let eta = (marg.c_p + marg.c_id) / norm.clone();
        best = Some(match best {
            Some(b) if b < eta => b,
            _ => eta,
        });
    }
    Ok(best.unwrap_or_else(T::zero))
}

/// Text dump, one line per word: `w ; coeff ; normalisable ; [flags]`, the
/// flags giving for each measurement whether its marginal is exact,
/// pinched or irreducible.
pub fn classification_dump<T: Coefficient>(poly: &NcPolynomial<T>, m: u32, mode: Mode) -> String {
    let k = poly.k();
    let mut out = String::new();
    for (w, c) in poly.terms() {
        let normalisable = sigma::<T>(w, k, m, mode).is_some();
        let flags: Vec<String> = (0..k)
            .map(|x| {
                let tag = match sigma_x::<T>(w, x as Letter, k, m, mode) {
                    Some(r) if r.used_pinch => "pinch",
                    Some(_) => "exact",
                    None => "none",
                };
                format!("{}:{tag}", x + 1)
            })
            .collect();
        let _ = writeln!(out, "{w} ; {c} ; {normalisable} ; [{}]", flags.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn degree_two_depolarising_parent_at_two_outcomes() {
        // alpha_{2,2} = 1 - 2/(0 + sqrt(4 + 4)) = 1 - 1/sqrt 2
        let alpha = 1.0 - 1.0 / 2f64.sqrt();
        let s = NcPolynomial::<f64>::sum_of_projectors(2).shifted(&alpha);
        let g = &s * &s;
        let eta = eta_exact(&g, 2, Mode::Generic).unwrap();
        assert!((eta - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn linear_parent_gives_one_over_k() {
        for k in 2..6 {
            let s = NcPolynomial::<Rational>::sum_of_projectors(k);
            let eta = eta_exact(&s, 3, Mode::Mub).unwrap();
            assert_eq!(eta, Rational::new(1, k as i64));
        }
    }

    #[test]
    fn identity_parent_is_white_noise() {
        let one = NcPolynomial::<Rational>::one(3);
        assert_eq!(eta_exact(&one, 4, Mode::Mub).unwrap(), Rational::from_integer(0));
    }

    #[test]
    fn cubic_marginal_needs_pinching_in_generic_mode() {
        let s3: NcPolynomial<Rational> = expand_power_of_s(3, 3);
        assert!(matches!(
            eta_exact(&s3, 3, Mode::Generic),
            Err(NcError::NonExactMarginal { .. })
        ));
    }

    #[test]
    fn negative_pinched_coefficient_is_rejected() {
        let k = 2;
        let mut p = NcPolynomial::<Rational>::constant(k, Rational::from_integer(5));
        p.add_term(Word::new([0, 1, 0]), Rational::from_integer(-1));
        let err = eta_g_lower(&p, 2).unwrap_err();
        assert!(matches!(err, NcError::PinchNegativeCoefficient { .. }));
        assert!(err.to_string().contains("pinch-flagged negative coefficient"));
    }

    #[test]
    fn negative_identity_residue_is_rejected() {
        let k = 2;
        let mut p = NcPolynomial::<Rational>::projector(k, 0);
        p.add_term(Word::letter(1), Rational::from_integer(1));
        p.add_term(Word::empty(), Rational::new(-1, 2));
        assert!(matches!(eta_g_lower(&p, 3), Err(NcError::NegativeIdentityResidue { .. })));
    }

    #[test]
    fn non_normalisable_term_is_reported() {
        let p = NcPolynomial::<Rational>::from_terms(2, [(Word::new([0, 1, 0, 1]), Rational::from_integer(1))]);
        assert_eq!(
            normalisation(&p, 2, Mode::Generic),
            Err(NcError::NotNormalisable(Word::new([0, 1, 0, 1])))
        );
    }

    #[test]
    fn dump_lists_every_word() {
        let s2: NcPolynomial<Rational> = expand_power_of_s(2, 3);
        let text = classification_dump(&s2, 2, Mode::Generic);
        assert_eq!(text.lines().count(), s2.len());
        assert!(text.contains("[1,2,1] ; 1 ; true ; [1:exact 2:pinch]"));
    }
}
