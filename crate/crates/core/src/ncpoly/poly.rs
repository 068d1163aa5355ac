use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::word::{Letter, Word};
use crate::scalar::Coefficient;

/// Linear combination of normal-form words over `k` projector symbols.
#[derive(Clone, PartialEq)]
pub struct NcPolynomial<T> {
    k: usize,
    terms: BTreeMap<Word, T>,
}

impl<T: Coefficient> NcPolynomial<T> {
    pub fn zero(k: usize) -> Self {
        NcPolynomial { k, terms: BTreeMap::new() }
    }

    pub fn constant(k: usize, c: T) -> Self {
        let mut p = Self::zero(k);
        p.add_term(Word::empty(), c);
        p
    }

    pub fn one(k: usize) -> Self {
        Self::constant(k, T::one())
    }

    pub fn projector(k: usize, x: Letter) -> Self {
        assert!((x as usize) < k);
        let mut p = Self::zero(k);
        p.add_term(Word::letter(x), T::one());
        p
    }

    /// `S = Σ_x P_x`.
    pub fn sum_of_projectors(k: usize) -> Self {
        let mut p = Self::zero(k);
        for x in 0..k {
            p.add_term(Word::letter(x as Letter), T::one());
        }
        p
    }

    pub fn from_terms(k: usize, terms: impl IntoIterator<Item = (Word, T)>) -> Self {
        let mut p = Self::zero(k);
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &Word) -> T {
        self.terms.get(w).cloned().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &T)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Adds `c · w` (normalising `w` first), dropping zero coefficients.
    pub fn add_term(&mut self, w: Word, c: T) {
        debug_assert!(w.max_letter().map_or(true, |l| (l as usize) < self.k));
        let w = w.normalize();
        let entry = self.terms.entry(w.clone()).or_insert_with(T::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn scaled(&self, c: &T) -> Self {
        Self::from_terms(
            self.k,
            self.terms.iter().map(|(w, v)| (w.clone(), v.clone() * c.clone())),
        )
    }

    /// `self − c · 1`.
    pub fn shifted(&self, c: &T) -> Self {
        let mut p = self.clone();
        p.add_term(Word::empty(), T::zero() - c.clone());
        p
    }

    pub fn pow(&self, p: u32) -> Self {
        (0..p).fold(Self::one(self.k), |acc, _| &acc * self)
    }

    /// Adjoint polynomial (reversed words; coefficients are real).
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.k, self.terms.iter().map(|(w, c)| (w.reverse(), c.clone())))
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.terms.iter().all(|(w, c)| self.coefficient(&w.reverse()) == *c)
    }

    /// Converts coefficients, e.g. exact rationals to `f64`.
    pub fn map_coefficients<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> NcPolynomial<U> {
        NcPolynomial::from_terms(self.k, self.terms.iter().map(|(w, c)| (w.clone(), f(c))))
    }

    /// Applies a relabelling of the measurements.
    pub fn relabel(&self, perm: &[Letter]) -> Self {
        Self::from_terms(self.k, self.terms.iter().map(|(w, c)| (w.relabel(perm), c.clone())))
    }
}

/// Expansion of `S^p` with `S = Σ_x P_x`, in normal form.
pub fn expand_power_of_s<T: Coefficient>(k: usize, p: u32) -> NcPolynomial<T> {
    assert!(p <= 4, "powers above four are not supported");
    NcPolynomial::sum_of_projectors(k).pow(p)
}

/// Polynomial of a univariate polynomial evaluated at `S`: coefficients
/// `coeffs[i]` multiply `S^i`.
pub fn polynomial_in_s<T: Coefficient>(k: usize, coeffs: &[T]) -> NcPolynomial<T> {
    let s = NcPolynomial::<T>::sum_of_projectors(k);
    let mut acc = NcPolynomial::zero(k);
    let mut power = NcPolynomial::one(k);
    for c in coeffs {
        acc = acc + power.scaled(c);
        power = &power * &s;
    }
    acc
}

impl<T: Coefficient> Add for NcPolynomial<T> {
    type Output = NcPolynomial<T>;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.k, rhs.k, "alphabet size mismatch");
        for (w, c) in rhs.terms {
            self.add_term(w, c);
        }
        self
    }
}

impl<T: Coefficient> Neg for NcPolynomial<T> {
    type Output = NcPolynomial<T>;
    fn neg(self) -> Self {
        self.scaled(&(T::zero() - T::one()))
    }
}

impl<T: Coefficient> Sub for NcPolynomial<T> {
    type Output = NcPolynomial<T>;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Coefficient> Mul for &NcPolynomial<T> {
    type Output = NcPolynomial<T>;
    fn mul(self, rhs: Self) -> NcPolynomial<T> {
        assert_eq!(self.k, rhs.k, "alphabet size mismatch");
        let mut out = NcPolynomial::zero(self.k);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.concat(b), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<T: Coefficient> fmt::Debug for NcPolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·{w}")?;
        }
        Ok(())
    }
}
