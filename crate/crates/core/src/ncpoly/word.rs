use std::cmp::Ordering;
use std::fmt;

/// Index of a measurement (0-based). Displayed 1-based.
pub type Letter = u8;

/// A monomial in the projectors of one outcome tuple: letter `x` stands for
/// the projector of measurement `x` at the tuple's outcome `j_x`.
///
/// Ordered by length, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: impl Into<Vec<Letter>>) -> Self {
        Word(letters.into())
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(x: Letter) -> Self {
        Word(vec![x])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Merges adjacent repeated letters (idempotency of projectors).
    pub fn normalize(&self) -> Word {
        Word(normalize_letters(self.0.iter().copied()))
    }

    pub fn is_normal(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    /// Adjoint of the monomial: projectors are Hermitian, so the adjoint is
    /// the reversed word.
    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn is_palindrome(&self) -> bool {
        let n = self.0.len();
        (0..n / 2).all(|i| self.0[i] == self.0[n - 1 - i])
    }

    /// Normal form of `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        Word(normalize_letters(self.0.iter().chain(other.0.iter()).copied()))
    }

    /// Normal form of `adjoint(left) · right`, the word carried by the Gram
    /// entry `(left, right)`.
    pub fn gram_product(left: &Word, right: &Word) -> Word {
        Word(normalize_letters(
            left.0.iter().rev().chain(right.0.iter()).copied(),
        ))
    }

    pub fn count(&self, x: Letter) -> usize {
        self.0.iter().filter(|&&l| l == x).count()
    }

    pub fn contains(&self, x: Letter) -> bool {
        self.0.contains(&x)
    }

    /// Bit mask of the letters present.
    pub fn support(&self) -> u32 {
        self.0.iter().fold(0, |acc, &l| acc | (1 << l))
    }

    pub fn max_letter(&self) -> Option<Letter> {
        self.0.iter().copied().max()
    }

    /// Applies a letter relabelling.
    pub fn relabel(&self, perm: &[Letter]) -> Word {
        Word(self.0.iter().map(|&l| perm[l as usize]).collect())
    }
}

pub(crate) fn normalize_letters(letters: impl Iterator<Item = Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    out
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", *l as u32 + 1)?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<&[Letter]> for Word {
    fn from(v: &[Letter]) -> Self {
        Word(v.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(Word::new([0, 0, 1]).normalize(), Word::new([0, 1]));
        assert_eq!(Word::new([0, 1, 1, 0]).normalize(), Word::new([0, 1, 0]));
        assert_eq!(Word::new([0, 1, 2, 1]).normalize(), Word::new([0, 1, 2, 1]));
        assert_eq!(Word::new([2, 2, 2]).normalize(), Word::new([2]));
    }

    #[test]
    fn ordering_is_length_first() {
        let mut v = vec![Word::new([1, 0]), Word::new([2]), Word::empty(), Word::new([0, 1])];
        v.sort();
        assert_eq!(
            v,
            vec![Word::empty(), Word::new([2]), Word::new([0, 1]), Word::new([1, 0])]
        );
    }

    #[test]
    fn gram_product_reverses_left() {
        let u = Word::new([0, 1]);
        let v = Word::new([1, 2]);
        assert_eq!(Word::gram_product(&u, &v), Word::new([1, 0, 1, 2]));
        assert_eq!(Word::gram_product(&v, &v), Word::new([2, 1, 2]));
    }

    #[test]
    fn display_is_one_based() {
        assert_eq!(Word::new([0, 1, 0]).to_string(), "[1,2,1]");
        assert_eq!(Word::empty().to_string(), "[]");
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent_and_normal(v in proptest::collection::vec(0u8..4, 0..12)) {
            let w = Word::new(v).normalize();
            prop_assert!(w.is_normal());
            prop_assert_eq!(w.normalize(), w.clone());
            prop_assert_eq!(w.reverse().reverse(), w.clone());
            prop_assert!(w.reverse().is_normal());
        }
    }
}
