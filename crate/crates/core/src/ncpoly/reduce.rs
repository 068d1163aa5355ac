//! Summation over outcome indices by rewriting.
//!
//! Rules, all applied to normal-form words:
//! * completeness: a letter occurring exactly once is summed away (factor 1);
//! * absence: a summed letter that no longer occurs contributes the factor `m`;
//! * pinching (generic mode, marginals only): a palindromic word
//!   `u† y M y u` with `y` occurring only at the bracket and `M` a palindrome
//!   is bounded below by `(1/m) u† M u`;
//! * unbiasedness (MUB mode): `y z y = (1/m) y` for any adjacent triple.
//!
//! The search is exhaustive over rule orders with memoisation. Exact
//! reductions are preferred; among pinched ones the largest factor wins.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::word::{normalize_letters, Letter, Word};
use crate::scalar::Coefficient;

/// Which exact rules are available besides completeness and idempotency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Arbitrary projective measurements; marginals may use pinching.
    Generic,
    /// Mutually unbiased bases; the unbiasedness rewrite is exact.
    Mub,
}

/// Marginal of a word along one measurement: the sum over all other indices
/// equals (or, when `used_pinch`, dominates) `c_p · P_{j_x|x} + c_id · 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalResult<T> {
    pub c_p: T,
    pub c_id: T,
    pub used_pinch: bool,
    pub exact: bool,
}

/// Path summary: value `m^exponent`, with `pinches` inequality steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Outcome {
    exponent: i32,
    pinches: u32,
}

impl Outcome {
    fn better_than(&self, other: &Outcome) -> bool {
        (self.pinches, -self.exponent) < (other.pinches, -other.exponent)
    }
}

struct Reducer {
    k: usize,
    target: Option<Letter>,
    mode: Mode,
    allow_pinch: bool,
    memo: HashMap<(Vec<Letter>, u32), Option<Outcome>>,
}

impl Reducer {
    fn new(k: usize, target: Option<Letter>, mode: Mode) -> Self {
        Reducer {
            k,
            target,
            mode,
            allow_pinch: target.is_some() && mode == Mode::Generic,
            memo: HashMap::new(),
        }
    }

    fn summed_letters(&self) -> u32 {
        let all = if self.k >= 32 { u32::MAX } else { (1u32 << self.k) - 1 };
        match self.target {
            Some(x) => all & !(1 << x),
            None => all,
        }
    }

    fn is_terminal(&self, w: &[Letter]) -> bool {
        match self.target {
            Some(x) => w.iter().all(|&l| l == x),
            None => w.is_empty(),
        }
    }

    fn run(&mut self, w: &[Letter], consumed: u32) -> Option<Outcome> {
        if self.is_terminal(w) {
            let free = (self.summed_letters() & !consumed).count_ones() as i32;
            return Some(Outcome { exponent: free, pinches: 0 });
        }
        let key = (w.to_vec(), consumed);
        if let Some(hit) = self.memo.get(&key) {
            return *hit;
        }
        let mut best: Option<Outcome> = None;
        let offer = |cand: Option<Outcome>, best: &mut Option<Outcome>| {
            if let Some(c) = cand {
                if best.map_or(true, |b| c.better_than(&b)) {
                    *best = Some(c);
                }
            }
        };

        let summed = self.summed_letters();
        let mut tried: u32 = 0;
        for &y in w {
            if summed & (1 << y) == 0 || tried & (1 << y) != 0 {
                continue;
            }
            tried |= 1 << y;
            let count = w.iter().filter(|&&l| l == y).count();
            if count == 1 {
                let next = normalize_letters(w.iter().copied().filter(|&l| l != y));
                offer(self.run(&next, consumed | (1 << y)), &mut best);
            } else if count == 2 && self.allow_pinch {
                if let Some(next) = pinch(w, y) {
                    let r = self.run(&next, consumed | (1 << y)).map(|o| Outcome {
                        exponent: o.exponent - 1,
                        pinches: o.pinches + 1,
                    });
                    offer(r, &mut best);
                }
            }
        }

        if self.mode == Mode::Mub {
            for i in 0..w.len().saturating_sub(2) {
                if w[i] == w[i + 2] {
                    let next = normalize_letters(
                        w[..=i].iter().chain(w[i + 3..].iter()).copied(),
                    );
                    let r = self.run(&next, consumed).map(|o| Outcome {
                        exponent: o.exponent - 1,
                        pinches: o.pinches,
                    });
                    offer(r, &mut best);
                }
            }
        }

        self.memo.insert(key, best);
        best
    }
}

/// If `w = u† y M y u` with `y` absent from `u` and `M`, and `M` a
/// palindrome, returns the normal form of `u† M u`.
fn pinch(w: &[Letter], y: Letter) -> Option<Vec<Letter>> {
    let mut pos = w.iter().enumerate().filter(|(_, &l)| l == y).map(|(i, _)| i);
    let (i, j) = (pos.next()?, pos.next()?);
    let n = w.len();
    if i != n - 1 - j {
        return None;
    }
    let outer_mirrored = (0..i).all(|t| w[t] == w[n - 1 - t]);
    let inner = &w[i + 1..j];
    let inner_palindrome = (0..inner.len() / 2).all(|t| inner[t] == inner[inner.len() - 1 - t]);
    if !(outer_mirrored && inner_palindrome) {
        return None;
    }
    Some(normalize_letters(
        w[..i].iter().chain(inner.iter()).chain(w[j + 1..].iter()).copied(),
    ))
}

fn check_word(w: &Word, k: usize) {
    assert!(w.is_normal(), "word {w} is not in normal form");
    assert!(
        w.max_letter().map_or(true, |l| (l as usize) < k),
        "word {w} uses a letter outside 1..={k}"
    );
}

/// Whether the full sum over every outcome index reduces `w` to a multiple
/// of the identity by completeness and idempotency alone.
pub fn is_normalisable(w: &Word, k: usize) -> bool {
    check_word(w, k);
    Reducer::new(k, None, Mode::Generic).run(w.letters(), 0).is_some()
}

/// Coefficient of the identity in the sum of `w` over all outcome tuples,
/// or `None` when the word cannot be reduced.
pub fn sigma<T: Coefficient>(w: &Word, k: usize, m: u32, mode: Mode) -> Option<T> {
    check_word(w, k);
    let base = T::from_int(m as i64);
    Reducer::new(k, None, mode)
        .run(w.letters(), 0)
        .map(|o| T::powi_signed(&base, o.exponent))
}

/// Marginal of `w` along measurement `x`: the sum over every index except
/// `j_x`, reduced to a multiple of `P_{j_x|x}` or of the identity.
pub fn sigma_x<T: Coefficient>(
    w: &Word,
    x: Letter,
    k: usize,
    m: u32,
    mode: Mode,
) -> Option<MarginalResult<T>> {
    check_word(w, k);
    assert!((x as usize) < k, "marginal letter out of range");
    let base = T::from_int(m as i64);
    let mut reducer = Reducer::new(k, Some(x), mode);
    let outcome = reducer.run(w.letters(), 0)?;
    let value = T::powi_signed(&base, outcome.exponent);
    let projector_survives = reducer_ends_on_projector(w, x, k, mode);
    let (c_p, c_id) = if projector_survives {
        (value, T::zero())
    } else {
        (T::zero(), value)
    };
    let used_pinch = outcome.pinches > 0;
    Some(MarginalResult { c_p, c_id, used_pinch, exact: !used_pinch })
}

/// Whether the reduced marginal keeps the projector of `x`. In generic mode
/// `x` is never removed. In MUB mode a rewrite `y x y -> y` can drop it; the
/// terminal form is then decided by the full search.
fn reducer_ends_on_projector(w: &Word, x: Letter, k: usize, mode: Mode) -> bool {
    if !w.contains(x) {
        return false;
    }
    match mode {
        Mode::Generic => true,
        Mode::Mub => mub_keeps_target(w.letters(), x, k, &mut HashMap::new()),
    }
}

// In MUB mode all rules are equalities, so every successful path agrees on
// the operator; the first successful path decides.
fn mub_keeps_target(
    w: &[Letter],
    x: Letter,
    k: usize,
    memo: &mut HashMap<Vec<Letter>, Option<bool>>,
) -> bool {
    fn go(
        w: &[Letter],
        x: Letter,
        memo: &mut HashMap<Vec<Letter>, Option<bool>>,
    ) -> Option<bool> {
        if w.iter().all(|&l| l == x) {
            return Some(!w.is_empty());
        }
        if let Some(hit) = memo.get(w) {
            return *hit;
        }
        let mut result = None;
        for &y in w {
            if y != x && w.iter().filter(|&&l| l == y).count() == 1 {
                let next = normalize_letters(w.iter().copied().filter(|&l| l != y));
                if let Some(r) = go(&next, x, memo) {
                    result = Some(r);
                    break;
                }
            }
        }
        if result.is_none() {
            for i in 0..w.len().saturating_sub(2) {
                if w[i] == w[i + 2] {
                    let next =
                        normalize_letters(w[..=i].iter().chain(w[i + 3..].iter()).copied());
                    if let Some(r) = go(&next, x, memo) {
                        result = Some(r);
                        break;
                    }
                }
            }
        }
        memo.insert(w.to_vec(), result);
        result
    }
    let _ = k;
    go(w, x, memo).unwrap_or(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn w(v: &[u8]) -> Word {
        Word::new(v.to_vec())
    }

    #[test]
    fn normalisability_examples() {
        assert!(is_normalisable(&w(&[0]), 3));
        assert!(is_normalisable(&w(&[0, 1, 0]), 3));
        assert!(!is_normalisable(&w(&[0, 1, 0, 1]), 3));
        assert!(is_normalisable(&w(&[0, 1, 2, 1]), 3));
        assert!(is_normalisable(&Word::empty(), 3));
    }

    #[test]
    fn sigma_examples() {
        for k in 2..6 {
            for m in 2..6u32 {
                let mi = m as i64;
                let s: Rational = sigma(&w(&[0]), k, m, Mode::Generic).unwrap();
                assert_eq!(s, Rational::from_integer(mi.pow(k as u32 - 1)));
                let s: Rational = sigma(&w(&[0, 1, 0]), k, m, Mode::Generic).unwrap();
                assert_eq!(s, Rational::from_integer(mi.pow(k as u32 - 2)));
            }
        }
        assert_eq!(sigma::<Rational>(&w(&[0, 1, 0, 1]), 2, 3, Mode::Generic), None);
        // unbiasedness makes the alternating word summable
        assert_eq!(
            sigma::<Rational>(&w(&[0, 1, 0, 1]), 2, 3, Mode::Mub),
            Some(r(1, 3))
        );
    }

    #[test]
    fn marginal_examples() {
        let (k, m) = (4usize, 3u32);
        let a: RationalMarginal = sigma_x(&w(&[0, 1, 0]), 0, k, m, Mode::Generic).unwrap();
        assert_eq!(a.c_p, r(9, 1));
        assert_eq!(a.c_id, r(0, 1));
        assert!(a.exact && !a.used_pinch);

        let b: RationalMarginal = sigma_x(&w(&[0, 1, 0]), 1, k, m, Mode::Generic).unwrap();
        assert_eq!(b.c_p, r(3, 1));
        assert!(b.used_pinch && !b.exact);

        let c: RationalMarginal = sigma_x(&w(&[1]), 0, k, m, Mode::Generic).unwrap();
        assert_eq!(c.c_p, r(0, 1));
        assert_eq!(c.c_id, r(9, 1));
        assert!(c.exact);

        let d: RationalMarginal = sigma_x(&w(&[0, 1, 0, 1]), 0, k, m, Mode::Mub).unwrap();
        assert_eq!(d.c_p, r(3, 1));
        assert!(d.exact);
        assert!(sigma_x::<Rational>(&w(&[0, 1, 0, 1]), 0, k, m, Mode::Generic).is_none());
    }

    type RationalMarginal = MarginalResult<Rational>;

    #[test]
    fn pinch_needs_mirrored_context() {
        // 2 1 3 1 2 around x = 3: pinch 2 (outer) then 1.
        let m: RationalMarginal = sigma_x(&w(&[1, 0, 2, 0, 1]), 2, 3, 2, Mode::Generic).unwrap();
        assert!(m.used_pinch);
        assert_eq!(m.c_p, r(1, 4));
        // 1 2 1 3 has no mirrored context for 1 around x = 2 once 3 is summed:
        // summing 3 yields 1 2 1 which pinches.
        let m: RationalMarginal = sigma_x(&w(&[0, 1, 0, 2]), 1, 3, 2, Mode::Generic).unwrap();
        assert!(m.used_pinch);
        // 1 2 3 1 around x = 2: summing 3 gives 1 2 1 again.
        assert!(sigma_x::<Rational>(&w(&[0, 1, 2, 0]), 1, 3, 2, Mode::Generic).is_some());
        // 1 2 1 3 1 around x = 2 : letter 1 occurs three times, no rule applies
        // after summing 3 (gives 1 2 1 1 -> 1 2 1) ... which does pinch.
        assert!(sigma_x::<Rational>(&w(&[0, 1, 0, 2, 0]), 1, 3, 2, Mode::Generic).is_some());
        // 1 2 3 1 2 3 around x = 1 is stuck.
        assert!(sigma_x::<Rational>(&w(&[0, 1, 2, 0, 1, 2]), 0, 3, 2, Mode::Generic).is_none());
    }

    #[test]
    fn mub_rewrite_can_drop_target() {
        // 2 1 2 = (1/m) 2 ; summing 2 leaves (1/m) * identity.
        let m: RationalMarginal = sigma_x(&w(&[1, 0, 1]), 0, 2, 3, Mode::Mub).unwrap();
        assert_eq!(m.c_p, r(0, 1));
        assert_eq!(m.c_id, r(1, 3));
        // Generic mode keeps the projector and pinches instead.
        let g: RationalMarginal = sigma_x(&w(&[1, 0, 1]), 0, 2, 3, Mode::Generic).unwrap();
        assert_eq!(g.c_p, r(1, 3));
        assert!(g.used_pinch);
    }
}
