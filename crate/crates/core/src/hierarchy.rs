//! The pinched-marginalisable sum-of-squares hierarchy.
//!
//! A parent polynomial `G = Σ_{u,v} M_uv u†v` over the Gram basis of words of
//! length `≤ t` is a sum of squares whenever `M ⪰ 0`. Its coefficients are
//! constrained so that the full outcome sum reduces to a multiple of the
//! identity and every marginal dominates `η P`, which gives a universal lower
//! bound on the generalised robustness of `k` measurements with `m` outcomes
//! (or rank-one measurements in dimension `m`).

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::analytic::{BoundResult, Construction, Measure};
use crate::conic::{self, ConicError, ConicProblem, LinExpr, SolveReport, SolveStatus};
use crate::ncpoly::{sigma, sigma_x, Letter, MarginalResult, Mode, Word};
use crate::Rational;

/// Largest Gram basis compiled.
pub const BASIS_LIMIT: usize = 5000;

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("invalid parameters: {0}")]
    Domain(String),
    #[error("Gram basis of {size} words exceeds the limit {limit}")]
    BasisTooLarge { size: usize, limit: usize },
    #[error("solver finished with status {status} (basis {basis}, {constraints} constraints): {message}")]
    Solver { status: SolveStatus, basis: usize, constraints: usize, message: String },
    #[error(transparent)]
    Conic(#[from] ConicError),
}

/// Normal words of length `≤ t`, ordered by length then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramBasis {
    pub k: usize,
    pub t: usize,
    pub words: Vec<Word>,
}

impl GramBasis {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `1 + Σ_{ℓ=1}^{t} k(k−1)^{ℓ−1}`, saturating.
    pub fn expected_size(k: usize, t: usize) -> usize {
        let mut total: usize = 1;
        let mut layer: usize = k;
        for _ in 0..t {
            total = total.saturating_add(layer);
            layer = layer.saturating_mul(k.saturating_sub(1));
        }
        total
    }
}

pub fn enumerate_basis(k: usize, t: usize) -> Result<GramBasis, HierarchyError> {
    if k < 2 || t < 1 {
        return Err(HierarchyError::Domain(format!("need k ≥ 2 and t ≥ 1, got k = {k}, t = {t}")));
    }
    if k > 32 {
        return Err(HierarchyError::Domain(format!("k = {k} exceeds 32 letters")));
    }
    let size = GramBasis::expected_size(k, t);
    if size > BASIS_LIMIT {
        return Err(HierarchyError::BasisTooLarge { size, limit: BASIS_LIMIT });
    }
    let mut words = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..t {
        let mut next = Vec::new();
        for w in &layer {
            for x in 0..k as Letter {
                if w.letters().last() != Some(&x) {
                    let mut l = w.letters().to_vec();
                    l.push(x);
                    next.push(Word::new(l));
                }
            }
        }
        words.extend(next.iter().cloned());
        layer = next;
    }
    Ok(GramBasis { k, t, words })
}

/// What the rewriting engine says about one word (and its reversal).
#[derive(Clone, Debug)]
pub struct WordClass {
    /// The smaller of `w` and `rev w`.
    pub word: Word,
    /// Ordered Gram pairs `(u, v)` whose product is `w` or `rev w`.
    pub pairs: Vec<(usize, usize)>,
    pub sigma: Option<Rational>,
    /// Per measurement; `None` when the marginal does not reduce.
    pub marginals: Vec<Option<MarginalResult<Rational>>>,
}

impl WordClass {
    pub fn admissible(&self) -> bool {
        self.sigma.is_some() && self.marginals.iter().all(Option::is_some)
    }

    pub fn pinched(&self) -> bool {
        self.marginals.iter().flatten().any(|r| r.used_pinch)
    }
}

#[derive(Clone, Debug)]
pub struct HierarchyProblem {
    pub basis: GramBasis,
    pub m: u32,
    /// In word order of their representatives.
    pub classes: Vec<WordClass>,
    pub problem: ConicProblem,
    /// When built by [`symmetrize`]: orbits of Gram entries under letter
    /// permutations, the free parameters of an invariant Gram matrix.
    pub orbit_count: Option<usize>,
}

impl HierarchyProblem {
    pub fn k(&self) -> usize {
        self.basis.k
    }

    pub fn t(&self) -> usize {
        self.basis.t
    }

    /// Free parameters of the Gram matrix: orbits when symmetrised, the
    /// upper triangle otherwise.
    pub fn reduced_variable_count(&self) -> usize {
        let n = self.basis.len();
        self.orbit_count.unwrap_or(n * (n + 1) / 2)
    }

    /// Polynomial coefficient of `w` (summed with `rev w`) under `gram`.
    pub fn coefficient(&self, gram: &DMatrix<f64>, w: &Word) -> f64 {
        let key = class_key(w);
        self.classes
            .iter()
            .find(|c| c.word == key)
            .map_or(0.0, |c| c.pairs.iter().map(|&(u, v)| gram[(u, v)]).sum())
    }
}

fn class_key(w: &Word) -> Word {
    let r = w.reverse();
    if r < *w {
        r
    } else {
        w.clone()
    }
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("finite rational")
}

fn classify(basis: &GramBasis, m: u32) -> Vec<WordClass> {
    let k = basis.k;
    let mut pairs: BTreeMap<Word, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, u) in basis.words.iter().enumerate() {
        for (j, v) in basis.words.iter().enumerate() {
            pairs.entry(class_key(&Word::gram_product(u, v))).or_default().push((i, j));
        }
    }
    pairs
        .into_iter()
        .map(|(word, pairs)| {
            let sigma = sigma::<Rational>(&word, k, m, Mode::Generic);
            let marginals = (0..k as Letter).map(|x| sigma_x::<Rational>(&word, x, k, m, Mode::Generic)).collect();
            WordClass { word, pairs, sigma, marginals }
        })
        .collect()
}

/// Linear pieces of the assembled program, before any orbit aggregation.
struct Pieces {
    zero: Vec<(usize, LinExpr)>,
    nonneg: Vec<(usize, LinExpr)>,
    norm: LinExpr,
    /// Per measurement: `C_P + C_id` and `C_id`.
    marg: Vec<(LinExpr, LinExpr)>,
}

fn pieces(classes: &[WordClass], k: usize, m: u32) -> Pieces {
    // Everything is scaled by m^{1−k}; the ratio defining η is unchanged.
    let scale = Rational::from_integer(m as i64).pow(1 - k as i32);
    let mut out = Pieces {
        zero: Vec::new(),
        nonneg: Vec::new(),
        norm: LinExpr::new(),
        marg: vec![(LinExpr::new(), LinExpr::new()); k],
    };
    for (idx, c) in classes.iter().enumerate() {
        let mut coeff = LinExpr::new();
        for &(u, v) in &c.pairs {
            coeff.add_element(0, u, v, 1.0);
        }
        if !c.admissible() {
            out.zero.push((idx, coeff));
            continue;
        }
        if c.pinched() {
            out.nonneg.push((idx, coeff.clone()));
        }
        out.norm.add_expr(&coeff, to_f64(&(*c.sigma.as_ref().unwrap() * scale)));
        for (x, r) in c.marginals.iter().enumerate() {
            let r = r.as_ref().unwrap();
            let (p, id) = (to_f64(&(r.c_p * scale)), to_f64(&(r.c_id * scale)));
            if !(p + id).is_zero() {
                out.marg[x].0.add_expr(&coeff, p + id);
            }
            if !id.is_zero() {
                out.marg[x].1.add_expr(&coeff, id);
            }
        }
    }
    out
}

fn assemble(basis: GramBasis, m: u32, classes: Vec<WordClass>, orbits: Option<&[usize]>) -> HierarchyProblem {
    let k = basis.k;
    let n = basis.len();
    let name = format!("hierarchy_k{k}_m{m}_t{}", basis.t);
    let provenance = format!(
        "pinched sum-of-squares hierarchy, k = {k}, m = {m}, level {}, Gram basis {n}{}",
        basis.t,
        if orbits.is_some() { ", letter-permutation averaged" } else { "" }
    );
    let mut p = ConicProblem::new(name, provenance);
    let eta = p.add_scalar();
    p.add_block(n);
    p.objective.add_scalar(eta, 1.0);

    let pc = pieces(&classes, k, m);
    match orbits {
        None => {
            for (_, e) in pc.zero {
                p.add_eq(e, 0.0);
            }
            for (_, e) in pc.nonneg {
                p.add_ineq(e, 0.0);
            }
        }
        Some(orbit_of) => {
            let mut zero: BTreeMap<usize, LinExpr> = BTreeMap::new();
            for (idx, e) in pc.zero {
                zero.entry(orbit_of[idx]).or_default().add_expr(&e, 1.0);
            }
            let mut nonneg: BTreeMap<usize, LinExpr> = BTreeMap::new();
            for (idx, e) in pc.nonneg {
                nonneg.entry(orbit_of[idx]).or_default().add_expr(&e, 1.0);
            }
            for e in zero.into_values() {
                p.add_eq(e, 0.0);
            }
            for e in nonneg.into_values() {
                p.add_ineq(e, 0.0);
            }
        }
    }
    p.add_eq(pc.norm, 1.0);
    let marg: Vec<(LinExpr, LinExpr)> = match orbits {
        None => pc.marg,
        Some(_) => {
            // The letter group is transitive, so one averaged measurement suffices.
            let mut both = (LinExpr::new(), LinExpr::new());
            for (a, b) in &pc.marg {
                both.0.add_expr(a, 1.0 / k as f64);
                both.1.add_expr(b, 1.0 / k as f64);
            }
            vec![both]
        }
    };
    for (mut total, id) in marg {
        total.add_scalar(eta, -1.0);
        p.add_ineq(total, 0.0);
        if !id.is_empty() {
            p.add_ineq(id, 0.0);
        }
    }
    HierarchyProblem { basis, m, classes, problem: p, orbit_count: None }
}

pub fn build_hierarchy(k: usize, m: u32, t: usize) -> Result<HierarchyProblem, HierarchyError> {
    if m < 2 {
        return Err(HierarchyError::Domain(format!("m = {m} must be at least 2")));
    }
    let basis = enumerate_basis(k, t)?;
    let classes = classify(&basis, m);
    Ok(assemble(basis, m, classes, None))
}

/// Relabels letters by first appearance, so words in one orbit of the
/// letter-permutation group share the key.
fn canonical(letters: impl IntoIterator<Item = Option<Letter>>) -> Vec<Option<Letter>> {
    let mut map: HashMap<Letter, Letter> = HashMap::new();
    letters
        .into_iter()
        .map(|l| {
            l.map(|l| {
                let next = map.len() as Letter;
                *map.entry(l).or_insert(next)
            })
        })
        .collect()
}

fn word_orbit_key(w: &Word) -> Vec<Option<Letter>> {
    let a = canonical(w.letters().iter().copied().map(Some));
    let b = canonical(w.reverse().letters().iter().copied().map(Some));
    a.min(b)
}

fn pair_orbit_key(u: &Word, v: &Word) -> Vec<Option<Letter>> {
    let seq = |a: &Word, b: &Word| {
        canonical(a.letters().iter().copied().map(Some).chain([None]).chain(b.letters().iter().copied().map(Some)))
    };
    seq(u, v).min(seq(v, u))
}

/// Orbit index of every Gram entry `(u, v)`.
fn gram_orbits(basis: &GramBasis) -> (Vec<Vec<usize>>, usize) {
    let mut ids: HashMap<Vec<Option<Letter>>, usize> = HashMap::new();
    let n = basis.len();
    let mut orbit = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let key = pair_orbit_key(&basis.words[i], &basis.words[j]);
            let next = ids.len();
            orbit[i][j] = *ids.entry(key).or_insert(next);
        }
    }
    (orbit, ids.len())
}

/// The same program with every constraint summed over its orbit under
/// letter permutations. Averaging a feasible Gram matrix over the group
/// keeps it feasible for the original program, so the optimum is unchanged.
pub fn symmetrize(problem: &HierarchyProblem) -> HierarchyProblem {
    let mut ids: HashMap<Vec<Option<Letter>>, usize> = HashMap::new();
    let orbit_of: Vec<usize> = problem
        .classes
        .iter()
        .map(|c| {
            let next = ids.len();
            *ids.entry(word_orbit_key(&c.word)).or_insert(next)
        })
        .collect();
    let mut out = assemble(problem.basis.clone(), problem.m, problem.classes.clone(), Some(&orbit_of));
    out.orbit_count = Some(gram_orbits(&problem.basis).1);
    out
}

/// Averages a Gram matrix over letter permutations.
pub fn average_over_orbits(basis: &GramBasis, gram: &DMatrix<f64>) -> DMatrix<f64> {
    let (orbit, count) = gram_orbits(basis);
    let n = basis.len();
    let mut sum = vec![0.0; count];
    let mut size = vec![0usize; count];
    for i in 0..n {
        for j in 0..n {
            sum[orbit[i][j]] += gram[(i, j)];
            size[orbit[i][j]] += 1;
        }
    }
    DMatrix::from_fn(n, n, |i, j| sum[orbit[i][j]] / size[orbit[i][j]] as f64)
}

#[derive(Clone, Debug)]
pub struct HierarchySolution {
    pub eta: f64,
    pub report: SolveReport,
    /// Letter-permutation invariant when the problem was symmetrised.
    pub gram: Option<DMatrix<f64>>,
}

pub fn solve_problem(hp: &HierarchyProblem, tol: f64) -> Result<HierarchySolution, HierarchyError> {
    let report = conic::solve(&hp.problem, tol)?;
    if !matches!(report.status, SolveStatus::Optimal | SolveStatus::Inaccurate) {
        return Err(HierarchyError::Solver {
            status: report.status,
            basis: hp.basis.len(),
            constraints: hp.problem.constraint_count(),
            message: report.message.clone().unwrap_or_default(),
        });
    }
    let gram = report.solution.as_ref().map(|s| {
        let g = &s.blocks[0];
        if hp.orbit_count.is_some() {
            average_over_orbits(&hp.basis, g)
        } else {
            g.clone()
        }
    });
    Ok(HierarchySolution { eta: report.objective, report, gram })
}

/// Universal lower bound on `η^g` at level `t`, from the symmetrised program.
pub fn solve_level(k: usize, m: u32, t: usize, tol: f64) -> Result<BoundResult<f64>, HierarchyError> {
    let hp = symmetrize(&build_hierarchy(k, m, t)?);
    let sol = solve_problem(&hp, tol)?;
    let warning = (sol.report.status != SolveStatus::Optimal)
        .then(|| sol.report.message.clone().unwrap_or_else(|| "inaccurate solve".into()));
    Ok(BoundResult {
        value: sol.eta,
        construction: Construction::Hierarchy,
        measures: vec![Measure::G],
        k: k as u32,
        m,
        level: Some(t as u32),
        gammas: None,
        warning,
    })
}
