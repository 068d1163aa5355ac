//! Degree-four parents `(S − γ1)² (S − γ2)²` for mutually unbiased bases.

use argmin::core::{
    CostFunction, Error as ArgminError, Executor, State, TerminationReason, TerminationStatus,
};
use argmin::solver::neldermead::NelderMead;

use super::{AnalyticError, BoundResult, Construction, Measure};
use crate::scalar::Real;

/// Sums of `S^p` for `k` MUBs in dimension `d`, all divided by `d^k`:
/// `Σ_ȷ S^p = normalisation · 1` and
/// `Σ_{ȷ: j_x = a} S^p = c_p · P_{a|x} + c_id · 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MubMoment<F> {
    pub normalisation: F,
    pub c_p: F,
    pub c_id: F,
}

/// Moment of degree `p ≤ 4`.
pub fn mub_moment<F: Real>(k: u32, d: u32, p: u32) -> MubMoment<F> {
    let kf = F::from_u32(k).unwrap();
    let df = F::from_u32(d).unwrap();
    let n = |v: f64| F::lit(v);
    let (k1, k2, k3, k4) = (kf - n(1.0), kf - n(2.0), kf - n(3.0), kf - n(4.0));
    let (d2, d3) = (df * df, df * df * df);
    let inv = |e: i32| df.powi(-e);
    match p {
        0 => MubMoment { normalisation: F::one(), c_p: F::zero(), c_id: inv(1) },
        1 => MubMoment { normalisation: kf * inv(1), c_p: inv(1), c_id: k1 * inv(2) },
        2 => MubMoment {
            normalisation: kf * (df + k1) * inv(2),
            c_p: (df + n(2.0) * k1) * inv(2),
            c_id: k1 * (df + k2) * inv(3),
        },
        3 => MubMoment {
            normalisation: kf * (d2 + n(3.0) * k1 * df + k1 * k2) * inv(3),
            c_p: (d2 + n(5.0) * k1 * df + n(3.0) * k1 * k2) * inv(3),
            c_id: k1 * (d2 + (n(3.0) * kf - n(5.0)) * df + k2 * k3) * inv(4),
        },
        4 => MubMoment {
            normalisation: kf * (d3 + n(6.0) * k1 * d2 + k1 * (n(6.0) * kf - n(11.0)) * df + k1 * k2 * k3)
                * inv(4),
            c_p: (d3 + n(9.0) * k1 * d2 + n(2.0) * k1 * (n(7.0) * kf - n(13.0)) * df + n(4.0) * k1 * k2 * k3)
                * inv(4),
            c_id: k1
                * (d3 + n(3.0) * (n(2.0) * kf - n(3.0)) * d2 + k2 * (n(6.0) * kf - n(13.0)) * df + k2 * k3 * k4)
                * inv(5),
        },
        _ => panic!("MUB moments are tabulated up to degree four"),
    }
}

/// Depolarising noise level of the parent `Σ_i q_i S^i` (coefficients
/// `q`, degree ≤ 4) for `k` MUBs in dimension `d`.
pub fn polynomial_eta<F: Real>(k: u32, d: u32, q: &[F]) -> F {
    let (mut cp, mut cid) = (F::zero(), F::zero());
    for (i, &qi) in q.iter().enumerate() {
        let mo = mub_moment::<F>(k, d, i as u32);
        cp = cp + qi * mo.c_p;
        cid = cid + qi * mo.c_id;
    }
    let total = cp + F::from_u32(d).unwrap() * cid;
    if total <= F::zero() {
        return F::neg_infinity();
    }
    cp / total
}

/// `η` of `(S − γ1)² (S − γ2)²`.
pub fn quartic_eta<F: Real>(k: u32, d: u32, g1: F, g2: F) -> F {
    let two = F::lit(2.0);
    let a = g1 + g2;
    let b = g1 * g2;
    let q = [b * b, -two * a * b, a * a + two * b, -two * a, F::one()];
    polynomial_eta(k, d, &q)
}

/// Result of the two-parameter optimisation.
#[derive(Clone, Debug, PartialEq)]
pub struct MubDegree4 {
    pub bound: BoundResult<f64>,
    /// `η^{(i)}` of the monomial parents `S^i`, `i = 1..=4`.
    pub monomials: [f64; 4],
}

struct NegEta {
    k: u32,
    d: u32,
}

impl CostFunction for NegEta {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, ArgminError> {
        let eta = quartic_eta(self.k, self.d, p[0], p[1]);
        Ok(if eta.is_finite() { -eta } else { f64::INFINITY })
    }
}

const GRID: usize = 200;

/// Best degree-four MUB parent: grid search on `[0, k]²` followed by a
/// Nelder–Mead polish.
pub fn mub_degree4_bound(k: u32, d: u32) -> Result<MubDegree4, AnalyticError> {
    if k < 2 || d < 2 {
        return Err(AnalyticError::Domain(format!("need k, d ≥ 2, got k={k}, d={d}")));
    }
    let kf = k as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=GRID {
        for j in i..=GRID {
            let g1 = kf * i as f64 / GRID as f64;
            let g2 = kf * j as f64 / GRID as f64;
            let eta = quartic_eta(k, d, g1, g2);
            if eta > best.0 {
                best = (eta, g1, g2);
            }
        }
    }

    let step = kf / GRID as f64;
    let (_, g1, g2) = best;
    let simplex = vec![vec![g1, g2], vec![g1 + step, g2], vec![g1, g2 + step]];
    let mut warning = None;
    let polished = NelderMead::new(simplex)
        .with_sd_tolerance(1e-15)
        .map_err(|e| AnalyticError::Domain(e.to_string()))
        .and_then(|solver| {
            Executor::new(NegEta { k, d }, solver)
                .configure(|s| s.max_iters(2000))
                .run()
                .map_err(|e| AnalyticError::Domain(e.to_string()))
        });
    match polished {
        Ok(res) => {
            let state = res.state();
            if let Some(p) = state.get_best_param() {
                let eta = -state.get_best_cost();
                if eta >= best.0 {
                    best = (eta, p[0], p[1]);
                }
            }
            if !matches!(
                state.get_termination_status(),
                TerminationStatus::Terminated(TerminationReason::SolverConverged)
            ) {
                warning = Some(format!("polish ended with {:?}", state.get_termination_status()));
            }
        }
        Err(e) => warning = Some(format!("polish failed: {e}; grid optimum reported")),
    }

    let (value, a, b) = best;
    let gammas = if a <= b { (a, b) } else { (b, a) };
    let monomials = [1, 2, 3, 4].map(|i| {
        let mut q = [0.0; 5];
        q[i] = 1.0;
        polynomial_eta(k, d, &q)
    });
    Ok(MubDegree4 {
        bound: BoundResult {
            value,
            construction: Construction::Deg4Mub,
            measures: vec![Measure::D],
            k,
            m: d,
            level: None,
            gammas: Some(gammas),
            warning,
        },
        monomials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalisation_matches_marginal_sum() {
        for k in 2..7 {
            for d in 2..10 {
                for p in 0..5 {
                    let mo = mub_moment::<f64>(k, d, p);
                    let sum = mo.c_p + d as f64 * mo.c_id;
                    assert!((sum - mo.normalisation).abs() < 1e-12 * mo.normalisation, "k={k} d={d} p={p}");
                }
            }
        }
    }

    #[test]
    fn table_cells() {
        for ((k, d), want) in [((2, 2), 0.7071), ((3, 3), 0.5483), ((5, 4), 0.3933), ((7, 6), 0.2941)] {
            let r = mub_degree4_bound(k, d).unwrap();
            assert!((r.bound.value - want).abs() < 1e-4, "({k},{d}) {}", r.bound.value);
        }
    }

    #[test]
    fn optimal_shifts_for_five_bases_in_dimension_four() {
        let r = mub_degree4_bound(5, 4).unwrap();
        let (g1, g2) = r.bound.gammas.unwrap();
        assert!((g1 - (3.0 - 6f64.sqrt()) / 2.0).abs() < 1e-4, "{g1}");
        assert!((g2 - 1.25).abs() < 1e-4, "{g2}");
        assert!(r.bound.warning.is_none(), "{:?}", r.bound.warning);
    }

    #[test]
    fn optimisation_beats_monomials() {
        for k in 2..8 {
            for d in 2..7 {
                let r = mub_degree4_bound(k, d).unwrap();
                let best = r.monomials.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert!(r.bound.value >= best - 1e-12, "k={k} d={d}");
            }
        }
    }

    #[test]
    fn linear_monomial_is_one_over_k() {
        let r = mub_degree4_bound(4, 5).unwrap();
        assert!((r.monomials[0] - 0.25).abs() < 1e-15);
    }
}
