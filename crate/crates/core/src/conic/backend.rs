//! Backend contract and the Clarabel adapter.

use super::{ConicError, ConicProblem, SolveReport};

/// Default solver tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// A conic solver able to handle free scalars, linear (in)equalities and
/// real PSD blocks.
pub trait ConicBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, problem: &ConicProblem, tol: f64) -> Result<SolveReport, ConicError>;
}

/// The backend compiled into this build.
pub fn default_backend() -> Result<Box<dyn ConicBackend>, ConicError> {
    #[cfg(feature = "clarabel")]
    {
        Ok(Box::new(ClarabelBackend::default()))
    }
    #[cfg(not(feature = "clarabel"))]
    {
        Err(ConicError::BackendUnavailable)
    }
}

/// Solves with the default backend.
pub fn solve(problem: &ConicProblem, tol: f64) -> Result<SolveReport, ConicError> {
    solve_with(default_backend()?.as_ref(), problem, tol)
}

pub fn solve_with(backend: &dyn ConicBackend, problem: &ConicProblem, tol: f64) -> Result<SolveReport, ConicError> {
    if !(1e-10..=1e-2).contains(&tol) {
        return Err(ConicError::InvalidTolerance(tol));
    }
    problem.validate()?;
    backend.solve(problem, tol)
}

#[cfg(feature = "clarabel")]
pub use self::clarabel_impl::ClarabelBackend;

#[cfg(feature = "clarabel")]
mod clarabel_impl {
    use std::time::Instant;

    use clarabel::algebra::CscMatrix;
    use clarabel::solver::{
        DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
    };
    use nalgebra::DMatrix;
    // Links the system BLAS/LAPACK used by the PSD cone.
    use openblas_src as _;

    use super::super::{ConicError, ConicProblem, LinExpr, PrimalSolution, SolveReport, SolveStatus};
    use super::ConicBackend;

    /// Interior-point solver from the `clarabel` crate.
    #[derive(Clone, Debug)]
    pub struct ClarabelBackend {
        pub max_iter: u32,
    }

    impl Default for ClarabelBackend {
        fn default() -> Self {
            ClarabelBackend { max_iter: 400 }
        }
    }

    /// Column layout: scalars first, then each block in svec order (upper
    /// triangle, column-major, off-diagonals scaled by √2).
    struct Layout {
        offsets: Vec<usize>,
        total: usize,
    }

    impl Layout {
        fn new(p: &ConicProblem) -> Self {
            let mut offsets = Vec::with_capacity(p.psd_blocks.len());
            let mut next = p.scalar_vars;
            for &n in &p.psd_blocks {
                offsets.push(next);
                next += n * (n + 1) / 2;
            }
            Layout { offsets, total: next }
        }

        fn index(&self, block: usize, row: usize, col: usize) -> usize {
            self.offsets[block] + col * (col + 1) / 2 + row
        }

        /// Pushes the coefficients of `e` as (column, value) pairs.
        fn row(&self, e: &LinExpr, out: &mut Vec<(usize, f64)>) {
            out.extend(e.scalars());
            for b in e.entries() {
                let v = if b.row == b.col { b.value } else { std::f64::consts::SQRT_2 * b.value };
                out.push((self.index(b.block, b.row, b.col), v));
            }
        }

        fn unpack(&self, p: &ConicProblem, x: &[f64]) -> PrimalSolution {
            let scalars = x[..p.scalar_vars].to_vec();
            let blocks = p
                .psd_blocks
                .iter()
                .enumerate()
                .map(|(b, &n)| {
                    DMatrix::from_fn(n, n, |i, j| {
                        let (r, c) = if i <= j { (i, j) } else { (j, i) };
                        let v = x[self.index(b, r, c)];
                        if r == c { v } else { v / std::f64::consts::SQRT_2 }
                    })
                })
                .collect();
            PrimalSolution { scalars, blocks }
        }
    }

    impl ConicBackend for ClarabelBackend {
        fn name(&self) -> &'static str {
            "clarabel"
        }

        fn solve(&self, p: &ConicProblem, tol: f64) -> Result<SolveReport, ConicError> {
            let start = Instant::now();
            let layout = Layout::new(p);
            let n = layout.total;

            let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
            let mut b = Vec::new();
            let mut cones = Vec::new();
            let mut buf = Vec::new();
            let mut r = 0;
            // Ax + s = b, s ∈ {0}: the equality rows.
            for c in &p.eq_constraints {
                buf.clear();
                layout.row(&c.expr, &mut buf);
                for &(j, v) in &buf {
                    rows.push(r);
                    cols.push(j);
                    vals.push(v);
                }
                b.push(c.rhs);
                r += 1;
            }
            if !p.eq_constraints.is_empty() {
                cones.push(SupportedConeT::ZeroConeT(p.eq_constraints.len()));
            }
            // expr ≥ rhs  ⇔  −expr + s = −rhs, s ≥ 0.
            for c in &p.ineq_constraints {
                buf.clear();
                layout.row(&c.expr, &mut buf);
                for &(j, v) in &buf {
                    rows.push(r);
                    cols.push(j);
                    vals.push(-v);
                }
                b.push(-c.rhs);
                r += 1;
            }
            if !p.ineq_constraints.is_empty() {
                cones.push(SupportedConeT::NonnegativeConeT(p.ineq_constraints.len()));
            }
            // −svec(X) + s = 0, s ∈ PSD.
            for (blk, &size) in p.psd_blocks.iter().enumerate() {
                for j in 0..size {
                    for i in 0..=j {
                        rows.push(r);
                        cols.push(layout.index(blk, i, j));
                        vals.push(-1.0);
                        b.push(0.0);
                        r += 1;
                    }
                }
                cones.push(SupportedConeT::PSDTriangleConeT(size));
            }

            let a = CscMatrix::new_from_triplets(r, n, rows, cols, vals);
            let pmat = CscMatrix::zeros((n, n));
            let mut q = vec![0.0; n];
            let mut obj = Vec::new();
            layout.row(&p.objective, &mut obj);
            for (j, v) in obj {
                q[j] -= v;
            }

            let settings = DefaultSettingsBuilder::default()
                .verbose(false)
                .max_iter(self.max_iter)
                .tol_feas(tol)
                .tol_gap_abs(tol)
                .tol_gap_rel(tol)
                .build()
                .map_err(|e| ConicError::InvalidProblem(format!("solver settings: {e:?}")))?;

            let mut solver = match DefaultSolver::new(&pmat, &q, &a, &b, &cones, settings) {
                Ok(s) => s,
                Err(e) => {
                    return Ok(SolveReport {
                        status: SolveStatus::Failed,
                        objective: f64::NAN,
                        primal_residual: f64::INFINITY,
                        solve_time_s: start.elapsed().as_secs_f64(),
                        backend: self.name().into(),
                        iterations: 0,
                        message: Some(format!("setup failed: {e}")),
                        solution: None,
                    })
                }
            };
            solver.solve();
            let sol = &solver.solution;

            let mut status = match sol.status {
                SolverStatus::Solved => SolveStatus::Optimal,
                SolverStatus::AlmostSolved => SolveStatus::Inaccurate,
                SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
                SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
                _ => SolveStatus::Failed,
            };
            let mut message = match status {
                SolveStatus::Optimal => None,
                _ => Some(format!("clarabel status {:?}", sol.status)),
            };

            let has_point = matches!(status, SolveStatus::Optimal | SolveStatus::Inaccurate);
            let (objective, residual, solution) = if has_point {
                let point = layout.unpack(p, &sol.x);
                let obj = p.objective.evaluate(&point.scalars, &point.blocks);
                let res = p.primal_residual(&point.scalars, &point.blocks);
                (obj, res, Some(point))
            } else {
                (f64::NAN, f64::INFINITY, None)
            };
            if status == SolveStatus::Optimal && residual > tol {
                status = SolveStatus::Inaccurate;
                message = Some(format!("primal residual {residual:e} exceeds tolerance {tol:e}"));
            }

            Ok(SolveReport {
                status,
                objective,
                primal_residual: residual,
                solve_time_s: start.elapsed().as_secs_f64(),
                backend: self.name().into(),
                iterations: sol.iterations,
                message,
                solution,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{LinExpr, SolveStatus};
    use super::*;

    #[test]
    fn tolerance_range_enforced() {
        let p = ConicProblem::new("t", "test");
        assert!(matches!(solve(&p, 1e-12), Err(ConicError::InvalidTolerance(_))));
        assert!(matches!(solve(&p, 0.1), Err(ConicError::InvalidTolerance(_))));
    }

    #[test]
    fn maximise_bounded_scalar() {
        let mut p = ConicProblem::new("t", "test");
        let x = p.add_scalar();
        p.objective.add_scalar(x, 1.0);
        let mut e = LinExpr::new();
        e.add_scalar(x, -1.0);
        p.add_ineq(e, -1.0);
        let r = solve(&p, DEFAULT_TOL).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-7);
    }

    #[test]
    fn feasibility_problem_has_zero_objective() {
        let mut p = ConicProblem::new("t", "test");
        let b = p.add_block(2);
        let mut e = LinExpr::new();
        e.add_element(b, 0, 0, 1.0).add_element(b, 1, 1, 1.0);
        p.add_eq(e, 1.0);
        let r = solve(&p, DEFAULT_TOL).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn psd_block_bounds_off_diagonal() {
        // max 2 X01 s.t. X00 = X11 = 1, X ⪰ 0  → 2.
        let mut p = ConicProblem::new("t", "test");
        let b = p.add_block(2);
        p.objective.add_element(b, 0, 1, 1.0).add_element(b, 1, 0, 1.0);
        for i in 0..2 {
            let mut e = LinExpr::new();
            e.add_element(b, i, i, 1.0);
            p.add_eq(e, 1.0);
        }
        let r = solve(&p, DEFAULT_TOL).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 2.0).abs() < 1e-7);
        let x = &r.solution.unwrap().blocks[0];
        assert!((x[(0, 1)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_detected() {
        let mut p = ConicProblem::new("t", "test");
        let b = p.add_block(1);
        let mut e = LinExpr::new();
        e.add_element(b, 0, 0, 1.0);
        p.add_eq(e, -1.0);
        let r = solve(&p, DEFAULT_TOL).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.message.is_some());
    }
}
