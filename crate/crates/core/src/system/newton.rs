use super::{Discretization, ProblemData, State};
use crate::config::PhysicalParameters;
use crate::error::{Result, VemError};
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuSymbolicParams, NumericLu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat, Par};
use nalgebra::DVector;

pub use crate::config::NewtonSettings as NewtonOptions;

/// Iteration count and residual norms of one Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub iterations: usize,
    /// Max-norm residuals, starting with the initial guess.
    pub history: Vec<f64>,
}

impl StepReport {
    pub fn final_residual(&self) -> f64 {
        *self.history.last().unwrap_or(&0.0)
    }
}

/// Newton solver that keeps the symbolic LU of the Jacobian pattern, which
/// does not change between iterations or steps.
#[derive(Default)]
pub struct NewtonSolver {
    symbolic: Option<SymbolicLu<usize>>,
}

impl NewtonSolver {
    pub fn new() -> Self {
        Self::default()
    }

    fn solve_linear(
        &mut self,
        n: usize,
        trip: &[Triplet<usize, usize, f64>],
        r: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let err = |e: &dyn std::fmt::Debug| VemError::LinearSolver(format!("{e:?}"));
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, trip).map_err(|e| err(&e))?;
        if self.symbolic.is_none() {
            self.symbolic =
                Some(factorize_symbolic_lu(a.symbolic(), LuSymbolicParams::default()).map_err(|e| err(&e))?);
        }
        let sym = self.symbolic.as_ref().unwrap();
        let par = Par::Seq;
        let mut numeric = NumericLu::new();
        let mut buf = MemBuffer::new(sym.factorize_numeric_lu_scratch::<f64>(par, Default::default()));
        let lu = sym
            .factorize_numeric_lu(&mut numeric, a.as_ref(), par, MemStack::new(&mut buf), Default::default())
            .map_err(|e| err(&e))?;
        let mut x = Mat::from_fn(n, 1, |i, _| -r[i]);
        let mut buf = MemBuffer::new(sym.solve_in_place_scratch::<f64>(1, par));
        lu.solve_in_place_with_conj(Conj::No, x.as_mut(), par, MemStack::new(&mut buf));
        let out = DVector::from_fn(n, |i, _| x[(i, 0)]);
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(VemError::LinearSolver("singular Jacobian".into()))
        }
    }

    /// Advances `prev` by one backward Euler step to time `prev.t + tau`.
    pub fn step(
        &mut self,
        disc: &Discretization,
        prev: &State,
        tau: f64,
        problem: &dyn ProblemData,
        params: &PhysicalParameters,
        opts: &NewtonOptions,
    ) -> Result<(State, StepReport)> {
        let n = disc.num_unknowns();
        let mut s = prev.clone();
        s.t = prev.t + tau;
        disc.impose_velocity_boundary(&mut s.u, &|x, t| problem.velocity_boundary(x, t), s.t);
        disc.impose_phase_boundary(&mut s.phi);
        let loads = disc.loads(problem, s.t);

        let mut cur = disc.assemble(&s, prev, tau, &loads, params, true)?;
        let r0 = cur.residual.amax();
        let mut history = vec![r0];
        if r0 <= opts.abs_tol {
            return Ok((s, StepReport { iterations: 0, history }));
        }
        for it in 1..=opts.max_iter {
            let trip = cur.jacobian.take().expect("jacobian requested");
            let dx = self.solve_linear(n, &trip, &cur.residual)?;
            let rn = *history.last().unwrap();
            let mut alpha = 1.0;
            let mut trial = s.clone();
            disc.apply_increment(&mut trial, &dx, alpha);
            let mut next = disc.assemble(&trial, prev, tau, &loads, params, false)?;
            if opts.backtracking {
                while next.residual.amax() > (1.0 - 1e-4 * alpha) * rn && alpha > 1.0 / 64.0 {
                    alpha *= 0.5;
                    trial = s.clone();
                    disc.apply_increment(&mut trial, &dx, alpha);
                    next = disc.assemble(&trial, prev, tau, &loads, params, false)?;
                }
            }
            s = trial;
            let norm = next.residual.amax();
            if !norm.is_finite() {
                return Err(VemError::NonFinite { what: "newton residual".into() });
            }
            history.push(norm);
            if norm <= opts.rel_tol * r0 || norm <= opts.abs_tol {
                return Ok((s, StepReport { iterations: it, history }));
            }
            if it < opts.max_iter {
                cur = disc.assemble(&s, prev, tau, &loads, params, true)?;
            }
        }
        Err(VemError::NewtonDiverged { iterations: opts.max_iter, history })
    }
}
