//! Global degrees of freedom, constraints, assembly of the backward Euler
//! residual and Jacobian, Newton's method and the time loop.

mod assembly;
mod dofs;
mod newton;
mod transient;

pub use assembly::{Assembled, Discretization};
pub use dofs::DofMap;
pub use newton::{NewtonOptions, NewtonSolver, StepReport};
pub use transient::{initial_state, run_transient, run_transient_with, RunOptions, StepRecord, TimeGrid, Trajectory};

use crate::forms::Sources;
use crate::polyops::Vec2;
use nalgebra::DVector;

/// Boundary, initial and source data of a problem.
pub trait ProblemData: Sources {
    /// Dirichlet velocity on the boundary.
    fn velocity_boundary(&self, _x: &Vec2, _t: f64) -> Vec2 {
        Vec2::zeros()
    }
    fn initial_velocity(&self, x: &Vec2) -> Vec2;
    /// Initial phase value and gradient.
    fn initial_phase(&self, x: &Vec2) -> (f64, Vec2);
}

/// Full coefficient vectors at one time level, constrained entries included.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: DVector<f64>,
    pub p: DVector<f64>,
    /// Multiplier of the zero-mean pressure constraint.
    pub mu: f64,
    pub phi: DVector<f64>,
}

impl State {
    pub fn zeros(dofs: &DofMap, t: f64) -> Self {
        Self {
            t,
            u: DVector::zeros(dofs.n_vel),
            p: DVector::zeros(dofs.n_press),
            mu: 0.0,
            phi: DVector::zeros(dofs.n_phase),
        }
    }
}
