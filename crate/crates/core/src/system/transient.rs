use super::{Discretization, NewtonOptions, NewtonSolver, ProblemData, State};
use crate::config::PhysicalParameters;
use crate::diagnostics::{div_inf_norm, energy_j, total_mass};
use crate::error::{Result, VemError};
use std::collections::BTreeSet;

/// Uniform time levels `t0 + n tau`, `n = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub tau: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn uniform(t0: f64, t_end: f64, steps: usize) -> Self {
        Self { t0, tau: (t_end - t0) / steps as f64, steps }
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.tau
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub newton: NewtonOptions,
    /// Steps whose states are kept in [`Trajectory::snapshots`].
    pub snapshot_steps: BTreeSet<usize>,
}

/// Per-step diagnostics; step 0 describes the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub newton_iters: usize,
    pub final_residual: f64,
    pub div_inf_norm: f64,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<(usize, State)>,
    pub final_state: State,
}

/// Interpolated initial data with boundary values imposed.
pub fn initial_state(disc: &Discretization, problem: &dyn ProblemData, t0: f64) -> State {
    let mut s = State::zeros(&disc.dofs, t0);
    s.u = disc.interpolate_velocity(&|x| problem.initial_velocity(x));
    s.phi = disc.interpolate_phase(&|x| problem.initial_phase(x));
    disc.impose_velocity_boundary(&mut s.u, &|x, t| problem.velocity_boundary(x, t), t0);
    disc.impose_phase_boundary(&mut s.phi);
    s
}

fn record(disc: &Discretization, s: &State, params: &PhysicalParameters, step: usize, history: Vec<f64>) -> StepRecord {
    StepRecord {
        step,
        t: s.t,
        mass: total_mass(disc, &s.phi),
        energy: energy_j(disc, s, params),
        newton_iters: history.len().saturating_sub(1),
        final_residual: history.last().copied().unwrap_or(0.0),
        div_inf_norm: div_inf_norm(disc, &s.u),
        residual_history: history,
    }
}

pub fn run_transient(
    disc: &Discretization,
    problem: &dyn ProblemData,
    params: &PhysicalParameters,
    grid: &TimeGrid,
    opts: &RunOptions,
) -> Result<Trajectory> {
    run_transient_with(disc, problem, params, grid, opts, &mut |_, _| Ok(()))
}

/// Like [`run_transient`], calling `on_step` after the initial state and
/// after every accepted step.
pub fn run_transient_with(
    disc: &Discretization,
    problem: &dyn ProblemData,
    params: &PhysicalParameters,
    grid: &TimeGrid,
    opts: &RunOptions,
    on_step: &mut dyn FnMut(&StepRecord, &State) -> Result<()>,
) -> Result<Trajectory> {
    if !(grid.tau > 0.0) || !grid.tau.is_finite() {
        return Err(VemError::config("time.tau", format!("step {} must be positive", grid.tau)));
    }
    let mut s = initial_state(disc, problem, grid.t0);
    let mut records = Vec::with_capacity(grid.steps + 1);
    let mut snapshots = Vec::new();
    let r0 = record(disc, &s, params, 0, Vec::new());
    on_step(&r0, &s)?;
    records.push(r0);
    if opts.snapshot_steps.contains(&0) {
        snapshots.push((0, s.clone()));
    }
    let mut newton = NewtonSolver::new();
    for n in 1..=grid.steps {
        let (mut next, report) = newton
            .step(disc, &s, grid.tau, problem, params, &opts.newton)
            .map_err(|e| VemError::Step { step: n, source: Box::new(e) })?;
        next.t = grid.time(n);
        let r = record(disc, &next, params, n, report.history);
        on_step(&r, &next)?;
        records.push(r);
        if opts.snapshot_steps.contains(&n) {
            snapshots.push((n, next.clone()));
        }
        s = next;
    }
    Ok(Trajectory { records, snapshots, final_state: s })
}
