//! C interface to the `nsch-vem` solver.
//!
//! A solver is created from configuration text in the command line grammar,
//! advanced one backward Euler step at a time and queried for diagnostics.
//! Every fallible function returns an [`NschStatus`]; the message of the
//! most recent failure on the calling thread is available from
//! [`nsch_last_error`]. Handles are opaque and must be released with
//! [`nsch_solver_free`].

use nsch_vem::config::{Experiment, PhysicalParameters, RunConfig};
use nsch_vem::diagnostics::{compute_errors, div_inf_norm, energy_j, total_mass, Test1Problem};
use nsch_vem::experiments::{build_mesh, problem_for};
use nsch_vem::mesh::{read_mesh, validate_mesh};
use nsch_vem::system::{initial_state, Discretization, NewtonOptions, NewtonSolver, ProblemData, State};
use nsch_vem::VemError;
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NschStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Mesh = 4,
    Solver = 5,
    Io = 6,
    /// The query needs the manufactured solution of the `test1` experiment.
    NotAvailable = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque solver handle.
pub struct NschSolver {
    disc: Discretization,
    problem: Box<dyn ProblemData>,
    exact: Option<Test1Problem>,
    params: PhysicalParameters,
    newton_opts: NewtonOptions,
    newton: NewtonSolver,
    tau: f64,
    steps: usize,
    step: usize,
    state: State,
}

/// Diagnostics of the current time level.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NschStepInfo {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    /// Newton iterations of the last step, 0 for the initial state.
    pub newton_iters: usize,
    pub final_residual: f64,
    pub div_inf_norm: f64,
}

/// Sizes of a solver.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NschSizes {
    pub cells: usize,
    pub vertices: usize,
    pub unknowns: usize,
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
    pub phase_dofs: usize,
    /// Steps of the configured time grid.
    pub steps: usize,
    pub tau: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &VemError) -> NschStatus {
    match e.root() {
        _ if e.is_solver_failure() => NschStatus::Solver,
        VemError::Io(_) => NschStatus::Io,
        VemError::Config { .. } | VemError::Unsupported(_) => NschStatus::Config,
        _ => NschStatus::Mesh,
    }
}

fn guard(f: impl FnOnce() -> Result<(), NschStatus>) -> NschStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NschStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            NschStatus::Panic
        }
    }
}

fn fail(e: VemError) -> NschStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, NschStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(NschStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        NschStatus::InvalidUtf8
    })
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, NschStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null output argument");
        NschStatus::NullArgument
    })
}

unsafe fn solver<'a>(p: *const NschSolver) -> Result<&'a NschSolver, NschStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null solver handle");
        NschStatus::NullArgument
    })
}

/// Message of the last failure on this thread; empty when none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nsch_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nsch_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn build(config: &str) -> nsch_vem::Result<NschSolver> {
    let mut cfg = RunConfig::parse(config)?;
    cfg.validate()?;
    let mesh = build_mesh(&cfg, cfg.family, cfg.n)?;
    let disc = Discretization::new(mesh, cfg.k, cfg.l)?;
    let (steps, tau) = cfg.time_grid_for(cfg.n);
    let problem = problem_for(&cfg);
    let state = initial_state(&disc, problem.as_ref(), cfg.t0);
    Ok(NschSolver {
        exact: (cfg.experiment == Experiment::Test1).then(|| Test1Problem::new(cfg.params)),
        params: cfg.params,
        newton_opts: cfg.newton.clone(),
        newton: NewtonSolver::new(),
        disc,
        problem,
        tau,
        steps,
        step: 0,
        state,
    })
}

/// Creates a solver from configuration text and sets it to the
/// interpolated initial state. `*out` is null on failure.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsch_solver_new(config: *const c_char, out_solver: *mut *mut NschSolver) -> NschStatus {
    guard(|| {
        let slot = out(out_solver)?;
        *slot = std::ptr::null_mut();
        let s = build(text(config)?).map_err(fail)?;
        *slot = Box::into_raw(Box::new(s));
        Ok(())
    })
}

/// Releases a solver; null is ignored.
///
/// # Safety
/// `s` must come from [`nsch_solver_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nsch_solver_free(s: *mut NschSolver) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle and `sizes` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsch_solver_sizes(s: *const NschSolver, sizes: *mut NschSizes) -> NschStatus {
    guard(|| {
        let s = solver(s)?;
        let d = &s.disc.dofs;
        *out(sizes)? = NschSizes {
            cells: s.disc.mesh.num_cells(),
            vertices: s.disc.mesh.num_vertices(),
            unknowns: s.disc.num_unknowns(),
            velocity_dofs: d.n_vel,
            pressure_dofs: d.n_press,
            phase_dofs: d.n_phase,
            steps: s.steps,
            tau: s.tau,
        };
        Ok(())
    })
}

fn info(s: &NschSolver, iters: usize, residual: f64) -> NschStepInfo {
    NschStepInfo {
        step: s.step,
        t: s.state.t,
        mass: total_mass(&s.disc, &s.state.phi),
        energy: energy_j(&s.disc, &s.state, &s.params),
        newton_iters: iters,
        final_residual: residual,
        div_inf_norm: div_inf_norm(&s.disc, &s.state.u),
    }
}

/// Diagnostics of the current state.
///
/// # Safety
/// `s` must be a live handle and `info_out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsch_solver_info(s: *const NschSolver, info_out: *mut NschStepInfo) -> NschStatus {
    guard(|| {
        *out(info_out)? = info(solver(s)?, 0, 0.0);
        Ok(())
    })
}

/// Advances one step of the configured size. On failure the state is
/// left unchanged. `info_out` may be null.
///
/// # Safety
/// `s` must be a live handle; `info_out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn nsch_solver_step(s: *mut NschSolver, info_out: *mut NschStepInfo) -> NschStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| {
            set_error("null solver handle");
            NschStatus::NullArgument
        })?;
        let (mut next, report) =
            s.newton.step(&s.disc, &s.state, s.tau, s.problem.as_ref(), &s.params, &s.newton_opts).map_err(fail)?;
        s.step += 1;
        next.t = s.state.t + s.tau;
        s.state = next;
        if let Some(o) = info_out.as_mut() {
            *o = info(s, report.iterations, report.history.last().copied().unwrap_or(0.0));
        }
        Ok(())
    })
}

/// Relative errors `[u in H1, p in L2, phi in H2]` against the manufactured
/// solution; only for the `test1` experiment.
///
/// # Safety
/// `s` must be a live handle and `errors` point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn nsch_solver_errors(s: *const NschSolver, errors: *mut f64) -> NschStatus {
    guard(|| {
        let s = solver(s)?;
        if errors.is_null() {
            set_error("null output argument");
            return Err(NschStatus::NullArgument);
        }
        let Some(exact) = &s.exact else {
            set_error("errors need the test1 experiment");
            return Err(NschStatus::NotAvailable);
        };
        let e = compute_errors(&s.disc, &s.state, exact);
        std::slice::from_raw_parts_mut(errors, 3).copy_from_slice(&[e.err_u_h1, e.err_p_l2, e.err_phi_h2]);
        Ok(())
    })
}

/// Copies the phase DoF vector into `buf`. `*len` holds the capacity on
/// entry and the required length on return; a null `buf` only queries it.
///
/// # Safety
/// `s` must be a live handle, `len` valid and `buf` null or writable for
/// `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsch_solver_phase(s: *const NschSolver, buf: *mut f64, len: *mut usize) -> NschStatus {
    guard(|| {
        let s = solver(s)?;
        let len = out(len)?;
        let phi = s.state.phi.as_slice();
        let cap = std::mem::replace(len, phi.len());
        if buf.is_null() {
            return Ok(());
        }
        if cap < phi.len() {
            set_error(format!("buffer holds {cap} values, {} needed", phi.len()));
            return Err(NschStatus::BufferTooSmall);
        }
        std::slice::from_raw_parts_mut(buf, phi.len()).copy_from_slice(phi);
        Ok(())
    })
}

/// Reads a mesh file and runs the regularity check with constant `rho`;
/// `*passed` is 1 when every cell passes.
///
/// # Safety
/// `path` must be a NUL-terminated string and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nsch_mesh_validate_file(path: *const c_char, rho: f64, passed: *mut c_int) -> NschStatus {
    guard(|| {
        let passed = out(passed)?;
        let mesh = read_mesh(text(path)?).map_err(fail)?;
        *passed = validate_mesh(&mesh, rho).passed as c_int;
        Ok(())
    })
}
