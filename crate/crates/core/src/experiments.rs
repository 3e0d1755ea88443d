//! Experiment drivers behind the command line: single runs, the
//! manufactured-solution rate study and the ellipse relaxation.
//!
//! Every driver creates the output directory, writes the effective
//! configuration to `config.txt` and reports progress through a callback.

use crate::config::{Experiment, RunConfig};
use crate::diagnostics::{compute_errors, Test1Problem, Test2Problem};
use crate::error::{Result, VemError};
use crate::mesh::{generate_mesh, read_mesh, validate_mesh, MeshFamily, PolygonalMesh};
use crate::output::{errors_csv, write_snapshot, DiagnosticsWriter, ErrorRow};
use crate::system::{run_transient_with, Discretization, ProblemData, RunOptions, State, StepRecord, TimeGrid};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Regularity constant used to screen meshes read from files.
pub const FILE_MESH_RHO: f64 = 0.01;

pub struct RunOutput {
    pub disc: Discretization,
    pub records: Vec<StepRecord>,
    pub final_state: State,
    pub diagnostics_path: PathBuf,
    pub snapshot_paths: Vec<PathBuf>,
}

pub fn prepare_output(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    std::fs::write(cfg.output_dir.join("config.txt"), cfg.echo())?;
    Ok(())
}

/// The configured mesh file, or a generated mesh of `family` with `n` cells
/// per side.
pub fn build_mesh(cfg: &RunConfig, family: MeshFamily, n: usize) -> Result<PolygonalMesh> {
    match &cfg.mesh_file {
        Some(path) => {
            let mesh = read_mesh(path).map_err(|e| e.context(format!("mesh file {}", path.display())))?;
            let report = validate_mesh(&mesh, FILE_MESH_RHO);
            if !report.passed {
                return Err(VemError::InvalidMesh(format!(
                    "{}: cells {:?} fail the regularity check with rho = {FILE_MESH_RHO}",
                    path.display(),
                    report.failing_cells()
                )));
            }
            Ok(mesh)
        }
        None => generate_mesh(family, n, cfg.domain),
    }
}

/// Manufactured data for `test1`, ellipse relaxation data otherwise.
pub fn problem_for(cfg: &RunConfig) -> Box<dyn ProblemData> {
    match cfg.experiment {
        Experiment::Test1 => Box::new(Test1Problem::new(cfg.params)),
        Experiment::Test2 | Experiment::Custom => Box::new(Test2Problem),
    }
}

fn run_one(
    cfg: &RunConfig,
    disc: Discretization,
    problem: &dyn ProblemData,
    grid: &TimeGrid,
    csv_path: &Path,
    snapshots: bool,
    progress: &mut dyn FnMut(&str),
) -> Result<RunOutput> {
    let mut csv = DiagnosticsWriter::new(BufWriter::new(File::create(csv_path)?))?;
    let wanted = if snapshots { cfg.snapshot_set() } else { Default::default() };
    let opts = RunOptions { newton: cfg.newton.clone(), ..Default::default() };
    let mut snapshot_paths = Vec::new();
    let traj = run_transient_with(&disc, problem, &cfg.params, grid, &opts, &mut |r, s| {
        csv.write(r)?;
        if wanted.contains(&r.step) {
            snapshot_paths.push(write_snapshot(&cfg.output_dir, r.step, &disc, s)?);
        }
        if r.step > 0 && (r.step % 10 == 0 || r.step == grid.steps) {
            progress(&format!(
                "step {}/{} t = {:e} newton {} mass {:e}",
                r.step, grid.steps, r.t, r.newton_iters, r.mass
            ));
        }
        Ok(())
    })?;
    drop(csv);
    Ok(RunOutput {
        disc,
        records: traj.records,
        final_state: traj.final_state,
        diagnostics_path: csv_path.to_path_buf(),
        snapshot_paths,
    })
}

/// One run on the configured mesh; writes `diagnostics.csv`, the requested
/// snapshots and, for `test1`, `errors.csv` with a single row.
pub fn cmd_run(cfg: &RunConfig, progress: &mut dyn FnMut(&str)) -> Result<RunOutput> {
    prepare_output(cfg)?;
    let mesh = build_mesh(cfg, cfg.family, cfg.n)?;
    let disc = Discretization::new(mesh, cfg.k, cfg.l)?;
    let (steps, tau) = cfg.time_grid_for(cfg.n);
    let grid = TimeGrid { t0: cfg.t0, tau, steps };
    progress(&format!("{} cells, {} unknowns, {steps} steps of {tau:e}", disc.mesh.num_cells(), disc.num_unknowns()));
    let problem = problem_for(cfg);
    let out = run_one(cfg, disc, problem.as_ref(), &grid, &cfg.output_dir.join("diagnostics.csv"), true, progress)?;
    if cfg.experiment == Experiment::Test1 {
        let exact = Test1Problem::new(cfg.params);
        let row = ErrorRow {
            family: cfg.family,
            h: 1.0 / cfg.n as f64,
            k: cfg.k,
            l: cfg.l,
            tau,
            errors: compute_errors(&out.disc, &out.final_state, &exact),
        };
        std::fs::write(cfg.output_dir.join("errors.csv"), errors_csv(&[row])?)?;
    }
    Ok(out)
}

/// Rate study over `cfg.families` and `cfg.levels` (`h = 1/n`, `tau` from
/// the configured time grid). Writes `errors.csv` and one
/// `diagnostics_<family>_<n>.csv` per run.
pub fn cmd_test1(cfg: &RunConfig, progress: &mut dyn FnMut(&str)) -> Result<Vec<ErrorRow>> {
    if cfg.experiment != Experiment::Test1 {
        return Err(VemError::config("experiment", "test1 requires the test1 experiment"));
    }
    prepare_output(cfg)?;
    let exact = Test1Problem::new(cfg.params);
    let mut rows = Vec::new();
    for &family in &cfg.families {
        for &n in &cfg.levels {
            let ctx = |e: VemError| e.context(format!("{family} mesh, n = {n}"));
            let mesh = build_mesh(cfg, family, n).map_err(ctx)?;
            let disc = Discretization::new(mesh, cfg.k, cfg.l).map_err(ctx)?;
            let (steps, tau) = cfg.time_grid_for(n);
            let grid = TimeGrid { t0: cfg.t0, tau, steps };
            progress(&format!("{family} n = {n}: {} unknowns, {steps} steps", disc.num_unknowns()));
            let csv = cfg.output_dir.join(format!("diagnostics_{family}_{n}.csv"));
            let out = run_one(cfg, disc, &exact, &grid, &csv, false, &mut |_| {}).map_err(ctx)?;
            let errors = compute_errors(&out.disc, &out.final_state, &exact);
            progress(&format!(
                "{family} n = {n}: err_u_H1 {:e} err_p_L2 {:e} err_phi_H2 {:e}",
                errors.err_u_h1, errors.err_p_l2, errors.err_phi_h2
            ));
            rows.push(ErrorRow { family, h: 1.0 / n as f64, k: cfg.k, l: cfg.l, tau, errors });
            std::fs::write(cfg.output_dir.join("errors.csv"), errors_csv(&rows)?)?;
        }
    }
    Ok(rows)
}

/// Ellipse relaxation on the configured mesh.
pub fn cmd_test2(cfg: &RunConfig, progress: &mut dyn FnMut(&str)) -> Result<RunOutput> {
    if cfg.experiment != Experiment::Test2 {
        return Err(VemError::config("experiment", "test2 requires the test2 experiment"));
    }
    cmd_run(cfg, progress)
}
