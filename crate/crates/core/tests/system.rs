use approx::assert_relative_eq;
use nsch_vem::config::PhysicalParameters;
use nsch_vem::diagnostics::{compute_errors, div_inf_norm, total_mass, Test1Problem};
use nsch_vem::forms::Sources;
use nsch_vem::mesh::{generate_mesh, voronoi_mesh, MeshFamily, Rect};
use nsch_vem::polyops::Vec2;
use nsch_vem::system::{initial_state, run_transient, Discretization, ProblemData, RunOptions, TimeGrid};

/// Pure phase at rest, an exact discrete steady state.
struct Rest;

impl Sources for Rest {}

impl ProblemData for Rest {
    fn initial_velocity(&self, _x: &Vec2) -> Vec2 {
        Vec2::zeros()
    }
    fn initial_phase(&self, _x: &Vec2) -> (f64, Vec2) {
        (1.0, Vec2::zeros())
    }
}

#[test]
fn rest_state_is_stationary() {
    for (k, l) in [(1, 2), (2, 3)] {
        let mesh = generate_mesh(MeshFamily::Quadrilateral, 3, Rect::unit()).unwrap();
        let disc = Discretization::new(mesh, k, l).unwrap();
        let grid = TimeGrid::uniform(0.0, 0.1, 2);
        let traj = run_transient(&disc, &Rest, &PhysicalParameters::default(), &grid, &RunOptions::default()).unwrap();
        for r in &traj.records[1..] {
            assert!(r.newton_iters <= 1, "{} iterations {:?}", r.newton_iters, r.residual_history);
            assert_relative_eq!(r.mass, 1.0, epsilon = 1e-12);
        }
        assert!(traj.final_state.u.amax() < 1e-12);
        assert!(traj.final_state.phi.iter().step_by(3).take(disc.mesh.num_vertices()).all(|v| (v - 1.0).abs() < 1e-12));
    }
}

#[test]
fn mass_of_interpolated_polynomial_is_exact() {
    let mesh = voronoi_mesh(4, Rect::unit(), 5).unwrap();
    let disc = Discretization::new(mesh, 2, 3).unwrap();
    // int of 1 + x y^2 - 2 x^3 + y over the unit square
    let phi = disc.interpolate_phase(&|x: &Vec2| {
        let v = 1.0 + x.x * x.y * x.y - 2.0 * x.x.powi(3) + x.y;
        let g = Vec2::new(x.y * x.y - 6.0 * x.x * x.x, 2.0 * x.x * x.y + 1.0);
        (v, g)
    });
    let exact = 1.0 + 1.0 / 6.0 - 0.5 + 0.5;
    assert_relative_eq!(total_mass(&disc, &phi), exact, epsilon = 1e-12);
}

#[test]
fn pressure_error_ignores_constant_shift() {
    let mesh = generate_mesh(MeshFamily::Triangular, 4, Rect::unit()).unwrap();
    let disc = Discretization::new(mesh, 1, 2).unwrap();
    let problem = Test1Problem::new(PhysicalParameters::default());
    let mut s = initial_state(&disc, &problem, 0.0);
    for c in 0..disc.mesh.num_cells() {
        let r = disc.dofs.press_range(c);
        s.p[r.start] = 0.3 * c as f64 / disc.mesh.num_cells() as f64;
    }
    let before = compute_errors(&disc, &s, &problem);
    for c in 0..disc.mesh.num_cells() {
        let r = disc.dofs.press_range(c);
        s.p[r.start] += 7.5;
    }
    let after = compute_errors(&disc, &s, &problem);
    assert_relative_eq!(before.err_p_l2, after.err_p_l2, max_relative = 1e-10);
    assert_eq!(before.err_u_h1, after.err_u_h1);
    assert_eq!(before.err_phi_h2, after.err_phi_h2);
}

#[test]
fn interpolation_errors_decrease_with_h() {
    let problem = Test1Problem::new(PhysicalParameters::default());
    let errs: Vec<_> = [4, 8]
        .iter()
        .map(|&n| {
            let mesh = generate_mesh(MeshFamily::Triangular, n, Rect::unit()).unwrap();
            let disc = Discretization::new(mesh, 1, 2).unwrap();
            let s = initial_state(&disc, &problem, 0.0);
            compute_errors(&disc, &s, &problem)
        })
        .collect();
    assert!(errs[1].err_u_h1 < 0.7 * errs[0].err_u_h1);
    assert!(errs[1].err_phi_h2 < 0.7 * errs[0].err_phi_h2);
}

#[test]
fn short_test1_run_stays_divergence_free() {
    let mesh = generate_mesh(MeshFamily::Triangular, 4, Rect::unit()).unwrap();
    let disc = Discretization::new(mesh, 1, 2).unwrap();
    let problem = Test1Problem::new(PhysicalParameters::default());
    let grid = TimeGrid::uniform(0.0, 0.05, 2);
    let traj = run_transient(&disc, &problem, &PhysicalParameters::default(), &grid, &RunOptions::default()).unwrap();
    for r in &traj.records[1..] {
        assert!(r.newton_iters >= 1 && r.newton_iters <= 6);
        assert!(r.div_inf_norm < 1e-10, "{}", r.div_inf_norm);
    }
    assert_eq!(div_inf_norm(&disc, &traj.final_state.u), traj.records[2].div_inf_norm);
    assert_relative_eq!(traj.final_state.t, 0.05, epsilon = 1e-15);
}
