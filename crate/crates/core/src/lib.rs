//! Virtual element discretization of the Navier-Stokes-Cahn-Hilliard system
//! on general polygonal meshes.
//!
//! Velocity lives in a divergence-free enhanced virtual element space of
//! degree `k`, pressure is discontinuous piecewise `P_{k-1}` and the phase
//! field uses a C1-conforming virtual element space of degree `l`. Time is
//! advanced with backward Euler and every step is solved with a full Newton
//! method on the coupled system.
//!
//! ```no_run
//! use nsch_vem::prelude::*;
//!
//! let mesh = generate_mesh(MeshFamily::Triangular, 8, Rect::unit()).unwrap();
//! let params = PhysicalParameters::test1();
//! let disc = Discretization::new(mesh, 1, 2).unwrap();
//! let problem = Test1Problem::new(params);
//! let grid = TimeGrid::uniform(0.0, 0.1, 8);
//! let run = run_transient(&disc, &problem, &params, &grid, &RunOptions::default()).unwrap();
//! println!("{:?}", run.records.last());
//! ```

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod forms;
pub mod frame;
pub mod linalg;
pub mod mesh;
pub mod output;
pub mod phase;
pub mod polyops;
pub mod system;
pub mod velocity;

pub use error::{Result, VemError};

pub mod prelude {
    pub use crate::config::{PhysicalParameters, RunConfig};
    pub use crate::diagnostics::{
        chemical_potential, compute_errors, energy_j, total_mass, ErrorSet, Test1Problem, Test2Problem,
    };
    pub use crate::error::{Result, VemError};
    pub use crate::mesh::{generate_mesh, validate_mesh, MeshFamily, PolygonalMesh, Rect};
    pub use crate::system::{run_transient, Discretization, NewtonOptions, ProblemData, RunOptions, State, TimeGrid};
}
