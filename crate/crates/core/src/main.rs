use clap::{Args, Parser, Subcommand};
use nsch_vem::config::{Experiment, RunConfig};
use nsch_vem::experiments::{cmd_run, cmd_test1, cmd_test2};
use nsch_vem::mesh::{generate_mesh, read_mesh, validate_mesh, write_mesh, MeshFamily, Rect};
use nsch_vem::{Result, VemError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Virtual element solver for the Navier-Stokes-Cahn-Hilliard system.
///
/// Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or mesh,
/// 3 solver failure. The thread count is read from NSCH_VEM_THREADS.
#[derive(Parser)]
#[command(name = "nsch-vem", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Overrides {
    /// Configuration file; the preset of the subcommand is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `section.key=value` override, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configuration in a file.
    Run {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Convergence study with the manufactured solution.
    Test1 {
        #[command(flatten)]
        o: Overrides,
        /// Comma separated mesh families.
        #[arg(long)]
        families: Option<String>,
        /// Comma separated cells per side.
        #[arg(long)]
        levels: Option<String>,
        #[arg(short)]
        k: Option<usize>,
        #[arg(short)]
        l: Option<usize>,
    },
    /// Relaxation of an elliptic interface.
    Test2 {
        #[command(flatten)]
        o: Overrides,
        /// Cells per side.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Check star-shapedness and edge lengths of a mesh file.
    ValidateMesh {
        mesh: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
    },
    /// Write a generated mesh.
    GenMesh {
        #[arg(long)]
        family: MeshFamily,
        #[arg(long)]
        n: usize,
        /// `xmin,xmax,ymin,ymax`.
        #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [0.0, 1.0, 0.0, 1.0])]
        domain: Vec<f64>,
        #[arg(long, short)]
        output: PathBuf,
    },
}

fn load(
    required: Option<Experiment>,
    file: Option<&PathBuf>,
    sets: &[String],
    extra: &[(&str, String)],
    output: Option<&PathBuf>,
) -> Result<RunConfig> {
    let body = match file {
        Some(f) => std::fs::read_to_string(f).map_err(|e| VemError::config(f.display().to_string(), e.to_string()))?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse(&body)?;
    if let Some(req) = required {
        if cfg.experiment == Experiment::Custom {
            cfg = RunConfig::parse(&format!("experiment = {}\n{body}", req.name()))?;
        }
        if cfg.experiment != req {
            return Err(VemError::config("experiment", format!("`{}` in a {} run", cfg.experiment.name(), req.name())));
        }
    }
    for (k, v) in extra {
        cfg.set(k, v)?;
    }
    for s in sets {
        let (k, v) = s.split_once('=').ok_or_else(|| VemError::config(s.as_str(), "expected KEY=VALUE"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(o) = output {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn progress(msg: &str) {
    eprintln!("{msg}");
}

fn execute(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run { config, set, output } => {
            let cfg = load(None, Some(&config), &set, &[], output.as_ref())?;
            let out = cmd_run(&cfg, &mut progress)?;
            println!("{}", out.diagnostics_path.display());
        }
        Cmd::Test1 { o, families, levels, k, l } => {
            let mut extra = Vec::new();
            if let Some(f) = families {
                extra.push(("mesh.families", f));
            }
            if let Some(v) = levels {
                extra.push(("mesh.levels", v));
            }
            if let Some(k) = k {
                extra.push(("physics.k", k.to_string()));
            }
            if let Some(l) = l {
                extra.push(("physics.l", l.to_string()));
            }
            let cfg = load(Some(Experiment::Test1), o.config.as_ref(), &o.set, &extra, o.output.as_ref())?;
            cmd_test1(&cfg, &mut progress)?;
            println!("{}", cfg.output_dir.join("errors.csv").display());
        }
        Cmd::Test2 { o, n, steps } => {
            let mut extra = Vec::new();
            if let Some(n) = n {
                extra.push(("mesh.n", n.to_string()));
            }
            if let Some(s) = steps {
                extra.push(("time.steps", s.to_string()));
            }
            let cfg = load(Some(Experiment::Test2), o.config.as_ref(), &o.set, &extra, o.output.as_ref())?;
            let out = cmd_test2(&cfg, &mut progress)?;
            println!("{}", out.diagnostics_path.display());
        }
        Cmd::ValidateMesh { mesh, rho } => {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(VemError::config("rho", "must lie in (0, 1)"));
            }
            let m = read_mesh(&mesh)?;
            let report = validate_mesh(&m, rho);
            println!(
                "cells {} vertices {} edges {} h_max {:e}",
                m.num_cells(),
                m.num_vertices(),
                m.num_edges(),
                m.h_max()
            );
            for c in report.failing_cells() {
                let r = &report.cells[c];
                println!(
                    "cell {c}: star_shaped {} edges_ok {} inradius/diameter {:e} min_edge/diameter {:e}",
                    r.star_shaped,
                    r.edges_ok,
                    r.kernel_inradius / r.diameter,
                    r.min_edge / r.diameter
                );
            }
            println!("{}", if report.passed { "passed" } else { "failed" });
            if !report.passed {
                return Err(VemError::InvalidMesh(format!(
                    "{} cells fail with rho = {rho}",
                    report.failing_cells().len()
                )));
            }
        }
        Cmd::GenMesh { family, n, domain, output } => {
            let m = generate_mesh(family, n, Rect::new(domain[0], domain[1], domain[2], domain[3]))?;
            write_mesh(&m, &output)?;
            println!("{} cells written to {}", m.num_cells(), output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
