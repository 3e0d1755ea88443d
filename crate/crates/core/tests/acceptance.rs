//! Acceptance suite. Runs every criterion in sequence and prints one
//! PASS/FAIL line each; the process fails if any criterion fails.

use nalgebra::{DMatrix, DVector};
use nsch_vem::config::{PhysicalParameters, RunConfig};
use nsch_vem::diagnostics::{total_mass, Test1Problem, Test2Problem};
use nsch_vem::experiments::{cmd_test1, cmd_test2};
use nsch_vem::forms::CellOps;
use nsch_vem::frame::CellFrame;
use nsch_vem::mesh::{generate_mesh, validate_polygon, voronoi_mesh, MeshFamily, Rect};
use nsch_vem::output::{rates, ErrorRow};
use nsch_vem::phase::PhaseElement;
use nsch_vem::polyops::monomial::derivative_matrix;
use nsch_vem::polyops::{dim, ScaledMonomials, Vec2};
use nsch_vem::system::{initial_state, Discretization, NewtonOptions, NewtonSolver, State};
use nsch_vem::velocity::VelocityElement;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// CSV files of one driver run, sorted by name.
fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

/// `div_inf_norm` of every step after the initial state.
fn step_divergences(files: &[(String, Vec<u8>)]) -> Vec<f64> {
    let mut out = Vec::new();
    for (name, bytes) in files.iter().filter(|(n, _)| n.starts_with("diagnostics")) {
        let mut rd = csv::Reader::from_reader(bytes.as_slice());
        let col = rd.headers().unwrap().iter().position(|h| h == "div_inf_norm").unwrap_or_else(|| panic!("{name}"));
        for rec in rd.records() {
            let rec = rec.unwrap();
            if rec[0].parse::<usize>().unwrap() > 0 {
                out.push(rec[col].parse().unwrap());
            }
        }
    }
    out
}

struct Study {
    rows: Vec<ErrorRow>,
    files: Vec<(String, Vec<u8>)>,
}

fn rate_study(dir: &Path, families: &str, levels: &str, k: usize, l: usize) -> Study {
    let text = format!(
        "experiment = test1\n[mesh]\nfamilies = {families}\nlevels = {levels}\n[physics]\nk = {k}\nl = {l}\n[output]\ndir = {}\n",
        dir.display()
    );
    let cfg = RunConfig::parse(&text).unwrap();
    let rows = cmd_test1(&cfg, &mut |_| {}).unwrap();
    Study { rows, files: csv_files(dir) }
}

fn test2_run(dir: &Path) -> (Vec<f64>, Vec<(String, Vec<u8>)>) {
    let text = format!("experiment = test2\n[mesh]\nn = 32\n[time]\nsteps = 20\n[output]\ndir = {}\n", dir.display());
    let cfg = RunConfig::parse(&text).unwrap();
    assert_eq!(cfg.time_grid_for(32).0, 20);
    let out = cmd_test2(&cfg, &mut |_| {}).unwrap();
    (out.records.iter().map(|r| r.mass).collect(), csv_files(dir))
}

fn finest_rates(rows: &[ErrorRow], family: MeshFamily) -> [f64; 3] {
    let f: Vec<&ErrorRow> = rows.iter().filter(|r| r.family == family).collect();
    rates(f[f.len() - 2], f[f.len() - 1]).unwrap()
}

fn rates_outcome(rows: &[ErrorRow], families: &[MeshFamily], min: f64) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for &fam in families {
        let r = finest_rates(rows, fam);
        pass &= r.iter().all(|&x| x >= min);
        detail.push(format!("{fam}: u {:.3} p {:.3} phi {:.3}", r[0], r[1], r[2]));
    }
    outcome(pass, format!("{} (need >= {min})", detail.join("; ")))
}

struct Ctx {
    root: PathBuf,
    c1: Option<Study>,
    c2: Option<Study>,
    c3: Option<Study>,
    c4: Option<(Vec<f64>, Vec<(String, Vec<u8>)>)>,
}

fn criterion_1(cx: &mut Ctx) -> Outcome {
    let s = rate_study(&cx.root.join("c1"), "triangular", "4, 8, 16", 1, 2);
    let o = rates_outcome(&s.rows, &[MeshFamily::Triangular], 0.9);
    cx.c1 = Some(s);
    o
}

fn criterion_2(cx: &mut Ctx) -> Outcome {
    let s = rate_study(&cx.root.join("c2"), "triangular", "4, 8", 2, 3);
    let o = rates_outcome(&s.rows, &[MeshFamily::Triangular], 1.8);
    cx.c2 = Some(s);
    o
}

fn criterion_3(cx: &mut Ctx) -> Outcome {
    let s = rate_study(&cx.root.join("c3"), "quadrilateral, voronoi", "4, 8, 16", 1, 2);
    let o = rates_outcome(&s.rows, &[MeshFamily::Quadrilateral, MeshFamily::Voronoi], 0.85);
    cx.c3 = Some(s);
    o
}

fn criterion_4(cx: &mut Ctx) -> Outcome {
    let (mass, files) = test2_run(&cx.root.join("c4"));
    let m0 = mass[0];
    let drift = mass.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max);
    cx.c4 = Some((mass, files));

    let mesh = generate_mesh(MeshFamily::Cartesian, 64, Rect::new(-0.4, 0.4, -0.4, 0.4)).unwrap();
    let disc = Discretization::new(mesh, 1, 2).unwrap();
    let m64 = total_mass(&disc, &initial_state(&disc, &Test2Problem, 0.0).phi);
    let pass = drift <= 1e-10 * m0.abs() && (m64 - 0.53977092).abs() <= 1e-4;
    outcome(
        pass,
        format!(
            "32^2 drift {:.2e} relative (need <= 1e-10); 64^2 initial mass {m64:.8} (target 0.53977092 +- 1e-4)",
            drift / m0.abs()
        ),
    )
}

fn criterion_5(cx: &mut Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for files in [&cx.c1, &cx.c2, &cx.c3].into_iter().flatten().map(|s| &s.files).chain(cx.c4.as_ref().map(|c| &c.1)) {
        for d in step_divergences(files) {
            worst = worst.max(d);
            count += 1;
        }
    }
    outcome(
        count > 0 && worst <= 1e-10,
        format!("max relative |iota(u_h)| over {count} accepted steps {worst:.2e} (need <= 1e-10)"),
    )
}

fn random_cell(rng: &mut ChaCha8Rng) -> Vec<Vec2> {
    loop {
        let mesh = voronoi_mesh(4, Rect::unit(), rng.random()).unwrap();
        let c = rng.random_range(0..mesh.num_cells());
        let v = mesh.cell_vertices(c);
        if validate_polygon(&v, 0.05).passed() {
            return v;
        }
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

fn criterion_6(_: &mut Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_f, mut worst_h) = (0.0f64, 0.0f64);
    for trial in 0..100 {
        let (k, l) = if trial % 2 == 0 { (1, 2) } else { (2, 3) };
        let ops = CellOps::new(CellFrame::from_polygon(random_cell(&mut rng)), k, l).unwrap();
        let w = random_vec(&mut rng, ops.vel.ndof);
        let v = random_vec(&mut rng, ops.vel.ndof);
        let c = ops.convection_matrix(&w);
        worst_f = worst_f.max(v.dot(&(&c * &v)).abs() / (c.norm() * v.norm_squared()));
        let u = random_vec(&mut rng, ops.vel.ndof);
        let phi = random_vec(&mut rng, ops.phase.ndof);
        let ch = ops.phase_convection_matrix(&u);
        worst_h = worst_h.max(phi.dot(&(&ch * &phi)).abs() / (ch.norm() * phi.norm_squared()));
    }

    // c_h(u; phi, 1) for a global divergence-free u vanishing on the boundary
    let mut worst_g = 0.0f64;
    for (k, l) in [(1, 2), (2, 3)] {
        let disc = Discretization::new(voronoi_mesh(3, Rect::unit(), 17).unwrap(), k, l).unwrap();
        let d = &disc.dofs;
        let free: Vec<usize> = (0..d.n_vel).filter(|&i| !d.vel_fixed[i]).collect();
        let col = |g: usize| free.iter().position(|&f| f == g);
        let mut g = DMatrix::zeros(d.n_press, free.len());
        for (c, ops) in disc.cells.iter().enumerate() {
            for (j, &gi) in d.vel_cell[c].iter().enumerate() {
                if let Some(cj) = col(gi) {
                    for r in 0..ops.vel.iota.nrows() {
                        g[(c * d.press_per_cell + r, cj)] += ops.vel.iota[(r, j)];
                    }
                }
            }
        }
        let raw = random_vec(&mut rng, free.len());
        let pinv = g.clone().pseudo_inverse(1e-12).unwrap();
        let uf = &raw - &pinv * (&g * &raw);
        let mut u = DVector::zeros(d.n_vel);
        for (i, &f) in free.iter().enumerate() {
            u[f] = uf[i];
        }
        assert!((&g * &uf).amax() < 1e-12 * uf.amax(), "kernel projection");
        let phi = random_vec(&mut rng, d.n_phase);
        let one = disc.interpolate_phase(&|_| (1.0, Vec2::zeros()));
        let (mut val, mut scale) = (0.0, 0.0);
        for (c, ops) in disc.cells.iter().enumerate() {
            let gat = |v: &DVector<f64>, idx: &[usize]| DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]));
            let ch = ops.phase_convection_matrix(&gat(&u, &d.vel_cell[c]));
            let (pe, oe) = (gat(&phi, &d.phase_cell[c]), gat(&one, &d.phase_cell[c]));
            val += oe.dot(&(&ch * &pe));
            scale += ch.norm() * pe.norm() * oe.norm();
        }
        worst_g = worst_g.max(val.abs() / scale);
    }
    let pass = worst_f <= 1e-13 && worst_h <= 1e-13 && worst_g <= 1e-13;
    outcome(
        pass,
        format!("c_F(w;v,v) {worst_f:.1e}, c_h(u;phi,phi) {worst_h:.1e}, c_h(u;phi,1) {worst_g:.1e} relative (need <= 1e-13)"),
    )
}

fn fixtures() -> Vec<Vec<Vec2>> {
    let p = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Vec2::new(x, y)).collect::<Vec<_>>();
    vec![
        p(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]),
        p(&[(0.1, 0.2), (0.6, 0.15), (0.7, 0.6), (0.2, 0.5)]),
        p(&[(0.0, 0.0), (0.3, -0.1), (0.5, 0.2), (0.35, 0.5), (0.05, 0.4)]),
    ]
}

/// Relative `L2(E)` distance of two coefficient vectors of degree `n`.
fn rel_l2(mass: &DMatrix<f64>, got: &DVector<f64>, want: &DVector<f64>) -> f64 {
    let m = mass.view((0, 0), (want.len(), want.len()));
    let e = got - want;
    (e.dot(&(m * &e)) / want.dot(&(m * want))).sqrt()
}

fn blocks(v: &DVector<f64>, n: usize) -> Vec<DVector<f64>> {
    (0..v.len() / n).map(|b| v.rows(b * n, n).into_owned()).collect()
}

fn criterion_7(_: &mut Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = [0.0f64; 2];
    let mut checks = 0;
    for poly in fixtures() {
        for k in 1..=3usize {
            let el = VelocityElement::new(CellFrame::from_polygon(poly.clone()), k).unwrap();
            let mono = el.frame.mono;
            let (dk, dk1, h) = (dim(k as i32), dim(k as i32 - 1), el.frame.h);
            let (dx, dy) = (derivative_matrix(k as i32, 0, h), derivative_matrix(k as i32, 1, h));
            for _ in 0..50 {
                let c = random_vec(&mut rng, 2 * dk);
                let (cx, cy) = (c.rows(0, dk).into_owned(), c.rows(dk, dk).into_owned());
                let d = el.interpolate(&|x| Vec2::new(mono.eval(cx.as_slice(), x), mono.eval(cy.as_slice(), x)));
                let mut errs = Vec::new();
                for p in [&el.pi_nabla, &el.pi0] {
                    let got = blocks(&(p * &d), dk);
                    errs.push(rel_l2(&el.mass, &got[0], &cx).max(rel_l2(&el.mass, &got[1], &cy)));
                }
                let grads = [&dx * &cx, &dy * &cx, &dx * &cy, &dy * &cy];
                for (g, w) in blocks(&(&el.grad0 * &d), dk1).iter().zip(&grads) {
                    if w.norm() > 0.0 {
                        errs.push(rel_l2(&el.mass, g, w));
                    }
                }
                let div = &grads[0] + &grads[3];
                if div.norm() > 0.0 {
                    errs.push(rel_l2(&el.mass, &(&el.iota * &d), &div));
                }
                checks += errs.len();
                worst[0] = errs.into_iter().fold(worst[0], f64::max);
            }
        }
        for l in 2..=4usize {
            let el = PhaseElement::new(CellFrame::from_polygon(poly.clone()), l).unwrap();
            let mono: ScaledMonomials = el.frame.mono;
            let (h, li) = (el.frame.h, l as i32);
            let (dl1, dl2) = (dim(li - 1), dim(li - 2));
            let (dx, dy) = (derivative_matrix(li, 0, h), derivative_matrix(li, 1, h));
            let (dx1, dy1) = (derivative_matrix(li - 1, 0, h), derivative_matrix(li - 1, 1, h));
            for _ in 0..50 {
                let c = random_vec(&mut rng, dim(li));
                let (gx, gy) = (&dx * &c, &dy * &c);
                let d = el.interpolate(&|x| {
                    (mono.eval(c.as_slice(), x), Vec2::new(mono.eval(gx.as_slice(), x), mono.eval(gy.as_slice(), x)))
                });
                let mut errs = vec![rel_l2(&el.mass, &(&el.proj_d * &d), &c), rel_l2(&el.mass, &(&el.pi0 * &d), &c)];
                let g = blocks(&(&el.grad0 * &d), dl1);
                errs.push(rel_l2(&el.mass, &g[0], &gx).max(rel_l2(&el.mass, &g[1], &gy)));
                let hess = [&dx1 * &gx, &dx1 * &gy, &dy1 * &gy];
                for (got, want) in blocks(&(&el.hess0 * &d), dl2).iter().zip(&hess) {
                    errs.push(rel_l2(&el.mass, got, want));
                }
                errs.push(rel_l2(&el.mass, &(&el.lap0 * &d), &(&hess[0] + &hess[2])));
                checks += errs.len();
                worst[1] = errs.into_iter().fold(worst[1], f64::max);
            }
        }
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-11),
        format!(
            "{checks} checks, worst relative L2 error velocity {:.1e}, phase {:.1e} (need <= 1e-11)",
            worst[0], worst[1]
        ),
    )
}

fn criterion_8(_: &mut Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = PhysicalParameters { nu: 0.8, lambda: 0.6, gamma: 0.4, eps: 0.5 };
    let problem = Test1Problem::new(params);
    let mut worst = 0.0f64;
    for (k, l) in [(1, 2), (2, 3)] {
        let disc = Discretization::new(voronoi_mesh(3, Rect::unit(), 23).unwrap(), k, l).unwrap();
        let d = &disc.dofs;
        let rand_state = |rng: &mut ChaCha8Rng, t: f64| State {
            t,
            u: random_vec(rng, d.n_vel),
            p: random_vec(rng, d.n_press),
            mu: 0.2,
            phi: random_vec(rng, d.n_phase),
        };
        let prev = rand_state(&mut rng, 0.0);
        let s = rand_state(&mut rng, 0.1);
        let loads = disc.loads(&problem, 0.1);
        let tau = 0.1;
        let base = disc.assemble(&s, &prev, tau, &loads, &params, true).unwrap();
        let trip = base.jacobian.unwrap();
        let n = disc.num_unknowns();
        for _ in 0..10 {
            let dir = random_vec(&mut rng, n);
            let mut jd = DVector::zeros(n);
            for t in &trip {
                jd[t.row] += t.val * dir[t.col];
            }
            let eps = 1e-5;
            let res = |sgn: f64| {
                let mut t = s.clone();
                disc.apply_increment(&mut t, &dir, sgn * eps);
                disc.assemble(&t, &prev, tau, &loads, &params, false).unwrap().residual
            };
            let fd = (res(1.0) - res(-1.0)) / (2.0 * eps);
            worst = worst.max((&fd - &jd).norm() / jd.norm());
        }
    }
    outcome(worst <= 1e-6, format!("worst relative mismatch over 20 directions {worst:.2e} (need <= 1e-6)"))
}

fn criterion_9(_: &mut Ctx) -> Outcome {
    let params = PhysicalParameters::test1();
    let problem = Test1Problem::new(params);
    let disc = Discretization::new(generate_mesh(MeshFamily::Triangular, 8, Rect::unit()).unwrap(), 1, 2).unwrap();
    let s0 = initial_state(&disc, &problem, 0.0);
    let opts = NewtonOptions::default();
    let (_, rep) = NewtonSolver::new().step(&disc, &s0, 0.1 / 8.0, &problem, &params, &opts).unwrap();
    let h = &rep.history;
    let decreasing = h.windows(2).all(|w| w[1] < w[0]);
    let q: Vec<f64> = h.windows(2).map(|w| w[1] / w[0]).collect();
    let superlinear = q.len() >= 2 && q[q.len() - 1] < q[q.len() - 2] && q[q.len() - 1] < 0.1;
    let converged = rep.iterations <= 10 && rep.final_residual() <= opts.rel_tol * h[0];
    let hist: Vec<String> = h.iter().map(|r| format!("{r:.2e}")).collect();
    outcome(
        decreasing && superlinear && converged,
        format!(
            "{} iterations, residuals [{}], ratios {:?}",
            rep.iterations,
            hist.join(", "),
            q.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_10(cx: &mut Ctx) -> Outcome {
    let again1 = rate_study(&cx.root.join("c10a"), "triangular", "4, 8, 16", 1, 2);
    let (_, again4) = test2_run(&cx.root.join("c10b"));
    let same1 = cx.c1.as_ref().is_some_and(|s| s.files == again1.files);
    let same4 = cx.c4.as_ref().is_some_and(|c| c.1 == again4);
    let n = again1.files.len() + again4.len();
    outcome(
        same1 && same4,
        format!("{n} CSV files compared; criterion 1 identical: {same1}, criterion 4 identical: {same4}"),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut cx = Ctx { root: dir.path().to_path_buf(), c1: None, c2: None, c3: None, c4: None };
    let criteria: [(&str, fn(&mut Ctx) -> Outcome); 10] = [
        ("low-order rates, triangles", criterion_1),
        ("high-order rates, triangles", criterion_2),
        ("low-order rates, quadrilateral and Voronoi", criterion_3),
        ("mass conservation", criterion_4),
        ("exact divergence-freedom", criterion_5),
        ("skew-symmetry", criterion_6),
        ("projector reproduction", criterion_7),
        ("Jacobian against finite differences", criterion_8),
        ("Newton convergence", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(|| f(&mut cx))).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t0.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
