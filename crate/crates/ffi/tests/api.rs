use nsch_vem_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

const TEST1: &str = "experiment = test1\n[mesh]\nfamily = triangular\nn = 4\n[time]\nT = 0.05\nsteps = 2\n";
const TEST2: &str = "experiment = test2\n[mesh]\nn = 8\n[time]\nsteps = 3\n";

fn new(cfg: &str) -> (NschStatus, *mut NschSolver) {
    let c = CString::new(cfg).unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { nsch_solver_new(c.as_ptr(), &mut s) };
    (st, s)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(nsch_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn test2_steps_conserve_mass() {
    let (st, s) = new(TEST2);
    assert_eq!(st, NschStatus::Ok, "{}", last_error());
    let mut sizes = NschSizes::default();
    assert_eq!(unsafe { nsch_solver_sizes(s, &mut sizes) }, NschStatus::Ok);
    assert_eq!(sizes.cells, 64);
    assert_eq!(sizes.steps, 3);
    assert!(sizes.unknowns <= sizes.velocity_dofs + sizes.pressure_dofs + 1 + sizes.phase_dofs);

    let mut info0 = NschStepInfo::default();
    assert_eq!(unsafe { nsch_solver_info(s, &mut info0) }, NschStatus::Ok);
    assert_eq!(info0.step, 0);
    for n in 1..=sizes.steps {
        let mut info = NschStepInfo::default();
        assert_eq!(unsafe { nsch_solver_step(s, &mut info) }, NschStatus::Ok, "{}", last_error());
        assert_eq!(info.step, n);
        assert!((info.t - n as f64 * sizes.tau).abs() < 1e-15);
        assert!(info.newton_iters >= 1);
        assert!((info.mass - info0.mass).abs() <= 1e-10 * info0.mass.abs());
        assert!(info.div_inf_norm < 1e-10);
    }

    let mut errs = [0.0; 3];
    assert_eq!(unsafe { nsch_solver_errors(s, errs.as_mut_ptr()) }, NschStatus::NotAvailable);
    assert!(!last_error().is_empty());
    unsafe { nsch_solver_free(s) };
}

#[test]
fn test1_errors_and_phase_buffer() {
    let (st, s) = new(TEST1);
    assert_eq!(st, NschStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { nsch_solver_step(s, ptr::null_mut()) }, NschStatus::Ok);
    let mut errs = [f64::NAN; 3];
    assert_eq!(unsafe { nsch_solver_errors(s, errs.as_mut_ptr()) }, NschStatus::Ok);
    assert!(errs.iter().all(|e| e.is_finite() && *e > 0.0), "{errs:?}");

    let mut len = 0usize;
    assert_eq!(unsafe { nsch_solver_phase(s, ptr::null_mut(), &mut len) }, NschStatus::Ok);
    let mut sizes = NschSizes::default();
    unsafe { nsch_solver_sizes(s, &mut sizes) };
    assert_eq!(len, sizes.phase_dofs);
    let mut small = vec![0.0; len - 1];
    let mut cap = small.len();
    assert_eq!(unsafe { nsch_solver_phase(s, small.as_mut_ptr(), &mut cap) }, NschStatus::BufferTooSmall);
    let mut buf = vec![f64::NAN; len];
    let mut cap = len;
    assert_eq!(unsafe { nsch_solver_phase(s, buf.as_mut_ptr(), &mut cap) }, NschStatus::Ok);
    assert!(buf.iter().all(|x| x.is_finite()));
    unsafe { nsch_solver_free(s) };
}

#[test]
fn invalid_inputs_report_status_and_message() {
    let (st, s) = new("[physics]\nl = 1\n");
    assert_eq!(st, NschStatus::Config);
    assert!(s.is_null());
    assert!(last_error().contains("physics.l"), "{}", last_error());

    let (st, _) = new("[mesh]\nbogus = 1\n");
    assert_eq!(st, NschStatus::Config);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { nsch_solver_new(ptr::null(), &mut out) }, NschStatus::NullArgument);
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { nsch_solver_new(bad.as_ptr().cast(), &mut out) }, NschStatus::InvalidUtf8);
    assert_eq!(unsafe { nsch_solver_step(ptr::null_mut(), ptr::null_mut()) }, NschStatus::NullArgument);
    unsafe { nsch_solver_free(ptr::null_mut()) };
}

#[test]
fn mesh_validation_through_files() {
    let dir = std::env::temp_dir().join(format!("nsch-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("square.mesh");
    std::fs::write(
        &path,
        "polymesh 1\n4 1 4\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n4 0 1 2 3\n0 1 0 -1\n1 2 0 -1\n2 3 0 -1\n3 0 0 -1\n",
    )
    .unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut passed = -1;
    assert_eq!(unsafe { nsch_mesh_validate_file(c.as_ptr(), 0.1, &mut passed) }, NschStatus::Ok, "{}", last_error());
    assert_eq!(passed, 1);

    let missing = CString::new(dir.join("missing.mesh").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { nsch_mesh_validate_file(missing.as_ptr(), 0.1, &mut passed) }, NschStatus::Io);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(nsch_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/nsch_vem.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["nsch_solver_new", "nsch_solver_step", "nsch_solver_free", "nsch_last_error", "NSCH_STATUS_SOLVER"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = std::process::Command::new("cc").args(["-std=c99", "-fsyntax-only", "-x", "c", header]).output()
    else {
        eprintln!("no C compiler, syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
