//! Output files: per-run diagnostics CSV, the errors CSV of a rate study and
//! field snapshots.
//!
//! Floats are written in shortest round-trip scientific notation.
//!
//! Snapshot format (`snapshot_NNNNNN.txt`), one record per line:
//!
//! ```text
//! nsch-vem-snapshot 1
//! step <n>
//! t <t>
//! degrees <k> <l>
//! vertices <NV>
//! <x> <y> <u_x> <u_y> <p_hat> <phi>          (NV lines)
//! cells <NC>
//! <xc> <yc> <h> <u_x coeffs> <u_y coeffs> <p_hat coeffs> <phi coeffs>   (NC lines)
//! ```
//!
//! Cell coefficients refer to the scaled monomials
//! `((x - xc)/h)^a ((y - yc)/h)^b`, ordered by total degree and then by `b`:
//! `dim(k)` each for `Pi^0_k u_x` and `Pi^0_k u_y`, `dim(k-1)` for the
//! pressure and `dim(l)` for `Pi^0_l phi`. Vertex velocity and phase values
//! are the nodal DoFs; the vertex pressure is the average over the cells
//! sharing the vertex.

use crate::diagnostics::ErrorSet;
use crate::error::{Result, VemError};
use crate::mesh::MeshFamily;
use crate::polyops::dim;
use crate::system::{Discretization, State, StepRecord};
use nalgebra::DVector;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn csv_err(e: csv::Error) -> VemError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => VemError::Io(e),
        k => VemError::Io(std::io::Error::other(format!("{k:?}"))),
    }
}

pub const DIAGNOSTICS_HEADER: [&str; 7] =
    ["step", "t", "mass", "energy_J", "newton_iters", "final_residual", "div_inf_norm"];

/// Streams [`StepRecord`]s as CSV rows.
pub struct DiagnosticsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> DiagnosticsWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(DIAGNOSTICS_HEADER).map_err(csv_err)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, r: &StepRecord) -> Result<()> {
        self.inner
            .write_record([
                r.step.to_string(),
                num(r.t),
                num(r.mass),
                num(r.energy),
                r.newton_iters.to_string(),
                num(r.final_residual),
                num(r.div_inf_norm),
            ])
            .map_err(csv_err)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner.into_inner().map_err(|e| VemError::Io(std::io::Error::other(e.to_string())))
    }
}

pub fn diagnostics_csv(records: &[StepRecord]) -> Result<String> {
    let mut w = DiagnosticsWriter::new(Vec::new())?;
    for r in records {
        w.write(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?).expect("ascii output"))
}

/// One run of a rate study.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub family: MeshFamily,
    pub h: f64,
    pub k: usize,
    pub l: usize,
    pub tau: f64,
    pub errors: ErrorSet,
}

/// Observed orders between `prev` and `row`, or `None` when the rows do not
/// belong to the same refinement sequence.
pub fn rates(prev: &ErrorRow, row: &ErrorRow) -> Option<[f64; 3]> {
    if prev.family != row.family || prev.k != row.k || prev.l != row.l || !(prev.h > row.h) {
        return None;
    }
    let q = (prev.h / row.h).ln();
    let r = |a: f64, b: f64| (a / b).ln() / q;
    let (a, b) = (&prev.errors, &row.errors);
    Some([r(a.err_u_h1, b.err_u_h1), r(a.err_p_l2, b.err_p_l2), r(a.err_phi_h2, b.err_phi_h2)])
}

pub const ERRORS_HEADER: [&str; 11] = [
    "mesh_family",
    "h",
    "k",
    "l",
    "tau",
    "err_u_H1",
    "err_p_L2",
    "err_phi_H2",
    "rate_u_H1",
    "rate_p_L2",
    "rate_phi_H2",
];

/// Errors CSV; the rate columns compare each row with the previous one and
/// stay empty at the start of every refinement sequence.
pub fn errors_csv(rows: &[ErrorRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ERRORS_HEADER).map_err(csv_err)?;
    for (i, row) in rows.iter().enumerate() {
        let e = &row.errors;
        let mut rec = vec![
            row.family.to_string(),
            num(row.h),
            row.k.to_string(),
            row.l.to_string(),
            num(row.tau),
            num(e.err_u_h1),
            num(e.err_p_l2),
            num(e.err_phi_h2),
        ];
        match i.checked_sub(1).and_then(|j| rates(&rows[j], row)) {
            Some(r) => rec.extend(r.iter().map(|&x| num(x))),
            None => rec.extend(std::iter::repeat_n(String::new(), 3)),
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| VemError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn snapshot_string(disc: &Discretization, step: usize, s: &State) -> String {
    let (k, l) = (disc.k, disc.l);
    let d = &disc.dofs;
    let mesh = &disc.mesh;
    let dk = dim(k as i32);
    let mut out = String::new();
    writeln!(out, "nsch-vem-snapshot 1\nstep {step}\nt {}\ndegrees {k} {l}", num(s.t)).unwrap();

    let nv = mesh.num_vertices();
    let mut u_at = vec![[0.0; 2]; nv];
    let mut phi_at = vec![0.0; nv];
    let mut p_sum = vec![0.0; nv];
    let mut p_cnt = vec![0usize; nv];
    let mut cell_lines = String::new();
    for (c, ops) in disc.cells.iter().enumerate() {
        let fr = ops.frame();
        let ul = DVector::from_iterator(d.vel_cell[c].len(), d.vel_cell[c].iter().map(|&i| s.u[i]));
        let phl = DVector::from_iterator(d.phase_cell[c].len(), d.phase_cell[c].iter().map(|&i| s.phi[i]));
        let uc = &ops.vel.pi0 * &ul;
        let pc = &s.p.as_slice()[d.press_range(c)];
        let fc = &ops.phase.pi0 * &phl;
        for (i, &v) in fr.vertex_ids.iter().enumerate() {
            u_at[v] = [ul[2 * i], ul[2 * i + 1]];
            phi_at[v] = phl[3 * i];
            p_sum[v] += fr.mono.eval(pc, &fr.vertices[i]);
            p_cnt[v] += 1;
        }
        let mut line = vec![num(fr.centroid.x), num(fr.centroid.y), num(fr.h)];
        line.extend(uc.rows(0, dk).iter().map(|&x| num(x)));
        line.extend(uc.rows(dk, dk).iter().map(|&x| num(x)));
        line.extend(pc.iter().map(|&x| num(x)));
        line.extend(fc.iter().map(|&x| num(x)));
        writeln!(cell_lines, "{}", line.join(" ")).unwrap();
    }
    writeln!(out, "vertices {nv}").unwrap();
    for (v, x) in mesh.vertices().iter().enumerate() {
        let p = if p_cnt[v] > 0 { p_sum[v] / p_cnt[v] as f64 } else { 0.0 };
        writeln!(
            out,
            "{} {} {} {} {} {}",
            num(x.x),
            num(x.y),
            num(u_at[v][0]),
            num(u_at[v][1]),
            num(p),
            num(phi_at[v])
        )
        .unwrap();
    }
    writeln!(out, "cells {}", mesh.num_cells()).unwrap();
    out.push_str(&cell_lines);
    out
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("snapshot_{step:06}.txt"))
}

pub fn write_snapshot(dir: &Path, step: usize, disc: &Discretization, s: &State) -> Result<PathBuf> {
    let path = snapshot_path(dir, step);
    std::fs::write(&path, snapshot_string(disc, step, s))?;
    Ok(path)
}
