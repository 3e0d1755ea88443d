use super::dofs::{DofMap, FREE_NONE};
use super::State;
use crate::config::PhysicalParameters;
use crate::error::{Result, VemError};
use crate::forms::{CellLoad, CellOps, LocalOutput, LocalState, Sources};
use crate::frame::CellFrame;
use crate::mesh::PolygonalMesh;
use crate::polyops::{gauss_legendre, gauss_lobatto, lagrange_basis, Vec2};
use faer::sparse::Triplet;
use nalgebra::DVector;
use rayon::prelude::*;
use std::sync::Once;

static THREADS: Once = Once::new();

/// Honours `NSCH_VEM_THREADS` for the global rayon pool.
pub(crate) fn init_threads() {
    THREADS.call_once(|| {
        if let Some(n) = std::env::var("NSCH_VEM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    });
}

/// Mesh, degrees, per-cell operators and the global numbering.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: PolygonalMesh,
    pub k: usize,
    pub l: usize,
    pub cells: Vec<CellOps>,
    pub dofs: DofMap,
}

/// Global residual in unknown ordering with optional Jacobian triplets.
pub struct Assembled {
    pub residual: DVector<f64>,
    pub jacobian: Option<Vec<Triplet<usize, usize, f64>>>,
}

impl Discretization {
    pub fn new(mesh: PolygonalMesh, k: usize, l: usize) -> Result<Self> {
        if k < 1 || l < 2 {
            return Err(VemError::config("physics", format!("degrees k = {k}, l = {l}; need k >= 1 and l >= 2")));
        }
        init_threads();
        let dofs = DofMap::new(&mesh, k, l)?;
        let cells = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| CellOps::new(CellFrame::from_mesh(&mesh, c), k, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mesh, k, l, cells, dofs })
    }

    pub fn num_unknowns(&self) -> usize {
        self.dofs.n_unknowns
    }

    fn gather(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
        DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
    }

    pub(crate) fn local_state(&self, c: usize, s: &State, prev: &State) -> LocalState {
        let d = &self.dofs;
        LocalState {
            u: Self::gather(&s.u, &d.vel_cell[c]),
            p: s.p.rows(c * d.press_per_cell, d.press_per_cell).into_owned(),
            mu: s.mu,
            phi: Self::gather(&s.phi, &d.phase_cell[c]),
            u_old: Self::gather(&prev.u, &d.vel_cell[c]),
            phi_old: Self::gather(&prev.phi, &d.phase_cell[c]),
        }
    }

    /// Per-cell load vectors at time `t`.
    pub fn loads(&self, sources: &dyn Sources, t: f64) -> Vec<CellLoad> {
        self.cells.par_iter().map(|ops| ops.load(sources, t)).collect()
    }

    /// Residual (and Jacobian) of one backward Euler step from `prev` to `s`,
    /// with loads taken at the new time level.
    pub fn assemble(
        &self,
        s: &State,
        prev: &State,
        tau: f64,
        loads: &[CellLoad],
        params: &PhysicalParameters,
        want_jacobian: bool,
    ) -> Result<Assembled> {
        let locals: Vec<LocalOutput> = self
            .cells
            .par_iter()
            .zip(loads)
            .enumerate()
            .map(|(c, (ops, load))| ops.evaluate(&self.local_state(c, s, prev), params, tau, load, want_jacobian))
            .collect();

        let d = &self.dofs;
        let mut r = DVector::<f64>::zeros(d.n_unknowns);
        let mut trip = want_jacobian.then(Vec::new);
        for (c, out) in locals.iter().enumerate() {
            if !out.r_u.iter().all(|v| v.is_finite()) {
                return Err(VemError::NonFinite { what: format!("momentum residual on cell {c}") });
            }
            if !out.r_phi.iter().all(|v| v.is_finite()) {
                return Err(VemError::NonFinite { what: format!("phase residual on cell {c}") });
            }
            let vrow: Vec<usize> = d.vel_cell[c].iter().map(|&g| d.vel_unknown[g]).collect();
            let frow: Vec<usize> = d.phase_cell[c].iter().map(|&g| d.phase_unknown[g]).collect();
            let prow: Vec<usize> = d.press_range(c).map(|i| d.press_offset + i).collect();
            for (i, &gi) in vrow.iter().enumerate() {
                if gi != FREE_NONE {
                    r[gi] += out.r_u[i];
                }
            }
            for (i, &gi) in frow.iter().enumerate() {
                if gi != FREE_NONE {
                    r[gi] += out.r_phi[i];
                }
            }
            for (a, &gi) in prow.iter().enumerate() {
                r[gi] += out.r_p[a];
            }
            r[d.mu_index] += out.r_mu;

            if let (Some(t), Some(j)) = (trip.as_mut(), out.jac.as_ref()) {
                let ops = &self.cells[c];
                let mut push = |rows: &[usize], cols: &[usize], f: &dyn Fn(usize, usize) -> f64| {
                    for (i, &gi) in rows.iter().enumerate() {
                        if gi == FREE_NONE {
                            continue;
                        }
                        for (jj, &gj) in cols.iter().enumerate() {
                            if gj != FREE_NONE {
                                t.push(Triplet::new(gi, gj, f(i, jj)));
                            }
                        }
                    }
                };
                push(&vrow, &vrow, &|i, jj| j.uu[(i, jj)]);
                push(&vrow, &frow, &|i, jj| j.uphi[(i, jj)]);
                push(&vrow, &prow, &|i, a| -ops.b[(a, i)]);
                push(&prow, &vrow, &|a, i| ops.b[(a, i)]);
                push(&prow, &[d.mu_index], &|a, _| ops.p_mean[a]);
                push(&[d.mu_index], &prow, &|_, a| ops.p_mean[a]);
                push(&frow, &vrow, &|i, jj| j.phiu[(i, jj)]);
                push(&frow, &frow, &|i, jj| j.phiphi[(i, jj)]);
            }
        }
        if !r[d.mu_index].is_finite() {
            return Err(VemError::NonFinite { what: "pressure constraint".into() });
        }
        Ok(Assembled { residual: r, jacobian: trip })
    }

    /// Free entries of a state in unknown ordering.
    pub fn pack(&self, s: &State) -> DVector<f64> {
        let d = &self.dofs;
        let mut x = DVector::zeros(d.n_unknowns);
        for (g, &i) in d.vel_unknown.iter().enumerate() {
            if i != FREE_NONE {
                x[i] = s.u[g];
            }
        }
        x.rows_mut(d.press_offset, d.n_press).copy_from(&s.p);
        x[d.mu_index] = s.mu;
        for (g, &i) in d.phase_unknown.iter().enumerate() {
            if i != FREE_NONE {
                x[i] = s.phi[g];
            }
        }
        x
    }

    /// Adds an increment in unknown ordering to the free entries of `s`.
    pub fn apply_increment(&self, s: &mut State, dx: &DVector<f64>, alpha: f64) {
        let d = &self.dofs;
        for (g, &i) in d.vel_unknown.iter().enumerate() {
            if i != FREE_NONE {
                s.u[g] += alpha * dx[i];
            }
        }
        for a in 0..d.n_press {
            s.p[a] += alpha * dx[d.press_offset + a];
        }
        s.mu += alpha * dx[d.mu_index];
        for (g, &i) in d.phase_unknown.iter().enumerate() {
            if i != FREE_NONE {
                s.phi[g] += alpha * dx[i];
            }
        }
    }

    /// Global velocity interpolant; vertex and edge values are shared
    /// between cells, interior moments are cellwise.
    pub fn interpolate_velocity(&self, f: &(dyn Fn(&Vec2) -> Vec2 + Sync)) -> DVector<f64> {
        let parts: Vec<DVector<f64>> = self.cells.par_iter().map(|ops| ops.vel.interpolate(f)).collect();
        let mut u = DVector::zeros(self.dofs.n_vel);
        for (c, part) in parts.iter().enumerate() {
            for (i, &g) in self.dofs.vel_cell[c].iter().enumerate() {
                u[g] = part[i];
            }
        }
        u
    }

    pub fn interpolate_phase(&self, f: &(dyn Fn(&Vec2) -> (f64, Vec2) + Sync)) -> DVector<f64> {
        let parts: Vec<DVector<f64>> = self.cells.par_iter().map(|ops| ops.phase.interpolate(f)).collect();
        let mut phi = DVector::zeros(self.dofs.n_phase);
        for (c, part) in parts.iter().enumerate() {
            for (i, &g) in self.dofs.phase_cell[c].iter().enumerate() {
                phi[g] = part[i];
            }
        }
        phi
    }

    /// Writes the Dirichlet velocity at time `t` into the constrained
    /// entries, then shifts the interior normal values of the boundary edges
    /// so that the total boundary flux vanishes.
    pub fn impose_velocity_boundary(&self, u: &mut DVector<f64>, g: &dyn Fn(&Vec2, f64) -> Vec2, t: f64) {
        let d = &self.dofs;
        let mesh = &self.mesh;
        let khat = self.k.max(2);
        let gll = gauss_lobatto(khat);
        let tangential = gauss_lobatto(self.k);
        let gll_w = lobatto_weights(khat);
        let n_normal = khat - 1;
        let mut flux = 0.0;
        let mut interior_weight = 0.0;
        let verts = mesh.vertices();
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.right.is_some() {
                continue;
            }
            let (a, b) = (verts[edge.a], verts[edge.b]);
            let len = mesh.edge_length(e);
            let n = mesh.edge_normal(e);
            let tv = mesh.edge_tangent(e);
            for v in [edge.a, edge.b] {
                let val = g(&verts[v], t);
                u[2 * v] = val.x;
                u[2 * v + 1] = val.y;
            }
            let base = d.vel_edge_base + e * d.vel_edge_block;
            let ga = g(&a, t).dot(&n);
            let gb = g(&b, t).dot(&n);
            flux += len * (gll_w[0] * ga + gll_w[khat] * gb);
            for j in 0..n_normal {
                let x = a + (b - a) * gll[j + 1];
                let val = g(&x, t).dot(&n);
                u[base + j] = val;
                flux += len * gll_w[j + 1] * val;
                interior_weight += len * gll_w[j + 1];
            }
            for j in 0..self.k.saturating_sub(1) {
                let x = a + (b - a) * tangential[j + 1];
                u[base + n_normal + j] = g(&x, t).dot(&tv);
            }
        }
        if interior_weight > 0.0 {
            let delta = -flux / interior_weight;
            for (e, edge) in mesh.edges().iter().enumerate() {
                if edge.right.is_none() {
                    let base = d.vel_edge_base + e * d.vel_edge_block;
                    for j in 0..n_normal {
                        u[base + j] += delta;
                    }
                }
            }
        }
    }

    /// Zero normal derivative data for the constrained phase entries.
    pub fn impose_phase_boundary(&self, phi: &mut DVector<f64>) {
        for (g, &fixed) in self.dofs.phase_fixed.iter().enumerate() {
            if fixed {
                phi[g] = 0.0;
            }
        }
    }
}

/// Integrals over `[0, 1]` of the Lagrange basis on the Gauss-Lobatto nodes.
fn lobatto_weights(n: usize) -> Vec<f64> {
    let nodes = gauss_lobatto(n);
    let (gs, gw) = gauss_legendre(n / 2 + 1);
    let mut w = vec![0.0; n + 1];
    for (&s, &q) in gs.iter().zip(&gw) {
        for (wj, lj) in w.iter_mut().zip(lagrange_basis(&nodes, s)) {
            *wj += q * lj;
        }
    }
    w
}
