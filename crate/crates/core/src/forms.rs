//! Local discrete forms on one cell and their Jacobians.
//!
//! All bilinear forms are assembled once into dense matrices. The
//! nonlinear forms (`c_F`, `c_h`, `d_h`, `r_h`) are integrated at the cell
//! quadrature points from the projector matrices, together with their
//! exact derivatives.

use crate::config::PhysicalParameters;
use crate::error::{Result, VemError};
use crate::frame::CellFrame;
use crate::linalg::{block_diag, dofi_stabilization};
use crate::phase::PhaseElement;
use crate::polyops::monomial::derivative_matrix;
use crate::polyops::{dim, gauss_legendre, polygon_rule, QuadratureRule, Vec2};
use crate::velocity::VelocityElement;
use nalgebra::{DMatrix, DVector};

/// Multiplier of the `h_E^{-2}` dofi-dofi term in `a_{D,h}`.
pub const PHASE_H2_STABILIZATION: f64 = 0.3;

/// Source terms evaluated by the local kernels.
pub trait Sources: Sync {
    fn momentum(&self, _x: &Vec2, _t: f64) -> Option<Vec2> {
        None
    }
    fn phase(&self, _x: &Vec2, _t: f64) -> Option<f64> {
        None
    }
    /// Density `beta` of an extra boundary load `oint_Gamma beta psi`.
    fn phase_boundary(&self, _x: &Vec2, _n: &Vec2, _t: f64) -> Option<f64> {
        None
    }
    fn has_momentum(&self) -> bool {
        true
    }
    fn has_phase(&self) -> bool {
        true
    }
    fn has_phase_boundary(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
struct EdgePoint {
    w: f64,
    x: Vec2,
    n: Vec2,
    boundary: bool,
    /// `u . n_E` over velocity DoFs.
    vn: DVector<f64>,
    /// Phase trace over phase DoFs.
    tr: DVector<f64>,
    /// `Pi^0_l phi` at the point over phase DoFs.
    pi: DVector<f64>,
}

/// Precomputed data of one cell.
#[derive(Debug, Clone)]
pub struct CellOps {
    pub vel: VelocityElement,
    pub phase: PhaseElement,
    pub quad: QuadratureRule,
    edge_points: Vec<EdgePoint>,
    /// `m_F` with stabilization.
    pub mass_vel: DMatrix<f64>,
    /// `a^nabla` with stabilization.
    pub stiff_vel: DMatrix<f64>,
    /// `m_h` with stabilization.
    pub mass_phase: DMatrix<f64>,
    /// `a^D` with stabilization.
    pub stiff_phase: DMatrix<f64>,
    /// `(q_a, div v)` for pressure monomials `q_a`.
    pub b: DMatrix<f64>,
    /// `(q_a, 1)`.
    pub p_mean: DVector<f64>,
    /// Pressure mass matrix.
    pub p_mass: DMatrix<f64>,
    tab: Tabulated,
}

/// Projected basis functions at the quadrature points.
#[derive(Debug, Clone)]
struct Tabulated {
    w: DVector<f64>,
    n: [DMatrix<f64>; 2],
    g: [DMatrix<f64>; 4],
    p: DMatrix<f64>,
    gphi: [DMatrix<f64>; 2],
    gpi: [DMatrix<f64>; 2],
    lap: DMatrix<f64>,
}

/// Local unknowns of one cell.
#[derive(Debug, Clone)]
pub struct LocalState {
    pub u: DVector<f64>,
    pub p: DVector<f64>,
    pub mu: f64,
    pub phi: DVector<f64>,
    pub u_old: DVector<f64>,
    pub phi_old: DVector<f64>,
}

/// Right-hand side contributions of one cell at a fixed time.
#[derive(Debug, Clone)]
pub struct CellLoad {
    pub u: DVector<f64>,
    pub phi: DVector<f64>,
}

impl CellLoad {
    pub fn zeros(nu: usize, nphi: usize) -> Self {
        Self { u: DVector::zeros(nu), phi: DVector::zeros(nphi) }
    }
}

/// Local residual blocks and, optionally, the Jacobian blocks.
#[derive(Debug, Clone)]
pub struct LocalOutput {
    pub r_u: DVector<f64>,
    pub r_p: DVector<f64>,
    pub r_mu: f64,
    pub r_phi: DVector<f64>,
    pub jac: Option<LocalJacobian>,
}

#[derive(Debug, Clone)]
pub struct LocalJacobian {
    pub uu: DMatrix<f64>,
    pub uphi: DMatrix<f64>,
    pub phiu: DMatrix<f64>,
    pub phiphi: DMatrix<f64>,
}

/// Quadrature degree for the forms of a `(k, l)` pair: polynomial degree of
/// the richest integrand plus two.
pub fn forms_degree(k: usize, l: usize) -> usize {
    let cands = [2 * k, 3 * k - 1, k + 2 * l - 1, 2 * l - 3 + k, 4 * l - 2, 2 * l];
    cands.into_iter().max().unwrap() + 2
}

/// `a^T diag(w) b`.
fn wt(a: &DMatrix<f64>, w: &DVector<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut sb = b.clone();
    for (i, mut row) in sb.row_iter_mut().enumerate() {
        row *= w[i];
    }
    a.transpose() * sb
}

fn scale_rows(a: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = a.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= s[i];
    }
    out
}

impl CellOps {
    pub fn new(frame: CellFrame, k: usize, l: usize) -> Result<Self> {
        let vel = VelocityElement::new(frame.clone(), k)?;
        let phase = PhaseElement::new(frame.clone(), l)?;
        let quad = polygon_rule(&frame.vertices, &frame.centroid, forms_degree(k, l))
            .map_err(|e| VemError::DegenerateCell { cell: frame.cell, msg: e.to_string() })?;
        let pmax = k.max(l) as i32;
        let mut mono = DMatrix::zeros(quad.len(), dim(pmax));
        for (q, x) in quad.points.iter().enumerate() {
            for (a, v) in frame.mono.values(pmax, x).into_iter().enumerate() {
                mono[(q, a)] = v;
            }
        }
        let v = |n: i32| mono.columns(0, dim(n)).into_owned();

        let h = frame.h;
        let (ki, li) = (k as i32, l as i32);
        let hk = vel.mass_k();
        let hkm1 = vel.mass_km1();
        let mass_vel = vel.pi0.transpose() * block_diag(&hk, &[1.0, 1.0]) * &vel.pi0
            + dofi_stabilization(&vel.dof_matrix, &vel.pi0, h * h);
        let stiff_vel = vel.grad0.transpose() * block_diag(&hkm1, &[1.0; 4]) * &vel.grad0
            + dofi_stabilization(&vel.dof_matrix, &vel.pi_nabla, 1.0);
        let hl = phase.mass.clone();
        let d2 = dim(li - 2);
        let hl2 = phase.mass.view((0, 0), (d2, d2)).into_owned();
        let mass_phase =
            phase.pi0.transpose() * &hl * &phase.pi0 + dofi_stabilization(&phase.dof_matrix, &phase.pi0, h * h);
        let stiff_phase = phase.hess0.transpose() * block_diag(&hl2, &[1.0, 2.0, 1.0]) * &phase.hess0
            + dofi_stabilization(&phase.dof_matrix, &phase.proj_d, PHASE_H2_STABILIZATION / (h * h));
        let b = vel.div_moments.clone();
        let p_mean = hkm1.column(0).into_owned();

        let dk = dim(ki);
        let dk1 = dim(ki - 1);
        let dl1 = dim(li - 1);
        let vk = v(ki);
        let vk1 = v(ki - 1);
        let vl1 = v(li - 1);
        let tab = Tabulated {
            w: DVector::from_column_slice(&quad.weights),
            n: [&vk * vel.pi0.rows(0, dk), &vk * vel.pi0.rows(dk, dk)],
            g: std::array::from_fn(|b| &vk1 * vel.grad0.rows(b * dk1, dk1)),
            p: v(li) * &phase.pi0,
            gphi: [&vl1 * phase.grad0.rows(0, dl1), &vl1 * phase.grad0.rows(dl1, dl1)],
            gpi: [&vl1 * derivative_matrix(li, 0, h) * &phase.pi0, &vl1 * derivative_matrix(li, 1, h) * &phase.pi0],
            lap: v(li - 2) * &phase.lap0,
        };

        let khat = k.max(2);
        let lhat = l.max(3);
        let (gs, gw) = gauss_legendre((khat + lhat + l) / 2 + 1);
        let mut edge_points = Vec::new();
        for (e, ed) in frame.edges.iter().enumerate() {
            for (&s, &w) in gs.iter().zip(&gw) {
                let x = ed.point(s);
                let n = ed.outward_normal();
                let t = vel.trace_at(e, s);
                let vn = (t.row(0) * n.x + t.row(1) * n.y).transpose();
                let tr = phase.trace_at(e, s).0.row(0).transpose();
                let m = DVector::from_vec(frame.mono.values(li, &x));
                let pi = phase.pi0.transpose() * m;
                edge_points.push(EdgePoint { w: w * ed.length, x, n, boundary: ed.on_boundary, vn, tr, pi });
            }
        }

        Ok(Self {
            p_mass: hkm1,
            vel,
            phase,
            quad,
            edge_points,
            mass_vel,
            stiff_vel,
            mass_phase,
            stiff_phase,
            b,
            p_mean,
            tab,
        })
    }

    pub fn k(&self) -> usize {
        self.vel.k
    }

    pub fn l(&self) -> usize {
        self.phase.l
    }

    pub fn frame(&self) -> &CellFrame {
        &self.vel.frame
    }

    fn weights(&self) -> &DVector<f64> {
        &self.tab.w
    }

    /// Basis values at the quadrature points of `Pi^0_k v` components.
    pub fn vel_values(&self) -> &[DMatrix<f64>; 2] {
        &self.tab.n
    }

    /// `Pi^0_{k-1}` of the velocity gradient, blocks `[xx, xy, yx, yy]`.
    pub fn vel_grads(&self) -> &[DMatrix<f64>; 4] {
        &self.tab.g
    }

    pub fn phase_values(&self) -> &DMatrix<f64> {
        &self.tab.p
    }

    /// `Pi^0_{l-1} grad phi` components.
    pub fn phase_grads(&self) -> &[DMatrix<f64>; 2] {
        &self.tab.gphi
    }

    /// Gradient of `Pi^0_l phi`.
    fn phase_pi_grads(&self) -> &[DMatrix<f64>; 2] {
        &self.tab.gpi
    }

    pub fn phase_laplacian(&self) -> &DMatrix<f64> {
        &self.tab.lap
    }

    /// `c_{F,h}(w; u, v)` as a matrix in `(v, u)` for fixed `w`.
    pub fn convection_matrix(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.vel_values();
        let g = self.vel_grads();
        let wq = self.weights();
        let wv = [&n[0] * w, &n[1] * w];
        let mut out = DMatrix::zeros(self.vel.ndof, self.vel.ndof);
        for c in 0..2 {
            for d in 0..2 {
                // (grad u) w . v  -  (grad v) w . u
                let gu = scale_rows(&g[2 * c + d], &wv[d]);
                out += wt(&n[c], wq, &gu) * 0.5;
                out -= wt(&gu, wq, &n[c]) * 0.5;
            }
        }
        out
    }

    /// `c_h(u; phi, psi)` as a matrix in `(psi, phi)` for fixed `u`.
    pub fn phase_convection_matrix(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.vel_values();
        let p = self.phase_values();
        let gp = self.phase_pi_grads();
        let wq = self.weights();
        let mut out = DMatrix::zeros(self.phase.ndof, self.phase.ndof);
        for c in 0..2 {
            let uc = &n[c] * u;
            let a = scale_rows(&gp[c], &uc);
            out += wt(p, wq, &a) * 0.5;
            out -= wt(&a, wq, p) * 0.5;
        }
        for ep in &self.edge_points {
            let un = ep.vn.dot(u);
            let d = &ep.tr - &ep.pi;
            // psi_i = pi_i, phi_j: (tr_j - pi_j)
            out += (&ep.pi * d.transpose() - &d * ep.pi.transpose()) * (0.5 * ep.w * un);
        }
        out
    }

    /// Load vectors `(g, Pi^0_k v)`, `(g_phi, Pi^0_l psi)` plus the boundary
    /// phase load at time `t`.
    pub fn load(&self, sources: &dyn Sources, t: f64) -> CellLoad {
        let wq = self.weights();
        let nq = self.quad.len();
        let n = self.vel_values();
        let p = self.phase_values();
        let mut out = CellLoad::zeros(self.vel.ndof, self.phase.ndof);
        if sources.has_momentum() {
            let mut gx = DVector::zeros(nq);
            let mut gy = DVector::zeros(nq);
            for (q, x) in self.quad.points.iter().enumerate() {
                if let Some(v) = sources.momentum(x, t) {
                    gx[q] = v.x * wq[q];
                    gy[q] = v.y * wq[q];
                }
            }
            out.u = n[0].transpose() * gx + n[1].transpose() * gy;
        }
        if sources.has_phase() {
            let mut gp = DVector::zeros(nq);
            for (q, x) in self.quad.points.iter().enumerate() {
                if let Some(v) = sources.phase(x, t) {
                    gp[q] = v * wq[q];
                }
            }
            out.phi = p.transpose() * gp;
        }
        if sources.has_phase_boundary() {
            for ep in self.edge_points.iter().filter(|e| e.boundary) {
                if let Some(beta) = sources.phase_boundary(&ep.x, &ep.n, t) {
                    out.phi += &ep.tr * (ep.w * beta);
                }
            }
        }
        out
    }

    /// Local residual and (optionally) Jacobian with step `tau`.
    pub fn evaluate(
        &self,
        s: &LocalState,
        params: &PhysicalParameters,
        tau: f64,
        load: &CellLoad,
        want_jacobian: bool,
    ) -> LocalOutput {
        let nv = self.vel.ndof;
        let nphi = self.phase.ndof;
        let wq = self.weights();
        let inv_tau = 1.0 / tau;

        let n = self.vel_values();
        let g = self.vel_grads();
        let p = self.phase_values();
        let gphi = self.phase_grads();
        let gpi = self.phase_pi_grads();
        let lap = self.phase_laplacian();

        let u = [&n[0] * &s.u, &n[1] * &s.u];
        let gu: [DVector<f64>; 4] = std::array::from_fn(|b| &g[b] * &s.u);
        let pv = p * &s.phi;
        let gv = [&gphi[0] * &s.phi, &gphi[1] * &s.phi];
        let gpv = [&gpi[0] * &s.phi, &gpi[1] * &s.phi];
        let lv = lap * &s.phi;
        let nq = self.quad.len();

        // linear parts
        let mut r_u = &self.mass_vel * (&s.u - &s.u_old) * inv_tau + &self.stiff_vel * &s.u * params.nu
            - self.b.transpose() * &s.p;
        let r_p = &self.b * &s.u + &self.p_mean * s.mu;
        let r_mu = self.p_mean.dot(&s.p);
        let mut r_phi = &self.mass_phase * (&s.phi - &s.phi_old) * inv_tau + &self.stiff_phase * &s.phi * params.gamma;

        // c_F
        let mut t1 = DVector::zeros(nq);
        let mut t2 = DVector::zeros(nq);
        for c in 0..2 {
            let conv: DVector<f64> = gu[2 * c].component_mul(&u[0]) + gu[2 * c + 1].component_mul(&u[1]);
            let f = conv.component_mul(wq);
            r_u += n[c].transpose() * f * 0.5;
            for d in 0..2 {
                t1.copy_from(&u[d].component_mul(&u[c]));
                t2.copy_from(&t1.component_mul(wq));
                r_u -= g[2 * c + d].transpose() * &t2 * 0.5;
            }
        }

        // d_h
        let lam = params.lambda;
        for c in 0..2 {
            let f = lv.component_mul(&gv[c]).component_mul(wq);
            r_u += n[c].transpose() * f * lam;
        }

        // c_h volume
        let adv = u[0].component_mul(&gpv[0]) + u[1].component_mul(&gpv[1]);
        r_phi += p.transpose() * adv.component_mul(wq) * 0.5;
        for c in 0..2 {
            let f = u[c].component_mul(&pv).component_mul(wq);
            r_phi -= gpi[c].transpose() * f * 0.5;
        }
        // c_h boundary
        for ep in &self.edge_points {
            let un = ep.vn.dot(&s.u);
            let trv = ep.tr.dot(&s.phi);
            let piv = ep.pi.dot(&s.phi);
            r_phi += (&ep.pi * (trv - piv) - (&ep.tr - &ep.pi) * piv) * (0.5 * ep.w * un);
        }

        // r_h
        let se = params.gamma / (params.eps * params.eps);
        let fp = pv.map(|v| 3.0 * v * v - 1.0);
        for c in 0..2 {
            let f = fp.component_mul(&gv[c]).component_mul(wq);
            r_phi += gphi[c].transpose() * f * se;
        }

        r_u -= &load.u;
        r_phi -= &load.phi;

        let jac = want_jacobian.then(|| {
            let mut uu = &self.mass_vel * inv_tau + &self.stiff_vel * params.nu;
            for c in 0..2 {
                for d in 0..2 {
                    let gcd = &g[2 * c + d];
                    // (G_j U) . N_i
                    uu += wt(&n[c], wq, &scale_rows(gcd, &u[d])) * 0.5;
                    // (G_u N_j) . N_i
                    uu += wt(&n[c], wq, &scale_rows(&n[d], &gu[2 * c + d])) * 0.5;
                    // -(G_i N_j) . U
                    uu -= wt(gcd, &u[c].component_mul(wq), &n[d]) * 0.5;
                    // -(G_i U) . N_j
                    uu -= wt(gcd, &u[d].component_mul(wq), &n[c]) * 0.5;
                }
            }

            let mut uphi = DMatrix::zeros(nv, nphi);
            for c in 0..2 {
                let a = scale_rows(lap, &gv[c]) + scale_rows(&gphi[c], &lv);
                uphi += wt(&n[c], wq, &a) * lam;
            }

            let mut phiphi = &self.mass_phase * inv_tau + &self.stiff_phase * params.gamma;
            phiphi += self.phase_convection_matrix(&s.u);
            for c in 0..2 {
                let a = scale_rows(p, &pv.component_mul(&gv[c]).map(|v| 6.0 * v)) + scale_rows(&gphi[c], &fp);
                phiphi += wt(&gphi[c], wq, &a) * se;
            }

            let mut phiu = DMatrix::zeros(nphi, nv);
            for c in 0..2 {
                phiu += wt(p, wq, &scale_rows(&n[c], &gpv[c])) * 0.5;
                phiu -= wt(&gpi[c], wq, &scale_rows(&n[c], &pv)) * 0.5;
            }
            for ep in &self.edge_points {
                let trv = ep.tr.dot(&s.phi);
                let piv = ep.pi.dot(&s.phi);
                let coef = &ep.pi * (trv - piv) - (&ep.tr - &ep.pi) * piv;
                phiu += coef * ep.vn.transpose() * (0.5 * ep.w);
            }
            LocalJacobian { uu, uphi, phiu, phiphi }
        });

        LocalOutput { r_u, r_p, r_mu, r_phi, jac }
    }

    /// `|| Pi^0_k u ||^2`, `|| Pi^0_{l-1} grad phi ||^2` and `(F(Pi^0_l phi), 1)`.
    pub fn energy_parts(&self, u: &DVector<f64>, phi: &DVector<f64>) -> (f64, f64, f64) {
        let wq = self.weights();
        let n = self.vel_values();
        let g = self.phase_grads();
        let p = self.phase_values();
        let (ux, uy) = (&n[0] * u, &n[1] * u);
        let (gx, gy) = (&g[0] * phi, &g[1] * phi);
        let pv = p * phi;
        let mut e = (0.0, 0.0, 0.0);
        for q in 0..self.quad.len() {
            e.0 += wq[q] * (ux[q] * ux[q] + uy[q] * uy[q]);
            e.1 += wq[q] * (gx[q] * gx[q] + gy[q] * gy[q]);
            e.2 += wq[q] * 0.25 * (pv[q] * pv[q] - 1.0).powi(2);
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms_degree_of_low_pairs() {
        assert_eq!(forms_degree(1, 2), 8);
        assert_eq!(forms_degree(2, 3), 12);
    }
}
