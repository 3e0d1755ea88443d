//! Error norms, conserved and monitored quantities, chemical potential
//! postprocessing, and the data of the two reference problems.

mod problems;

pub use problems::{ExactSolution, Test1Problem, Test2Problem};

use crate::config::PhysicalParameters;
use crate::polyops::{dim, Vec2};
use crate::system::{Discretization, State};
use nalgebra::DVector;
use rayon::prelude::*;

/// Relative errors at one time level. A flag is set when the exact field
/// has zero norm and the entry is an absolute error instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSet {
    pub err_u_h1: f64,
    pub err_p_l2: f64,
    pub err_phi_h2: f64,
    pub absolute: [bool; 3],
}

fn gather(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

/// `(sum of squared differences, sum of squared exact values)` per field.
#[derive(Default, Clone, Copy)]
struct Acc {
    u: [f64; 2],
    p: [f64; 2],
    phi: [f64; 2],
}

/// Velocity gradient, mean-normalized modified pressure and phase Hessian
/// errors, each relative to the exact field.
pub fn compute_errors(disc: &Discretization, s: &State, exact: &dyn ExactSolution) -> ErrorSet {
    let t = s.t;
    let d = &disc.dofs;
    let area = disc.mesh.total_area();
    let l2 = disc.l as i32 - 2;

    // means of both pressures first
    let means: Vec<[f64; 2]> = disc
        .cells
        .par_iter()
        .enumerate()
        .map(|(c, ops)| {
            let pc = s.p.rows(c * d.press_per_cell, d.press_per_cell);
            let mut m = [ops.p_mean.dot(&pc), 0.0];
            for (x, w) in ops.quad.points.iter().zip(&ops.quad.weights) {
                m[1] += w * exact.pressure_hat(x, t);
            }
            m
        })
        .collect();
    let (mh, me) = means.iter().fold((0.0, 0.0), |a, m| (a.0 + m[0], a.1 + m[1]));
    let (mh, me) = (mh / area, me / area);

    let parts: Vec<Acc> = disc
        .cells
        .par_iter()
        .enumerate()
        .map(|(c, ops)| {
            let mut acc = Acc::default();
            let u = gather(&s.u, &d.vel_cell[c]);
            let phi = gather(&s.phi, &d.phase_cell[c]);
            let g = ops.vel_grads();
            let gu: Vec<DVector<f64>> = g.iter().map(|m| m * &u).collect();
            let pc = s.p.rows(c * d.press_per_cell, d.press_per_cell).into_owned();
            let hess = &ops.phase.hess0 * &phi;
            let d2 = dim(l2);
            let mono = &ops.frame().mono;
            for (q, (x, &w)) in ops.quad.points.iter().zip(&ops.quad.weights).enumerate() {
                let ge = exact.velocity_grad(x, t);
                for b in 0..4 {
                    acc.u[0] += w * (ge[b] - gu[b][q]).powi(2);
                    acc.u[1] += w * ge[b] * ge[b];
                }
                let ph = mono.eval(pc.as_slice(), x) - mh;
                let pe = exact.pressure_hat(x, t) - me;
                acc.p[0] += w * (pe - ph).powi(2);
                acc.p[1] += w * pe * pe;
                let m = mono.values(l2, x);
                let he = exact.phase_hessian(x, t);
                for (b, wt) in [1.0, 2.0, 1.0].into_iter().enumerate() {
                    let hv: f64 = (0..d2).map(|a| m[a] * hess[b * d2 + a]).sum();
                    acc.phi[0] += wt * w * (he[b] - hv).powi(2);
                    acc.phi[1] += wt * w * he[b] * he[b];
                }
            }
            acc
        })
        .collect();
    let tot = parts.iter().fold(Acc::default(), |mut a, p| {
        for i in 0..2 {
            a.u[i] += p.u[i];
            a.p[i] += p.p[i];
            a.phi[i] += p.phi[i];
        }
        a
    });
    let rel = |v: [f64; 2]| if v[1] > 0.0 { ((v[0] / v[1]).sqrt(), false) } else { (v[0].sqrt(), true) };
    let (eu, au) = rel(tot.u);
    let (ep, ap) = rel(tot.p);
    let (ef, af) = rel(tot.phi);
    ErrorSet { err_u_h1: eu, err_p_l2: ep, err_phi_h2: ef, absolute: [au, ap, af] }
}

/// `(Pi^0_l phi, 1)` summed over cells.
pub fn total_mass(disc: &Discretization, phi: &DVector<f64>) -> f64 {
    disc.cells
        .iter()
        .enumerate()
        .map(|(c, ops)| {
            let local = gather(phi, &disc.dofs.phase_cell[c]);
            let coef = &ops.phase.pi0 * local;
            ops.phase.mass.row(0).transpose().dot(&coef)
        })
        .sum()
}

/// Projected surrogate of `1/2 |u|^2 + lambda/2 |grad phi|^2 + lambda eps^-2 (F(phi), 1)`.
pub fn energy_j(disc: &Discretization, s: &State, params: &PhysicalParameters) -> f64 {
    let d = &disc.dofs;
    let (mut a, mut b, mut f) = (0.0, 0.0, 0.0);
    for (c, ops) in disc.cells.iter().enumerate() {
        let e = ops.energy_parts(&gather(&s.u, &d.vel_cell[c]), &gather(&s.phi, &d.phase_cell[c]));
        a += e.0;
        b += e.1;
        f += e.2;
    }
    0.5 * a + 0.5 * params.lambda * b + params.lambda / (params.eps * params.eps) * f
}

/// Largest scaled cellwise `L2` norm of the divergence polynomial, relative
/// to the largest velocity DoF. Zero for a zero field.
pub fn div_inf_norm(disc: &Discretization, u: &DVector<f64>) -> f64 {
    let umax = u.amax();
    if umax == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for (c, ops) in disc.cells.iter().enumerate() {
        let iota = &ops.vel.iota * gather(u, &disc.dofs.vel_cell[c]);
        let n2 = iota.dot(&(&ops.p_mass * &iota)).max(0.0);
        let fr = ops.frame();
        worst = worst.max(fr.h * n2.sqrt() / fr.area.sqrt());
    }
    worst / umax
}

/// Cellwise postprocessed chemical potential
/// `-Pi^0_{l-2} lap phi + eps^-2 f(Pi^0_l phi)`.
#[derive(Debug, Clone)]
pub struct ChemicalPotential {
    /// Coefficients of `-Pi^0_{l-2} lap phi` in scaled monomials.
    pub neg_laplacian: DVector<f64>,
    /// Coefficients of `Pi^0_l phi`.
    pub phase: DVector<f64>,
    pub inv_eps2: f64,
    center: Vec2,
    h: f64,
}

impl ChemicalPotential {
    fn mono(&self) -> crate::polyops::ScaledMonomials {
        crate::polyops::ScaledMonomials::new(self.center, self.h)
    }

    /// Both terms at `x`.
    pub fn terms(&self, x: &Vec2) -> (f64, f64) {
        let m = self.mono();
        let p = m.eval(self.phase.as_slice(), x);
        (m.eval(self.neg_laplacian.as_slice(), x), self.inv_eps2 * (p * p * p - p))
    }

    pub fn eval(&self, x: &Vec2) -> f64 {
        let (a, b) = self.terms(x);
        a + b
    }
}

pub fn chemical_potential(disc: &Discretization, phi: &DVector<f64>, eps: f64) -> Vec<ChemicalPotential> {
    disc.cells
        .iter()
        .enumerate()
        .map(|(c, ops)| {
            let local = gather(phi, &disc.dofs.phase_cell[c]);
            let fr = ops.frame();
            ChemicalPotential {
                neg_laplacian: -(&ops.phase.lap0 * &local),
                phase: &ops.phase.pi0 * &local,
                inv_eps2: 1.0 / (eps * eps),
                center: fr.centroid,
                h: fr.h,
            }
        })
        .collect()
}
