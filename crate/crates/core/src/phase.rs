//! C1-conforming virtual element of degree `l >= 2` on one cell.
//!
//! Local degrees of freedom, in order:
//! * `(phi, h_v d_x phi, h_v d_y phi)` at every vertex, `h_v` the vertex scale,
//! * per edge (global orientation), `h_e d_n phi` at the `l - 2` interior
//!   Gauss-Lobatto nodes of order `l - 1`, then `phi` at the `lhat - 3`
//!   interior nodes of order `lhat - 2`, where `lhat = max(l, 3)`,
//! * `|E|^-1 (phi, m_a)` for `|a| <= l - 4`.

use crate::error::{Result, VemError};
use crate::frame::CellFrame;
use crate::linalg::{add_row, solve};
use crate::polyops::monomial::{derivative_matrix, laplacian_matrix};
use crate::polyops::{dim, gauss_legendre, gauss_lobatto, lagrange_basis, polygon_rule, QuadratureRule, Vec2};
use nalgebra::{DMatrix, DVector, RowDVector};

#[derive(Debug, Clone)]
pub struct PhaseTracePoint {
    pub x: Vec2,
    pub w: f64,
    pub n: Vec2,
    /// Trace value as a row over the local DoFs.
    pub value: DMatrix<f64>,
    /// Trace of the gradient, rows `[d_x; d_y]`.
    pub grad: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct PhaseElement {
    pub l: usize,
    pub lhat: usize,
    pub frame: CellFrame,
    pub ndof: usize,
    pub n_h2: usize,
    pub n_h3: usize,
    pub d4_offset: usize,
    pub nodes_h2: Vec<f64>,
    pub nodes_h3: Vec<f64>,
    /// Columns are the power-basis coefficients (in `s`) of the Hermite-type
    /// edge basis: value at 0, value at 1, slope at 0, slope at 1, interior values.
    hermite: DMatrix<f64>,
    pub quad: QuadratureRule,
    pub mass: DMatrix<f64>,
    pub proj_d: DMatrix<f64>,
    pub pi0: DMatrix<f64>,
    /// `Pi^0_{l-1} grad`, blocks `[x; y]`.
    pub grad0: DMatrix<f64>,
    /// `Pi^0_{l-2} Laplacian`.
    pub lap0: DMatrix<f64>,
    /// `Pi^0_{l-2}` of the Hessian, blocks `[xx; xy; yy]`.
    pub hess0: DMatrix<f64>,
    pub moments: DMatrix<f64>,
    pub dof_matrix: DMatrix<f64>,
    pub boundary: Vec<Vec<PhaseTracePoint>>,
}

impl PhaseElement {
    pub fn new(frame: CellFrame, l: usize) -> Result<Self> {
        if l < 2 {
            return Err(VemError::Unsupported("phase degree must be at least 2".into()));
        }
        let lhat = l.max(3);
        let nv = frame.num_vertices();
        let n_h2 = l - 2;
        let n_h3 = lhat - 3;
        let d4_offset = 3 * nv + nv * (n_h2 + n_h3);
        let ndof = d4_offset + dim(l as i32 - 4);
        let nodes_h2 = gauss_lobatto(l - 1);
        let nodes_h3 = gauss_lobatto(lhat - 2);
        let np = lhat + 1;
        let mut v = DMatrix::zeros(np, np);
        for j in 0..np {
            v[(0, j)] = if j == 0 { 1.0 } else { 0.0 };
            v[(1, j)] = 1.0;
            v[(2, j)] = if j == 1 { 1.0 } else { 0.0 };
            v[(3, j)] = j as f64;
            for i in 0..n_h3 {
                v[(4 + i, j)] = nodes_h3[i + 1].powi(j as i32);
            }
        }
        let hermite =
            v.try_inverse().ok_or(VemError::SingularProjector { cell: frame.cell, what: "edge Hermite basis" })?;
        let quad = polygon_rule(&frame.vertices, &frame.centroid, 2 * l + 2)
            .map_err(|e| VemError::DegenerateCell { cell: frame.cell, msg: e.to_string() })?;
        let mut el = Self {
            l,
            lhat,
            ndof,
            n_h2,
            n_h3,
            d4_offset,
            nodes_h2,
            nodes_h3,
            hermite,
            quad,
            mass: DMatrix::zeros(0, 0),
            proj_d: DMatrix::zeros(0, 0),
            pi0: DMatrix::zeros(0, 0),
            grad0: DMatrix::zeros(0, 0),
            lap0: DMatrix::zeros(0, 0),
            hess0: DMatrix::zeros(0, 0),
            moments: DMatrix::zeros(0, 0),
            dof_matrix: DMatrix::zeros(0, 0),
            boundary: Vec::new(),
            frame,
        };
        el.build()?;
        Ok(el)
    }

    pub fn edge_offset(&self, e: usize) -> usize {
        3 * self.frame.num_vertices() + e * (self.n_h2 + self.n_h3)
    }

    /// Value, tangential slope `d/ds` and normal derivative of the trace at
    /// parameter `s` of local edge `e`, each as a row over the DoFs.
    pub fn trace_at(&self, e: usize, s: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let ed = &self.frame.edges[e];
        let np = self.lhat + 1;
        let mut pw = vec![0.0; np];
        let mut dpw = vec![0.0; np];
        for j in 0..np {
            pw[j] = s.powi(j as i32);
            dpw[j] = if j > 0 { j as f64 * s.powi(j as i32 - 1) } else { 0.0 };
        }
        let basis: Vec<f64> = (0..np).map(|c| (0..np).map(|j| self.hermite[(j, c)] * pw[j]).sum()).collect();
        let dbasis: Vec<f64> = (0..np).map(|c| (0..np).map(|j| self.hermite[(j, c)] * dpw[j]).sum()).collect();
        let (a, b) = (ed.start_local, ed.end_local);
        let (ha, hb) = (self.frame.vertex_h[a], self.frame.vertex_h[b]);
        let t = ed.tangent;
        let n = ed.normal;
        let off = self.edge_offset(e);
        let mut value = DMatrix::zeros(1, self.ndof);
        let mut slope = DMatrix::zeros(1, self.ndof);
        for (row, bs) in [(&mut value, &basis), (&mut slope, &dbasis)] {
            row[(0, 3 * a)] += bs[0];
            row[(0, 3 * b)] += bs[1];
            let sa = bs[2] * ed.length / ha;
            row[(0, 3 * a + 1)] += sa * t.x;
            row[(0, 3 * a + 2)] += sa * t.y;
            let sb = bs[3] * ed.length / hb;
            row[(0, 3 * b + 1)] += sb * t.x;
            row[(0, 3 * b + 2)] += sb * t.y;
            for i in 0..self.n_h3 {
                row[(0, off + self.n_h2 + i)] += bs[4 + i];
            }
        }
        let ln = lagrange_basis(&self.nodes_h2, s);
        let mut normal = DMatrix::zeros(1, self.ndof);
        normal[(0, 3 * a + 1)] += ln[0] * n.x / ha;
        normal[(0, 3 * a + 2)] += ln[0] * n.y / ha;
        let last = self.l - 1;
        normal[(0, 3 * b + 1)] += ln[last] * n.x / hb;
        normal[(0, 3 * b + 2)] += ln[last] * n.y / hb;
        for i in 0..self.n_h2 {
            normal[(0, off + i)] += ln[i + 1] / ed.length;
        }
        (value, slope, normal)
    }

    /// Interpolates `f(x) = (phi, grad phi)`; interior moments use the
    /// element quadrature.
    pub fn interpolate(&self, f: &dyn Fn(&Vec2) -> (f64, Vec2)) -> DVector<f64> {
        let fr = &self.frame;
        let mut d = DVector::zeros(self.ndof);
        for (i, v) in fr.vertices.iter().enumerate() {
            let (p, g) = f(v);
            let h = fr.vertex_h[i];
            d[3 * i] = p;
            d[3 * i + 1] = h * g.x;
            d[3 * i + 2] = h * g.y;
        }
        for (e, ed) in fr.edges.iter().enumerate() {
            let off = self.edge_offset(e);
            for i in 0..self.n_h2 {
                let (_, g) = f(&ed.point(self.nodes_h2[i + 1]));
                d[off + i] = ed.length * ed.normal.dot(&g);
            }
            for i in 0..self.n_h3 {
                d[off + self.n_h2 + i] = f(&ed.point(self.nodes_h3[i + 1])).0;
            }
        }
        let n4 = dim(self.l as i32 - 4);
        if n4 > 0 {
            for (x, w) in self.quad.points.iter().zip(&self.quad.weights) {
                let m = fr.mono.values(self.l as i32 - 4, x);
                let p = f(x).0;
                for a in 0..n4 {
                    d[self.d4_offset + a] += w * p * m[a] / fr.area;
                }
            }
        }
        d
    }

    fn build(&mut self) -> Result<()> {
        let l = self.l as i32;
        let fr = self.frame.clone();
        let mono = fr.mono;
        let cell = fr.cell;
        let dl = dim(l);
        let nd = self.ndof;

        let mut mass = DMatrix::zeros(dl, dl);
        let mut kmat = DMatrix::zeros(dl, dl);
        for (x, w) in self.quad.points.iter().zip(&self.quad.weights) {
            let m = DVector::from_vec(mono.values(l, x));
            mass += &m * m.transpose() * *w;
            let hs = mono.hessians(l, x);
            for a in 3..dl {
                for b in 0..dl {
                    kmat[(a, b)] += w * (hs[a][0] * hs[b][0] + 2.0 * hs[a][1] * hs[b][1] + hs[a][2] * hs[b][2]);
                }
            }
        }
        self.mass = mass;

        let ng = (self.lhat + self.l + 2) / 2 + 1;
        let (gs, gw) = gauss_legendre(ng);
        self.boundary = (0..fr.edges.len())
            .map(|e| {
                let ed = &fr.edges[e];
                gs.iter()
                    .zip(&gw)
                    .map(|(&s, &w)| {
                        let (value, slope, normal) = self.trace_at(e, s);
                        let mut grad = DMatrix::zeros(2, nd);
                        for c in 0..2 {
                            let row = &slope * (ed.tangent[c] / ed.length) + &normal * ed.normal[c];
                            grad.row_mut(c).copy_from(&row);
                        }
                        PhaseTracePoint { x: ed.point(s), w: w * ed.length, n: ed.outward_normal(), value, grad }
                    })
                    .collect()
            })
            .collect();

        // rows of (phi, p) for p in P_{l-4}, from the interior DoFs
        let low = |coef: &[f64]| -> DMatrix<f64> {
            let mut row = DMatrix::zeros(1, nd);
            for (a, c) in coef.iter().enumerate().take(dim(l - 4)) {
                row[(0, self.d4_offset + a)] += c * fr.area;
            }
            row
        };

        let lap = laplacian_matrix(l, fr.h);
        let bilap = laplacian_matrix(l - 2, fr.h) * &lap;
        let mut rhs = DMatrix::zeros(dl, nd);
        for a in 3..dl {
            let c: Vec<f64> = (0..dim(l - 4)).map(|i| bilap[(i, a)]).collect();
            rhs.row_mut(a).copy_from(&low(&c));
        }
        for tp in self.boundary.iter().flatten() {
            let m = mono.values(l, &tp.x);
            let g = mono.gradients(l, &tp.x);
            let hs = mono.hessians(l, &tp.x);
            let gl = mono.gradients(l - 2, &tp.x);
            for b in 0..dl {
                kmat[(0, b)] += tp.w * m[b];
                kmat[(1, b)] += tp.w * g[b][0];
                kmat[(2, b)] += tp.w * g[b][1];
            }
            add_row(&mut rhs, 0, tp.w, &tp.value);
            add_row(&mut rhs, 1, tp.w, &tp.grad.row(0));
            add_row(&mut rhs, 2, tp.w, &tp.grad.row(1));
            for a in 3..dl {
                // d_n of Laplacian of m_a
                let mut dnl = 0.0;
                for i in 0..dim(l - 2) {
                    dnl += lap[(i, a)] * (gl[i][0] * tp.n.x + gl[i][1] * tp.n.y);
                }
                let hn = [hs[a][0] * tp.n.x + hs[a][1] * tp.n.y, hs[a][1] * tp.n.x + hs[a][2] * tp.n.y];
                add_row(&mut rhs, a, -tp.w * dnl, &tp.value);
                add_row(&mut rhs, a, tp.w * hn[0], &tp.grad.row(0));
                add_row(&mut rhs, a, tp.w * hn[1], &tp.grad.row(1));
            }
        }
        self.proj_d = solve(&kmat, &rhs).ok_or(VemError::SingularProjector { cell, what: "phase H2 projection" })?;

        let n_low = dim(l - 4);
        let mut moments = DMatrix::zeros(dl, nd);
        for a in 0..dl {
            if a < n_low {
                moments[(a, self.d4_offset + a)] = fr.area;
            } else {
                let row = self.mass.row(a) * &self.proj_d;
                moments.row_mut(a).copy_from(&row);
            }
        }
        // Pi0 = Pi^D + H^-1 (M - H Pi^D); the correction only involves the low moments
        let defect = &moments - &self.mass * &self.proj_d;
        let corr =
            solve(&self.mass, &defect).ok_or(VemError::SingularProjector { cell, what: "phase L2 projection" })?;
        self.pi0 = &self.proj_d + corr;

        let d1 = dim(l - 1);
        let d2 = dim(l - 2);
        let h1 = self.mass.view((0, 0), (d1, d1)).into_owned();
        let h2 = self.mass.view((0, 0), (d2, d2)).into_owned();
        // (phi, q) for q given by coefficients in P_l
        let inner = |coef: &DVector<f64>| -> DMatrix<f64> {
            let mut row = DMatrix::zeros(1, nd);
            for (i, c) in coef.iter().enumerate() {
                if *c != 0.0 {
                    row += moments.row(i) * *c;
                }
            }
            row
        };
        let pad = |v: DVector<f64>| -> DVector<f64> {
            let mut out = DVector::zeros(dl);
            out.rows_mut(0, v.len()).copy_from(&v);
            out
        };
        let ders = [derivative_matrix(l - 1, 0, fr.h), derivative_matrix(l - 1, 1, fr.h)];

        let mut grad0 = DMatrix::zeros(2 * d1, nd);
        for c in 0..2 {
            let mut rhs = DMatrix::zeros(d1, nd);
            for a in 0..d1 {
                let q = pad(ders[c].column(a).into_owned());
                rhs.row_mut(a).copy_from(&(-inner(&q)));
            }
            for tp in self.boundary.iter().flatten() {
                let m = mono.values(l - 1, &tp.x);
                for a in 0..d1 {
                    add_row(&mut rhs, a, tp.w * m[a] * tp.n[c], &tp.value);
                }
            }
            let sol =
                solve(&h1, &rhs).ok_or(VemError::SingularProjector { cell, what: "phase gradient projection" })?;
            grad0.view_mut((c * d1, 0), (d1, nd)).copy_from(&sol);
        }
        self.grad0 = grad0;

        let lap2 = laplacian_matrix(l - 2, fr.h);
        let second = |c: usize, d: usize| -> DMatrix<f64> {
            let first = derivative_matrix(l - 2, c, fr.h);
            derivative_matrix(l - 3, d, fr.h) * first
        };
        let mut rhs_lap = DMatrix::zeros(d2, nd);
        let mut rhs_hess = [DMatrix::zeros(d2, nd), DMatrix::zeros(d2, nd), DMatrix::zeros(d2, nd)];
        let pairs = [(0usize, 0usize), (0, 1), (1, 1)];
        for a in 0..d2 {
            rhs_lap.row_mut(a).copy_from(&inner(&pad(lap2.column(a).into_owned())));
            for (p, &(c, d)) in pairs.iter().enumerate() {
                rhs_hess[p].row_mut(a).copy_from(&inner(&pad(second(c, d).column(a).into_owned())));
            }
        }
        for tp in self.boundary.iter().flatten() {
            let m = mono.values(l - 2, &tp.x);
            let g = mono.gradients(l - 2, &tp.x);
            let dn_phi = tp.grad.row(0) * tp.n.x + tp.grad.row(1) * tp.n.y;
            for a in 0..d2 {
                let dnm = g[a][0] * tp.n.x + g[a][1] * tp.n.y;
                add_row(&mut rhs_lap, a, -tp.w * dnm, &tp.value);
                add_row(&mut rhs_lap, a, tp.w * m[a], &dn_phi);
                for (p, &(c, d)) in pairs.iter().enumerate() {
                    add_row(&mut rhs_hess[p], a, -tp.w * g[a][c] * tp.n[d], &tp.value);
                    add_row(&mut rhs_hess[p], a, tp.w * m[a] * tp.n[c], &tp.grad.row(d));
                }
            }
        }
        self.lap0 =
            solve(&h2, &rhs_lap).ok_or(VemError::SingularProjector { cell, what: "phase Laplacian projection" })?;
        let mut hess0 = DMatrix::zeros(3 * d2, nd);
        for p in 0..3 {
            let sol = solve(&h2, &rhs_hess[p])
                .ok_or(VemError::SingularProjector { cell, what: "phase Hessian projection" })?;
            hess0.view_mut((p * d2, 0), (d2, nd)).copy_from(&sol);
        }
        self.hess0 = hess0;
        self.moments = moments;

        let mut dm = DMatrix::zeros(nd, dl);
        for a in 0..dl {
            let col = self.interpolate(&|x: &Vec2| {
                let g = mono.gradients(l, x)[a];
                (mono.values(l, x)[a], Vec2::new(g[0], g[1]))
            });
            dm.column_mut(a).copy_from(&col);
        }
        self.dof_matrix = dm;
        Ok(())
    }

    pub fn pi0_row_at(&self, x: &Vec2) -> RowDVector<f64> {
        let m = DVector::from_vec(self.frame.mono.values(self.l as i32, x));
        m.transpose() * &self.pi0
    }
}
