//! Enhanced divergence-free virtual element of degree `k` on one cell.
//!
//! Local degrees of freedom, in order:
//! * both components at every vertex,
//! * per edge (global orientation), normal values at the `khat - 1`
//!   interior Gauss-Lobatto nodes, then tangential values at the `k - 1`
//!   interior nodes, where `khat = max(k, 2)`,
//! * `|E|^-1 (v . m_perp, m_b)` for `|b| <= k - 3`,
//! * `h_E^-1 (div v, m_a)` for `0 < |a| <= k - 1`.
//!
//! Every projector is a dense matrix acting on the local DoF vector and
//! returning stacked scaled-monomial coefficients.

use crate::error::{Result, VemError};
use crate::frame::CellFrame;
use crate::linalg::{add_row, solve};
use crate::polyops::monomial::{derivative_matrix, exponent_of, laplacian_matrix};
use crate::polyops::{
    dim, gauss_legendre, gauss_lobatto, index, lagrange_basis, polygon_rule, QuadratureRule, Vec2, VectorDecomposition,
};
use nalgebra::{DMatrix, DVector, Matrix2};

/// Edge quadrature point with the trace of every basis function.
#[derive(Debug, Clone)]
pub struct TracePoint {
    pub x: Vec2,
    pub w: f64,
    /// Outward normal of the cell.
    pub n: Vec2,
    /// Rows `[v_x; v_y]` of the trace as a function of the local DoFs.
    pub trace: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct VelocityElement {
    pub k: usize,
    pub khat: usize,
    pub frame: CellFrame,
    pub ndof: usize,
    pub n_normal: usize,
    pub n_tangential: usize,
    pub d3_offset: usize,
    pub d4_offset: usize,
    pub nodes_normal: Vec<f64>,
    pub nodes_tangential: Vec<f64>,
    pub quad: QuadratureRule,
    /// Scaled-monomial mass matrix up to degree `k + 1`.
    pub mass: DMatrix<f64>,
    /// `B_E`: rows `(m_a, div v)` for `|a| <= k - 1`.
    pub div_moments: DMatrix<f64>,
    /// Coefficients of the polynomial divergence in `P_{k-1}`.
    pub iota: DMatrix<f64>,
    /// `Pi^nabla_k`, stacked `[x; y]`.
    pub pi_nabla: DMatrix<f64>,
    /// `Pi^0_k`, stacked `[x; y]`.
    pub pi0: DMatrix<f64>,
    /// `Pi^0_{k-1} grad`, blocks `[dx vx; dy vx; dx vy; dy vy]`.
    pub grad0: DMatrix<f64>,
    /// `(v, p)` for `p` in `[P_k]^2`, stacked `[x; y]`.
    pub moments: DMatrix<f64>,
    /// DoFs of the scaled monomial basis of `[P_k]^2`.
    pub dof_matrix: DMatrix<f64>,
    pub boundary: Vec<Vec<TracePoint>>,
}

impl VelocityElement {
    pub fn new(frame: CellFrame, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(VemError::Unsupported("velocity degree must be at least 1".into()));
        }
        let khat = k.max(2);
        let nv = frame.num_vertices();
        let n_normal = khat - 1;
        let n_tangential = k - 1;
        let d3_offset = 2 * nv + nv * (n_normal + n_tangential);
        let d4_offset = d3_offset + dim(k as i32 - 3);
        let ndof = d4_offset + dim(k as i32 - 1) - 1;
        let quad = polygon_rule(&frame.vertices, &frame.centroid, 2 * k + 2)
            .map_err(|e| VemError::DegenerateCell { cell: frame.cell, msg: e.to_string() })?;
        let mut el = Self {
            k,
            khat,
            ndof,
            n_normal,
            n_tangential,
            d3_offset,
            d4_offset,
            nodes_normal: gauss_lobatto(khat),
            nodes_tangential: gauss_lobatto(k),
            quad,
            mass: DMatrix::zeros(0, 0),
            div_moments: DMatrix::zeros(0, 0),
            iota: DMatrix::zeros(0, 0),
            pi_nabla: DMatrix::zeros(0, 0),
            pi0: DMatrix::zeros(0, 0),
            grad0: DMatrix::zeros(0, 0),
            moments: DMatrix::zeros(0, 0),
            dof_matrix: DMatrix::zeros(0, 0),
            boundary: Vec::new(),
            frame,
        };
        el.build()?;
        Ok(el)
    }

    pub fn edge_offset(&self, local_edge: usize) -> usize {
        2 * self.frame.num_vertices() + local_edge * (self.n_normal + self.n_tangential)
    }

    /// Trace rows `[v_x; v_y]` at parameter `s` of local edge `e`.
    pub fn trace_at(&self, e: usize, s: f64) -> DMatrix<f64> {
        let ed = &self.frame.edges[e];
        let (n, t) = (ed.normal, ed.tangent);
        let ln = lagrange_basis(&self.nodes_normal, s);
        let lt = lagrange_basis(&self.nodes_tangential, s);
        let nn = n * n.transpose();
        let tt = t * t.transpose();
        let mut out = DMatrix::zeros(2, self.ndof);
        let mut vertex = |local: usize, m: Matrix2<f64>| {
            for r in 0..2 {
                for c in 0..2 {
                    out[(r, 2 * local + c)] += m[(r, c)];
                }
            }
        };
        vertex(ed.start_local, nn * ln[0] + tt * lt[0]);
        vertex(ed.end_local, nn * ln[self.khat] + tt * lt[self.k]);
        let off = self.edge_offset(e);
        for j in 0..self.n_normal {
            out[(0, off + j)] += ln[j + 1] * n.x;
            out[(1, off + j)] += ln[j + 1] * n.y;
        }
        for j in 0..self.n_tangential {
            out[(0, off + self.n_normal + j)] += lt[j + 1] * t.x;
            out[(1, off + self.n_normal + j)] += lt[j + 1] * t.y;
        }
        out
    }

    /// Interpolates a vector field. Interior moments use the element
    /// quadrature, so they are exact for polynomial fields only.
    pub fn interpolate(&self, f: &dyn Fn(&Vec2) -> Vec2) -> DVector<f64> {
        let fr = &self.frame;
        let mut d = DVector::zeros(self.ndof);
        for (i, v) in fr.vertices.iter().enumerate() {
            let val = f(v);
            d[2 * i] = val.x;
            d[2 * i + 1] = val.y;
        }
        for (e, ed) in fr.edges.iter().enumerate() {
            let off = self.edge_offset(e);
            for j in 0..self.n_normal {
                d[off + j] = ed.normal.dot(&f(&ed.point(self.nodes_normal[j + 1])));
            }
            for j in 0..self.n_tangential {
                d[off + self.n_normal + j] = ed.tangent.dot(&f(&ed.point(self.nodes_tangential[j + 1])));
            }
        }
        let k = self.k as i32;
        let mono = &fr.mono;
        let n3 = dim(k - 3);
        let n4 = dim(k - 1);
        for (x, w) in self.quad.points.iter().zip(&self.quad.weights) {
            let fx = f(x);
            if n3 > 0 {
                let m = mono.values(k - 2, x);
                for j in 0..n3 {
                    let (a, b) = exponent_of(j);
                    let perp = Vec2::new(m[index(a, b + 1)], -m[index(a + 1, b)]);
                    d[self.d3_offset + j] += w * fx.dot(&perp) / fr.area;
                }
            }
            let g = mono.gradients(k - 1, x);
            for a in 1..n4 {
                d[self.d4_offset + a - 1] -= w * (fx.x * g[a][0] + fx.y * g[a][1]) / fr.h;
            }
        }
        for pts in &self.boundary {
            for tp in pts {
                let fx = f(&tp.x);
                let m = mono.values(k - 1, &tp.x);
                for a in 1..n4 {
                    d[self.d4_offset + a - 1] += tp.w * fx.dot(&tp.n) * m[a] / fr.h;
                }
            }
        }
        d
    }

    fn build(&mut self) -> Result<()> {
        let k = self.k as i32;
        let fr = self.frame.clone();
        let mono = fr.mono;
        let cell = fr.cell;
        let (dk, dk1, dkm1) = (dim(k), dim(k + 1), dim(k - 1));

        let mut mass = DMatrix::zeros(dk1, dk1);
        for (x, w) in self.quad.points.iter().zip(&self.quad.weights) {
            let m = DVector::from_vec(mono.values(k + 1, x));
            mass += &m * m.transpose() * *w;
        }
        self.mass = mass;

        let ng = (self.khat + self.k + 3) / 2 + 1;
        let (gs, gw) = gauss_legendre(ng);
        self.boundary = (0..fr.edges.len())
            .map(|e| {
                let ed = &fr.edges[e];
                gs.iter()
                    .zip(&gw)
                    .map(|(&s, &w)| TracePoint {
                        x: ed.point(s),
                        w: w * ed.length,
                        n: ed.outward_normal(),
                        trace: self.trace_at(e, s),
                    })
                    .collect()
            })
            .collect();

        // boundary rows: flux[a] = oint v.n m_a, comp[c][a] = oint v_c m_a,
        // dn[c][a] = oint v_c dn m_a
        let mut flux = DMatrix::zeros(dk1, self.ndof);
        let mut comp = [DMatrix::zeros(dk1, self.ndof), DMatrix::zeros(dk1, self.ndof)];
        let mut dn = [DMatrix::zeros(dk, self.ndof), DMatrix::zeros(dk, self.ndof)];
        for tp in self.boundary.iter().flatten() {
            let m = mono.values(k + 1, &tp.x);
            let g = mono.gradients(k, &tp.x);
            let vn = tp.trace.row(0) * tp.n.x + tp.trace.row(1) * tp.n.y;
            for a in 0..dk1 {
                add_row(&mut flux, a, tp.w * m[a], &vn);
                for c in 0..2 {
                    add_row(&mut comp[c], a, tp.w * m[a], &tp.trace.row(c));
                }
            }
            for a in 0..dk {
                let dnm = g[a][0] * tp.n.x + g[a][1] * tp.n.y;
                for c in 0..2 {
                    add_row(&mut dn[c], a, tp.w * dnm, &tp.trace.row(c));
                }
            }
        }

        let mut r = DMatrix::zeros(dkm1, self.ndof);
        r.row_mut(0).copy_from(&flux.row(0));
        for a in 1..dkm1 {
            r[(a, self.d4_offset + a - 1)] = fr.h;
        }
        let hkm1 = self.mass.view((0, 0), (dkm1, dkm1)).into_owned();
        self.iota = solve(&hkm1, &r).ok_or(VemError::SingularProjector { cell, what: "divergence projection" })?;
        self.div_moments = r;

        // (v, grad m_a) for |a| <= k + 1
        let grad_mom = -self.mass.view((0, 0), (dk1, dkm1)) * &self.iota + &flux;

        let low_moment = |p: &DVector<f64>, n: i32| -> DMatrix<f64> {
            let mut row = DMatrix::zeros(1, self.ndof);
            if n < 0 {
                return row;
            }
            let dec = VectorDecomposition::new(n);
            let (g, q) = dec.split(p);
            for i in 0..g.len() {
                row += grad_mom.row(dec.grad_monomial(i)) * (g[i] * fr.h);
            }
            for j in 0..q.len() {
                row[(0, self.d3_offset + j)] += q[j] * fr.area;
            }
            row
        };

        // Pi^nabla per component
        let mut kmat = DMatrix::zeros(dk, dk);
        for (x, w) in self.quad.points.iter().zip(&self.quad.weights) {
            let g = mono.gradients(k, x);
            for a in 1..dk {
                for b in 0..dk {
                    kmat[(a, b)] += w * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
        // row 0: oint m_b
        for tp in self.boundary.iter().flatten() {
            let m = mono.values(k, &tp.x);
            for b in 0..dk {
                kmat[(0, b)] += tp.w * m[b];
            }
        }
        let lap = laplacian_matrix(k, fr.h);
        let mut pi_nabla = DMatrix::zeros(2 * dk, self.ndof);
        for c in 0..2 {
            let mut rhs = DMatrix::zeros(dk, self.ndof);
            rhs.row_mut(0).copy_from(&comp[c].row(0));
            for a in 1..dk {
                let dl = dim(k - 2);
                let mut p = DVector::zeros(2 * dl);
                for i in 0..dl {
                    p[c * dl + i] = lap[(i, a)];
                }
                let row = -low_moment(&p, k - 2) + dn[c].row(a);
                rhs.row_mut(a).copy_from(&row);
            }
            let sol = solve(&kmat, &rhs).ok_or(VemError::SingularProjector { cell, what: "velocity H1 projection" })?;
            pi_nabla.view_mut((c * dk, 0), (dk, self.ndof)).copy_from(&sol);
        }
        self.pi_nabla = pi_nabla;

        // full moments against [P_k]^2
        let dec = VectorDecomposition::new(k);
        let n_low = dim(k - 3);
        let mut moments = DMatrix::zeros(2 * dk, self.ndof);
        for c in 0..2 {
            for a in 0..dk {
                let mut p = DVector::zeros(2 * dk);
                p[c * dk + a] = 1.0;
                let (g, q) = dec.split(&p);
                let mut row = DMatrix::zeros(1, self.ndof);
                for i in 0..g.len() {
                    if g[i] != 0.0 {
                        row += grad_mom.row(dec.grad_monomial(i)) * (g[i] * fr.h);
                    }
                }
                for j in 0..q.len() {
                    if q[j] == 0.0 {
                        continue;
                    }
                    if j < n_low {
                        row[(0, self.d3_offset + j)] += q[j] * fr.area;
                    } else {
                        let (bx, by) = exponent_of(j);
                        let (ix, iy) = (index(bx, by + 1), index(bx + 1, by));
                        for g2 in 0..dk {
                            let wx = self.mass[(g2, ix)];
                            let wy = -self.mass[(g2, iy)];
                            row += (self.pi_nabla.row(g2) * wx + self.pi_nabla.row(dk + g2) * wy) * q[j];
                        }
                    }
                }
                moments.row_mut(c * dk + a).copy_from(&row);
            }
        }
        let hk = self.mass.view((0, 0), (dk, dk)).into_owned();
        let mut pi0 = DMatrix::zeros(2 * dk, self.ndof);
        for c in 0..2 {
            let sol = solve(&hk, &moments.rows(c * dk, dk).into_owned())
                .ok_or(VemError::SingularProjector { cell, what: "velocity L2 projection" })?;
            pi0.view_mut((c * dk, 0), (dk, self.ndof)).copy_from(&sol);
        }
        self.pi0 = pi0;

        // Pi^0_{k-1} of the gradient
        let mut grad0 = DMatrix::zeros(4 * dkm1, self.ndof);
        for c in 0..2 {
            for d in 0..2 {
                let der = derivative_matrix(k - 1, d, fr.h);
                let mut rhs = DMatrix::zeros(dkm1, self.ndof);
                for a in 0..dkm1 {
                    let mut row = DMatrix::zeros(1, self.ndof);
                    for i in 0..dim(k - 2) {
                        if der[(i, a)] != 0.0 {
                            row -= moments.row(c * dk + i) * der[(i, a)];
                        }
                    }
                    rhs.row_mut(a).copy_from(&row);
                }
                for tp in self.boundary.iter().flatten() {
                    let m = mono.values(k - 1, &tp.x);
                    for a in 0..dkm1 {
                        add_row(&mut rhs, a, tp.w * m[a] * tp.n[d], &tp.trace.row(c));
                    }
                }
                let sol = solve(&hkm1, &rhs)
                    .ok_or(VemError::SingularProjector { cell, what: "velocity gradient projection" })?;
                grad0.view_mut(((2 * c + d) * dkm1, 0), (dkm1, self.ndof)).copy_from(&sol);
            }
        }
        self.grad0 = grad0;
        self.moments = moments;

        let mut dm = DMatrix::zeros(self.ndof, 2 * dk);
        for c in 0..2 {
            for a in 0..dk {
                let col = self.interpolate(&|x: &Vec2| {
                    let v = mono.values(k, x)[a];
                    if c == 0 {
                        Vec2::new(v, 0.0)
                    } else {
                        Vec2::new(0.0, v)
                    }
                });
                dm.column_mut(c * dk + a).copy_from(&col);
            }
        }
        self.dof_matrix = dm;
        Ok(())
    }

    /// `Pi^0_k v` evaluated at `x`, as rows `[v_x; v_y]` over the DoFs.
    pub fn pi0_rows_at(&self, x: &Vec2) -> DMatrix<f64> {
        let dk = dim(self.k as i32);
        let m = DVector::from_vec(self.frame.mono.values(self.k as i32, x));
        let mut out = DMatrix::zeros(2, self.ndof);
        for c in 0..2 {
            out.row_mut(c).copy_from(&(m.transpose() * self.pi0.rows(c * dk, dk)));
        }
        out
    }

    pub fn mass_k(&self) -> DMatrix<f64> {
        let dk = dim(self.k as i32);
        self.mass.view((0, 0), (dk, dk)).into_owned()
    }

    pub fn mass_km1(&self) -> DMatrix<f64> {
        let d = dim(self.k as i32 - 1);
        self.mass.view((0, 0), (d, d)).into_owned()
    }
}
