//! Shape-regularity checks: star-shapedness with respect to a ball and
//! edge lengths relative to the cell diameter.

use super::PolygonalMesh;
use crate::polyops::{polygon_diameter, signed_area, Vec2};
use nalgebra::{Matrix3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellReport {
    pub star_shaped: bool,
    pub edges_ok: bool,
    /// Radius of the largest ball inside the kernel.
    pub kernel_inradius: f64,
    pub min_edge: f64,
    pub diameter: f64,
}

impl CellReport {
    pub fn passed(&self) -> bool {
        self.star_shaped && self.edges_ok
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub rho: f64,
    pub cells: Vec<CellReport>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failing_cells(&self) -> Vec<usize> {
        self.cells.iter().enumerate().filter(|(_, c)| !c.passed()).map(|(i, _)| i).collect()
    }
}

/// Kernel of a counter-clockwise polygon: the set of points from which the
/// whole polygon is visible. Empty when the polygon is not star-shaped.
pub fn kernel_polygon(v: &[Vec2]) -> Vec<Vec2> {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in v {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let mut k = vec![Vec2::new(xmin, ymin), Vec2::new(xmax, ymin), Vec2::new(xmax, ymax), Vec2::new(xmin, ymax)];
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let t = b - a;
        // inside is the left of a -> b
        let normal = Vec2::new(t.y, -t.x);
        let offset = normal.dot(&a);
        let mut out = Vec::with_capacity(k.len() + 1);
        for j in 0..k.len() {
            let p = k[j];
            let q = k[(j + 1) % k.len()];
            let dp = normal.dot(&p) - offset;
            let dq = normal.dot(&q) - offset;
            if dp <= 0.0 {
                out.push(p);
            }
            if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
                out.push(p + (q - p) * (dp / (dp - dq)));
            }
        }
        k = out;
        if k.len() < 3 {
            return Vec::new();
        }
    }
    k
}

/// Chebyshev radius of a convex counter-clockwise polygon.
fn chebyshev_radius(k: &[Vec2]) -> f64 {
    let n = k.len();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let t = k[(i + 1) % n] - k[i];
        let len = t.norm();
        if len < 1e-300 {
            continue;
        }
        let nrm = Vec2::new(t.y, -t.x) / len;
        rows.push((nrm, nrm.dot(&k[i])));
    }
    let scale = polygon_diameter(k).max(1e-300);
    let mut best: f64 = 0.0;
    let m = rows.len();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let sys = Matrix3::new(
                    rows[a].0.x,
                    rows[a].0.y,
                    1.0,
                    rows[b].0.x,
                    rows[b].0.y,
                    1.0,
                    rows[c].0.x,
                    rows[c].0.y,
                    1.0,
                );
                let Some(sol) = sys.lu().solve(&Vector3::new(rows[a].1, rows[b].1, rows[c].1)) else {
                    continue;
                };
                let (x, r) = (Vec2::new(sol[0], sol[1]), sol[2]);
                if !r.is_finite() || r <= best {
                    continue;
                }
                if rows.iter().all(|(nrm, off)| nrm.dot(&x) + r <= off + 1e-12 * scale) {
                    best = r;
                }
            }
        }
    }
    best
}

pub fn validate_polygon(v: &[Vec2], rho: f64) -> CellReport {
    let diameter = polygon_diameter(v);
    let n = v.len();
    let min_edge = (0..n).map(|i| (v[(i + 1) % n] - v[i]).norm()).fold(f64::INFINITY, f64::min);
    let kernel = if signed_area(v) > 0.0 { kernel_polygon(v) } else { Vec::new() };
    let kernel_inradius = if kernel.len() >= 3 { chebyshev_radius(&kernel) } else { 0.0 };
    CellReport {
        star_shaped: kernel_inradius >= rho * diameter,
        edges_ok: min_edge >= rho * diameter,
        kernel_inradius,
        min_edge,
        diameter,
    }
}

pub fn validate_mesh(mesh: &PolygonalMesh, rho: f64) -> ValidationReport {
    let cells: Vec<CellReport> = (0..mesh.num_cells()).map(|c| validate_polygon(&mesh.cell_vertices(c), rho)).collect();
    let passed = rho > 0.0 && rho < 1.0 && cells.iter().all(|c| c.passed());
    ValidationReport { rho, cells, passed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pts(p: &[(f64, f64)]) -> Vec<Vec2> {
        p.iter().map(|&(x, y)| Vec2::new(x, y)).collect()
    }

    #[test]
    fn unit_square_inradius() {
        let r = validate_polygon(&pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]), 0.3);
        assert_relative_eq!(r.kernel_inradius, 0.5, epsilon = 1e-14);
        assert_relative_eq!(r.kernel_inradius / r.diameter, 1.0 / (2.0 * 2f64.sqrt()), epsilon = 1e-14);
        assert!(r.passed());
    }

    #[test]
    fn sliver_fails_edge_condition() {
        let r = validate_polygon(&pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.01)]), 0.05);
        assert!(!r.edges_ok);
    }

    #[test]
    fn kernels_of_nonconvex_cells() {
        let comb =
            pts(&[(0.0, 0.0), (3.0, 0.0), (3.0, 3.0), (2.0, 3.0), (2.0, 1.0), (1.0, 1.0), (1.0, 3.0), (0.0, 3.0)]);
        assert!(kernel_polygon(&comb).is_empty());
        assert!(!validate_polygon(&comb, 0.01).star_shaped);
        // an L-shape sees everything from its corner square
        let l = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]);
        assert_relative_eq!(signed_area(&kernel_polygon(&l)), 1.0, epsilon = 1e-12);
        assert_relative_eq!(validate_polygon(&l, 0.1).kernel_inradius, 0.5, epsilon = 1e-12);
    }
}
