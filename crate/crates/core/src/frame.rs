//! Local geometry of one cell as seen by the element constructions.

use crate::mesh::PolygonalMesh;
use crate::polyops::{polygon_centroid, polygon_diameter, signed_area, ScaledMonomials, Vec2};

/// A cell edge described in its global orientation, running from `start`
/// to `end`.
#[derive(Debug, Clone)]
pub struct EdgeFrame {
    pub global: usize,
    pub start: Vec2,
    pub end: Vec2,
    /// Local vertex indices of `start` and `end`.
    pub start_local: usize,
    pub end_local: usize,
    pub length: f64,
    pub tangent: Vec2,
    /// Global edge normal, to the right of `tangent`.
    pub normal: Vec2,
    /// `+1` when `normal` points out of the cell.
    pub sign: f64,
    pub on_boundary: bool,
}

impl EdgeFrame {
    pub fn point(&self, s: f64) -> Vec2 {
        self.start + (self.end - self.start) * s
    }

    pub fn outward_normal(&self) -> Vec2 {
        self.normal * self.sign
    }
}

#[derive(Debug, Clone)]
pub struct CellFrame {
    pub cell: usize,
    pub vertices: Vec<Vec2>,
    pub vertex_ids: Vec<usize>,
    pub vertex_h: Vec<f64>,
    pub edges: Vec<EdgeFrame>,
    pub area: f64,
    pub centroid: Vec2,
    pub h: f64,
    pub mono: ScaledMonomials,
}

impl CellFrame {
    pub fn from_mesh(mesh: &PolygonalMesh, c: usize) -> Self {
        let ids = mesh.cells()[c].clone();
        let vertices = mesh.cell_vertices(c);
        let g = mesh.geometry(c);
        let n = ids.len();
        let edges = (0..n)
            .map(|i| {
                let ge = mesh.cell_edges(c)[i];
                let flipped = mesh.edge_flipped(c, i);
                let (sl, el) = if flipped { ((i + 1) % n, i) } else { (i, (i + 1) % n) };
                Self::edge(ge, &vertices, sl, el, if flipped { -1.0 } else { 1.0 }, mesh.is_boundary_edge(ge))
            })
            .collect();
        Self {
            cell: c,
            vertex_h: ids.iter().map(|&v| mesh.vertex_h(v)).collect(),
            vertex_ids: ids,
            vertices,
            edges,
            area: g.area,
            centroid: g.centroid,
            h: g.diameter,
            mono: ScaledMonomials::new(g.centroid, g.diameter),
        }
    }

    /// Stand-alone polygon with every edge in local orientation and vertex
    /// scales equal to the diameter.
    pub fn from_polygon(vertices: Vec<Vec2>) -> Self {
        let n = vertices.len();
        let h = polygon_diameter(&vertices);
        let centroid = polygon_centroid(&vertices);
        let edges = (0..n).map(|i| Self::edge(i, &vertices, i, (i + 1) % n, 1.0, true)).collect();
        Self {
            cell: 0,
            vertex_ids: (0..n).collect(),
            vertex_h: vec![h; n],
            area: signed_area(&vertices),
            vertices,
            edges,
            centroid,
            h,
            mono: ScaledMonomials::new(centroid, h),
        }
    }

    fn edge(global: usize, v: &[Vec2], sl: usize, el: usize, sign: f64, on_boundary: bool) -> EdgeFrame {
        let (start, end) = (v[sl], v[el]);
        let length = (end - start).norm();
        let tangent = (end - start) / length;
        EdgeFrame {
            global,
            start,
            end,
            start_local: sl,
            end_local: el,
            length,
            tangent,
            normal: Vec2::new(tangent.y, -tangent.x),
            sign,
            on_boundary,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
}
