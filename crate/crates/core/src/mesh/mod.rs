//! Polygonal meshes of a rectangle: connectivity, geometry, generators,
//! regularity checks and a plain-text file format.

mod generate;
mod io;
mod validate;
mod voronoi;

pub use generate::{generate_mesh, MeshFamily};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};
pub use validate::{kernel_polygon, validate_mesh, validate_polygon, CellReport, ValidationReport};
pub use voronoi::voronoi_mesh;

use crate::error::{Result, VemError};
use crate::polyops::{polygon_centroid, polygon_diameter, signed_area, Vec2};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Rect {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Self { xmin, xmax, ymin, ymax }
    }

    pub fn unit() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn is_valid(&self) -> bool {
        self.xmax > self.xmin && self.ymax > self.ymin && self.width().is_finite() && self.height().is_finite()
    }
}

/// Mesh edge. Interior edges satisfy `a < b` with `left` the cell on the left
/// of `a -> b`; boundary edges are oriented so that their only cell is on
/// the left, which makes `normal()` outward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub left: usize,
    pub right: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub area: f64,
    pub centroid: Vec2,
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct PolygonalMesh {
    vertices: Vec<Vec2>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<usize>>,
    vertex_boundary: Vec<bool>,
    geometry: Vec<CellGeometry>,
    vertex_h: Vec<f64>,
    domain: Rect,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl PolygonalMesh {
    /// Builds the mesh from vertex coordinates and counter-clockwise cells.
    pub fn from_cells(vertices: Vec<Vec2>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let edges = Self::build_edges(vertices.len(), &cells)?;
        Self::assemble(vertices, cells, edges)
    }

    /// Builds the mesh with an explicit edge list, which must agree with the
    /// connectivity implied by the cells.
    pub fn from_parts(vertices: Vec<Vec2>, cells: Vec<Vec<usize>>, edges: Vec<Edge>) -> Result<Self> {
        let mut derived = Self::build_edges(vertices.len(), &cells)?;
        let mut given = edges.clone();
        let key = |e: &Edge| (edge_key(e.a, e.b), e.a, e.left, e.right);
        derived.sort_by_key(key);
        given.sort_by_key(key);
        if derived != given {
            let first = given.iter().zip(&derived).position(|(g, d)| g != d).unwrap_or(0);
            return Err(VemError::InvalidMesh(format!(
                "edge list does not match cell connectivity (near edge {:?})",
                given.get(first)
            )));
        }
        Self::assemble(vertices, cells, edges)
    }

    fn build_edges(nv: usize, cells: &[Vec<usize>]) -> Result<Vec<Edge>> {
        let mut map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(VemError::InvalidMesh(format!("cell {c} has fewer than 3 vertices")));
            }
            for i in 0..cell.len() {
                let (a, b) = (cell[i], cell[(i + 1) % cell.len()]);
                if a >= nv || b >= nv {
                    return Err(VemError::InvalidMesh(format!("cell {c} references missing vertex")));
                }
                if a == b {
                    return Err(VemError::InvalidMesh(format!("cell {c} repeats vertex {a}")));
                }
                match map.get(&edge_key(a, b)) {
                    None => {
                        map.insert(edge_key(a, b), edges.len());
                        edges.push(Edge { a, b, left: c, right: None });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(VemError::InvalidMesh(format!("edge {a}-{b} shared by more than two cells")));
                        }
                        if edge.a != b || edge.b != a {
                            return Err(VemError::InvalidMesh(format!(
                                "cells {} and {c} traverse edge {a}-{b} in the same direction",
                                edge.left
                            )));
                        }
                        edge.right = Some(c);
                    }
                }
            }
        }
        for e in &mut edges {
            if let Some(r) = e.right {
                if e.a > e.b {
                    *e = Edge { a: e.b, b: e.a, left: r, right: Some(e.left) };
                }
            }
        }
        edges.sort_by_key(|e| edge_key(e.a, e.b));
        Ok(edges)
    }

    fn assemble(vertices: Vec<Vec2>, cells: Vec<Vec<usize>>, edges: Vec<Edge>) -> Result<Self> {
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(VemError::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let mut geometry = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let pts: Vec<Vec2> = cell.iter().map(|&i| vertices[i]).collect();
            let area = signed_area(&pts);
            if !(area > 0.0) {
                return Err(VemError::InvalidMesh(format!("cell {c} is not counter-clockwise (area {area:e})")));
            }
            geometry.push(CellGeometry { area, centroid: polygon_centroid(&pts), diameter: polygon_diameter(&pts) });
        }
        let index: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(i, e)| (edge_key(e.a, e.b), i)).collect();
        let cell_edges: Vec<Vec<usize>> = cells
            .iter()
            .map(|cell| (0..cell.len()).map(|i| index[&edge_key(cell[i], cell[(i + 1) % cell.len()])]).collect())
            .collect();
        let mut vertex_boundary = vec![false; vertices.len()];
        for e in edges.iter().filter(|e| e.right.is_none()) {
            vertex_boundary[e.a] = true;
            vertex_boundary[e.b] = true;
        }
        let mut hsum = vec![0.0; vertices.len()];
        let mut count = vec![0usize; vertices.len()];
        for (c, cell) in cells.iter().enumerate() {
            for &v in cell {
                hsum[v] += geometry[c].diameter;
                count[v] += 1;
            }
        }
        if let Some(v) = count.iter().position(|&n| n == 0) {
            return Err(VemError::InvalidMesh(format!("vertex {v} belongs to no cell")));
        }
        let vertex_h = hsum.iter().zip(&count).map(|(s, &n)| s / n as f64).collect();
        let mut domain = Rect::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for v in &vertices {
            domain.xmin = domain.xmin.min(v.x);
            domain.xmax = domain.xmax.max(v.x);
            domain.ymin = domain.ymin.min(v.y);
            domain.ymax = domain.ymax.max(v.y);
        }
        Ok(Self { vertices, cells, edges, cell_edges, vertex_boundary, geometry, vertex_h, domain })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_vertices(&self, c: usize) -> Vec<Vec2> {
        self.cells[c].iter().map(|&i| self.vertices[i]).collect()
    }

    /// Global edge index of local edge `i` of cell `c`, the edge running from
    /// local vertex `i` to local vertex `i + 1`.
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    /// Whether local edge `i` of cell `c` runs against its global orientation.
    pub fn edge_flipped(&self, c: usize, i: usize) -> bool {
        self.edges[self.cell_edges[c][i]].a != self.cells[c][i]
    }

    pub fn geometry(&self, c: usize) -> &CellGeometry {
        &self.geometry[c]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_boundary[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].right.is_none()
    }

    /// Mean diameter of the cells sharing vertex `v`.
    pub fn vertex_h(&self, v: usize) -> f64 {
        self.vertex_h[v]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let e = &self.edges[e];
        (self.vertices[e.b] - self.vertices[e.a]).norm()
    }

    pub fn edge_tangent(&self, e: usize) -> Vec2 {
        let e = &self.edges[e];
        (self.vertices[e.b] - self.vertices[e.a]).normalize()
    }

    /// Unit normal pointing to the right of the edge direction.
    pub fn edge_normal(&self, e: usize) -> Vec2 {
        let t = self.edge_tangent(e);
        Vec2::new(t.y, -t.x)
    }

    /// Largest cell diameter.
    pub fn h_max(&self) -> f64 {
        self.geometry.iter().map(|g| g.diameter).fold(0.0, f64::max)
    }

    /// Bounding box of the vertices.
    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> PolygonalMesh {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        PolygonalMesh::from_cells(v, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap()
    }

    #[test]
    fn edge_orientation_rules() {
        let m = two_triangles();
        assert_eq!(m.num_edges(), 5);
        for (i, e) in m.edges().iter().enumerate() {
            if let Some(r) = e.right {
                assert!(e.a < e.b);
                assert_eq!((e.left, r), (1, 0));
            } else {
                let c = &m.cells()[e.left];
                let pos = c.iter().position(|&v| v == e.a).unwrap();
                assert_eq!(c[(pos + 1) % c.len()], e.b, "boundary edge {i} not counter-clockwise");
            }
        }
        assert!(m.edge_flipped(0, 2) ^ m.edge_flipped(1, 0));
    }

    #[test]
    fn clockwise_cell_is_rejected() {
        let v = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert!(PolygonalMesh::from_cells(v, vec![vec![0, 2, 1]]).is_err());
    }
}
