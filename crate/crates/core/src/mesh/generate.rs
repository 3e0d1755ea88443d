use super::{voronoi::voronoi_mesh, PolygonalMesh, Rect};
use crate::error::{Result, VemError};
use crate::polyops::Vec2;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshFamily {
    Triangular,
    Quadrilateral,
    Cartesian,
    Voronoi,
}

impl MeshFamily {
    pub const ALL: [MeshFamily; 4] =
        [MeshFamily::Triangular, MeshFamily::Quadrilateral, MeshFamily::Cartesian, MeshFamily::Voronoi];

    pub fn name(&self) -> &'static str {
        match self {
            MeshFamily::Triangular => "triangular",
            MeshFamily::Quadrilateral => "quadrilateral",
            MeshFamily::Cartesian => "cartesian",
            MeshFamily::Voronoi => "voronoi",
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshFamily {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "triangular" | "tri" => Ok(MeshFamily::Triangular),
            "quadrilateral" | "quad" => Ok(MeshFamily::Quadrilateral),
            "cartesian" | "cart" => Ok(MeshFamily::Cartesian),
            "voronoi" => Ok(MeshFamily::Voronoi),
            other => Err(VemError::config("mesh.family", format!("unknown mesh family `{other}`"))),
        }
    }
}

/// Generates a mesh of `domain` with `n` cells per side (for Voronoi, `n^2`
/// seeds). Deterministic for fixed arguments.
pub fn generate_mesh(family: MeshFamily, n: usize, domain: Rect) -> Result<PolygonalMesh> {
    if n == 0 {
        return Err(VemError::InvalidMesh("mesh resolution must be positive".into()));
    }
    if !domain.is_valid() {
        return Err(VemError::InvalidMesh(format!("degenerate domain {domain:?}")));
    }
    match family {
        MeshFamily::Voronoi => voronoi_mesh(n, domain, VORONOI_SEED),
        _ => tensor_mesh(family, n, domain),
    }
}

pub(crate) const VORONOI_SEED: u64 = 0x5eed_2024;

fn tensor_mesh(family: MeshFamily, n: usize, d: Rect) -> Result<PolygonalMesh> {
    let (dx, dy) = (d.width() / n as f64, d.height() / n as f64);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let (xi, eta) = (i as f64 / n as f64, j as f64 / n as f64);
            let mut p = Vec2::new(d.xmin + i as f64 * dx, d.ymin + j as f64 * dy);
            if i == n {
                p.x = d.xmax;
            }
            if j == n {
                p.y = d.ymax;
            }
            if family == MeshFamily::Quadrilateral {
                p.x += 0.1 * dx * (2.0 * PI * xi).sin() * (4.0 * PI * eta).sin();
                p.y += 0.1 * dy * (4.0 * PI * xi).sin() * (2.0 * PI * eta).sin();
                if i == 0 || i == n {
                    p.x = if i == 0 { d.xmin } else { d.xmax };
                }
                if j == 0 || j == n {
                    p.y = if j == 0 { d.ymin } else { d.ymax };
                }
            }
            vertices.push(p);
        }
    }
    let mut cells = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, e) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if family == MeshFamily::Triangular {
                cells.push(vec![a, b, c]);
                cells.push(vec![a, c, e]);
            } else {
                cells.push(vec![a, b, c, e]);
            }
        }
    }
    PolygonalMesh::from_cells(vertices, cells)
}
