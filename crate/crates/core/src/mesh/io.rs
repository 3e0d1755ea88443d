//! Plain-text mesh format:
//!
//! ```text
//! polymesh 1
//! NV NC NE
//! x y boundary_flag        (NV lines)
//! m i_1 ... i_m            (NC lines, counter-clockwise)
//! a b cell_left cell_right (NE lines, cell_right = -1 on the boundary)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Coordinates are
//! written with 17 significant digits so a write/read cycle is exact.

use super::{Edge, PolygonalMesh};
use crate::error::{Result, VemError};
use crate::polyops::{signed_area, Vec2};
use std::fmt::Write as _;
use std::path::Path;

pub fn write_mesh_string(mesh: &PolygonalMesh) -> String {
    let mut s = String::new();
    writeln!(s, "polymesh 1").unwrap();
    writeln!(s, "{} {} {}", mesh.num_vertices(), mesh.num_cells(), mesh.num_edges()).unwrap();
    for (i, v) in mesh.vertices().iter().enumerate() {
        writeln!(s, "{:.16e} {:.16e} {}", v.x, v.y, mesh.is_boundary_vertex(i) as u8).unwrap();
    }
    for c in mesh.cells() {
        write!(s, "{}", c.len()).unwrap();
        for v in c {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    for e in mesh.edges() {
        let r = e.right.map_or(-1, |r| r as i64);
        writeln!(s, "{} {} {} {}", e.a, e.b, e.left, r).unwrap();
    }
    s
}

pub fn write_mesh(mesh: &PolygonalMesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolygonalMesh> {
    read_mesh_str(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok((i + 1, t.split_whitespace().collect()));
        }
        Err(VemError::MeshParse { line: self.last + 1, msg: format!("unexpected end of file, expected {what}") })
    }
}

fn err(line: usize, msg: impl Into<String>) -> VemError {
    VemError::MeshParse { line, msg: msg.into() }
}

fn parse<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| err(line, format!("cannot parse {what} from `{tok}`")))
}

pub fn read_mesh_str(text: &str) -> Result<PolygonalMesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let (ln, head) = lines.next("header")?;
    if head != ["polymesh", "1"] {
        return Err(err(ln, "expected header `polymesh 1`"));
    }
    let (ln, counts) = lines.next("counts")?;
    if counts.len() != 3 {
        return Err(err(ln, "expected `NV NC NE`"));
    }
    let nv: usize = parse(ln, counts[0], "vertex count")?;
    let nc: usize = parse(ln, counts[1], "cell count")?;
    let ne: usize = parse(ln, counts[2], "edge count")?;

    let mut vertices = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = lines.next("vertex")?;
        if t.len() != 3 {
            return Err(err(ln, "expected `x y boundary_flag`"));
        }
        let x: f64 = parse(ln, t[0], "x")?;
        let y: f64 = parse(ln, t[1], "y")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(err(ln, "non-finite coordinate"));
        }
        let f: u8 = parse(ln, t[2], "boundary flag")?;
        if f > 1 {
            return Err(err(ln, "boundary flag must be 0 or 1"));
        }
        vertices.push(Vec2::new(x, y));
        flags.push((ln, f == 1));
    }

    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, t) = lines.next("cell")?;
        let m: usize = parse(ln, t[0], "cell size")?;
        if m < 3 || t.len() != m + 1 {
            return Err(err(ln, format!("cell declares {m} vertices but lists {}", t.len() - 1)));
        }
        let mut cell = Vec::with_capacity(m);
        for tok in &t[1..] {
            let v: usize = parse(ln, tok, "vertex index")?;
            if v >= nv {
                return Err(err(ln, format!("dangling index {v} (only {nv} vertices)")));
            }
            cell.push(v);
        }
        let pts: Vec<Vec2> = cell.iter().map(|&i| vertices[i]).collect();
        if !(signed_area(&pts) > 0.0) {
            return Err(err(ln, "cell is not counter-clockwise"));
        }
        cells.push(cell);
    }

    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, t) = lines.next("edge")?;
        if t.len() != 4 {
            return Err(err(ln, "expected `a b cell_left cell_right`"));
        }
        let a: usize = parse(ln, t[0], "edge vertex")?;
        let b: usize = parse(ln, t[1], "edge vertex")?;
        let l: usize = parse(ln, t[2], "left cell")?;
        let r: i64 = parse(ln, t[3], "right cell")?;
        if a >= nv || b >= nv {
            return Err(err(ln, "dangling index in edge"));
        }
        if l >= nc || r >= nc as i64 || r < -1 {
            return Err(err(ln, "dangling cell index in edge"));
        }
        edges.push(Edge { a, b, left: l, right: (r >= 0).then_some(r as usize) });
    }
    if let Ok((ln, _)) = lines.next("") {
        return Err(err(ln, "trailing content after edge list"));
    }

    let mesh = PolygonalMesh::from_parts(vertices, cells, edges)?;
    for (i, (ln, f)) in flags.into_iter().enumerate() {
        if mesh.is_boundary_vertex(i) != f {
            return Err(err(ln, format!("boundary flag of vertex {i} disagrees with connectivity")));
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, MeshFamily, Rect};

    #[test]
    fn round_trip_is_identity() {
        let m = generate_mesh(MeshFamily::Quadrilateral, 3, Rect::new(-0.4, 0.4, -0.4, 0.4)).unwrap();
        let s = write_mesh_string(&m);
        let back = read_mesh_str(&s).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.cells(), m.cells());
        assert_eq!(back.edges(), m.edges());
        assert_eq!(write_mesh_string(&back), s);
    }

    #[test]
    fn dangling_index_names_line() {
        let text = "polymesh 1\n3 1 3\n0 0 1\n1 0 1\n0 1 1\n3 0 1 7\n0 1 0 -1\n1 2 0 -1\n2 0 0 -1\n";
        match read_mesh_str(text) {
            Err(VemError::MeshParse { line, msg }) => {
                assert_eq!(line, 6);
                assert!(msg.contains("dangling"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clockwise_cell_names_line() {
        let text = "polymesh 1\n3 1 3\n0 0 1\n1 0 1\n0 1 1\n3 0 2 1\n0 1 0 -1\n1 2 0 -1\n2 0 0 -1\n";
        assert!(matches!(read_mesh_str(text), Err(VemError::MeshParse { line: 6, .. })));
    }
}
