//! Clipped, Lloyd-relaxed Voronoi meshes of a rectangle.

use super::{validate_mesh, PolygonalMesh, Rect};
use crate::error::{Result, VemError};
use crate::polyops::{polygon_centroid, polygon_diameter, signed_area, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

const LLOYD_SWEEPS: usize = 20;
const MAX_ATTEMPTS: u64 = 8;
const COLLAPSE_FRACTION: f64 = 0.12;
const ACCEPT_RHO: f64 = 0.1;

/// Voronoi mesh with `n * n` seeds. Failed attempts are retried with a
/// perturbed seed.
pub fn voronoi_mesh(n: usize, domain: Rect, seed: u64) -> Result<PolygonalMesh> {
    let mut reason = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        match build(n, domain, seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9))) {
            Ok(mesh) => {
                if validate_mesh(&mesh, ACCEPT_RHO).passed {
                    return Ok(mesh);
                }
                reason = format!("regularity check failed at rho = {ACCEPT_RHO}");
            }
            Err(e) => reason = e.to_string(),
        }
    }
    Err(VemError::VoronoiFailed { attempts: MAX_ATTEMPTS as usize, reason })
}

fn clip(poly: &[Vec2], normal: &Vec2, offset: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let dp = normal.dot(&p) - offset;
        let dq = normal.dot(&q) - offset;
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            out.push(p + (q - p) * (dp / (dp - dq)));
        }
    }
    out
}

struct Buckets {
    nb: usize,
    domain: Rect,
    items: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(seeds: &[Vec2], nb: usize, domain: Rect) -> Self {
        let mut items = vec![Vec::new(); nb * nb];
        let mut b = Self { nb, domain, items: Vec::new() };
        for (i, s) in seeds.iter().enumerate() {
            let (bx, by) = b.cell_of(s);
            items[by * nb + bx].push(i);
        }
        b.items = items;
        b
    }

    fn cell_of(&self, p: &Vec2) -> (usize, usize) {
        let f = |v: f64, lo: f64, w: f64| (((v - lo) / w * self.nb as f64).floor().max(0.0) as usize).min(self.nb - 1);
        (f(p.x, self.domain.xmin, self.domain.width()), f(p.y, self.domain.ymin, self.domain.height()))
    }
}

fn voronoi_cells(seeds: &[Vec2], domain: Rect, nb: usize) -> Vec<Vec<Vec2>> {
    let buckets = Buckets::new(seeds, nb, domain);
    let bw = (domain.width() / nb as f64).min(domain.height() / nb as f64);
    let rect = vec![
        Vec2::new(domain.xmin, domain.ymin),
        Vec2::new(domain.xmax, domain.ymin),
        Vec2::new(domain.xmax, domain.ymax),
        Vec2::new(domain.xmin, domain.ymax),
    ];
    seeds
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut poly = rect.clone();
            let (cx, cy) = buckets.cell_of(s);
            let mut ring = 0usize;
            loop {
                for by in cy.saturating_sub(ring)..=(cy + ring).min(nb - 1) {
                    for bx in cx.saturating_sub(ring)..=(cx + ring).min(nb - 1) {
                        if bx.abs_diff(cx) != ring && by.abs_diff(cy) != ring {
                            continue;
                        }
                        for &j in &buckets.items[by * nb + bx] {
                            if j == i {
                                continue;
                            }
                            let d = seeds[j] - s;
                            let mid = (seeds[j] + s) * 0.5;
                            poly = clip(&poly, &d, d.dot(&mid));
                        }
                    }
                }
                let reach = poly.iter().map(|p| (p - s).norm()).fold(0.0, f64::max);
                if ring >= nb || (ring as f64) * bw > 2.0 * reach {
                    break;
                }
                ring += 1;
            }
            poly
        })
        .collect()
}

#[derive(Clone, Copy, Default)]
struct Side {
    xmin: bool,
    xmax: bool,
    ymin: bool,
    ymax: bool,
}

fn side_of(p: &Vec2, d: &Rect, tol: f64) -> Side {
    Side {
        xmin: (p.x - d.xmin).abs() < tol,
        xmax: (p.x - d.xmax).abs() < tol,
        ymin: (p.y - d.ymin).abs() < tol,
        ymax: (p.y - d.ymax).abs() < tol,
    }
}

fn snap(p: &mut Vec2, s: Side, d: &Rect) {
    if s.xmin {
        p.x = d.xmin;
    }
    if s.xmax {
        p.x = d.xmax;
    }
    if s.ymin {
        p.y = d.ymin;
    }
    if s.ymax {
        p.y = d.ymax;
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn build(n: usize, domain: Rect, seed: u64) -> Result<PolygonalMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dx, dy) = (domain.width() / n as f64, domain.height() / n as f64);
    let mut seeds = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let jx: f64 = rng.random_range(-0.35..0.35);
            let jy: f64 = rng.random_range(-0.35..0.35);
            seeds.push(Vec2::new(domain.xmin + (i as f64 + 0.5 + jx) * dx, domain.ymin + (j as f64 + 0.5 + jy) * dy));
        }
    }
    let nb = n.max(1);
    let mut polys = voronoi_cells(&seeds, domain, nb);
    for _ in 0..LLOYD_SWEEPS {
        for (s, p) in seeds.iter_mut().zip(&polys) {
            if p.len() >= 3 && signed_area(p) > 0.0 {
                *s = polygon_centroid(p);
            }
        }
        polys = voronoi_cells(&seeds, domain, nb);
    }

    let scale = domain.width().max(domain.height());
    let tol = 1e-9 * scale;
    let mut points: Vec<Vec2> = Vec::new();
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut cells: Vec<Vec<usize>> = Vec::with_capacity(polys.len());
    for poly in &polys {
        if poly.len() < 3 || signed_area(poly) <= 0.0 {
            return Err(VemError::InvalidMesh("empty voronoi cell".into()));
        }
        let mut cell = Vec::with_capacity(poly.len());
        for p in poly {
            let mut p = *p;
            let s = side_of(&p, &domain, 1e-12 * scale);
            snap(&mut p, s, &domain);
            let key = ((p.x / tol).round() as i64, (p.y / tol).round() as i64);
            let mut found = None;
            'search: for kx in key.0 - 1..=key.0 + 1 {
                for ky in key.1 - 1..=key.1 + 1 {
                    if let Some(list) = grid.get(&(kx, ky)) {
                        for &q in list {
                            if (points[q] - p).norm() < tol {
                                found = Some(q);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                points.push(p);
                grid.entry(key).or_default().push(points.len() - 1);
                points.len() - 1
            });
            if cell.last() != Some(&id) && cell.first() != Some(&id) {
                cell.push(id);
            }
        }
        cells.push(cell);
    }

    for _ in 0..5 {
        let mut parent: Vec<usize> = (0..points.len()).collect();
        let mut any = false;
        for cell in &cells {
            let pts: Vec<Vec2> = cell.iter().map(|&i| points[i]).collect();
            let h = polygon_diameter(&pts);
            for i in 0..cell.len() {
                let (a, b) = (cell[i], cell[(i + 1) % cell.len()]);
                if (points[a] - points[b]).norm() < COLLAPSE_FRACTION * h {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                        any = true;
                    }
                }
            }
        }
        if !any {
            break;
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..points.len() {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut new_points = points.clone();
        for (&r, members) in &groups {
            let mut p = Vec2::zeros();
            let mut side = Side::default();
            for &m in members {
                p += points[m];
                let s = side_of(&points[m], &domain, 1e-12 * scale);
                side.xmin |= s.xmin;
                side.xmax |= s.xmax;
                side.ymin |= s.ymin;
                side.ymax |= s.ymax;
            }
            if (side.xmin && side.xmax) || (side.ymin && side.ymax) {
                return Err(VemError::InvalidMesh("edge collapse across the domain".into()));
            }
            p /= members.len() as f64;
            snap(&mut p, side, &domain);
            new_points[r] = p;
        }
        points = new_points;
        for cell in &mut cells {
            let mut out: Vec<usize> = Vec::with_capacity(cell.len());
            for &v in cell.iter() {
                let r = find(&mut parent, v);
                if out.last() != Some(&r) {
                    out.push(r);
                }
            }
            while out.len() > 1 && out.first() == out.last() {
                out.pop();
            }
            if out.len() < 3 {
                return Err(VemError::InvalidMesh("cell collapsed".into()));
            }
            *cell = out;
        }
    }

    // renumber by first appearance
    let mut map = vec![usize::MAX; points.len()];
    let mut verts = Vec::new();
    for cell in &mut cells {
        for v in cell.iter_mut() {
            if map[*v] == usize::MAX {
                map[*v] = verts.len();
                verts.push(points[*v]);
            }
            *v = map[*v];
        }
    }
    let mesh = PolygonalMesh::from_cells(verts, cells)?;
    let btol = 1e-12 * scale;
    for e in mesh.edges().iter().filter(|e| e.right.is_none()) {
        let (a, b) = (mesh.vertices()[e.a], mesh.vertices()[e.b]);
        let (sa, sb) = (side_of(&a, &domain, btol), side_of(&b, &domain, btol));
        let same = (sa.xmin && sb.xmin) || (sa.xmax && sb.xmax) || (sa.ymin && sb.ymin) || (sa.ymax && sb.ymax);
        if !same {
            return Err(VemError::InvalidMesh("interior hanging edge".into()));
        }
    }
    let area: f64 = mesh.total_area();
    if (area - domain.width() * domain.height()).abs() > 1e-10 * domain.width() * domain.height() {
        return Err(VemError::InvalidMesh("cells do not tile the domain".into()));
    }
    Ok(mesh)
}
