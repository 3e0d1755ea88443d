//! Gauss rules on intervals, triangles and polygons.
//!
//! Triangles use a collapsed tensor Gauss-Legendre rule. Convex polygons are
//! split into a fan from their first vertex, other polygons into a fan around
//! the centroid when every fan triangle is positively oriented and into an
//! ear-clipped triangulation otherwise.

use super::{cross3, signed_area, Vec2};
use crate::error::{Result, VemError};

#[derive(Debug, Clone, Default)]
pub struct QuadratureRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Vec2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    // returns (P_n(x), P_{n-1}(x))
    let mut p0 = 1.0;
    if n == 0 {
        return (p0, 0.0);
    }
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// `n`-point Gauss-Legendre nodes and weights on `[0, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, q) = legendre(n, z);
            let dp = nf * (z * p - q) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (p, q) = legendre(n, z);
        let dp = nf * (z * p - q) / (z * z - 1.0);
        x[n - 1 - i] = 0.5 * (z + 1.0);
        w[n - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// The `n + 1` Gauss-Lobatto-Legendre nodes of order `n` on `[0, 1]`,
/// ascending and including both endpoints.
pub fn gauss_lobatto(n: usize) -> Vec<f64> {
    assert!(n > 0);
    if n == 1 {
        return vec![0.0, 1.0];
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
        if i == 0 || i == n {
            out.push(0.5 * (x + 1.0));
            continue;
        }
        for _ in 0..100 {
            let (p, q) = legendre(n, x);
            let dx = (x * p - q) / ((nf + 1.0) * p);
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push(0.5 * (x + 1.0));
    }
    out
}

/// Values of the Lagrange basis on `nodes` at `s`.
pub fn lagrange_basis(nodes: &[f64], s: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut out = vec![1.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        for m in 0..n {
            if m != j {
                *o *= (s - nodes[m]) / (nodes[j] - nodes[m]);
            }
        }
    }
    out
}

fn points_for(degree: usize) -> usize {
    degree / 2 + 1
}

/// Gauss rule on the segment `ab`, exact for polynomials of `degree`; the
/// weights include the segment length.
pub fn edge_rule(a: &Vec2, b: &Vec2, degree: usize) -> QuadratureRule {
    let (s, w) = gauss_legendre(points_for(degree));
    let len = (b - a).norm();
    QuadratureRule {
        points: s.iter().map(|&s| a + (b - a) * s).collect(),
        weights: w.iter().map(|w| w * len).collect(),
        degree,
    }
}

/// Collapsed Gauss rule on triangle `abc`, exact for polynomials of `degree`.
pub fn triangle_rule(a: &Vec2, b: &Vec2, c: &Vec2, degree: usize) -> QuadratureRule {
    let n = points_for(degree + 1);
    let (s, w) = gauss_legendre(n);
    let jac = cross3(a, b, c).abs();
    let mut rule = QuadratureRule { degree, ..Default::default() };
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (s[i], s[j]);
            let p = a + ((b - a) * (1.0 - v) + (c - a) * v) * u;
            rule.points.push(p);
            rule.weights.push(w[i] * w[j] * u * jac);
        }
    }
    rule
}

fn ear_clip(v: &[Vec2]) -> Result<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut tris = Vec::with_capacity(v.len() - 2);
    let scale = signed_area(v).abs();
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (v[ia], v[ib], v[ic]);
            if cross3(&a, &b, &c) <= 1e-14 * scale {
                continue;
            }
            let inside = idx.iter().any(|&j| {
                j != ia
                    && j != ib
                    && j != ic
                    && cross3(&a, &b, &v[j]) >= 0.0
                    && cross3(&b, &c, &v[j]) >= 0.0
                    && cross3(&c, &a, &v[j]) >= 0.0
            });
            if !inside {
                tris.push([ia, ib, ic]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(VemError::InvalidMesh("polygon cannot be triangulated".into()));
        }
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

/// Sub-triangles used for integration over the polygon `v` (counter-clockwise).
pub fn sub_triangulation(v: &[Vec2], centroid: &Vec2) -> Result<Vec<[Vec2; 3]>> {
    let n = v.len();
    let area = signed_area(v);
    if n < 3 || area <= 0.0 {
        return Err(VemError::InvalidMesh("polygon is not counter-clockwise".into()));
    }
    let convex = (0..n).all(|i| cross3(&v[(i + n - 1) % n], &v[i], &v[(i + 1) % n]) > 1e-12 * area);
    if convex {
        return Ok((1..n - 1).map(|i| [v[0], v[i], v[i + 1]]).collect());
    }
    let fan_ok = (0..n).all(|i| cross3(centroid, &v[i], &v[(i + 1) % n]) > 1e-12 * area);
    if fan_ok {
        return Ok((0..n).map(|i| [*centroid, v[i], v[(i + 1) % n]]).collect());
    }
    Ok(ear_clip(v)?.into_iter().map(|[a, b, c]| [v[a], v[b], v[c]]).collect())
}

pub fn polygon_rule(v: &[Vec2], centroid: &Vec2, degree: usize) -> Result<QuadratureRule> {
    let mut rule = QuadratureRule { degree, ..Default::default() };
    for [a, b, c] in sub_triangulation(v, centroid)? {
        let t = triangle_rule(&a, &b, &c, degree);
        rule.points.extend(t.points);
        rule.weights.extend(t.weights);
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_integrates_polynomials() {
        for n in 1..8 {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert_relative_eq!(s, 1.0 / (p as f64 + 1.0), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn lobatto_nodes_are_symmetric() {
        let x = gauss_lobatto(4);
        assert_eq!(x.len(), 5);
        assert_relative_eq!(x[2], 0.5, epsilon = 1e-15);
        assert_relative_eq!(x[1], 0.5 - 0.5 * (3.0f64 / 7.0).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(x[1] + x[3], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn triangle_moments() {
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 0.0);
        let c = Vec2::new(0.0, 1.0);
        let r = triangle_rule(&a, &b, &c, 6);
        // int x^a y^b over the unit simplex = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).product::<u32>() as f64;
        for p in 0..=3u32 {
            for q in 0..=3u32 {
                let s = r.integrate(|x| x.x.powi(p as i32) * x.y.powi(q as i32));
                assert_relative_eq!(s, fact(p) * fact(q) / fact(p + q + 2), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn non_star_polygon_uses_ear_clipping() {
        // comb-shaped polygon whose centroid lies outside the kernel
        let v: Vec<Vec2> =
            [(0.0, 0.0), (3.0, 0.0), (3.0, 3.0), (2.0, 3.0), (2.0, 1.0), (1.0, 1.0), (1.0, 3.0), (0.0, 3.0)]
                .iter()
                .map(|&(x, y)| Vec2::new(x, y))
                .collect();
        let c = super::super::polygon_centroid(&v);
        let r = polygon_rule(&v, &c, 2).unwrap();
        assert_relative_eq!(r.integrate(|_| 1.0), 7.0, epsilon = 1e-13);
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }
}
