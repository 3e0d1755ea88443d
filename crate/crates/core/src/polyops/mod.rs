//! Polynomial machinery shared by the element constructions: scaled
//! monomials, quadrature on polygons and edges, and the splitting of vector
//! polynomials into gradients plus rotated parts.

pub mod decomposition;
pub mod monomial;
pub mod quadrature;

pub use decomposition::VectorDecomposition;
pub use monomial::{dim, exponents, index, ScaledMonomials};
pub use quadrature::{
    edge_rule, gauss_legendre, gauss_lobatto, lagrange_basis, polygon_rule, sub_triangulation, triangle_rule,
    QuadratureRule,
};

pub type Vec2 = nalgebra::Vector2<f64>;

/// Twice the signed area of the triangle `abc`.
pub fn cross3(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Signed shoelace area; positive for counter-clockwise vertex order.
pub fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

pub fn polygon_centroid(v: &[Vec2]) -> Vec2 {
    let n = v.len();
    let mut a = 0.0;
    let mut c = Vec2::zeros();
    for i in 0..n {
        let p = v[i];
        let q = v[(i + 1) % n];
        let w = p.x * q.y - q.x * p.y;
        a += w;
        c += (p + q) * w;
    }
    c / (3.0 * a)
}

pub fn polygon_diameter(v: &[Vec2]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            d = d.max((v[i] - v[j]).norm());
        }
    }
    d
}
