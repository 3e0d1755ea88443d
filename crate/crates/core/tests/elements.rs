use nalgebra::{DMatrix, DVector};
use nsch_vem::frame::CellFrame;
use nsch_vem::phase::PhaseElement;
use nsch_vem::polyops::{dim, Vec2};
use nsch_vem::velocity::VelocityElement;

fn polygons() -> Vec<Vec<Vec2>> {
    let p = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Vec2::new(x, y)).collect::<Vec<_>>();
    vec![
        p(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]),
        p(&[(0.1, 0.2), (0.6, 0.15), (0.7, 0.6), (0.2, 0.5)]),
        p(&[(0.0, 0.0), (0.3, -0.1), (0.5, 0.2), (0.35, 0.5), (0.05, 0.4)]),
        // non-convex star-shaped
        p(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 0.4), (0.0, 1.0)]),
    ]
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

#[test]
fn velocity_projectors_reproduce_polynomials() {
    for k in 1..=3 {
        for poly in polygons() {
            let el = VelocityElement::new(CellFrame::from_polygon(poly), k).unwrap();
            let n = 2 * dim(k as i32);
            let id = DMatrix::<f64>::identity(n, n);
            assert!(max_abs(&(&el.pi_nabla * &el.dof_matrix - &id)) < 1e-11, "pi_nabla k={k}");
            assert!(max_abs(&(&el.pi0 * &el.dof_matrix - &id)) < 1e-11, "pi0 k={k}");
        }
    }
}

#[test]
fn phase_projectors_reproduce_polynomials() {
    for l in 2..=4 {
        for poly in polygons() {
            let el = PhaseElement::new(CellFrame::from_polygon(poly), l).unwrap();
            let n = dim(l as i32);
            // coefficient vectors with mixed signs and magnitudes
            for seed in 0..5u32 {
                let c = DVector::from_fn(n, |i, _| ((i as f64 + 1.3) * (seed as f64 + 0.7)).sin());
                let d = &el.dof_matrix * &c;
                for (name, p) in [("proj_d", &el.proj_d), ("pi0", &el.pi0)] {
                    // relative L2(E) norm; coefficient norms inherit the monomial conditioning
                    let e = p * &d - &c;
                    let err = (e.dot(&(&el.mass * &e)) / c.dot(&(&el.mass * &c))).sqrt();
                    assert!(err < 1e-11, "{name} l={l} {err:e}");
                }
            }
        }
    }
}

#[test]
fn velocity_divergence_of_polynomial() {
    // v = (x^2 y, x - y^2 + x y): div v = 2 x y - 2 y + x
    let k = 3;
    for poly in polygons() {
        let el = VelocityElement::new(CellFrame::from_polygon(poly), k).unwrap();
        let d = el.interpolate(&|x| Vec2::new(x.x * x.x * x.y, x.x - x.y * x.y + x.x * x.y));
        let iota = &el.iota * &d;
        for x in [Vec2::new(0.3, 0.2), Vec2::new(0.1, 0.1)] {
            let v = el.frame.mono.eval(iota.as_slice(), &x);
            assert!((v - (2.0 * x.x * x.y - 2.0 * x.y + x.x)).abs() < 1e-11);
        }
        let g = &el.grad0 * &d;
        let dk = dim(k as i32 - 1);
        let x = Vec2::new(0.25, 0.2);
        let exact = [2.0 * x.x * x.y, x.x * x.x, 1.0 + x.y, -2.0 * x.y + x.x];
        for b in 0..4 {
            let v = el.frame.mono.eval(&g.as_slice()[b * dk..(b + 1) * dk], &x);
            assert!((v - exact[b]).abs() < 1e-10, "block {b}: {v} vs {}", exact[b]);
        }
    }
}

#[test]
fn phase_derivative_projections_of_polynomial() {
    let l = 3;
    for poly in polygons() {
        let el = PhaseElement::new(CellFrame::from_polygon(poly), l).unwrap();
        // phi = x^3 - 2 x y^2 + y
        let d = el.interpolate(&|x| {
            (
                x.x.powi(3) - 2.0 * x.x * x.y * x.y + x.y,
                Vec2::new(3.0 * x.x * x.x - 2.0 * x.y * x.y, -4.0 * x.x * x.y + 1.0),
            )
        });
        let x = Vec2::new(0.2, 0.3);
        let lap = DVector::from_iterator(el.lap0.nrows(), (&el.lap0 * &d).iter().cloned());
        let v = el.frame.mono.eval(lap.as_slice(), &x);
        assert!((v - (6.0 * x.x - 4.0 * x.x)).abs() < 1e-9);
        let h = &el.hess0 * &d;
        let d2 = dim(1);
        let exact = [6.0 * x.x, -4.0 * x.y, -4.0 * x.x];
        for p in 0..3 {
            let v = el.frame.mono.eval(&h.as_slice()[p * d2..(p + 1) * d2], &x);
            assert!((v - exact[p]).abs() < 1e-9, "hessian block {p}");
        }
    }
}
