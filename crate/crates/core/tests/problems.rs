//! Manufactured data checked against finite differences of the field values.

use nsch_vem::config::PhysicalParameters;
use nsch_vem::diagnostics::{ExactSolution, Test1Problem, Test2Problem};
use nsch_vem::polyops::Vec2;
use proptest::prelude::*;

const H: f64 = 1e-3;

fn dx<F: Fn(&Vec2) -> f64>(f: &F, x: &Vec2, d: Vec2) -> f64 {
    (-f(&(x + 2.0 * d)) + 8.0 * f(&(x + d)) - 8.0 * f(&(x - d)) + f(&(x - 2.0 * d))) / (12.0 * d.norm())
}

fn grad<F: Fn(&Vec2) -> f64>(f: &F, x: &Vec2) -> Vec2 {
    Vec2::new(dx(f, x, Vec2::new(H, 0.0)), dx(f, x, Vec2::new(0.0, H)))
}

fn lap<F: Fn(&Vec2) -> f64>(f: &F, x: &Vec2, h: f64) -> f64 {
    let c = f(x);
    let e = |a: f64, b: f64| f(&Vec2::new(x.x + a, x.y + b));
    let near = e(h, 0.0) + e(-h, 0.0) + e(0.0, h) + e(0.0, -h) - 4.0 * c;
    let far = e(2.0 * h, 0.0) + e(-2.0 * h, 0.0) + e(0.0, 2.0 * h) + e(0.0, -2.0 * h) - 4.0 * c;
    (16.0 * near - far) / (12.0 * h * h)
}

fn dt<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
    (f(t + H) - f(t - H)) / (2.0 * H)
}

fn params() -> impl Strategy<Value = PhysicalParameters> {
    (0.1..2.0f64, 0.01..1.0f64, 0.01..1.0f64, 0.2..1.0f64).prop_map(|(nu, lambda, gamma, eps)| PhysicalParameters {
        nu,
        lambda,
        gamma,
        eps,
    })
}

fn point() -> impl Strategy<Value = Vec2> {
    (0.05..0.95f64, 0.05..0.95f64).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivatives_match_differences(x in point(), t in 0.0..1.0f64) {
        let p = Test1Problem::new(PhysicalParameters::default());
        let g = p.velocity_grad(&x, t);
        let gx = grad(&|y: &Vec2| p.velocity(y, t).x, &x);
        let gy = grad(&|y: &Vec2| p.velocity(y, t).y, &x);
        for (a, b) in g.iter().zip([gx.x, gx.y, gy.x, gy.y]) {
            prop_assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()));
        }
        prop_assert!((g[0] + g[3]).abs() < 1e-12 * (1.0 + g[0].abs()));

        let fd = grad(&|y: &Vec2| p.phase_value(y, t), &x);
        prop_assert!((p.phase_grad(&x, t) - fd).norm() < 1e-7 * (1.0 + fd.norm()));
        let hx = grad(&|y: &Vec2| p.phase_grad(y, t).x, &x);
        let hy = grad(&|y: &Vec2| p.phase_grad(y, t).y, &x);
        let hess = p.phase_hessian(&x, t);
        for (a, b) in hess.iter().zip([hx.x, hx.y, hy.y]) {
            prop_assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn momentum_forcing_matches_differences(params in params(), x in point(), t in 0.0..1.0f64) {
        let p = Test1Problem::new(params);
        let phi_lap = lap(&|y: &Vec2| p.phase_value(y, t), &x, H);
        let phi_grad = grad(&|y: &Vec2| p.phase_value(y, t), &x);
        let u = p.velocity(&x, t);
        let mut g = Vec2::zeros();
        for c in 0..2 {
            let uc = |y: &Vec2| p.velocity(y, t)[c];
            let du = grad(&uc, &x);
            g[c] = dt(|s| p.velocity(&x, s)[c], t) - params.nu * lap(&uc, &x, H) + du.dot(&u);
        }
        g += grad(&|y: &Vec2| p.pressure_hat(y, t), &x) + phi_grad * (params.lambda * phi_lap);
        let f = p.momentum_forcing(&x, t);
        prop_assert!((f - g).norm() < 1e-5 * (1.0 + g.norm()), "{f} vs {g}");
    }

    #[test]
    fn phase_forcing_matches_differences(params in params(), x in point(), t in 0.0..1.0f64) {
        let p = Test1Problem::new(params);
        let h2 = 1e-2;
        let bilap = lap(&|y: &Vec2| lap(&|z: &Vec2| p.phase_value(z, t), y, h2), &x, h2);
        let lap_f = lap(&|y: &Vec2| p.phase_value(y, t).powi(3) - p.phase_value(y, t), &x, 2e-3) / (params.eps * params.eps);
        let transport = dt(|s| p.phase_value(&x, s), t) + p.velocity(&x, t).dot(&grad(&|y: &Vec2| p.phase_value(y, t), &x));
        let g = transport + params.gamma * (bilap - lap_f);
        // the terms cancel strongly, so compare against their size
        let scale = 1.0 + transport.abs() + params.gamma * (bilap.abs() + lap_f.abs());
        let f = p.phase_forcing(&x, t);
        prop_assert!((f - g).abs() < 1e-5 * scale, "{f} vs {g}");
    }

    #[test]
    fn test1_phase_has_zero_normal_derivative(s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let p = Test1Problem::new(PhysicalParameters::default());
        for (x, n) in [
            (Vec2::new(s, 0.0), Vec2::new(0.0, -1.0)),
            (Vec2::new(1.0, s), Vec2::new(1.0, 0.0)),
            (Vec2::new(s, 1.0), Vec2::new(0.0, 1.0)),
            (Vec2::new(0.0, s), Vec2::new(-1.0, 0.0)),
        ] {
            prop_assert!(p.phase_grad(&x, t).dot(&n).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_gradient_matches_differences(x in (-0.9..0.9f64, -0.9..0.9f64).prop_map(|(a, b)| Vec2::new(a, b))) {
        let (_, g) = Test2Problem::phase0(&x);
        let fd = grad(&|y: &Vec2| Test2Problem::phase0(y).0, &x);
        prop_assert!((g - fd).norm() < 1e-4 * (1.0 + fd.norm()));
    }
}
