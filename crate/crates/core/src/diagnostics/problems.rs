use crate::config::PhysicalParameters;
use crate::forms::Sources;
use crate::polyops::Vec2;
use crate::system::ProblemData;
use std::f64::consts::PI;

/// Closed-form fields of a manufactured solution.
pub trait ExactSolution: Sync {
    fn velocity(&self, x: &Vec2, t: f64) -> Vec2;
    /// `[du_x/dx, du_x/dy, du_y/dx, du_y/dy]`.
    fn velocity_grad(&self, x: &Vec2, t: f64) -> [f64; 4];
    /// Modified pressure `p + lambda/2 |grad phi|^2`.
    fn pressure_hat(&self, x: &Vec2, t: f64) -> f64;
    fn phase_value(&self, x: &Vec2, t: f64) -> f64;
    fn phase_grad(&self, x: &Vec2, t: f64) -> Vec2;
    /// `[xx, xy, yy]`.
    fn phase_hessian(&self, x: &Vec2, t: f64) -> [f64; 3];
}

/// Manufactured solution on the unit square with affine time dependence.
#[derive(Debug, Clone, Copy)]
pub struct Test1Problem {
    pub params: PhysicalParameters,
}

const K2: f64 = 2.0 * PI;

impl Test1Problem {
    pub fn new(params: PhysicalParameters) -> Self {
        Self { params }
    }

    fn pressure(&self, x: &Vec2, t: f64) -> f64 {
        (2.0 * t + 1.0) * (PI * x.x).sin() * (4.0 * PI * x.y).cos()
    }

    fn pressure_grad(&self, x: &Vec2, t: f64) -> Vec2 {
        let s = 2.0 * t + 1.0;
        Vec2::new(
            s * PI * (PI * x.x).cos() * (4.0 * PI * x.y).cos(),
            -s * 4.0 * PI * (PI * x.x).sin() * (4.0 * PI * x.y).sin(),
        )
    }

    fn velocity_laplacian(&self, x: &Vec2, t: f64) -> Vec2 {
        let te = (t + 1.0) * x.x.exp();
        Vec2::new(-4.0 * te * x.y.sin(), -4.0 * te * x.y.cos())
    }

    /// Momentum forcing `u_t - nu lap u + (grad u) u + grad p_hat + lambda lap(phi) grad(phi)`.
    pub fn momentum_forcing(&self, x: &Vec2, t: f64) -> Vec2 {
        let p = &self.params;
        let u = self.velocity(x, t);
        let g = self.velocity_grad(x, t);
        let conv = Vec2::new(g[0] * u.x + g[1] * u.y, g[2] * u.x + g[3] * u.y);
        let gphi = self.phase_grad(x, t);
        let h = self.phase_hessian(x, t);
        let lap = h[0] + h[2];
        let hg = Vec2::new(h[0] * gphi.x + h[1] * gphi.y, h[1] * gphi.x + h[2] * gphi.y);
        u / (t + 1.0) - self.velocity_laplacian(x, t) * p.nu
            + conv
            + self.pressure_grad(x, t)
            + hg * p.lambda
            + gphi * (p.lambda * lap)
    }

    /// Phase forcing `phi_t + u . grad phi + gamma lap(lap phi - eps^-2 f(phi))`.
    pub fn phase_forcing(&self, x: &Vec2, t: f64) -> f64 {
        let p = &self.params;
        let phi = self.phase_value(x, t);
        let g = self.phase_grad(x, t);
        let lap = -2.0 * K2 * K2 * phi;
        let bilap = 4.0 * K2.powi(4) * phi;
        let lap_f = 6.0 * phi * g.norm_squared() + (3.0 * phi * phi - 1.0) * lap;
        phi / (t + 1.0) + self.velocity(x, t).dot(&g) + p.gamma * (bilap - lap_f / (p.eps * p.eps))
    }
}

impl ExactSolution for Test1Problem {
    fn velocity(&self, x: &Vec2, t: f64) -> Vec2 {
        let te = (t + 1.0) * x.x.exp();
        let (s, c) = x.y.sin_cos();
        Vec2::new(te * (s + x.y * c - x.x * s), -te * (c + x.x * c + x.y * s))
    }

    fn velocity_grad(&self, x: &Vec2, t: f64) -> [f64; 4] {
        let te = (t + 1.0) * x.x.exp();
        let (s, c) = x.y.sin_cos();
        let (xx, y) = (x.x, x.y);
        [
            te * (y * c - xx * s),
            te * (2.0 * c - y * s - xx * c),
            -te * (2.0 * c + xx * c + y * s),
            -te * (y * c - xx * s),
        ]
    }

    fn pressure_hat(&self, x: &Vec2, t: f64) -> f64 {
        self.pressure(x, t) + 0.5 * self.params.lambda * self.phase_grad(x, t).norm_squared()
    }

    fn phase_value(&self, x: &Vec2, t: f64) -> f64 {
        (t + 1.0) * (K2 * x.x).cos() * (K2 * x.y).cos()
    }

    fn phase_grad(&self, x: &Vec2, t: f64) -> Vec2 {
        let s = t + 1.0;
        Vec2::new(-s * K2 * (K2 * x.x).sin() * (K2 * x.y).cos(), -s * K2 * (K2 * x.x).cos() * (K2 * x.y).sin())
    }

    fn phase_hessian(&self, x: &Vec2, t: f64) -> [f64; 3] {
        let phi = self.phase_value(x, t);
        let mixed = (t + 1.0) * K2 * K2 * (K2 * x.x).sin() * (K2 * x.y).sin();
        [-K2 * K2 * phi, mixed, -K2 * K2 * phi]
    }
}

impl Sources for Test1Problem {
    fn momentum(&self, x: &Vec2, t: f64) -> Option<Vec2> {
        Some(self.momentum_forcing(x, t))
    }

    fn phase(&self, x: &Vec2, t: f64) -> Option<f64> {
        Some(self.phase_forcing(x, t))
    }

    /// Balances the boundary part of the skew-symmetric phase convection,
    /// since the exact velocity has a nonzero normal component on the boundary.
    fn phase_boundary(&self, x: &Vec2, n: &Vec2, t: f64) -> Option<f64> {
        Some(-0.5 * self.velocity(x, t).dot(n) * self.phase_value(x, t))
    }
}

impl ProblemData for Test1Problem {
    fn velocity_boundary(&self, x: &Vec2, t: f64) -> Vec2 {
        self.velocity(x, t)
    }

    fn initial_velocity(&self, x: &Vec2) -> Vec2 {
        self.velocity(x, 0.0)
    }

    fn initial_phase(&self, x: &Vec2) -> (f64, Vec2) {
        (self.phase_value(x, 0.0), self.phase_grad(x, 0.0))
    }
}

/// Elliptical bubble at rest in a closed box.
#[derive(Debug, Clone, Copy, Default)]
pub struct Test2Problem;

impl Test2Problem {
    pub fn phase0(x: &Vec2) -> (f64, Vec2) {
        let a = x.x * x.x / 0.01 + x.y * x.y / 0.0225 - 1.0;
        let v = a.tanh();
        let d = 1.0 - v * v;
        (v, Vec2::new(d * 2.0 * x.x / 0.01, d * 2.0 * x.y / 0.0225))
    }
}

impl Sources for Test2Problem {
    fn has_momentum(&self) -> bool {
        false
    }
    fn has_phase(&self) -> bool {
        false
    }
    fn has_phase_boundary(&self) -> bool {
        false
    }
}

impl ProblemData for Test2Problem {
    fn initial_velocity(&self, _x: &Vec2) -> Vec2 {
        Vec2::zeros()
    }

    fn initial_phase(&self, x: &Vec2) -> (f64, Vec2) {
        Self::phase0(x)
    }
}
