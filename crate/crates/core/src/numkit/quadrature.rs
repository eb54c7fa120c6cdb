//! Product quadrature rules on the chart models.
//!
//! Sphere charts use the substitution `u = (1 - |z|^2) / (1 + |z|^2)`, under
//! which the Fubini-Study area element becomes `du dθ / 2` and the weighted
//! monomials `|z|^{2m} (1+|z|^2)^{-k}` become polynomials in `u`. Disc charts use
//! Gauss-Legendre in the radius. Both use the trapezoid rule in the angle.

use super::matrix::C64;
use super::sum::pairwise_sum;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum QuadratureDescriptor {
    SphereStereographic { radial: usize, angular: usize },
    PolarDisc { radius: f64, radial: usize, angular: usize },
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<C64>,
    /// Positive weights for the volume measure of the model.
    pub weights: Vec<f64>,
    pub descriptor: QuadratureDescriptor,
}

impl QuadratureRule {
    /// Full-plane rule for a sphere chart. `density(z)` is the coefficient
    /// `Θ_{11}(z)` of the base form, so the weights integrate against
    /// `dv_M = 2 Θ_{11} dx dy`.
    pub fn sphere(radial: usize, angular: usize, density: impl Fn(C64) -> f64) -> Self {
        let (us, wus) = gauss_legendre(radial);
        let dtheta = 2.0 * PI / angular as f64;
        let mut nodes = Vec::with_capacity(radial * angular);
        let mut weights = Vec::with_capacity(radial * angular);
        for (&u, &wu) in us.iter().zip(&wus) {
            let t = (1.0 - u) / (1.0 + u);
            let r = t.sqrt();
            // 2 dx dy = dt dθ = 2 du dθ / (1+u)^2 and (1+t) = 2 / (1+u).
            let jac = 2.0 / ((1.0 + u) * (1.0 + u));
            for j in 0..angular {
                let theta = j as f64 * dtheta;
                let z = C64::from_polar(r, theta);
                nodes.push(z);
                weights.push(density(z) * jac * wu * dtheta);
            }
        }
        Self {
            nodes,
            weights,
            descriptor: QuadratureDescriptor::SphereStereographic { radial, angular },
        }
    }

    /// Polar rule on the disc `|z| < radius`.
    pub fn disc(radius: f64, radial: usize, angular: usize, density: impl Fn(C64) -> f64) -> Self {
        let (xs, wxs) = gauss_legendre(radial);
        let dtheta = 2.0 * PI / angular as f64;
        let mut nodes = Vec::with_capacity(radial * angular);
        let mut weights = Vec::with_capacity(radial * angular);
        for (&x, &wx) in xs.iter().zip(&wxs) {
            let r = 0.5 * radius * (x + 1.0);
            let wr = 0.5 * radius * wx;
            for j in 0..angular {
                let theta = j as f64 * dtheta;
                let z = C64::from_polar(r, theta);
                nodes.push(z);
                weights.push(density(z) * 2.0 * r * wr * dtheta);
            }
        }
        Self {
            nodes,
            weights,
            descriptor: QuadratureDescriptor::PolarDisc {
                radius,
                radial,
                angular,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(C64) -> C64) -> C64 {
        let terms: Vec<C64> = self.nodes.iter().zip(&self.weights).map(|(&z, &w)| f(z) * w).collect();
        pairwise_sum(&terms)
    }

    pub fn volume(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        ws[i] = w;
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..14 {
            let approx: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((approx - exact).abs() < 1e-14, "degree {deg}");
        }
        assert!(w.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn fs_sphere_volume() {
        let rule = QuadratureRule::sphere(20, 24, |z| (1.0 + z.norm_sqr()).powi(-2));
        assert!((rule.volume() - 2.0 * PI).abs() < 1e-12);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn flat_disc_volume() {
        let rule = QuadratureRule::disc(1.5, 10, 8, |_| 1.0);
        assert!((rule.volume() - 2.0 * PI * 1.5 * 1.5).abs() < 1e-12);
    }
}
