//! Off-diagonal decay of Toeplitz kernels along geodesic rays.

use crate::error::{Error, Result};
use crate::geometry::{KahlerModel, LocalJets};
use crate::numkit::quadrature::gauss_legendre;
use crate::numkit::{QuadratureDescriptor, C64};
use crate::quantum::QuantumBasis;
use crate::symbol::Symbol;
use crate::toeplitz::{assemble, kernel_value};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayPair {
    pub k: usize,
    pub x: C64,
    pub y: C64,
    pub dist: f64,
    pub abs_kernel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCheck {
    pub k: usize,
    pub dist: f64,
    /// `|K(x, y)| k^{-n}`.
    pub scaled: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub pairs: Vec<DecayPair>,
    /// Slope `c` of `−log|K| ≈ c k dist^2 + const_k` over pairs with `dist ≤ fit_radius`.
    pub fitted_rate: f64,
    pub fit_radius: f64,
    /// `|det Ṙ^L| / 4` at the base point, the rate of the leading Gaussian.
    pub reference_rate: Option<f64>,
    pub rate_rel_error: Option<f64>,
    pub threshold_check: Vec<ThresholdCheck>,
}

/// Pair generator: rays from `base` in `directions` equally spaced directions.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPairs {
    pub base: C64,
    pub directions: usize,
    pub step: f64,
    pub fit_radius: f64,
    /// `c₀` in `dist = c₀ log k / √k`.
    pub threshold_factor: f64,
    /// Power `p` in the bound `k^{-p}`.
    pub bound_power: f64,
}

/// Length of the chart segment `[base, base + r e^{iα}]` in the base metric `2 Θ_11 |dz|^2`.
pub fn ray_length(model: &KahlerModel, base: C64, angle: f64, r: f64) -> f64 {
    let (xs, ws) = gauss_legendre(24);
    let dir = C64::from_polar(1.0, angle);
    let speed = |t: f64| (2.0 * model.theta_at(base + dir * t)).sqrt();
    let mut total = 0.0;
    let mut a = 0.0;
    let mut h = r.min(0.5);
    while a < r {
        let b = (a + h).min(r);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        total += xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| w * speed(mid + half * x))
            .sum::<f64>()
            * half;
        a = b;
        h *= 2.0;
    }
    total
}

/// Point at distance `dist` from `base` along the ray of angle `angle`.
pub fn ray_point(model: &KahlerModel, base: C64, angle: f64, dist: f64) -> Result<C64> {
    if dist == 0.0 {
        return Ok(base);
    }
    let mut hi = 0.25;
    while ray_length(model, base, angle, hi) < dist {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::Domain(format!(
                "no point at distance {dist} from {base} along angle {angle}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ray_length(model, base, angle, mid) < dist {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(base + C64::from_polar(0.5 * (lo + hi), angle))
}

fn grid_radius(b: &QuantumBasis) -> Option<f64> {
    match b.grid.descriptor {
        QuadratureDescriptor::PolarDisc { radius, .. } => Some(radius),
        QuadratureDescriptor::SphereStereographic { .. } => None,
    }
}

pub fn decay_profile(bases: &[Arc<QuantumBasis>], f: &Symbol, gen: &RayPairs) -> Result<DecayProfile> {
    let first = bases
        .first()
        .ok_or_else(|| Error::Invalid("decay profile needs at least one level".into()))?;
    let model = &first.model;
    let n = model.chart_dim as i32;
    let angles: Vec<f64> = (0..gen.directions)
        .map(|j| 2.0 * PI * j as f64 / gen.directions as f64)
        .collect();
    let mut fit_dists = Vec::new();
    let mut j = 0usize;
    while j as f64 * gen.step <= gen.fit_radius * (1.0 + 1e-12) {
        fit_dists.push(j as f64 * gen.step);
        j += 1;
    }

    let mut pairs = Vec::new();
    let mut checks = Vec::new();
    for b in bases {
        let op = assemble(b, f)?;
        let k = b.k;
        let kf = k as f64;
        let threshold_dist = gen.threshold_factor * kf.ln() / kf.sqrt();
        for &angle in &angles {
            let mut dists = fit_dists.clone();
            dists.push(threshold_dist);
            for (i, &d) in dists.iter().enumerate() {
                let y = ray_point(model, gen.base, angle, d)?;
                if let Some(r) = grid_radius(b) {
                    if y.norm() >= r {
                        return Err(Error::Domain(format!(
                            "decay point {y} at distance {d} lies outside the disc of radius {r}"
                        )));
                    }
                }
                let abs_kernel = kernel_value(&op, gen.base, y).norm();
                pairs.push(DecayPair {
                    k,
                    x: gen.base,
                    y,
                    dist: d,
                    abs_kernel,
                });
                if i == dists.len() - 1 {
                    let scaled = abs_kernel * kf.powi(-n);
                    let bound = kf.powf(-gen.bound_power);
                    checks.push(ThresholdCheck {
                        k,
                        dist: d,
                        scaled,
                        bound,
                        pass: scaled <= bound,
                    });
                }
            }
        }
    }

    // Common slope, one intercept per level.
    let mut num = 0.0;
    let mut den = 0.0;
    for b in bases {
        let group: Vec<(f64, f64)> = pairs
            .iter()
            .filter(|p| p.k == b.k && p.dist <= gen.fit_radius * (1.0 + 1e-12) && p.abs_kernel > 0.0)
            .map(|p| (p.k as f64 * p.dist * p.dist, -p.abs_kernel.ln()))
            .collect();
        if group.len() < 2 {
            continue;
        }
        let mx = group.iter().map(|g| g.0).sum::<f64>() / group.len() as f64;
        let my = group.iter().map(|g| g.1).sum::<f64>() / group.len() as f64;
        for (x, y) in &group {
            num += (x - mx) * (y - my);
            den += (x - mx) * (x - mx);
        }
    }
    let fitted_rate = if den > 0.0 { num / den } else { f64::NAN };
    if !fitted_rate.is_finite() {
        return Err(Error::Invalid(
            "decay fit needs at least two distinct distances per level".into(),
        ));
    }
    let mu = LocalJets::new(model, gen.base, 2)?.mu();
    let reference_rate = (mu.abs() > crate::geometry::DEGENERACY_THRESHOLD).then_some(mu.abs() / 4.0);
    let rate_rel_error = reference_rate.map(|c| (fitted_rate - c).abs() / c);
    Ok(DecayProfile {
        pairs,
        fitted_rate,
        fit_radius: gen.fit_radius,
        reference_rate,
        rate_rel_error,
        threshold_check: checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fs_rays_are_arctangents() {
        let m = KahlerModel::cp1_fs();
        for d in [0.1, 0.7, 1.9] {
            let z = ray_point(&m, C64::new(0.0, 0.0), 0.3, d).unwrap();
            assert!((z.norm() - (d / 2f64.sqrt()).tan()).abs() < 1e-12 * (1.0 + z.norm()));
            assert!((z.arg() - 0.3).abs() < 1e-14);
        }
        assert!(ray_point(&m, C64::new(0.0, 0.0), 0.0, 2.3).is_err());
    }

    #[test]
    fn flat_rays_are_straight() {
        let m = KahlerModel::bargmann();
        let z = ray_point(&m, C64::new(0.2, 0.1), PI / 2.0, 0.5).unwrap();
        assert!((z - C64::new(0.2, 0.1 + 0.5 / 2f64.sqrt())).norm() < 1e-13);
    }
}
