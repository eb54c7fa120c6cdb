//! Weyl trace law and total volumes.

use crate::error::{Error, Result};
use crate::geometry::{KahlerModel, LocalJets};
use crate::numkit::sum::pairwise_sum;
use crate::numkit::{QuadratureDescriptor, QuadratureRule};
use crate::quantum::QuantumBasis;
use crate::symbol::Symbol;
use crate::toeplitz::{assemble, trace, weighted_trace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylLevel {
    pub k: usize,
    /// Sum of the matrix diagonal.
    pub trace: f64,
    /// `∫ f P(x, x) dv` on the quadrature grid.
    pub quadrature_trace: f64,
    /// `(Tr T_f − kⁿ I_f) / kⁿ`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    /// `(2π)^{-n} ∫ f |det Ṙ^L| dv_M`.
    pub integral: f64,
    pub integral_rule: QuadratureDescriptor,
    pub levels: Vec<WeylLevel>,
}

/// Rule for curvature integrals: a fixed sphere rule on compact models, the
/// largest level's disc otherwise.
pub fn integration_rule(model: &KahlerModel, largest: Option<&QuantumBasis>) -> Result<QuadratureRule> {
    if model.kind.is_compact() {
        return Ok(QuadratureRule::sphere(128, 256, |z| model.theta_at(z)));
    }
    match largest.map(|b| b.grid.descriptor) {
        Some(QuadratureDescriptor::PolarDisc {
            radius,
            radial,
            angular,
        }) => Ok(QuadratureRule::disc(radius, radial, angular, |z| model.theta_at(z))),
        _ => Err(Error::Invalid(format!(
            "curvature integrals on {} need a disc grid",
            model.kind
        ))),
    }
}

/// `(2π)^{-1} ∫ f |μ| dv` with `μ` the eigenvalue of `Ṙ^L`.
pub fn curvature_integral(model: &KahlerModel, rule: &QuadratureRule, f: &Symbol, signed: bool) -> Result<f64> {
    let vals: Vec<f64> = rule
        .nodes
        .par_iter()
        .map(|&z| {
            let mu = LocalJets::new(model, z, 2)?.mu();
            Ok(f.at(z).re * if signed { mu } else { mu.abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<f64> = vals.iter().zip(&rule.weights).map(|(v, w)| v * w).collect();
    Ok(pairwise_sum(&terms) / (2.0 * PI))
}

pub fn weyl_trace_check(bases: &[Arc<QuantumBasis>], f: &Symbol) -> Result<WeylReport> {
    let last = bases
        .last()
        .ok_or_else(|| Error::Invalid("Weyl check needs at least one level".into()))?;
    let model = &last.model;
    let rule = integration_rule(model, Some(last))?;
    let integral = curvature_integral(model, &rule, f, false)?;
    let n = model.chart_dim as i32;
    let levels = bases
        .iter()
        .map(|b| {
            let op = assemble(b, f)?;
            let tr = trace(&op);
            let kn = (b.k as f64).powi(n);
            Ok(WeylLevel {
                k: b.k,
                trace: tr,
                quadrature_trace: weighted_trace(b, f),
                deviation: (tr - kn * integral) / kn,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeylReport {
        integral,
        integral_rule: rule.descriptor,
        levels,
    })
}
