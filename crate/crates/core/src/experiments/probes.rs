//! Commutator scaling, degenerate points and the q = 1 leading term.

use crate::asymptotics::poisson_symbol;
use crate::error::{Error, Result};
use crate::geometry::{LocalJets, DEGENERACY_THRESHOLD};
use crate::numkit::C64;
use crate::quantum::{projector_kernel, QuantumBasis};
use crate::symbol::Symbol;
use crate::toeplitz::{assemble, commutator, kernel_value};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorLevel {
    pub k: usize,
    /// `‖[T_f, T_g]‖`.
    pub commutator_norm: f64,
    /// `‖k[T_f, T_g] − i T_{{f,g}}‖`.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub poisson: String,
    pub levels: Vec<CommutatorLevel>,
}

pub fn commutator_law(bases: &[Arc<QuantumBasis>], f: &Symbol, g: &Symbol) -> Result<CommutatorReport> {
    let first = bases
        .first()
        .ok_or_else(|| Error::Invalid("commutator law needs at least one level".into()))?;
    let pb = poisson_symbol(&first.model, f, g)?;
    let i = C64::new(0.0, 1.0);
    let levels = bases
        .iter()
        .map(|b| {
            let c = commutator(&assemble(b, f)?, &assemble(b, g)?)?;
            let tp = assemble(b, &pb)?;
            let d = c.scale(C64::new(b.k as f64, 0.0)).sub(&tp.scale(i))?;
            Ok(CommutatorLevel {
                k: b.k,
                commutator_norm: c.norm()?,
                defect: d.norm()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommutatorReport {
        poisson: pb.name,
        levels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalLevel {
    pub k: usize,
    pub value: C64,
    /// `value / kⁿ`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateProbe {
    pub point: C64,
    pub symbol: String,
    pub det_rdot: f64,
    pub degenerate: bool,
    pub levels: Vec<DiagonalLevel>,
    /// Scaled value at the last level over that at the first.
    pub ratio: Option<f64>,
}

pub fn degenerate_probe(bases: &[Arc<QuantumBasis>], f: &Symbol, x: C64) -> Result<DegenerateProbe> {
    let first = bases
        .first()
        .ok_or_else(|| Error::Invalid("degenerate probe needs at least one level".into()))?;
    let mu = LocalJets::new(&first.model, x, 2)?.mu();
    let n = first.model.chart_dim as i32;
    let levels = bases
        .iter()
        .map(|b| {
            let value = kernel_value(&assemble(b, f)?, x, x);
            Ok(DiagonalLevel {
                k: b.k,
                value,
                scaled: value.re / (b.k as f64).powi(n),
            })
        })
        .collect::<Result<Vec<DiagonalLevel>>>()?;
    let ratio = match (levels.first(), levels.last()) {
        (Some(a), Some(b)) if a.scaled != 0.0 && levels.len() > 1 => Some(b.scaled / a.scaled),
        _ => None,
    };
    Ok(DegenerateProbe {
        point: x,
        symbol: f.name.clone(),
        det_rdot: mu,
        degenerate: mu.abs() <= DEGENERACY_THRESHOLD,
        levels,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandauLevel {
    pub k: usize,
    pub dim: usize,
    /// `dz̄ ⊗ dz̄` component of the kernel diagonal.
    pub dzbar: C64,
    /// `k (2π)^{-1} |det Ṙ^L| f`.
    pub predicted: f64,
    pub rel_error: f64,
    /// Largest retained eigenvalue of the quadratic form.
    pub retained_max: f64,
    pub first_excluded: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandauReport {
    pub point: C64,
    pub symbol: String,
    pub frame: Vec<String>,
    /// Components that vanish because the space consists of `dz̄` forms only.
    pub structural_zeros: Vec<String>,
    pub dz_component: f64,
    pub levels: Vec<LandauLevel>,
}

pub fn landau_leading_check(bases: &[Arc<QuantumBasis>], f: &Symbol, x: C64) -> Result<LandauReport> {
    let first = bases
        .first()
        .ok_or_else(|| Error::Invalid("Landau check needs at least one level".into()))?;
    if first.q != 1 {
        return Err(Error::Invalid("Landau check needs the q = 1 spectral space".into()));
    }
    let mu = LocalJets::new(&first.model, x, 2)?.mu();
    let km = projector_kernel(first, x, x);
    let levels = bases
        .iter()
        .map(|b| {
            let dzbar = kernel_value(&assemble(b, f)?, x, x);
            let predicted = b.k as f64 / (2.0 * PI) * mu.abs() * f.at(x).re;
            Ok(LandauLevel {
                k: b.k,
                dim: b.dim(),
                dzbar,
                predicted,
                rel_error: super::fit::rel_error(dzbar, C64::new(predicted, 0.0)),
                retained_max: b.spectrum.iter().copied().fold(0.0, f64::max),
                first_excluded: b.first_excluded,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LandauReport {
        point: x,
        symbol: f.name.clone(),
        dz_component: 0.0,
        frame: km.frame,
        structural_zeros: km.structural_zeros,
        levels,
    })
}
