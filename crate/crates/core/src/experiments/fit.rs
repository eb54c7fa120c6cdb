//! Expansion fits of measured kernel diagonals.

use crate::asymptotics::{closed_form_coefficients, composition_coefficients, CoefficientSet};
use crate::error::{Error, Result};
use crate::numkit::{least_squares_fit, C64};
use crate::quantum::QuantumBasis;
use crate::symbol::Symbol;
use crate::toeplitz::{assemble, compose, kernel_value};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Smallest denominator in relative errors, so vanishing predictions stay finite.
pub const REL_ERROR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitTarget {
    Point(C64),
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub target: FitTarget,
    pub k_ladder: Vec<usize>,
    pub measured: Vec<C64>,
    /// Fitted powers of `k`, reported ones first, guards last.
    pub exponents: Vec<f64>,
    /// `ĉ_0, ..., ĉ_depth`.
    pub coefficients: Vec<C64>,
    pub guard_coefficients: Vec<C64>,
    pub rms_residual: f64,
    pub predicted: Option<CoefficientSet>,
    /// `|ĉ_j − b_j| / max(|b_j|, REL_ERROR_FLOOR)`.
    pub rel_errors: Vec<f64>,
}

/// Fit `Σ_j c_j k^{n−j}`, `j = 0..=depth + guard`, to complex samples.
pub fn fit_series(
    n: usize,
    ladder: &[usize],
    measured: &[C64],
    depth: usize,
    guard: usize,
) -> Result<(Vec<f64>, Vec<C64>, f64)> {
    if ladder.len() != measured.len() {
        return Err(Error::Dimension(format!(
            "{} levels but {} measurements",
            ladder.len(),
            measured.len()
        )));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("k ladder must be strictly increasing".into()));
    }
    let exps: Vec<f64> = (0..=depth + guard).map(|j| n as f64 - j as f64).collect();
    if ladder.len() < exps.len() + 1 {
        return Err(Error::Underdetermined {
            samples: ladder.len(),
            unknowns: exps.len() + 1,
        });
    }
    let re: Vec<(f64, f64)> = ladder.iter().zip(measured).map(|(&k, v)| (k as f64, v.re)).collect();
    let im: Vec<(f64, f64)> = ladder.iter().zip(measured).map(|(&k, v)| (k as f64, v.im)).collect();
    let fr = least_squares_fit(&re, &exps)?;
    let fi = least_squares_fit(&im, &exps)?;
    let coeffs = fr
        .coefficients
        .iter()
        .zip(&fi.coefficients)
        .map(|(&a, &b)| C64::new(a, b))
        .collect();
    Ok((exps, coeffs, fr.rms_residual.hypot(fi.rms_residual)))
}

pub fn rel_error(measured: C64, predicted: C64) -> f64 {
    (measured - predicted).norm() / predicted.norm().max(REL_ERROR_FLOOR)
}

fn finish(
    target: FitTarget,
    ladder: &[usize],
    measured: Vec<C64>,
    depth: usize,
    guard: usize,
    predicted: Option<CoefficientSet>,
) -> Result<ExpansionFit> {
    let (exponents, all, rms_residual) = fit_series(1, ladder, &measured, depth, guard)?;
    let coefficients = all[..=depth].to_vec();
    let rel_errors = match &predicted {
        Some(p) => coefficients
            .iter()
            .zip(&p.values)
            .map(|(&c, &b)| rel_error(c, b))
            .collect(),
        None => Vec::new(),
    };
    Ok(ExpansionFit {
        target,
        k_ladder: ladder.to_vec(),
        measured,
        exponents,
        guard_coefficients: all[depth + 1..].to_vec(),
        coefficients,
        rms_residual,
        predicted,
        rel_errors,
    })
}

/// Diagonal of `T_f` at `x` on each level, fitted and compared with the closed forms.
pub fn fit_diagonal_expansion(
    bases: &[Arc<QuantumBasis>],
    f: &Symbol,
    x: C64,
    depth: usize,
    guard: usize,
) -> Result<ExpansionFit> {
    let first = bases
        .first()
        .ok_or_else(|| Error::Invalid("expansion fit needs at least one level".into()))?;
    let measured = bases
        .iter()
        .map(|b| Ok(kernel_value(&assemble(b, f)?, x, x)))
        .collect::<Result<Vec<_>>>()?;
    let ladder: Vec<usize> = bases.iter().map(|b| b.k).collect();
    let predicted = closed_form_coefficients(&first.model, f, x, depth)?;
    finish(FitTarget::Point(x), &ladder, measured, depth, guard, Some(predicted))
}

/// Diagonal of `T_f T_g` at `x`, compared with `b_{f,g,j}`.
pub fn fit_composition_expansion(
    bases: &[Arc<QuantumBasis>],
    f: &Symbol,
    g: &Symbol,
    x: C64,
    depth: usize,
    guard: usize,
) -> Result<ExpansionFit> {
    let first = bases
        .first()
        .ok_or_else(|| Error::Invalid("expansion fit needs at least one level".into()))?;
    let measured = bases
        .iter()
        .map(|b| {
            let tf = assemble(b, f)?;
            let tg = assemble(b, g)?;
            Ok(kernel_value(&compose(&tf, &tg)?, x, x))
        })
        .collect::<Result<Vec<_>>>()?;
    let ladder: Vec<usize> = bases.iter().map(|b| b.k).collect();
    let predicted = composition_coefficients(&first.model, f, g, x, depth)?;
    finish(FitTarget::Point(x), &ladder, measured, depth, guard, Some(predicted))
}
