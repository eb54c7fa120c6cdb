//! Jets of the metric data at a point and the tensor calculus built on them.
//!
//! With `ω = (i/2π) R^L` and `R^L = 2∂∂̄φ`, the single metric coefficient is
//! `ω_11 = φ_{zz̄}/π`, `h^{11} = 1/ω_11` and `△_ω = −2 h^{11} ∂_z ∂_z̄`.
//! Forms are stored by their coefficient against `dz`, `dz̄`, `dz∧dz̄` or
//! `dz⊗dz`; pairings contract with `h^{11}` once per covector.

use super::model::KahlerModel;
use crate::error::{Error, Result};
use crate::numkit::{Jet, C64};
use crate::symbol::Expr;
use std::f64::consts::PI;

/// `|μ| ≤ DEGENERACY_THRESHOLD` puts a point in the degenerate set.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct LocalJets {
    pub x: C64,
    pub order: usize,
    pub phi: Jet,
    pub theta: Jet,
    /// `φ_{zz̄}`, valid to order `order - 2`.
    pub phi_zzb: Jet,
    /// `ω_11`, valid to order `order - 2`.
    pub omega: Jet,
}

impl LocalJets {
    pub fn new(model: &KahlerModel, x: C64, order: usize) -> Result<Self> {
        let phi = model.weight.jet(x, order)?;
        let theta = model.theta.jet(x, order)?;
        let t0 = theta.value();
        if !(t0.re > 0.0) || t0.im.abs() > 1e-12 * t0.re.abs().max(1.0) {
            return Err(Error::Geometry(format!(
                "base form not positive definite at z = {x}: Θ_11 = {t0}"
            )));
        }
        let phi_zzb = phi.derivative(0).derivative(1);
        let omega = phi_zzb.scale(C64::new(1.0 / PI, 0.0));
        Ok(Self {
            x,
            order,
            phi,
            theta,
            phi_zzb,
            omega,
        })
    }

    /// Eigenvalue of `Ṙ^L`: `2 φ_{zz̄} / Θ_11`.
    pub fn mu(&self) -> f64 {
        2.0 * self.phi_zzb.value().re / self.theta.value().re
    }

    pub fn omega_value(&self) -> f64 {
        self.omega.value().re
    }

    /// Fails unless the point lies in M(0).
    pub fn require_positive(&self) -> Result<()> {
        let mu = self.mu();
        if mu > DEGENERACY_THRESHOLD {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "z = {} is not in M(0): curvature eigenvalue {mu:e}",
                self.x
            )))
        }
    }

    fn require_nondegenerate(&self) -> Result<()> {
        if self.mu().abs() > DEGENERACY_THRESHOLD {
            Ok(())
        } else {
            Err(Error::Geometry(format!("ω is degenerate at z = {}", self.x)))
        }
    }

    /// `h^{11}` at the base point.
    pub fn h_inv(&self) -> f64 {
        1.0 / self.omega_value()
    }

    pub fn jet_of(&self, f: &Expr) -> Result<Jet> {
        f.jet(self.x, self.order)
    }

    /// `△_ω f` as a jet; loses two orders of validity.
    pub fn laplacian(&self, f: &Jet) -> Jet {
        let fzz = f.derivative(0).derivative(1);
        (fzz / self.omega.clone()).scale(C64::new(-2.0, 0.0))
    }

    /// `Ric_ω = (log ω_11)_{zz̄} dz∧dz̄`.
    pub fn ric(&self) -> Jet {
        self.omega.ln().derivative(0).derivative(1)
    }

    /// `R^det_Θ = −∂̄∂ log V_Θ = (log Θ_11)_{zz̄} dz∧dz̄`.
    pub fn rdet(&self) -> Jet {
        self.theta.ln().derivative(0).derivative(1)
    }

    /// `r = △_ω log V_ω`.
    pub fn r(&self) -> Jet {
        self.laplacian(&self.omega.ln())
    }

    /// `r̂ = △_ω log V_Θ`.
    pub fn r_hat(&self) -> Jet {
        self.laplacian(&self.theta.ln())
    }

    /// `α = −∂_z log ω_11`, the connection form of `T^{*1,0}` against `dz`.
    pub fn connection(&self) -> Jet {
        -self.omega.ln().derivative(0)
    }

    /// Coefficient of `D^{1,0}(u dz)` against `dz⊗dz`.
    pub fn d10(&self, u: &Jet) -> Jet {
        u.derivative(0) + u * &self.connection()
    }

    /// Pairing of two (1,1)-form coefficients at the base point.
    pub fn pair11(&self, a: C64, b: C64) -> C64 {
        let h = self.h_inv();
        a * b.conj() * h * h
    }

    /// Pairing of (1,0)- or (0,1)-form coefficients at the base point.
    pub fn pair1(&self, a: C64, b: C64) -> C64 {
        a * b.conj() * self.h_inv()
    }

    /// Pairing of `dz⊗dz` coefficients at the base point.
    pub fn pair2(&self, a: C64, b: C64) -> C64 {
        self.pair11(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FormDegree {
    /// (0,0)
    Function,
    /// (1,0), against `dz`
    OneZero,
    /// (0,1), against `dz̄`
    ZeroOne,
    /// (1,1), against `dz∧dz̄`
    OneOne,
    /// (1,0)⊗(1,0), against `dz⊗dz`
    OneZeroSquared,
}

impl FormDegree {
    pub fn bidegree(self) -> (usize, usize) {
        match self {
            FormDegree::Function => (0, 0),
            FormDegree::OneZero => (1, 0),
            FormDegree::ZeroOne => (0, 1),
            FormDegree::OneOne => (1, 1),
            FormDegree::OneZeroSquared => (2, 0),
        }
    }

    /// Number of `h^{11}` factors in the pointwise pairing.
    fn covector_count(self) -> i32 {
        let (p, q) = self.bidegree();
        (p + q) as i32
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FormValue {
    pub degree: FormDegree,
    /// One component per basis element; a single entry in dimension one.
    pub coefficients: Vec<C64>,
}

impl FormValue {
    pub fn new(degree: FormDegree, c: C64) -> Self {
        Self {
            degree,
            coefficients: vec![c],
        }
    }

    pub fn coefficient(&self) -> C64 {
        self.coefficients[0]
    }
}

/// `ω` itself as a (1,1)-form at `x`.
pub fn omega_form(model: &KahlerModel, x: C64) -> Result<FormValue> {
    let lj = LocalJets::new(model, x, 2)?;
    Ok(FormValue::new(FormDegree::OneOne, C64::new(0.0, lj.omega_value())))
}

/// `⟨a|b⟩_ω` at `x`.
pub fn hermitian_pairing(model: &KahlerModel, a: &FormValue, b: &FormValue, x: C64) -> Result<C64> {
    if a.degree != b.degree {
        return Err(Error::Geometry(format!(
            "cannot pair forms of bidegree {:?} and {:?}",
            a.degree.bidegree(),
            b.degree.bidegree()
        )));
    }
    if a.coefficients.len() != model.chart_dim || b.coefficients.len() != model.chart_dim {
        return Err(Error::Dimension(
            "form coefficients do not match the chart dimension".into(),
        ));
    }
    let lj = LocalJets::new(model, x, 2)?;
    lj.require_positive()?;
    let h = lj.h_inv().powi(a.degree.covector_count());
    Ok(a.coefficient() * b.coefficient().conj() * h)
}

/// `△_ω f(x)` or `△_ω △_ω f(x)`.
pub fn laplacian_omega(model: &KahlerModel, f: &Expr, x: C64, iterations: usize) -> Result<f64> {
    if !(1..=2).contains(&iterations) {
        return Err(Error::Invalid(format!(
            "laplacian iterations must be 1 or 2, got {iterations}"
        )));
    }
    let order = 2 * iterations;
    let lj = LocalJets::new(model, x, order)?;
    lj.require_nondegenerate()?;
    lj.require_positive()?;
    let mut g = lj.jet_of(f)?;
    for _ in 0..iterations {
        g = lj.laplacian(&g);
    }
    Ok(g.value().re)
}

/// `D^{1,0}(u dz)` at `x` for a closed-form coefficient `u`.
pub fn d10_covariant(model: &KahlerModel, u: &Expr, x: C64) -> Result<FormValue> {
    let lj = LocalJets::new(model, x, 3)?;
    lj.require_positive()?;
    let uj = lj.jet_of(u)?;
    Ok(FormValue::new(FormDegree::OneZeroSquared, lj.d10(&uj).value()))
}
