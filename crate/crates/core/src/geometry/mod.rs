//! Model geometries and their curvature data.

mod kcoords;
mod local;
mod model;

pub use kcoords::KCoordinates;
pub use local::{
    d10_covariant, hermitian_pairing, laplacian_omega, omega_form, FormDegree, FormValue, LocalJets,
    DEGENERACY_THRESHOLD,
};
pub use model::{KahlerModel, ModelKind, Perturbation};

use crate::error::Result;
use crate::numkit::C64;
use serde::{Deserialize, Serialize};

/// Which `M(j)` a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureClass {
    /// Number of negative eigenvalues of `Ṙ^L`.
    M(usize),
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub point: C64,
    pub rdot_eigs: Vec<f64>,
    pub det_rdot: f64,
    pub signature_class: SignatureClass,
    /// `ω_11`.
    pub omega_coeffs: Vec<f64>,
    pub v_omega: f64,
    pub v_theta: f64,
    pub r: Option<f64>,
    pub r_hat: Option<f64>,
    pub ric_omega: Option<FormValue>,
    pub r_det_theta: FormValue,
    pub rtm_norm_sq: Option<f64>,
}

pub fn curvature_report(model: &KahlerModel, x: C64) -> Result<CurvatureReport> {
    let lj = LocalJets::new(model, x, 4)?;
    let mu = lj.mu();
    let signature_class = if mu.abs() <= DEGENERACY_THRESHOLD {
        SignatureClass::Degenerate
    } else if mu < 0.0 {
        SignatureClass::M(1)
    } else {
        SignatureClass::M(0)
    };
    let r_det_theta = FormValue::new(FormDegree::OneOne, lj.rdet().value());
    let nondegenerate = signature_class != SignatureClass::Degenerate;
    let (r, r_hat, ric_omega, rtm_norm_sq) = if nondegenerate {
        let ric = lj.ric().value();
        // R^TM = −Ric in dimension one.
        let rtm = lj.pair11(-ric, -ric).re;
        (
            Some(lj.r().value().re),
            Some(lj.r_hat().value().re),
            Some(FormValue::new(FormDegree::OneOne, ric)),
            Some(rtm),
        )
    } else {
        (None, None, None, None)
    };
    Ok(CurvatureReport {
        point: x,
        rdot_eigs: vec![mu],
        det_rdot: mu,
        signature_class,
        omega_coeffs: vec![lj.omega_value()],
        v_omega: lj.omega_value(),
        v_theta: lj.theta.value().re,
        r,
        r_hat,
        ric_omega,
        r_det_theta,
        rtm_norm_sq,
    })
}
