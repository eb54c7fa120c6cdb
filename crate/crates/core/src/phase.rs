//! Phase functions `Ψ(z, w)` in K-coordinates around a center.

use crate::error::{Error, Result};
use crate::geometry::{KCoordinates, KahlerModel};
use crate::numkit::{Jet, C64};
use serde::{Deserialize, Serialize};

/// Default Taylor order of the stored weight jets.
pub const DEFAULT_TAYLOR_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    Quadratic,
    Polarized,
}

#[derive(Debug, Clone)]
pub struct PhaseModel {
    pub center: C64,
    pub lambda: Vec<f64>,
    /// Weight jets in K-coordinates, when built from a model.
    pub phi_jets: Option<Jet>,
    pub mode: PhaseMode,
    pub form_degree: usize,
    kcoords: Option<KCoordinates>,
}

impl PhaseModel {
    /// Quadratic phase with a given `λ`, K-coordinates equal to the chart.
    pub fn quadratic(center: C64, lambda: f64) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::Geometry("phase model needs λ ≠ 0".into()));
        }
        Ok(Self {
            center,
            lambda: vec![lambda],
            phi_jets: None,
            mode: PhaseMode::Quadratic,
            form_degree: 0,
            kcoords: None,
        })
    }

    /// Recentre `model` at `p` and store the weight jets to `order`.
    pub fn from_model(model: &KahlerModel, p: C64, mode: PhaseMode, order: usize) -> Result<Self> {
        let q = model.kind.form_degree();
        if mode == PhaseMode::Polarized && q != 0 {
            return Err(Error::Invalid(
                "the polarized phase is only defined for holomorphic sections (q = 0)".into(),
            ));
        }
        let kc = KCoordinates::new(model, p, order)?;
        Ok(Self {
            center: p,
            lambda: vec![kc.lambda],
            phi_jets: Some(kc.phi.clone()),
            mode,
            form_degree: q,
            kcoords: Some(kc),
        })
    }

    pub fn kcoords(&self) -> Option<&KCoordinates> {
        self.kcoords.as_ref()
    }

    /// K-coordinate of a chart point.
    pub fn to_local(&self, x: C64) -> Result<C64> {
        let Some(kc) = &self.kcoords else {
            return Ok(x - self.center);
        };
        let b1 = kc.map[0];
        let mut w = (x - kc.center) / b1;
        for _ in 0..60 {
            let mut val = kc.center;
            let mut der = C64::new(0.0, 0.0);
            let mut pw = C64::new(1.0, 0.0);
            for (j, b) in kc.map.iter().enumerate() {
                der += b * pw * (j + 1) as f64;
                pw *= w;
                val += b * pw;
            }
            let step = (val - x) / der;
            w -= step;
            if step.norm() <= 1e-15 * (1.0 + w.norm()) {
                return Ok(w);
            }
        }
        Err(Error::Domain(format!(
            "chart point {x} is outside the K-coordinate patch"
        )))
    }

    /// `Im g(w)` of the frame change, zero for bare quadratic models.
    pub fn frame_phase(&self, w: C64) -> f64 {
        self.kcoords.as_ref().map_or(0.0, |kc| kc.frame_at(w).im)
    }

    /// Evaluate in the configured mode at K-coordinates `z`, `w`.
    pub fn psi(&self, z: C64, w: C64) -> Result<C64> {
        match self.mode {
            PhaseMode::Quadratic => Ok(psi_quadratic(self, z, w)),
            PhaseMode::Polarized => psi_polarized(self, z, w, self.stored_order()),
        }
    }

    pub fn stored_order(&self) -> usize {
        self.phi_jets.as_ref().map_or(2, |j| j.order())
    }
}

/// `i Σ|λ_j||z_j − w_j|^2 + i Σ λ_j (z̄_j w_j − z_j w̄_j)`.
pub fn psi_quadratic(pm: &PhaseModel, z: C64, w: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let lambda = pm.lambda[0];
    let d = z - w;
    i * lambda.abs() * d.norm_sqr() + i * lambda * (z.conj() * w - z * w.conj())
}

/// `i(φ_N(z) + φ_N(w)) − 2i Σ_{a+b≤N} φ_{ab} z^a w̄^b` with `φ_{ab}` the
/// Taylor coefficients of the weight in K-coordinates.
pub fn psi_polarized(pm: &PhaseModel, z: C64, w: C64, order: usize) -> Result<C64> {
    if pm.form_degree != 0 {
        return Err(Error::Invalid("polarized phase requires q = 0".into()));
    }
    let phi = match &pm.phi_jets {
        Some(j) => j,
        None => {
            if order > 2 {
                return Err(Error::MissingJets(format!(
                    "polarized phase of order {order} needs stored weight jets"
                )));
            }
            let i = C64::new(0.0, 1.0);
            let l = pm.lambda[0];
            return Ok(i * l * (z.norm_sqr() + w.norm_sqr() - 2.0 * z * w.conj()));
        }
    };
    if order > phi.order() {
        return Err(Error::MissingJets(format!(
            "polarized phase of order {order} but weight jets stored to order {}",
            phi.order()
        )));
    }
    let pol = |a: C64, b: C64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (e, &c) in phi.space().exponents().iter().zip(phi.coeffs()) {
            if (e[0] + e[1]) as usize > order {
                continue;
            }
            acc += c * a.powu(e[0] as u32) * b.powu(e[1] as u32);
        }
        acc
    };
    let i = C64::new(0.0, 1.0);
    let pz = pol(z, z.conj()).re;
    let pw = pol(w, w.conj()).re;
    // Symmetrize the cross term so that Ψ(z,w) = −conj Ψ(w,z) holds to rounding.
    let cross = 0.5 * (pol(z, w.conj()) + pol(w, z.conj()).conj());
    Ok(i * (pz + pw) - 2.0 * i * cross)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::KahlerModel;

    #[test]
    fn quadratic_basics() {
        let pm = PhaseModel::quadratic(C64::new(0.0, 0.0), 0.5).unwrap();
        let v = psi_quadratic(&pm, C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        assert!((v - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert_eq!(
            psi_quadratic(&pm, C64::new(0.3, 0.1), C64::new(0.3, 0.1)),
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn polarized_bargmann_is_exact() {
        let pm = PhaseModel::from_model(&KahlerModel::bargmann(), C64::new(0.0, 0.0), PhaseMode::Polarized, 8).unwrap();
        let z = C64::new(0.2, -0.1);
        let w = C64::new(-0.05, 0.15);
        let i = C64::new(0.0, 1.0);
        let expect = i * (0.5 * z.norm_sqr() + 0.5 * w.norm_sqr() - z * w.conj());
        assert!((psi_polarized(&pm, z, w, 8).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn polarized_rejected_for_forms() {
        let r = PhaseModel::from_model(&KahlerModel::landau_q1(), C64::new(0.0, 0.0), PhaseMode::Polarized, 8);
        assert!(r.is_err());
    }

    #[test]
    fn order_beyond_jets() {
        let pm = PhaseModel::from_model(&KahlerModel::cp1_fs(), C64::new(0.0, 0.0), PhaseMode::Polarized, 6).unwrap();
        assert!(matches!(
            psi_polarized(&pm, C64::new(0.1, 0.0), C64::new(0.0, 0.0), 8),
            Err(Error::MissingJets(_))
        ));
    }

    #[test]
    fn local_inverse() {
        let model = KahlerModel::cp1_fs().perturbed(0.1);
        let pm = PhaseModel::from_model(&model, C64::new(0.3, 0.2), PhaseMode::Polarized, 8).unwrap();
        let w = C64::new(0.05, -0.12);
        let x = pm.kcoords().unwrap().chart_point(w);
        assert!((pm.to_local(x).unwrap() - w).norm() < 1e-13);
    }
}
