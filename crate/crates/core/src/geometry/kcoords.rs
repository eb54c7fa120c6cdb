//! Recentred holomorphic coordinates in which the weight has no pure or
//! `w^a w̄` terms beyond `λ|w|^2` and the base form is Euclidean at the center.
//!
//! The chart map is `Z(w) = p + Σ_{j≥1} b_j w^j` and the local frame is
//! multiplied by `e^{g(w)}` with `g` holomorphic, so the new weight is
//! `φ̃(w) = φ(Z(w)) − Re g(w)`.

use super::model::KahlerModel;
use crate::error::{Error, Result};
use crate::numkit::{Jet, JetSpace, C64};
use crate::symbol::Expr;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct KCoordinates {
    pub center: C64,
    /// Coefficients `b_1, b_2, ...` of `Z(w) − p`.
    pub map: Vec<C64>,
    /// Coefficients `g_0, g_1, ...` of the frame change.
    pub frame: Vec<C64>,
    pub lambda: f64,
    pub order: usize,
    /// `φ̃` in the variables `(w, w̄)`.
    pub phi: Jet,
    /// `φ̃ − λ|w|^2`.
    pub phi1: Jet,
    /// `V_Θ = Θ_11(Z(w)) |Z'(w)|^2`.
    pub v_theta: Jet,
}

impl KCoordinates {
    pub fn new(model: &KahlerModel, p: C64, order: usize) -> Result<Self> {
        let space = JetSpace::shared(2, order)?;
        let theta0 = model.theta_at(p);
        if !(theta0 > 0.0) {
            return Err(Error::Geometry(format!("base form not positive at z = {p}")));
        }
        let c = theta0.powf(-0.5);
        let mut map = vec![C64::new(0.0, 0.0); order.max(1)];
        map[0] = C64::new(c, 0.0);

        let pull = |map: &[C64]| -> Jet {
            let (z, zb) = chart_jets(&space, p, map);
            model.weight.eval(&z, &zb)
        };

        let f = pull(&map);
        let lambda = f.taylor(&[1, 1]).re;
        if lambda.abs() <= 1e-12 {
            return Err(Error::Geometry(format!(
                "K-coordinates need nondegenerate curvature; λ = {lambda:e} at z = {p}"
            )));
        }
        for a in 2..order {
            let f = pull(&map);
            let coeff = f.taylor(&[a, 1]);
            map[a - 1] -= coeff * c / lambda;
        }

        let f = pull(&map);
        let mut frame = vec![C64::new(0.0, 0.0); order + 1];
        frame[0] = f.taylor(&[0, 0]);
        for (a, g) in frame.iter_mut().enumerate().skip(1) {
            *g = f.taylor(&[a, 0]) * 2.0;
        }
        let mut coeffs = f.coeffs().to_vec();
        for (i, e) in space.exponents().iter().enumerate() {
            if e[0] == 0 || e[1] == 0 {
                coeffs[i] = C64::new(0.0, 0.0);
            }
        }
        let phi = Jet::from_coeffs(&space, coeffs)?;
        let lambda = phi.taylor(&[1, 1]).re;
        let phi1 = phi.clone() - Jet::from_terms(&space, &[(vec![1, 1], C64::new(lambda, 0.0))]);

        let (z, zb) = chart_jets(&space, p, &map);
        let dz = z.derivative(0);
        let dzb = zb.derivative(1);
        let v_theta = model.theta.eval(&z, &zb) * dz * dzb;

        Ok(Self {
            center: p,
            map,
            frame,
            lambda,
            order,
            phi,
            phi1,
            v_theta,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.phi.space()
    }

    /// `(Z(w), conj Z(w))` as jets in `(w, w̄)`.
    pub fn z_jets(&self) -> (Jet, Jet) {
        chart_jets(self.space(), self.center, &self.map)
    }

    /// `f ∘ Z` as a jet in `(w, w̄)`.
    pub fn pull_back(&self, f: &Expr) -> Jet {
        let (z, zb) = self.z_jets();
        f.eval(&z, &zb)
    }

    /// Chart point `Z(w)` from the truncated map.
    pub fn chart_point(&self, w: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut pw = w;
        for b in &self.map {
            acc += b * pw;
            pw *= w;
        }
        self.center + acc
    }

    /// Holomorphic frame change `g(w)`.
    pub fn frame_at(&self, w: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut pw = C64::new(1.0, 0.0);
        for g in &self.frame {
            acc += g * pw;
            pw *= w;
        }
        acc
    }

    /// `g` as a one-variable jet in `w`.
    pub fn frame_jet(&self, space: &Arc<JetSpace>) -> Jet {
        let terms: Vec<(Vec<usize>, C64)> = self.frame.iter().enumerate().map(|(a, &g)| (vec![a], g)).collect();
        Jet::from_terms(space, &terms)
    }

    /// `Z(w)` as a one-variable jet in `w`.
    pub fn map_jet(&self, space: &Arc<JetSpace>) -> Jet {
        let mut terms = vec![(vec![0], self.center)];
        terms.extend(self.map.iter().enumerate().map(|(j, &b)| (vec![j + 1], b)));
        Jet::from_terms(space, &terms)
    }

    /// Eigenvalue `μ = 2λ` of `Ṙ^L` at the center.
    pub fn mu(&self) -> f64 {
        2.0 * self.lambda
    }
}

fn chart_jets(space: &Arc<JetSpace>, p: C64, map: &[C64]) -> (Jet, Jet) {
    let mut zt = vec![(vec![0, 0], p)];
    let mut zbt = vec![(vec![0, 0], p.conj())];
    for (j, &b) in map.iter().enumerate() {
        zt.push((vec![j + 1, 0], b));
        zbt.push((vec![0, j + 1], b.conj()));
    }
    (Jet::from_terms(space, &zt), Jet::from_terms(space, &zbt))
}
