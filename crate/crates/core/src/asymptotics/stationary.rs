//! Hörmander's stationary phase formula evaluated on Taylor jets.
//!
//! For `∫ e^{ikF(x)} u(x) V(x) dx` over `R^d` (Lebesgue measure) with a
//! nondegenerate critical point of `F` at the origin:
//!
//! ```text
//! e^{ikF(0)} det(kF''(0)/2πi)^{-1/2} Σ_{j<N} k^{-j} L_j u
//! L_j u = Σ_{ν-μ=j, 2ν≥3μ} i^{-j} 2^{-ν} ⟨F''(0)^{-1}D, D⟩^ν (h^μ V u)(0) / (ν! μ!)
//! ```
//!
//! with `D = -i∂` and `h = F - F(0) - ½⟨F''(0)x, x⟩`.

use crate::error::{Error, Result};
use crate::numkit::{Jet, C64, MAX_JET_ORDER};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct StationaryPhaseProblem {
    /// Real dimension of the integration domain.
    pub dim: usize,
    pub f_jets: Jet,
    pub u_jets: Jet,
    pub v_jets: Jet,
    /// Cubic-and-higher remainder of `F`.
    pub h_jets: Jet,
    hessian: Vec<Vec<C64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPhaseResult {
    pub value: C64,
    /// `L_0 u, ..., L_{N-1} u`.
    pub terms: Vec<C64>,
    /// `e^{ikF(0)} det(kF''(0)/2πi)^{-1/2}`.
    pub prefactor: C64,
}

impl StationaryPhaseProblem {
    /// All three jets must live in the same real-variable space.
    pub fn new(f: Jet, u: Jet, v: Jet) -> Result<Self> {
        let space = f.space().clone();
        if !std::sync::Arc::ptr_eq(&space, u.space()) || !std::sync::Arc::ptr_eq(&space, v.space()) {
            return Err(Error::Dimension(
                "phase, amplitude and density jets must share a space".into(),
            ));
        }
        let dim = space.nvars();
        if !(1..=2).contains(&dim) {
            return Err(Error::Dimension(format!(
                "stationary phase is implemented for real dimension 1 or 2, got {dim}"
            )));
        }
        let scale = f.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
        if f.value().im.abs() > 1e-12 * scale {
            return Err(Error::Invalid(format!("Im F(0) = {} must vanish", f.value().im)));
        }
        for a in 0..dim {
            let mut e = vec![0; dim];
            e[a] = 1;
            if f.taylor(&e).norm() > 1e-12 * scale {
                return Err(Error::Invalid("F'(0) must vanish".into()));
            }
        }
        let hessian: Vec<Vec<C64>> = (0..dim)
            .map(|a| {
                (0..dim)
                    .map(|b| {
                        let mut e = vec![0; dim];
                        e[a] += 1;
                        e[b] += 1;
                        f.partial(&e)
                    })
                    .collect()
            })
            .collect();
        if determinant(&hessian).norm() <= 1e-14 * scale.powi(dim as i32) {
            return Err(Error::Invalid("F''(0) is singular".into()));
        }
        let mut hc = f.coeffs().to_vec();
        for (i, e) in space.exponents().iter().enumerate() {
            if e.iter().map(|&a| a as usize).sum::<usize>() <= 2 {
                hc[i] = C64::new(0.0, 0.0);
            }
        }
        let h_jets = Jet::from_coeffs(&space, hc)?;
        Ok(Self {
            dim,
            f_jets: f,
            u_jets: u,
            v_jets: v,
            h_jets,
            hessian,
        })
    }

    pub fn hessian(&self) -> &[Vec<C64>] {
        &self.hessian
    }

    /// Jet order needed for `N` terms.
    pub fn required_order(n_terms: usize) -> usize {
        if n_terms == 0 {
            0
        } else {
            // ν_max = j + μ_max with μ_max = 2j, j = N - 1.
            6 * (n_terms - 1)
        }
    }

    /// `⟨F''(0)^{-1}D, D⟩ g = −Σ (F''^{-1})_{ab} ∂_a ∂_b g`.
    fn apply_operator(&self, g: &Jet, inv: &[Vec<C64>]) -> Jet {
        let mut out = Jet::zero(g.space());
        for (a, row) in inv.iter().enumerate() {
            let ga = g.derivative(a);
            for (b, &m) in row.iter().enumerate() {
                if m == C64::new(0.0, 0.0) {
                    continue;
                }
                out = out - ga.derivative(b).scale(m);
            }
        }
        out
    }

    /// `L_j u` for `j < n_terms`.
    pub fn terms(&self, n_terms: usize) -> Result<Vec<C64>> {
        let need = Self::required_order(n_terms);
        let have = self.f_jets.order().min(self.u_jets.order()).min(self.v_jets.order());
        if need > have {
            if need > MAX_JET_ORDER {
                return Err(Error::UnsupportedOrder {
                    requested: need,
                    max: MAX_JET_ORDER,
                });
            }
            return Err(Error::MissingJets(format!(
                "{n_terms} stationary-phase terms need jets of order {need}, have {have}"
            )));
        }
        let inv = inverse(&self.hessian);
        let vu = &self.v_jets * &self.u_jets;
        let i = C64::new(0.0, 1.0);
        let mut out = Vec::with_capacity(n_terms);
        for j in 0..n_terms {
            let mut acc = C64::new(0.0, 0.0);
            for mu in 0..=2 * j {
                let nu = j + mu;
                if 2 * nu < 3 * mu {
                    continue;
                }
                let mut g = self.h_jets.powi(mu as i32) * vu.clone();
                for _ in 0..nu {
                    g = self.apply_operator(&g, &inv);
                }
                acc += g.value() * 0.5f64.powi(nu as i32) / (factorial(nu) * factorial(mu));
            }
            out.push(acc * i.powi(-(j as i32)));
        }
        Ok(out)
    }

    /// `e^{ikF(0)} det(kF''/2πi)^{-1/2}` with principal square roots per eigenvalue.
    pub fn prefactor(&self, k: f64) -> C64 {
        let i = C64::new(0.0, 1.0);
        let scaled: Vec<Vec<C64>> = self
            .hessian
            .iter()
            .map(|row| row.iter().map(|&x| x * k / (2.0 * PI * i)).collect())
            .collect();
        let inv_sqrt: C64 = eigenvalues(&scaled).into_iter().map(|l| 1.0 / l.sqrt()).product();
        (i * k * self.f_jets.value()).exp() * inv_sqrt
    }
}

pub fn stationary_phase_terms(p: &StationaryPhaseProblem, k: f64, n_terms: usize) -> Result<StationaryPhaseResult> {
    let terms = p.terms(n_terms)?;
    let prefactor = p.prefactor(k);
    let mut sum = C64::new(0.0, 0.0);
    for (j, t) in terms.iter().enumerate() {
        sum += t * k.powi(-(j as i32));
    }
    Ok(StationaryPhaseResult {
        value: prefactor * sum,
        terms,
        prefactor,
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

fn determinant(m: &[Vec<C64>]) -> C64 {
    match m.len() {
        1 => m[0][0],
        _ => m[0][0] * m[1][1] - m[0][1] * m[1][0],
    }
}

fn inverse(m: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let d = determinant(m);
    match m.len() {
        1 => vec![vec![1.0 / d]],
        _ => vec![vec![m[1][1] / d, -m[0][1] / d], vec![-m[1][0] / d, m[0][0] / d]],
    }
}

/// Eigenvalues of a 1x1 or 2x2 complex matrix.
fn eigenvalues(m: &[Vec<C64>]) -> Vec<C64> {
    match m.len() {
        1 => vec![m[0][0]],
        _ => {
            let tr = m[0][0] + m[1][1];
            let det = determinant(m);
            let disc = (tr * tr - 4.0 * det).sqrt();
            vec![(tr + disc) / 2.0, (tr - disc) / 2.0]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::JetSpace;

    fn gaussian(order: usize) -> (Jet, Jet, Jet) {
        let s = JetSpace::shared(2, order).unwrap();
        let i = C64::new(0.0, 1.0);
        let f = Jet::from_terms(&s, &[(vec![2, 0], i), (vec![0, 2], i)]);
        (
            f,
            Jet::constant(&s, C64::new(1.0, 0.0)),
            Jet::constant(&s, C64::new(1.0, 0.0)),
        )
    }

    #[test]
    fn gaussian_integral() {
        let (f, u, v) = gaussian(2);
        let p = StationaryPhaseProblem::new(f, u, v).unwrap();
        for k in [1.0, 7.5, 40.0] {
            let r = stationary_phase_terms(&p, k, 1).unwrap();
            assert!((r.value - C64::new(PI / k, 0.0)).norm() < 1e-14 * PI / k);
        }
    }

    #[test]
    fn gaussian_moments() {
        // ∫ e^{-k|x|^2} (1 + x1^2 + 3 x1 x2 - 2 x2^2) dx = π/k (1 + 1/(2k) - 1/k)
        let (f, _, v) = gaussian(6);
        let s = f.space().clone();
        let u = Jet::from_terms(
            &s,
            &[
                (vec![0, 0], C64::new(1.0, 0.0)),
                (vec![2, 0], C64::new(1.0, 0.0)),
                (vec![1, 1], C64::new(3.0, 0.0)),
                (vec![0, 2], C64::new(-2.0, 0.0)),
            ],
        );
        let p = StationaryPhaseProblem::new(f, u, v).unwrap();
        let k = 3.0;
        let r = stationary_phase_terms(&p, k, 2).unwrap();
        let exact = PI / k * (1.0 - 0.5 / k);
        assert!((r.value - C64::new(exact, 0.0)).norm() < 1e-12 * exact);
    }

    #[test]
    fn order_error_names_requirement() {
        let (f, u, v) = gaussian(4);
        let p = StationaryPhaseProblem::new(f, u, v).unwrap();
        match p.terms(3) {
            Err(Error::MissingJets(m)) => assert!(m.contains("order 12")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_phase() {
        let s = JetSpace::shared(2, 2).unwrap();
        let f = Jet::from_terms(
            &s,
            &[(vec![1, 0], C64::new(1.0, 0.0)), (vec![2, 0], C64::new(0.0, 1.0))],
        );
        let one = Jet::constant(&s, C64::new(1.0, 0.0));
        assert!(StationaryPhaseProblem::new(f, one.clone(), one).is_err());
    }
}
