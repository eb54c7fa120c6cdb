//! The stationary phase engine against adaptive quadrature in the plane.

use super::config::PhaseKind;
use crate::asymptotics::{stationary_phase_terms, StationaryPhaseProblem};
use crate::error::{Error, Result};
use crate::numkit::{Jet, JetSpace, C64};
use crate::symbol::Expr;
use serde::{Deserialize, Serialize};

const QUADRATIC_AMPLITUDE: &str = "1 + ((z + zbar)/2)^2 + 3*((z + zbar)/2)*(-i*(z - zbar)/2) - 2*(-i*(z - zbar)/2)^2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseLevel {
    pub k: f64,
    pub engine: C64,
    pub quadrature: C64,
    pub rel_error: f64,
    /// `L_0 u, ..., L_{N-1} u`.
    pub terms: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub phase: PhaseKind,
    pub phase_formula: String,
    pub amplitude: String,
    pub n_terms: usize,
    pub levels: Vec<PhaseLevel>,
}

/// `F` as a function of `z = x_1 + i x_2`.
pub fn phase_expr(kind: PhaseKind) -> Expr {
    let i = Expr::constant(C64::new(0.0, 1.0));
    match kind {
        PhaseKind::Quadratic => i * Expr::r2(),
        PhaseKind::Quartic => {
            let x1 = (Expr::z() + Expr::zbar()) * Expr::real(0.5);
            i * (Expr::r2() + x1.powi(4))
        }
    }
}

pub fn default_amplitude(kind: PhaseKind) -> &'static str {
    match kind {
        PhaseKind::Quadratic => QUADRATIC_AMPLITUDE,
        PhaseKind::Quartic => "1",
    }
}

/// Jet of `e(x_1 + i x_2)` at the origin in the real variables.
fn real_jet(e: &Expr, order: usize) -> Result<Jet> {
    let zj = e.jet(C64::new(0.0, 0.0), order)?;
    let real = JetSpace::shared(2, order)?;
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let w = Jet::from_terms(&real, &[(vec![1, 0], one), (vec![0, 1], i)]);
    let wb = Jet::from_terms(&real, &[(vec![1, 0], one), (vec![0, 1], -i)]);
    zj.compose(&[w, wb])
}

pub fn phase_problem(kind: PhaseKind, amplitude: &Expr, n_terms: usize) -> Result<StationaryPhaseProblem> {
    let order = StationaryPhaseProblem::required_order(n_terms).max(2);
    let f = real_jet(&phase_expr(kind), order)?;
    let u = real_jet(amplitude, order)?;
    let v = Jet::constant(u.space(), C64::new(1.0, 0.0));
    StationaryPhaseProblem::new(f, u, v)
}

// Gauss-Kronrod 7-15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> C64, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss-Kronrod on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_gk(f: &dyn Fn(f64) -> C64, a: f64, b: f64, tol: f64) -> C64 {
    fn rec(f: &dyn Fn(f64) -> C64, a: f64, b: f64, tol: f64, depth: u32) -> C64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, tol, 40)
}

/// `∫∫ e^{ikF} u dx` over the square where `Im F ≥ |x|^2` leaves `e^{-80}`.
pub fn phase_quadrature(kind: PhaseKind, amplitude: &Expr, k: f64) -> C64 {
    let f = phase_expr(kind);
    let l = (80.0 / k).sqrt();
    let i = C64::new(0.0, 1.0);
    let scale = std::f64::consts::PI / k;
    let tol = 1e-15 * scale;
    let outer = |x1: f64| {
        let inner = |x2: f64| {
            let z = C64::new(x1, x2);
            (i * k * f.at(z)).exp() * amplitude.at(z)
        };
        adaptive_gk(&inner, -l, l, tol / (2.0 * l))
    };
    adaptive_gk(&outer, -l, l, tol)
}

pub fn stationary_phase_check(kind: PhaseKind, amplitude: &str, n_terms: usize, ks: &[f64]) -> Result<PhaseReport> {
    let amp = Expr::parse(amplitude)?;
    let problem = phase_problem(kind, &amp, n_terms)?;
    let levels = ks
        .iter()
        .map(|&k| {
            if !(k > 0.0) {
                return Err(Error::Invalid(format!("k must be positive, got {k}")));
            }
            let r = stationary_phase_terms(&problem, k, n_terms)?;
            let q = phase_quadrature(kind, &amp, k);
            Ok(PhaseLevel {
                k,
                engine: r.value,
                quadrature: q,
                rel_error: (r.value - q).norm() / q.norm(),
                terms: r.terms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseReport {
        phase: kind,
        phase_formula: phase_expr(kind).to_string(),
        amplitude: amplitude.to_string(),
        n_terms,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_integrates_gaussian() {
        let v = adaptive_gk(&|x: f64| C64::new((-x * x).exp(), 0.0), -10.0, 10.0, 1e-15);
        assert!((v.re - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn quadrature_of_gaussian_moments() {
        // ∫ e^{-k|x|^2}(1 + x1^2 + 3 x1 x2 − 2 x2^2) = π/k (1 − 1/(2k))
        let amp = Expr::parse(QUADRATIC_AMPLITUDE).unwrap();
        let k = 7.0;
        let q = phase_quadrature(PhaseKind::Quadratic, &amp, k);
        let exact = PI / k * (1.0 - 0.5 / k);
        assert!((q.re - exact).abs() < 1e-14 * exact && q.im.abs() < 1e-14);
    }
}
