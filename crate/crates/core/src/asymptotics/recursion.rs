//! Coefficients of the Toeplitz kernel diagonal from the Kähler stationary phase
//! recursion, fed with Bergman kernel jets measured on computed quantum spaces.
//!
//! In K-coordinates `w` centred at `p` the phase-normalized Bergman kernel
//! `b(w, 0, k) = P̃(w, 0) e^{kφ̃(w)}` is holomorphic in `w`, and equals
//! `Σ_j ĝ_j(w) conj(b_j(p))` with `ĝ_j(w) = g_j(Z(w)) e^{-k g(w)}`. Its
//! Taylor coefficients are computed exactly at every level and fitted across
//! the ladder as `Σ_s b_s(w, 0) k^{1-s}`.

use super::{CoefficientSet, Provenance};
use crate::error::{Error, Result};
use crate::geometry::{KCoordinates, KahlerModel};
use crate::numkit::{least_squares_fit, Jet, JetSpace, C64};
use crate::quantum::{Dictionary, QuantumBasis};
use crate::symbol::Symbol;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Taylor order of every jet in the recursion; `△₀^4` needs order 8.
pub const RECURSION_ORDER: usize = 8;

const MAX_FIT_TERMS: usize = 8;

/// `b_s(w, 0)` for `s = 0..=depth` as `(w, w̄)` jets at the center.
#[derive(Debug, Clone)]
pub struct BergmanJets {
    pub center: C64,
    pub levels: Vec<usize>,
    pub b: Vec<Jet>,
    /// Worst relative fit residual over the Taylor coefficients.
    pub fit_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelJets {
    pub k: usize,
    /// Taylor coefficients of `b(w, 0, k)` in `w`.
    pub taylor: Vec<C64>,
}

fn ln_binom(m: usize, i: usize) -> f64 {
    let lf = |n: usize| (2..=n).map(|j| (j as f64).ln()).sum::<f64>();
    lf(m) - lf(i) - lf(m - i)
}

/// Exact Taylor coefficients of the phase-normalized Bergman kernel at one level.
pub fn bergman_taylor(basis: &QuantumBasis, kc: &KCoordinates, order: usize) -> Result<LevelJets> {
    if basis.q != 0 || !matches!(basis.dictionary, Dictionary::Monomials { .. }) {
        return Err(Error::Invalid("Bergman jets need a holomorphic (q = 0) basis".into()));
    }
    let space = JetSpace::shared(1, order)?;
    let k = basis.k as f64;
    let p = kc.center;
    let phi_p = basis.model.phi(p);

    let bp = basis.section_values(p);
    let dim = basis.dim();
    let exps = basis.dictionary_exponents();
    let beta: Vec<C64> = (0..exps.len())
        .map(|m| {
            let row = basis.coeffs.row(m);
            (0..dim).map(|a| row[a] * bp[a].conj()).sum()
        })
        .collect();

    let lr = p.norm().ln();
    let arg = p.arg();
    let mut gamma = vec![C64::new(0.0, 0.0); order + 1];
    for (m, &(deg, _)) in exps.iter().enumerate() {
        for (i, g) in gamma.iter_mut().enumerate().take(order.min(deg) + 1) {
            let rest = deg - i;
            if rest > 0 && p.norm() == 0.0 {
                continue;
            }
            let lmag =
                ln_binom(deg, i) + if rest > 0 { rest as f64 * lr } else { 0.0 } - k * phi_p - basis.log_reference(m);
            *g += beta[m] * C64::from_polar(lmag.exp(), rest as f64 * arg);
        }
    }

    let zjet = kc.map_jet(&space);
    let y = zjet.with_value(C64::new(0.0, 0.0));
    let mut poly = Jet::zero(&space);
    let mut ypow = Jet::constant(&space, C64::new(1.0, 0.0));
    for g in &gamma {
        poly = poly + ypow.scale(*g);
        ypow = &ypow * &y;
    }
    let frame = kc.frame_jet(&space);
    let e = frame.with_value(C64::new(0.0, 0.0)).scale(C64::new(-k, 0.0)).exp();
    let b = e * poly;
    Ok(LevelJets {
        k: basis.k,
        taylor: (0..=order).map(|a| b.taylor(&[a])).collect(),
    })
}

/// Fit `b_0, ..., b_depth` from exact per-level jets.
pub fn fit_bergman_jets(center: C64, levels: &[LevelJets], depth: usize) -> Result<BergmanJets> {
    let order = levels.first().map_or(0, |l| l.taylor.len().saturating_sub(1));
    // Per-level jets are exact, so the fit is a Richardson extrapolation using
    // as many correction terms as the ladder supports.
    if levels.len() < depth + 2 {
        return Err(Error::MissingJets(format!(
            "depth {depth} needs at least {} ladder levels, have {}",
            depth + 2,
            levels.len()
        )));
    }
    let n_exps = levels.len().min(MAX_FIT_TERMS).max(depth + 2);
    let exps: Vec<f64> = (0..n_exps).map(|s| 1.0 - s as f64).collect();
    let space = JetSpace::shared(2, order)?;
    let mut terms: Vec<Vec<(Vec<usize>, C64)>> = vec![Vec::new(); depth + 1];
    let mut worst = 0.0f64;
    for a in 0..=order {
        let re: Vec<(f64, f64)> = levels.iter().map(|l| (l.k as f64, l.taylor[a].re)).collect();
        let im: Vec<(f64, f64)> = levels.iter().map(|l| (l.k as f64, l.taylor[a].im)).collect();
        let fr = least_squares_fit(&re, &exps)?;
        let fi = least_squares_fit(&im, &exps)?;
        let scale = levels.iter().map(|l| l.taylor[a].norm()).fold(1e-300, f64::max);
        worst = worst.max(fr.rms_residual.hypot(fi.rms_residual) / scale);
        for (s, t) in terms.iter_mut().enumerate() {
            t.push((vec![a, 0], C64::new(fr.coefficients[s], fi.coefficients[s])));
        }
    }
    Ok(BergmanJets {
        center,
        levels: levels.iter().map(|l| l.k).collect(),
        b: terms.iter().map(|t| Jet::from_terms(&space, t)).collect(),
        fit_residual: worst,
    })
}

/// Measure Bergman jets at `p` from bases across a ladder.
pub fn measure_bergman_jets(bases: &[&QuantumBasis], p: C64, depth: usize) -> Result<BergmanJets> {
    let model = &bases
        .first()
        .ok_or_else(|| Error::Invalid("measuring Bergman jets needs at least one level".into()))?
        .model;
    let kc = KCoordinates::new(model, p, RECURSION_ORDER)?;
    let levels = bases
        .iter()
        .map(|b| bergman_taylor(b, &kc, RECURSION_ORDER))
        .collect::<Result<Vec<_>>>()?;
    fit_bergman_jets(p, &levels, depth)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// `△₀^ν X (0) = (ν!)^2 X_{νν} / λ^ν`.
fn laplace0_pow(x: &Jet, nu: usize, lambda: f64) -> C64 {
    x.taylor(&[nu, nu]) * factorial(nu).powi(2) / lambda.powi(nu as i32)
}

/// `L_j u = Σ_{ν-μ=j, 2ν≥4μ} (−1)^μ 2^{-j} △₀^ν(φ₁^μ V u)(0) / (ν! μ!)` for `j < n_terms`.
pub fn kahler_terms(lambda: f64, phi1: &Jet, v: &Jet, u: &Jet, n_terms: usize) -> Result<Vec<C64>> {
    let need = 4 * n_terms.saturating_sub(1);
    if need > phi1.order() {
        return Err(Error::MissingJets(format!(
            "{n_terms} Kähler terms need jets of order {need}"
        )));
    }
    let vu = v * u;
    Ok((0..n_terms)
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for mu in 0..=j {
                let nu = j + mu;
                let x = phi1.powi(mu as i32) * vu.clone();
                let sign = if mu % 2 == 0 { 1.0 } else { -1.0 };
                acc += laplace0_pow(&x, nu, lambda) * sign / (factorial(nu) * factorial(mu));
            }
            acc * 0.5f64.powi(j as i32)
        })
        .collect())
}

/// `b_{f,0}(p), ..., b_{f,depth}(p)` from the recursion.
pub fn coefficient_recursion(
    model: &KahlerModel,
    f: &Symbol,
    p: C64,
    depth: usize,
    jets: &BergmanJets,
) -> Result<CoefficientSet> {
    if depth > 2 {
        return Err(Error::UnsupportedOrder {
            requested: depth,
            max: 2,
        });
    }
    if jets.b.len() < depth + 1 {
        return Err(Error::MissingJets(format!(
            "depth {depth} needs Bergman jets b_0..b_{depth}, have {}",
            jets.b.len()
        )));
    }
    if (jets.center - p).norm() > 1e-14 * (1.0 + p.norm()) {
        return Err(Error::MissingJets(format!(
            "Bergman jets were measured at {}, not {p}",
            jets.center
        )));
    }
    let expr = f
        .expr()
        .ok_or_else(|| Error::MissingJets(format!("symbol '{}' has no closed form", f.name)))?;
    let kc = KCoordinates::new(model, p, RECURSION_ORDER)?;
    let space = kc.space().clone();
    let fj = kc.pull_back(expr);
    let b: Vec<Jet> = jets.b.iter().map(|j| j.reorder(&space)).collect::<Result<_>>()?;
    let bbar: Vec<Jet> = b.iter().map(|j| j.conj_swap()).collect();
    let lambda = kc.lambda;
    let mu_det = kc.mu();
    let mut values = Vec::with_capacity(depth + 1);
    for j in 0..=depth {
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..=j {
            let mut amp = Jet::zero(&space);
            for s in 0..=(j - m) {
                amp = amp + &bbar[s] * &b[j - m - s];
            }
            let u = &fj * &amp;
            let terms = kahler_terms(lambda, &kc.phi1, &kc.v_theta, &u, m + 1)?;
            acc += terms[m];
        }
        values.push(acc * (2.0 * PI / mu_det));
    }
    Ok(CoefficientSet {
        point: p,
        symbols: vec![f.name.clone()],
        values,
        provenance: Provenance::Recursion,
        mu: mu_det,
    })
}
