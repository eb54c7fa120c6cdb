//! Closed-form expansion coefficients in one complex dimension.

use crate::error::{Error, Result};
use crate::geometry::{KahlerModel, LocalJets};
use crate::numkit::{Jet, C64};
use crate::symbol::Symbol;
use std::f64::consts::PI;

use super::{CoefficientSet, Provenance};

/// Jet order used for the geometry and the symbols.
pub const CLOSED_FORM_ORDER: usize = 8;

/// Curvature data at one point of `M(0)`, with the jet calculus attached.
#[derive(Debug, Clone)]
pub struct ClosedForm {
    pub lj: LocalJets,
    pub mu: f64,
    /// `(2π)^{-1} det Ṙ^L`.
    pub amp: f64,
    pub r: f64,
    pub r_hat: f64,
    pub lap_r: f64,
    pub lap_r_hat: f64,
    pub ric: C64,
    pub rdet: C64,
    pub rtm_sq: f64,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

impl ClosedForm {
    pub fn new(model: &KahlerModel, x: C64) -> Result<Self> {
        let lj = LocalJets::new(model, x, CLOSED_FORM_ORDER)?;
        lj.require_positive()?;
        let mu = lj.mu();
        let r = lj.r();
        let r_hat = lj.r_hat();
        let ric = lj.ric().value();
        let rtm_sq = lj.pair11(-ric, -ric).re;
        Ok(Self {
            mu,
            amp: mu / (2.0 * PI),
            r: r.value().re,
            r_hat: r_hat.value().re,
            lap_r: lj.laplacian(&r).value().re,
            lap_r_hat: lj.laplacian(&r_hat).value().re,
            ric,
            rdet: lj.rdet().value(),
            rtm_sq,
            lj,
        })
    }

    pub fn point(&self) -> C64 {
        self.lj.x
    }

    pub fn symbol_jet(&self, f: &Symbol) -> Result<Jet> {
        f.jet(self.lj.x, CLOSED_FORM_ORDER)
    }

    /// f-independent bracket of the second coefficient.
    fn g2(&self) -> f64 {
        let p2 = PI * PI;
        let (r, rh) = (self.r, self.r_hat);
        let rdet_sq = self.lj.pair11(self.rdet, self.rdet).re;
        let ric_rdet = self.lj.pair11(self.ric, self.rdet).re;
        let ric_sq = self.lj.pair11(self.ric, self.ric).re;
        r * r / (128.0 * p2) - r * rh / (32.0 * p2) + rh * rh / (32.0 * p2)
            - self.lap_r_hat / (32.0 * p2)
            - rdet_sq / (8.0 * p2)
            + ric_rdet / (8.0 * p2)
            + self.lap_r / (96.0 * p2)
            - ric_sq / (24.0 * p2)
            + self.rtm_sq / (96.0 * p2)
    }

    /// `b_{f,0}, ..., b_{f,depth}` at the point.
    pub fn b(&self, f: &Jet, depth: usize) -> Result<Vec<C64>> {
        check_depth(depth)?;
        let lj = &self.lj;
        let p2 = PI * PI;
        let f0 = f.value();
        let mut out = vec![f0 * self.amp];
        if depth == 0 {
            return Ok(out);
        }
        let lapf = lj.laplacian(f);
        out.push(c(self.amp) * (f0 * (self.r_hat / (4.0 * PI) - self.r / (8.0 * PI)) - lapf.value() / (4.0 * PI)));
        if depth == 1 {
            return Ok(out);
        }
        let lap2f = lj.laplacian(&lapf).value();
        let ddf = -f.derivative(0).derivative(1).value();
        let t = f0 * self.g2() + lapf.value() * (-self.r_hat + 0.5 * self.r) / (16.0 * p2)
            - lj.pair11(ddf, self.rdet) / (4.0 * p2)
            + lj.pair11(ddf, self.ric) / (8.0 * p2)
            + lap2f / (32.0 * p2);
        out.push(t * self.amp);
        Ok(out)
    }

    /// `b_{f,g,0}, ..., b_{f,g,depth}` for the product `T_f T_g`.
    pub fn bfg(&self, f: &Jet, g: &Jet, depth: usize) -> Result<Vec<C64>> {
        let lj = &self.lj;
        let p2 = PI * PI;
        let mut out = self.b(&(f * g), depth)?;
        if depth == 0 {
            return Ok(out);
        }
        let fz = f.derivative(0);
        let gbar = g.conj_swap();
        let gbz = gbar.derivative(0);
        let pfg = lj.pair1(fz.value(), gbz.value());
        out[1] += c(self.amp) * (-pfg / (2.0 * PI));
        if depth == 1 {
            return Ok(out);
        }
        let gzb = g.derivative(1);
        let wedge = -(fz.value() * gzb.value());
        let lapf = lj.laplacian(f);
        let lapg = lj.laplacian(g);
        let fbar_zb = f.conj_swap().derivative(1);
        let dfz = lj.d10(&fz).value();
        let dgz = lj.d10(&gbz).value();
        let ddf = -f.derivative(0).derivative(1).value();
        let ddg = -gbar.derivative(0).derivative(1).value();
        let t = -lj.pair11(wedge, self.ric) / (4.0 * p2)
            + lj.pair11(wedge, self.rdet) / (4.0 * p2)
            + lj.pair1(lapf.derivative(0).value(), gbz.value()) / (8.0 * p2)
            + lj.pair1(lapg.derivative(1).value(), fbar_zb.value()) / (8.0 * p2)
            - lj.pair2(dfz, dgz) / (8.0 * p2)
            - lj.pair11(ddf, ddg) / (4.0 * p2)
            + pfg * (-self.r_hat + 0.5 * self.r) / (8.0 * p2);
        out[2] += t * self.amp;
        Ok(out)
    }

    /// `C_1(f, g)` as a jet.
    pub fn c1(&self, f: &Jet, g: &Jet) -> Jet {
        (f.derivative(0) * g.derivative(1) / self.lj.phi_zzb.clone()).scale(c(-0.5))
    }

    /// `{f, g}` on `(M, 2πω)` as a jet.
    pub fn poisson(&self, f: &Jet, g: &Jet) -> Jet {
        let num = f.derivative(0) * g.derivative(1) - f.derivative(1) * g.derivative(0);
        (num / self.lj.phi_zzb.clone()).scale(C64::new(0.0, 0.5))
    }

    /// `C_0(f,g), ..., C_order(f,g)` at the point.
    pub fn star(&self, f: &Jet, g: &Jet, order: usize) -> Result<Vec<C64>> {
        check_depth(order)?;
        let fg = f * g;
        let mut out = vec![fg.value()];
        if order == 0 {
            return Ok(out);
        }
        let c1 = self.c1(f, g);
        out.push(c1.value());
        if order == 1 {
            return Ok(out);
        }
        let bfg = self.bfg(f, g, 2)?;
        let b_fg = self.b(&fg, 2)?;
        let b_c1 = self.b(&c1, 1)?;
        out.push((bfg[2] - b_fg[2] - b_c1[1]) / self.amp);
        Ok(out)
    }
}

fn check_depth(depth: usize) -> Result<()> {
    if depth > 2 {
        return Err(Error::UnsupportedOrder {
            requested: depth,
            max: 2,
        });
    }
    Ok(())
}

pub fn closed_form_coefficients(model: &KahlerModel, f: &Symbol, x: C64, depth: usize) -> Result<CoefficientSet> {
    let cf = ClosedForm::new(model, x)?;
    let fj = cf.symbol_jet(f)?;
    Ok(CoefficientSet {
        point: x,
        symbols: vec![f.name.clone()],
        values: cf.b(&fj, depth)?,
        provenance: Provenance::ClosedForm,
        mu: cf.mu,
    })
}

pub fn composition_coefficients(
    model: &KahlerModel,
    f: &Symbol,
    g: &Symbol,
    x: C64,
    depth: usize,
) -> Result<CoefficientSet> {
    let cf = ClosedForm::new(model, x)?;
    let fj = cf.symbol_jet(f)?;
    let gj = cf.symbol_jet(g)?;
    Ok(CoefficientSet {
        point: x,
        symbols: vec![f.name.clone(), g.name.clone()],
        values: cf.bfg(&fj, &gj, depth)?,
        provenance: Provenance::ClosedForm,
        mu: cf.mu,
    })
}

/// `C_0(f,g)(x), ..., C_order(f,g)(x)`.
pub fn star_product(model: &KahlerModel, f: &Symbol, g: &Symbol, x: C64, order: usize) -> Result<Vec<C64>> {
    let cf = ClosedForm::new(model, x)?;
    cf.star(&cf.symbol_jet(f)?, &cf.symbol_jet(g)?, order)
}

pub fn poisson_bracket(model: &KahlerModel, f: &Symbol, g: &Symbol, x: C64) -> Result<C64> {
    let cf = ClosedForm::new(model, x)?;
    Ok(cf.poisson(&cf.symbol_jet(f)?, &cf.symbol_jet(g)?).value())
}

/// `{f, g}` as a closed-form symbol, when both inputs have one.
pub fn poisson_symbol(model: &KahlerModel, f: &Symbol, g: &Symbol) -> Result<Symbol> {
    use crate::symbol::Expr;
    let (Some(fe), Some(ge)) = (f.expr(), g.expr()) else {
        return Err(Error::MissingJets("Poisson bracket needs closed-form symbols".into()));
    };
    let phi = &model.weight;
    let d = |e: &Expr, var: usize| e.derivative(var);
    let num = d(fe, 0) * d(ge, 1) - d(fe, 1) * d(ge, 0);
    let den = d(&d(phi, 0), 1) * Expr::real(2.0);
    let body = Expr::constant(C64::new(0.0, 1.0)) * num / den;
    Ok(Symbol::new(format!("{{{}, {}}}", f.name, g.name), body))
}
