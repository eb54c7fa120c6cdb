use crate::error::{Error, Result};
use crate::numkit::C64;
use crate::symbol::Expr;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Cp1Fs,
    Bargmann,
    LandauQ1,
    DegenerateQuartic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Cp1Fs,
        ModelKind::Bargmann,
        ModelKind::LandauQ1,
        ModelKind::DegenerateQuartic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cp1Fs => "cp1_fs",
            ModelKind::Bargmann => "bargmann",
            ModelKind::LandauQ1 => "landau_q1",
            ModelKind::DegenerateQuartic => "degenerate_quartic",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ModelKind::Cp1Fs => "projective line, phi = log(1+|z|^2)/2 (+ eps psi), Fubini-Study base form",
            ModelKind::Bargmann => "complex line, phi = |z|^2/2, Euclidean base form",
            ModelKind::LandauQ1 => "complex line, phi = -|z|^2/2, quantized by (0,1)-forms",
            ModelKind::DegenerateQuartic => "complex line, phi = |z|^4, curvature vanishing at 0",
        }
    }

    /// Compact chart (full sphere) versus truncated disc.
    pub fn is_compact(self) -> bool {
        matches!(self, ModelKind::Cp1Fs)
    }

    /// Form degree of the quantum space.
    pub fn form_degree(self) -> usize {
        match self {
            ModelKind::LandauQ1 => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown model kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub name: String,
    pub psi: Expr,
    pub epsilon: f64,
}

/// A chart, a weight `φ` with `|s|^2 = e^{-2φ}`, and a base form
/// `Θ = i Θ_11 dz ∧ dz̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct KahlerModel {
    pub kind: ModelKind,
    /// Full weight, perturbation included.
    pub weight: Expr,
    pub base_weight: Expr,
    pub perturbation: Option<Perturbation>,
    /// `Θ_11` as a closed form.
    pub theta: Expr,
    pub theta_scale: f64,
    pub chart_dim: usize,
}

impl KahlerModel {
    fn build(kind: ModelKind, base_weight: Expr, theta: Expr) -> Self {
        Self {
            kind,
            weight: base_weight.clone(),
            base_weight,
            perturbation: None,
            theta,
            theta_scale: 1.0,
            chart_dim: 1,
        }
    }

    pub fn cp1_fs() -> Self {
        let one = Expr::real(1.0);
        Self::build(
            ModelKind::Cp1Fs,
            (one.clone() + Expr::r2()).ln() * Expr::real(0.5),
            (one + Expr::r2()).powi(-2),
        )
    }

    pub fn bargmann() -> Self {
        Self::build(ModelKind::Bargmann, Expr::r2() * Expr::real(0.5), Expr::real(1.0))
    }

    pub fn landau_q1() -> Self {
        Self::build(ModelKind::LandauQ1, Expr::r2() * Expr::real(-0.5), Expr::real(1.0))
    }

    pub fn degenerate_quartic() -> Self {
        Self::build(ModelKind::DegenerateQuartic, Expr::r2().powi(2), Expr::real(1.0))
    }

    pub fn of_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Cp1Fs => Self::cp1_fs(),
            ModelKind::Bargmann => Self::bargmann(),
            ModelKind::LandauQ1 => Self::landau_q1(),
            ModelKind::DegenerateQuartic => Self::degenerate_quartic(),
        }
    }

    /// `ψ = Re z / (1+|z|^2)^2`.
    pub fn default_perturbation() -> Expr {
        Expr::z().re() / (Expr::real(1.0) + Expr::r2()).powi(2)
    }

    /// Add `ε ψ` to the weight.
    pub fn with_perturbation(mut self, name: impl Into<String>, psi: Expr, epsilon: f64) -> Self {
        self.weight = if epsilon == 0.0 {
            self.base_weight.clone()
        } else {
            self.base_weight.clone() + psi.clone() * Expr::real(epsilon)
        };
        self.perturbation = Some(Perturbation {
            name: name.into(),
            psi,
            epsilon,
        });
        self
    }

    pub fn perturbed(self, epsilon: f64) -> Self {
        self.with_perturbation("psi", Self::default_perturbation(), epsilon)
    }

    /// Replace `Θ` by `c Θ`.
    pub fn with_theta_scale(mut self, c: f64) -> Self {
        let base = match self.kind {
            ModelKind::Cp1Fs => (Expr::real(1.0) + Expr::r2()).powi(-2),
            _ => Expr::real(1.0),
        };
        self.theta = if c == 1.0 { base } else { base * Expr::real(c) };
        self.theta_scale = c;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.perturbation.as_ref().map_or(0.0, |p| p.epsilon)
    }

    pub fn phi(&self, z: C64) -> f64 {
        self.weight.at(z).re
    }

    pub fn theta_at(&self, z: C64) -> f64 {
        self.theta.at(z).re
    }

    /// Volume of the whole model for compact kinds.
    pub fn reference_volume(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Cp1Fs => Some(2.0 * PI * self.theta_scale),
            _ => None,
        }
    }
}
