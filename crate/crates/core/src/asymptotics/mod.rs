//! Predicted expansion coefficients: stationary phase, the Kähler recursion,
//! closed forms and the star product.

mod closed_form;
mod recursion;
mod stationary;

pub use closed_form::{
    closed_form_coefficients, composition_coefficients, poisson_bracket, poisson_symbol, star_product, ClosedForm,
    CLOSED_FORM_ORDER,
};
pub use recursion::{
    bergman_taylor, coefficient_recursion, fit_bergman_jets, kahler_terms, measure_bergman_jets, BergmanJets,
    LevelJets, RECURSION_ORDER,
};
pub use stationary::{stationary_phase_terms, StationaryPhaseProblem, StationaryPhaseResult};

use crate::numkit::C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Recursion,
}

/// `b_{f,0}, b_{f,1}, ...` (or `b_{f,g,j}`) on the diagonal at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub point: C64,
    pub symbols: Vec<String>,
    pub values: Vec<C64>,
    pub provenance: Provenance,
    /// `det Ṙ^L` at the point.
    pub mu: f64,
}
