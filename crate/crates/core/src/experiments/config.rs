//! Typed experiment configuration shared by the library and the command line.

use crate::error::{Error, Result};
use crate::geometry::{KahlerModel, ModelKind};
use crate::numkit::C64;
use crate::quantum::BasisOptions;
use crate::symbol::{Expr, Symbol};
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Curvature,
    Expansion,
    Composition,
    Star,
    Weyl,
    Decay,
    Degenerate,
    Landau,
    StationaryPhase,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Curvature,
        ExperimentKind::Expansion,
        ExperimentKind::Composition,
        ExperimentKind::Star,
        ExperimentKind::Weyl,
        ExperimentKind::Decay,
        ExperimentKind::Degenerate,
        ExperimentKind::Landau,
        ExperimentKind::StationaryPhase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Curvature => "curvature",
            ExperimentKind::Expansion => "expansion",
            ExperimentKind::Composition => "composition",
            ExperimentKind::Star => "star",
            ExperimentKind::Weyl => "weyl",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Degenerate => "degenerate",
            ExperimentKind::Landau => "landau",
            ExperimentKind::StationaryPhase => "stationary-phase",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::Curvature => "curvature data at chart points, total Kähler volume on compact models",
            ExperimentKind::Expansion => "fit the diagonal of T_f across the ladder against b_{f,j}",
            ExperimentKind::Composition => "fit the diagonal of T_f T_g against b_{f,g,j}",
            ExperimentKind::Star => "decay of ||k[T_f, T_g] - i T_{f,g}||",
            ExperimentKind::Weyl => "Tr T_f against k (2pi)^-1 ∫ f |det Rdot| dv",
            ExperimentKind::Decay => "off-diagonal kernel decay profile and Gaussian rate",
            ExperimentKind::Degenerate => "density over k at points where the curvature degenerates",
            ExperimentKind::Landau => "q = 1 kernel diagonal against k/(2pi) |det Rdot| f",
            ExperimentKind::StationaryPhase => "stationary phase engine against adaptive quadrature",
        }
    }

    /// Ladder used when the config gives none.
    pub fn default_ladder(self) -> Vec<usize> {
        match self {
            ExperimentKind::Curvature => Vec::new(),
            ExperimentKind::Star => vec![32, 64],
            ExperimentKind::Decay => vec![32, 64, 128],
            ExperimentKind::Degenerate | ExperimentKind::Landau => vec![16, 32, 64],
            ExperimentKind::StationaryPhase => vec![10, 20, 40],
            _ => vec![16, 24, 32, 48, 64],
        }
    }

    /// Named pass/fail thresholds and their defaults.
    pub fn default_thresholds(self) -> &'static [(&'static str, f64)] {
        match self {
            ExperimentKind::Curvature => &[("volume_abs", 1e-8)],
            ExperimentKind::Expansion => &[
                ("c0", 1e-3),
                ("c1", 0.02),
                ("c2", 0.10),
                ("recursion_c0", 1e-3),
                ("recursion_c1", 0.02),
                ("recursion_c2", 0.10),
            ],
            ExperimentKind::Composition => &[("c0", 1e-3), ("c1", 0.02), ("c2", 0.10)],
            ExperimentKind::Star => &[("ratio", 0.6)],
            ExperimentKind::Weyl => &[("trace_factor", 3.0)],
            ExperimentKind::Decay => &[("rate_rel", 0.10), ("threshold_factor", 3.0), ("bound_power", 2.0)],
            ExperimentKind::Degenerate => &[("ratio", 0.75)],
            ExperimentKind::Landau => &[("leading_rel", 0.03)],
            ExperimentKind::StationaryPhase => &[("quadratic_rel", 1e-12), ("quartic_rel", 1e-6)],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A model kind with optional perturbation, accepted either as a bare name
/// or as a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub epsilon: f64,
    /// Catalog name or formula of the perturbation `ψ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_scale: Option<f64>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            epsilon: 0.0,
            perturbation: None,
            theta_scale: None,
        }
    }

    pub fn build(&self) -> Result<KahlerModel> {
        let mut m = KahlerModel::of_kind(self.kind);
        if let Some(c) = self.theta_scale {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Invalid(format!("model.theta_scale must be positive, got {c}")));
            }
            m = m.with_theta_scale(c);
        }
        if self.epsilon != 0.0 || self.perturbation.is_some() {
            let name = self.perturbation.clone().unwrap_or_else(|| "psi".into());
            let psi = Expr::parse(&name).map_err(|e| Error::Invalid(format!("model.perturbation: {e}")))?;
            m = m.with_perturbation(name, psi, self.epsilon);
        }
        Ok(m)
    }
}

fn parse_kind<E: de::Error>(s: &str) -> std::result::Result<ModelKind, E> {
    ModelKind::from_str(s).map_err(|_| {
        let names: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
        E::custom(format!(
            "unknown model kind '{s}' (expected one of {})",
            names.join(", ")
        ))
    })
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ModelSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a model name or a table with `kind`")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<ModelSpec, E> {
                Ok(ModelSpec::new(parse_kind(s)?))
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<ModelSpec, A::Error> {
                let mut kind = None;
                let mut spec = ModelSpec::new(ModelKind::Cp1Fs);
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "kind" => kind = Some(parse_kind(&map.next_value::<String>()?)?),
                        "epsilon" => spec.epsilon = map.next_value()?,
                        "perturbation" => spec.perturbation = Some(map.next_value()?),
                        "theta_scale" => spec.theta_scale = Some(map.next_value()?),
                        other => {
                            return Err(de::Error::unknown_field(
                                other,
                                &["kind", "epsilon", "perturbation", "theta_scale"],
                            ))
                        }
                    }
                }
                spec.kind = kind.ok_or_else(|| de::Error::missing_field("kind"))?;
                Ok(spec)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
}

/// Resolution overrides for every quantum space of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    /// Start of every geodesic ray.
    #[serde(default = "origin")]
    pub base: C64,
    /// Number of equally spaced ray directions.
    #[serde(default = "one")]
    pub directions: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Largest distance used for the rate fit.
    #[serde(default = "default_fit_radius")]
    pub fit_radius: f64,
}

fn origin() -> C64 {
    C64::new(0.0, 0.0)
}
fn one() -> usize {
    1
}
fn default_step() -> f64 {
    0.05
}
fn default_fit_radius() -> f64 {
    0.3
}

impl Default for DecaySpec {
    fn default() -> Self {
        Self {
            base: origin(),
            directions: 1,
            step: default_step(),
            fit_radius: default_fit_radius(),
        }
    }
}

/// Second prediction path for expansion runs: Bergman jets measured on this
/// ladder fed through the stationary phase recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecursionSpec {
    pub k_ladder: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// `F = i |x|^2`.
    Quadratic,
    /// `F = i (|x|^2 + x_1^4)`.
    Quartic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationarySpec {
    pub phase: PhaseKind,
    /// Amplitude as a formula in `z = x_1 + i x_2`; defaults depend on the phase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<String>,
    /// Number of expansion terms `N`.
    #[serde(default = "default_terms")]
    pub terms: usize,
}

fn default_terms() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelSpec,
    #[serde(default)]
    pub symbols: SymbolSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_ladder: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Spectral cutoff exponent `N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_exponent: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<C64>>,
    /// Extra test points drawn from the disc `|z| < 0.5` with the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_points: Option<usize>,
    /// Correction terms fitted beyond `depth`; defaults to the most the ladder
    /// supports (levels − depth − 2), at least one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecaySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary_phase: Option<StationarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recursion: Option<RecursionSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub thresholds: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, model: ModelSpec) -> Self {
        Self {
            experiment,
            model,
            symbols: SymbolSpec::default(),
            k_ladder: None,
            depth: None,
            cutoff_exponent: None,
            quadrature: None,
            points: None,
            random_points: None,
            guard_terms: None,
            decay: None,
            stationary_phase: None,
            recursion: None,
            thresholds: BTreeMap::new(),
            output: None,
        }
    }

    pub fn ladder(&self) -> Vec<usize> {
        self.k_ladder
            .clone()
            .unwrap_or_else(|| self.experiment.default_ladder())
    }

    pub fn threshold(&self, name: &str) -> f64 {
        if let Some(v) = self.thresholds.get(name) {
            return *v;
        }
        self.experiment
            .default_thresholds()
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    }

    /// Expansion depth: as configured, else 1 when the ladder has four or more levels and 0 otherwise.
    pub fn depth(&self) -> usize {
        self.depth.unwrap_or(if self.ladder().len() >= 4 { 1 } else { 0 })
    }

    /// Guard terms: as configured, else as many as the ladder supports.
    pub fn guard(&self) -> usize {
        let depth = self.depth();
        self.guard_terms
            .unwrap_or_else(|| self.ladder().len().saturating_sub(depth + 2).max(1))
    }

    pub fn basis_options(&self) -> BasisOptions {
        let q = self.quadrature.unwrap_or_default();
        BasisOptions {
            radial: q.radial,
            angular: q.angular,
            radius: q.radius,
            max_degree: q.max_degree,
            signal_radius: q.signal_radius,
            cutoff_exponent: self.cutoff_exponent,
        }
    }

    fn symbol(&self, key: &str, text: Option<&String>) -> Result<Option<Symbol>> {
        text.map(|t| Symbol::parse(t).map_err(|e| Error::Invalid(format!("symbols.{key}: {e}"))))
            .transpose()
    }

    /// `f`, defaulting to the constant 1.
    pub fn f(&self) -> Result<Symbol> {
        Ok(self.symbol("f", self.symbols.f.as_ref())?.unwrap_or_else(Symbol::one))
    }

    pub fn g(&self) -> Result<Option<Symbol>> {
        self.symbol("g", self.symbols.g.as_ref())
    }

    /// Semantic checks beyond what deserialization enforces; messages name the key.
    pub fn validate(&self) -> Result<()> {
        let kind = self.experiment;
        let bad = |key: &str, msg: String| Err(Error::Invalid(format!("{key}: {msg}")));
        self.model.build()?;
        self.f()?;
        self.g()?;
        let ladder = self.ladder();
        if kind != ExperimentKind::Curvature && ladder.is_empty() {
            return bad("k_ladder", "must not be empty".into());
        }
        if ladder.contains(&0) {
            return bad("k_ladder", "levels must be positive".into());
        }
        if ladder.windows(2).any(|w| w[1] <= w[0]) {
            return bad("k_ladder", "levels must be strictly increasing".into());
        }
        for name in self.thresholds.keys() {
            if !kind.default_thresholds().iter().any(|(n, _)| n == name) {
                let known: Vec<&str> = kind.default_thresholds().iter().map(|(n, _)| *n).collect();
                return bad(
                    &format!("thresholds.{name}"),
                    format!("not a threshold of experiment {kind} (known: {})", known.join(", ")),
                );
            }
        }
        let q1 = self.model.kind == ModelKind::LandauQ1;
        match kind {
            ExperimentKind::Expansion | ExperimentKind::Composition => {
                if q1 {
                    return bad("model", format!("experiment {kind} needs a q = 0 model"));
                }
                let depth = self.depth();
                if depth > 2 {
                    return bad(
                        "depth",
                        format!("closed forms are available up to depth 2, got {depth}"),
                    );
                }
                if self.guard_terms == Some(0) {
                    return bad("guard_terms", "at least one guard term is fitted".into());
                }
                let need = depth + 1 + self.guard_terms.unwrap_or(1) + 1;
                if ladder.len() < need {
                    return bad(
                        "k_ladder",
                        format!("depth {depth} needs at least {need} levels, got {}", ladder.len()),
                    );
                }
            }
            ExperimentKind::Star => {
                if q1 {
                    return bad("model", "experiment star needs a q = 0 model".into());
                }
            }
            ExperimentKind::Decay => {
                if q1 {
                    return bad("model", "experiment decay needs a q = 0 model".into());
                }
                let d = self.decay.clone().unwrap_or_default();
                if d.directions == 0 {
                    return bad("decay.directions", "must be at least 1".into());
                }
                if !(d.step > 0.0) || !(d.fit_radius > 0.0) {
                    return bad("decay.step", "step and fit_radius must be positive".into());
                }
            }
            ExperimentKind::Degenerate => {
                if self.model.kind != ModelKind::DegenerateQuartic {
                    return bad("model", "experiment degenerate runs on degenerate_quartic".into());
                }
            }
            ExperimentKind::Landau => {
                if !q1 {
                    return bad("model", "experiment landau runs on landau_q1".into());
                }
            }
            ExperimentKind::Weyl => {
                if q1 {
                    return bad("model", "experiment weyl needs a q = 0 model".into());
                }
            }
            ExperimentKind::StationaryPhase => {
                if self.stationary_phase.is_none() {
                    return bad(
                        "stationary_phase",
                        "experiment stationary-phase needs this table".into(),
                    );
                }
            }
            ExperimentKind::Curvature => {}
        }
        if matches!(kind, ExperimentKind::Composition | ExperimentKind::Star) && self.symbols.g.is_none() {
            return bad("symbols.g", format!("experiment {kind} needs a second symbol"));
        }
        if let Some(r) = &self.recursion {
            if kind != ExperimentKind::Expansion {
                return bad("recursion", format!("only expansion runs take this table, not {kind}"));
            }
            if self.symbols.f.as_ref().is_some_and(|f| Expr::parse(f).is_err()) {
                return bad("symbols.f", "the recursion needs a closed-form symbol".into());
            }
            let depth = self.depth();
            if r.k_ladder.len() < depth + 2 || r.k_ladder.windows(2).any(|w| w[1] <= w[0]) || r.k_ladder.contains(&0) {
                return bad(
                    "recursion.k_ladder",
                    format!("needs at least {} strictly increasing positive levels", depth + 2),
                );
            }
        }
        if let Some(sp) = &self.stationary_phase {
            if sp.terms == 0 {
                return bad("stationary_phase.terms", "must be at least 1".into());
            }
            if let Some(a) = &sp.amplitude {
                Expr::parse(a).map_err(|e| Error::Invalid(format!("stationary_phase.amplitude: {e}")))?;
            }
        }
        Ok(())
    }
}
