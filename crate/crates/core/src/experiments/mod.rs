//! Experiments confronting measured kernels and operators with predictions.
//!
//! [`run`] executes one [`ExperimentConfig`] and returns the payload, the
//! per-level resolution actually used and a list of threshold checks.

mod config;
mod decay;
mod fit;
mod probes;
mod stationary;
mod trace;

pub use config::{
    DecaySpec, ExperimentConfig, ExperimentKind, ModelSpec, PhaseKind, QuadratureOverrides, RecursionSpec,
    StationarySpec, SymbolSpec,
};
pub use decay::{decay_profile, ray_length, ray_point, DecayPair, DecayProfile, RayPairs, ThresholdCheck};
pub use fit::{
    fit_composition_expansion, fit_diagonal_expansion, fit_series, rel_error, ExpansionFit, FitTarget, REL_ERROR_FLOOR,
};
pub use probes::{
    commutator_law, degenerate_probe, landau_leading_check, CommutatorLevel, CommutatorReport, DegenerateProbe,
    DiagonalLevel, LandauLevel, LandauReport,
};
pub use stationary::{
    adaptive_gk, default_amplitude, phase_expr, phase_problem, phase_quadrature, stationary_phase_check, PhaseLevel,
    PhaseReport,
};
pub use trace::{curvature_integral, integration_rule, weyl_trace_check, WeylLevel, WeylReport};

use crate::asymptotics::{coefficient_recursion, measure_bergman_jets, CoefficientSet};
use crate::error::Result;
use crate::geometry::{curvature_report, CurvatureReport, KahlerModel, ModelKind};
use crate::numkit::{QuadratureDescriptor, C64};
use crate::quantum::{build_basis_with, spectral_space_q1_with, BasisOptions, QuantumBasis, DEFAULT_CUTOFF_EXPONENT};
use crate::symbol::Symbol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Radius of the disc random test points are drawn from.
pub const RANDOM_POINT_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    Above,
}

/// One pass/fail comparison against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::Above,
            threshold,
            pass: value > threshold,
        }
    }
}

/// Resolution of one ladder level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelInfo {
    pub k: usize,
    pub q: usize,
    pub dim: usize,
    pub dictionary_size: usize,
    pub quadrature: QuadratureDescriptor,
    pub nodes: usize,
    pub gram_residual: f64,
    pub dropped: usize,
    pub cutoff_exponent: u32,
}

impl LevelInfo {
    fn of(b: &QuantumBasis) -> Self {
        Self {
            k: b.k,
            q: b.q,
            dim: b.dim(),
            dictionary_size: b.dictionary.len(),
            quadrature: b.grid.descriptor,
            nodes: b.grid.len(),
            gram_residual: b.gram_residual,
            dropped: b.dropped,
            cutoff_exponent: b.cutoff_exponent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSummary {
    pub reports: Vec<CurvatureReport>,
    /// `∫ ω` on compact models.
    pub total_omega: Option<f64>,
}

/// Recursion prediction against the closed forms at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionComparison {
    pub point: C64,
    pub k_ladder: Vec<usize>,
    pub recursion: CoefficientSet,
    pub closed_form: CoefficientSet,
    pub rel_errors: Vec<f64>,
    /// Relative residual of the Bergman jet fit.
    pub jet_fit_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub fits: Vec<ExpansionFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub recursion: Vec<RecursionComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentResults {
    Curvature(CurvatureSummary),
    Expansion(ExpansionReport),
    Composition(Vec<ExpansionFit>),
    Star(CommutatorReport),
    Weyl(WeylReport),
    Decay(DecayProfile),
    Degenerate(Vec<DegenerateProbe>),
    Landau(Vec<LandauReport>),
    StationaryPhase(PhaseReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub points: Vec<C64>,
    pub levels: Vec<LevelInfo>,
    pub results: ExperimentResults,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Configured points followed by `random_points` seeded draws.
pub fn resolve_points(config: &ExperimentConfig, seed: u64) -> Vec<C64> {
    let mut pts = config.points.clone().unwrap_or_else(|| vec![C64::new(0.0, 0.0)]);
    if let Some(n) = config.random_points {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n {
            let r = RANDOM_POINT_RADIUS * rng.gen::<f64>().sqrt();
            let t = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            pts.push(C64::from_polar(r, t));
        }
    }
    pts
}

/// Quantum spaces for every level, built in parallel and kept in ladder order.
pub fn build_ladder(model: &KahlerModel, ladder: &[usize], opts: &BasisOptions) -> Result<Vec<Arc<QuantumBasis>>> {
    ladder
        .par_iter()
        .map(|&k| {
            let b = if model.kind == ModelKind::LandauQ1 {
                spectral_space_q1_with(model, k, opts)?
            } else {
                build_basis_with(model, k, opts)?
            };
            Ok(Arc::new(b))
        })
        .collect()
}

fn coefficient_checks(fits: &[ExpansionFit], config: &ExperimentConfig, checks: &mut Vec<Check>) {
    for (p, fit) in fits.iter().enumerate() {
        for (j, e) in fit.rel_errors.iter().enumerate() {
            let name = format!("c{j}");
            checks.push(Check::at_most(
                format!("point{p}.{name}_rel"),
                *e,
                config.threshold(&name),
            ));
        }
    }
}

/// Run one experiment. `seed` only affects random test points.
pub fn run(config: &ExperimentConfig, seed: u64) -> Result<Outcome> {
    config.validate()?;
    let model = config.model.build()?;
    let ladder = config.ladder();
    let points = resolve_points(config, seed);
    let f = config.f()?;
    let g = config.g()?;
    let mut checks = Vec::new();
    let needs_bases = !matches!(
        config.experiment,
        ExperimentKind::Curvature | ExperimentKind::StationaryPhase
    );
    let bases = if needs_bases {
        let mut opts = config.basis_options();
        opts.cutoff_exponent.get_or_insert(DEFAULT_CUTOFF_EXPONENT);
        build_ladder(&model, &ladder, &opts)?
    } else {
        Vec::new()
    };
    let levels = bases.iter().map(|b| LevelInfo::of(b)).collect();
    let depth = config.depth();
    let guard = config.guard();

    let results = match config.experiment {
        ExperimentKind::Curvature => {
            let reports = points
                .iter()
                .map(|&x| curvature_report(&model, x))
                .collect::<Result<Vec<_>>>()?;
            let total_omega = if model.kind.is_compact() {
                let rule = integration_rule(&model, None)?;
                let v = curvature_integral(&model, &rule, &Symbol::one(), true)?;
                checks.push(Check::at_most(
                    "volume_abs",
                    (v - 1.0).abs(),
                    config.threshold("volume_abs"),
                ));
                Some(v)
            } else {
                None
            };
            ExperimentResults::Curvature(CurvatureSummary { reports, total_omega })
        }
        ExperimentKind::Expansion => {
            let fits = points
                .iter()
                .map(|&x| fit_diagonal_expansion(&bases, &f, x, depth, guard))
                .collect::<Result<Vec<_>>>()?;
            coefficient_checks(&fits, config, &mut checks);
            let mut recursion = Vec::new();
            if let Some(spec) = &config.recursion {
                let mut opts = config.basis_options();
                opts.cutoff_exponent.get_or_insert(DEFAULT_CUTOFF_EXPONENT);
                let rb = if spec.k_ladder == ladder {
                    bases.clone()
                } else {
                    build_ladder(&model, &spec.k_ladder, &opts)?
                };
                let refs: Vec<&QuantumBasis> = rb.iter().map(|b| b.as_ref()).collect();
                for (p, fit) in fits.iter().enumerate() {
                    let FitTarget::Point(x) = fit.target else { continue };
                    let jets = measure_bergman_jets(&refs, x, depth)?;
                    let rec = coefficient_recursion(&model, &f, x, depth, &jets)?;
                    let closed = fit.predicted.clone().expect("closed-form prediction");
                    let rel_errors: Vec<f64> = rec
                        .values
                        .iter()
                        .zip(&closed.values)
                        .map(|(&a, &b)| rel_error(a, b))
                        .collect();
                    for (j, e) in rel_errors.iter().enumerate() {
                        let name = format!("recursion_c{j}");
                        checks.push(Check::at_most(
                            format!("point{p}.{name}_rel"),
                            *e,
                            config.threshold(&name),
                        ));
                    }
                    recursion.push(RecursionComparison {
                        point: x,
                        k_ladder: spec.k_ladder.clone(),
                        recursion: rec,
                        closed_form: closed,
                        rel_errors,
                        jet_fit_residual: jets.fit_residual,
                    });
                }
            }
            ExperimentResults::Expansion(ExpansionReport { fits, recursion })
        }
        ExperimentKind::Composition => {
            let g = g.expect("validated");
            let fits = points
                .iter()
                .map(|&x| fit_composition_expansion(&bases, &f, &g, x, depth, guard))
                .collect::<Result<Vec<_>>>()?;
            coefficient_checks(&fits, config, &mut checks);
            ExperimentResults::Composition(fits)
        }
        ExperimentKind::Star => {
            let g = g.expect("validated");
            let rep = commutator_law(&bases, &f, &g)?;
            if let (Some(a), Some(b)) = (rep.levels.first(), rep.levels.last()) {
                if rep.levels.len() > 1 {
                    checks.push(Check::at_most(
                        "defect_ratio",
                        b.defect / a.defect,
                        config.threshold("ratio"),
                    ));
                }
            }
            ExperimentResults::Star(rep)
        }
        ExperimentKind::Weyl => {
            let rep = weyl_trace_check(&bases, &f)?;
            let factor = config.threshold("trace_factor");
            for l in &rep.levels {
                checks.push(Check::at_most(
                    format!("k{}.deviation", l.k),
                    l.deviation.abs(),
                    factor / l.k as f64,
                ));
            }
            let growth = rep
                .levels
                .windows(2)
                .map(|w| w[1].deviation.abs() - w[0].deviation.abs())
                .fold(f64::NEG_INFINITY, f64::max);
            if rep.levels.len() > 1 {
                checks.push(Check::at_most("deviation_growth", growth, 1e-12));
            }
            ExperimentResults::Weyl(rep)
        }
        ExperimentKind::Decay => {
            let spec = config.decay.clone().unwrap_or_default();
            let gen = RayPairs {
                base: spec.base,
                directions: spec.directions,
                step: spec.step,
                fit_radius: spec.fit_radius,
                threshold_factor: config.threshold("threshold_factor"),
                bound_power: config.threshold("bound_power"),
            };
            let prof = decay_profile(&bases, &f, &gen)?;
            for t in &prof.threshold_check {
                checks.push(Check::at_most(format!("k{}.scaled_kernel", t.k), t.scaled, t.bound));
            }
            checks.push(Check::above("fitted_rate", prof.fitted_rate, 0.0));
            if let Some(e) = prof.rate_rel_error {
                checks.push(Check::at_most("rate_rel", e, config.threshold("rate_rel")));
            }
            ExperimentResults::Decay(prof)
        }
        ExperimentKind::Degenerate => {
            let mut syms = vec![f.clone()];
            syms.extend(g.clone());
            let mut probes = Vec::new();
            for (p, &x) in points.iter().enumerate() {
                for s in &syms {
                    let pr = degenerate_probe(&bases, s, x)?;
                    if pr.degenerate {
                        let value = pr.ratio.unwrap_or(0.0);
                        checks.push(Check::at_most(
                            format!("point{p}.{}.ratio", s.name),
                            value,
                            config.threshold("ratio"),
                        ));
                    }
                    probes.push(pr);
                }
            }
            ExperimentResults::Degenerate(probes)
        }
        ExperimentKind::Landau => {
            let reps = points
                .iter()
                .map(|&x| landau_leading_check(&bases, &f, x))
                .collect::<Result<Vec<_>>>()?;
            for (p, r) in reps.iter().enumerate() {
                if let Some(l) = r.levels.last() {
                    checks.push(Check::at_most(
                        format!("point{p}.k{}.leading_rel", l.k),
                        l.rel_error,
                        config.threshold("leading_rel"),
                    ));
                }
                checks.push(Check::at_most(
                    format!("point{p}.dz_component"),
                    r.dz_component.abs(),
                    0.0,
                ));
            }
            ExperimentResults::Landau(reps)
        }
        ExperimentKind::StationaryPhase => {
            let spec = config.stationary_phase.clone().expect("validated");
            let amp = spec
                .amplitude
                .clone()
                .unwrap_or_else(|| default_amplitude(spec.phase).to_string());
            let ks: Vec<f64> = ladder.iter().map(|&k| k as f64).collect();
            let rep = stationary_phase_check(spec.phase, &amp, spec.terms, &ks)?;
            let key = match spec.phase {
                PhaseKind::Quadratic => "quadratic_rel",
                PhaseKind::Quartic => "quartic_rel",
            };
            for l in &rep.levels {
                checks.push(Check::at_most(
                    format!("k{}.rel_error", l.k),
                    l.rel_error,
                    config.threshold(key),
                ));
            }
            ExperimentResults::StationaryPhase(rep)
        }
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(Outcome {
        points,
        levels,
        results,
        checks,
        pass,
    })
}
