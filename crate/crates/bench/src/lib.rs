//! Fixtures shared by the benchmarks in `benches/`.

use std::sync::Arc;
use toeplab::quantum::{build_basis, QuantumBasis};
use toeplab::{KahlerModel, Symbol, C64};

/// The perturbed sphere used throughout the acceptance runs.
pub fn perturbed_sphere() -> KahlerModel {
    KahlerModel::cp1_fs().perturbed(0.1)
}

pub fn sphere_basis(k: usize) -> Arc<QuantumBasis> {
    Arc::new(build_basis(&perturbed_sphere(), k).expect("sphere basis"))
}

pub fn height() -> Symbol {
    Symbol::parse("x3").expect("x3")
}

pub fn probe_point() -> C64 {
    C64::new(0.35, -0.2)
}
