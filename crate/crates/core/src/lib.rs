//! Numerical Berezin-Toeplitz quantization on model Kähler geometries.

pub mod asymptotics;
pub mod conventions;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod numkit;
pub mod phase;
pub mod quantum;
pub mod symbol;
pub mod toeplitz;

pub use error::{Error, Result};
pub use geometry::{KahlerModel, ModelKind};
pub use numkit::{ComplexMatrix, C64};
pub use quantum::QuantumBasis;
pub use symbol::{Expr, Symbol};
pub use toeplitz::ToeplitzOperator;
