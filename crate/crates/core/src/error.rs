use thiserror::Error;

/// Errors raised by the numerical substrate and the operator layers built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A*| = {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("jet order {requested} exceeds the supported maximum {max}")]
    UnsupportedOrder { requested: usize, max: usize },

    #[error("least-squares system is underdetermined: {samples} samples for {unknowns} unknowns")]
    Underdetermined { samples: usize, unknowns: usize },

    #[error("duplicate abscissa {0} in least-squares samples")]
    DuplicateSample(f64),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("point outside the supported domain: {0}")]
    Domain(String),

    #[error("insufficient jets: {0}")]
    MissingJets(String),

    #[error("operators act on different quantum spaces")]
    BasisMismatch,

    #[error("quadrature under-resolved: Toeplitz matrix asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    QuadratureResolution { asymmetry: f64, tolerance: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("symbol parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
