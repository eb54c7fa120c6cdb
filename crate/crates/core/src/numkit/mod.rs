//! Dense linear algebra, quadrature, jets and fitting.

pub mod eig;
pub mod gram;
pub mod jet;
pub mod lstsq;
pub mod matrix;
pub mod quadrature;
pub mod sum;

pub use eig::{hermitian_eig, HermitianEigen};
pub use gram::{gram_orthonormalize, Orthonormalized};
pub use jet::{hyperdual_jet, Jet, JetSpace, Scalar, MAX_JET_ORDER};
pub use lstsq::{least_squares_fit, LeastSquaresFit};
pub use matrix::{ComplexMatrix, C64};
pub use quadrature::{QuadratureDescriptor, QuadratureRule};
