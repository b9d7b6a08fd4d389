//! Exact scalar and dense-matrix arithmetic over the Gaussian rationals,
//! including rank computation, pseudoinverse, and the structural
//! decompositions used by the classification pipeline.

mod decomp;
mod matrix;
mod roots;
mod scalar;

pub use decomp::{common_lower_triangularize, joint_kernel_flag, simultaneous_block_diagonalize};
pub use matrix::Matrix;
pub use roots::roots_in_qi;
pub use scalar::{rational_sqrt, ParseScalarError, Scalar};

/// Errors from the exact linear-algebra layer.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("input matrices do not pairwise commute")]
    NonCommuting,
    #[error("characteristic polynomial does not split over Q(i); classification unsupported for this input")]
    IrrationalSpectrum,
    #[error("input matrix is not nilpotent")]
    NotNilpotent,
    #[error("matrix dimensions do not match")]
    DimensionMismatch,
    #[error("degenerate block split failed after the retry budget")]
    SplitFailed,
}
