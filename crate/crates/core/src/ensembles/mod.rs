//! Ensemble samplers and spectral primitives.

mod eigen;
pub mod io;
mod matrix;
mod sampling;
mod spec;

pub use eigen::{eigen_decomposition, eigenvalues, operator_norm};
pub use matrix::{CMatrix, HermitianMatrix, Spectrum};
pub use sampling::{sample_additive, sample_block_gaussian, sample_gue, sample_haar_unitary};
pub use spec::{Ensemble, EnsembleDescriptor, EnsembleSpec, MatrixDescriptor, DEFAULT_GUE_CUTOFF};
