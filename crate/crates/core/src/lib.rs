//! Numerical laboratory for second-order fluctuations of random matrices.
//!
//! The crate samples the GUE, block Gaussian and `A + UBU*` ensembles,
//! evaluates the second-order Cauchy transform `G₂(z, w)` in closed form,
//! by series and by Monte Carlo, computes limiting covariances of linear
//! statistics by double contour integration, and checks fluctuation
//! bounds empirically. A small Fréchet calculus module evaluates the
//! kernel representation of covariances on a mesh.

pub mod ensembles;
pub mod error;
pub mod frechet;
pub mod moments;
pub mod polynomial;
pub mod quadrature;
pub mod rng;
pub mod statistics;
pub mod suite;
pub mod transforms;

pub use ensembles::{EnsembleDescriptor, EnsembleSpec, HermitianMatrix, Spectrum};
pub use error::{Error, Result};
pub use frechet::{FrechetMesh, VariationMode};
pub use moments::MomentTable;
pub use polynomial::Polynomial;
pub use quadrature::{AnalyticFunction, Contour};
pub use rng::RngStream;
pub use statistics::{EstimateWithError, TestFunction};
