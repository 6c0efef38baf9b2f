//! Monte Carlo estimators for linear statistics and the fluctuation
//! diagnostics built on them.

pub mod approximation;
pub mod clt;
pub mod estimate;
pub mod kstat;
pub mod mc;
pub mod test_function;

pub use approximation::{c1_extension, chebyshev_approx, ChebyshevApprox};
pub use clt::{clt_experiment, clt_experiment_many, CltReport, CltRow, CltTrend};
pub use estimate::{replicate, EstimateWithError};
pub use kstat::{k_statistic, KStatistic, PowerSums};
pub use mc::{
    covariance_mc, cumulant_mc, linear_statistic, poincare_check, sample_statistics, tail_fraction,
    truncated_linear_statistic, truncation_gap, PoincareReport, SampledStatistics,
    TruncationReport,
};
pub use test_function::TestFunction;
