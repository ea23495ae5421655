//! Estimation of transmission rates, the recovery rate, and the
//! under-reporting multiplication factor from case series.

mod beta;
mod gamma;
mod joint;
mod mf;
mod solver;

pub use beta::{fit_beta_rolling, fit_beta_window, moment_path};
pub use gamma::fit_gamma_ols;
pub use joint::{joint_estimate, EstimateSeries, JointConfig, SimPool};
pub use mf::{estimate_mf_window, MfEstimate};
pub use solver::minimize_scalar;
