//! Individual-based stochastic SIR epidemics on daily-resampled random
//! contact networks.
//!
//! The crate is organized around the life cycle of an analysis:
//!
//! * [`netgen`] builds group specifications and samples daily contact
//!   structures (Erdős–Rényi, truncated power law, stochastic block model),
//!   plus a distributionally equivalent binomial contact-count fast path.
//! * [`simcore`] steps the per-individual infection/recovery processes and
//!   aggregates Monte Carlo ensembles into fan-chart summaries.
//! * [`moments`] evaluates the analytic moment conditions, reproduction
//!   numbers, herd-immunity thresholds, and the multigroup exposure
//!   calibration.
//! * [`estimate`] fits time-varying transmission rates, the recovery rate,
//!   and the under-reporting multiplication factor from case series.
//! * [`calib`] ingests reported case data and runs the full country
//!   calibration pipeline.
//! * [`policy`] provides counterfactual machinery: distancing schedules,
//!   vaccination rollouts, and transmission-path time shifts.
//! * [`cli`] binds everything to the `episir` command-line tool.
//!
//! Ensembles parallelize across replications with rayon when the default
//! `parallel` feature is enabled; results are bit-identical for any thread
//! count because every replication owns a counter-derived random stream.

pub mod calib;
pub mod cli;
mod error;
pub mod estimate;
pub mod moments;
pub mod netgen;
pub mod policy;
pub mod rng;
pub mod simcore;

pub use error::{Error, Result};
