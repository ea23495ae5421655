//! Individual-based daily stepping and Monte Carlo ensembles.
//!
//! One replication seeds a fraction of the population as infected on day 1,
//! then alternates contact sampling, infection, and recovery until no active
//! cases remain (or `max_days`). Replications are independent and run in
//! parallel under the `parallel` feature; assembly is deterministic for any
//! thread count.

mod run;
mod state;
mod summary;

pub(crate) use run::step_day;
pub use run::{
    run_ensemble, run_ensemble_sequential, run_ensemble_with, run_replication,
    run_replication_with, step_infection_counts, step_infection_network, step_recovery,
    truncated_hazard, DailyIntervention, Replication,
};
pub use state::EpidemicState;
pub use summary::{percentile, Band, EnsembleResult, SeriesBands};

use crate::netgen::{DegreeLaw, GroupSpec};
use crate::{Error, Result};

/// Recovery-time distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum RecoveryMode {
    /// Constant daily hazard `gamma_l` regardless of infection duration.
    Geometric,
    /// Geometric truncated at `D_l` days: hazard rises with duration and
    /// removal is certain at `D_l`.
    Truncated(Vec<u32>),
}

/// How daily contacts are realized.
#[derive(Debug, Clone, PartialEq)]
pub enum ContactModel {
    /// Sample each susceptible's active-contact count directly
    /// (distributionally exact for Bernoulli-edge models; the default).
    Binomial,
    /// Resample an explicit network daily (Erdős–Rényi for one group,
    /// stochastic block model otherwise).
    ExplicitNetwork,
    /// Explicit truncated power-law network via the configuration model;
    /// single group only.
    PowerLaw(DegreeLaw),
}

/// Full configuration of one ensemble run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: GroupSpec,
    /// Group exposure intensities `tau_l`.
    pub tau: Vec<f64>,
    /// Group daily recovery probabilities.
    pub gamma: Vec<f64>,
    pub recovery: RecoveryMode,
    pub contacts: ContactModel,
    /// Fraction of the whole population seeded infected on day 1.
    pub initial_infected_fraction: f64,
    /// Optional day-indexed multiplier on every `tau_l` (day `t` uses entry
    /// `t - 1`; the last entry is held afterwards). Transitions from day `t`
    /// to `t + 1` use day `t`'s scale.
    pub tau_scale: Option<Vec<f64>>,
    pub replications: usize,
    pub max_days: u32,
    pub master_seed: u64,
}

impl SimConfig {
    /// Single-group run on an Erdős–Rényi contact structure with aggregate
    /// transmission rate `beta` (so `tau = beta / k`).
    pub fn single_group(n: usize, k: f64, beta: f64, gamma: f64, seed: u64) -> Result<Self> {
        let spec = GroupSpec::single_group(n, k)?;
        let cfg = Self {
            spec,
            tau: vec![beta / k],
            gamma: vec![gamma],
            recovery: RecoveryMode::Geometric,
            contacts: ContactModel::Binomial,
            initial_infected_fraction: 1e-3,
            tau_scale: None,
            replications: 1000,
            max_days: 1000,
            master_seed: seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Multigroup run with explicit exposure intensities.
    pub fn multigroup(spec: GroupSpec, tau: Vec<f64>, gamma: f64, seed: u64) -> Result<Self> {
        let groups = spec.group_count();
        let cfg = Self {
            spec,
            tau,
            gamma: vec![gamma; groups],
            recovery: RecoveryMode::Geometric,
            contacts: ContactModel::Binomial,
            initial_infected_fraction: 1e-3,
            tau_scale: None,
            replications: 1000,
            max_days: 1000,
            master_seed: seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let groups = self.spec.group_count();
        if self.tau.len() != groups || self.gamma.len() != groups {
            return Err(Error::InvalidParameter(
                "tau and gamma must have one entry per group".into(),
            ));
        }
        if self.tau.iter().any(|&t| !t.is_finite() || t < 0.0) {
            return Err(Error::InvalidParameter(
                "exposure intensities must be finite and non-negative (tau_l >= 0)".into(),
            ));
        }
        if self.gamma.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
            return Err(Error::InvalidParameter(
                "recovery probabilities must satisfy 0 < gamma_l <= 1".into(),
            ));
        }
        if let RecoveryMode::Truncated(ds) = &self.recovery {
            if ds.len() != groups {
                return Err(Error::InvalidParameter(
                    "truncated recovery needs one cap per group".into(),
                ));
            }
            if ds.iter().any(|&d| d < 1) {
                return Err(Error::InvalidParameter(
                    "truncated recovery caps must satisfy D_l >= 1".into(),
                ));
            }
        }
        if !(self.initial_infected_fraction > 0.0 && self.initial_infected_fraction < 1.0) {
            return Err(Error::InvalidParameter(
                "initial infected fraction must lie strictly in (0, 1)".into(),
            ));
        }
        if (self.initial_infected_fraction * self.spec.n() as f64).round() < 1.0 {
            return Err(Error::InvalidParameter(
                "initial infected fraction rounds to zero individuals".into(),
            ));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("need at least one replication".into()));
        }
        if self.max_days == 0 {
            return Err(Error::InvalidParameter("max_days must be positive".into()));
        }
        if let ContactModel::PowerLaw(law) = &self.contacts {
            if groups != 1 {
                return Err(Error::InvalidParameter(
                    "power-law contact networks are single-group only".into(),
                ));
            }
            if law.k_max >= self.spec.n() {
                return Err(Error::InvalidParameter(
                    "power-law k_max must be below the population size".into(),
                ));
            }
        }
        if let Some(scale) = &self.tau_scale {
            if scale.is_empty() || scale.iter().any(|&s| !s.is_finite() || s < 0.0) {
                return Err(Error::InvalidParameter(
                    "tau scale profile must be non-empty and non-negative".into(),
                ));
            }
        }
        Ok(())
    }

    /// Multiplier applied to every `tau_l` for transitions out of `day`.
    pub fn tau_scale_at(&self, day: u32) -> f64 {
        match &self.tau_scale {
            None => 1.0,
            Some(scale) => {
                let idx = (day as usize - 1).min(scale.len() - 1);
                scale[idx]
            }
        }
    }
}
