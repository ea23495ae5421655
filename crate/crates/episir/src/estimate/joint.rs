use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::beta::fit_beta_window;
use super::mf::estimate_mf_window;
use crate::calib::recursive_removed;
use crate::netgen::GroupSpec;
use crate::rng::replication_rng;
use crate::simcore::{ContactModel, EpidemicState, RecoveryMode, SimConfig};
use crate::{Error, Result};

/// Configuration of the joint transmission-rate / multiplication-factor
/// estimator. Field names match the JSON config keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JointConfig {
    pub gamma: f64,
    /// Rolling window for the transmission rate, in days.
    pub window_beta_days: usize,
    /// Block length between multiplication-factor updates, in days.
    pub window_m_days: usize,
    /// Reported cumulative share below which the factor is unidentified.
    pub c_threshold: f64,
    /// Multiplication-factor guess used before identification.
    pub mf_guess: f64,
    /// Population of the embedded simulation ensemble.
    pub sim_n: usize,
    /// Replications of the embedded ensemble.
    pub sim_b: usize,
    /// Mean contacts of the embedded single-group network.
    pub sim_k: f64,
    pub seed: u64,
    /// Pre-window simulation days are pinned to the first estimate whose
    /// implied reproduction number falls below this cap.
    pub r0_cap: Option<f64>,
    /// Outbreak start: first day with smoothed daily new cases above this
    /// per-capita level (one per hundred thousand).
    pub start_threshold: f64,
}

impl Default for JointConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0 / 14.0,
            window_beta_days: 14,
            window_m_days: 14,
            c_threshold: 0.01,
            mf_guess: 5.0,
            sim_n: 50_000,
            sim_b: 500,
            sim_k: 10.0,
            seed: 0,
            r0_cap: Some(3.0),
            start_threshold: 1e-5,
        }
    }
}

impl JointConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidParameter("gamma must lie in (0, 1]".into()));
        }
        if self.window_beta_days < 2 || self.window_m_days < 1 {
            return Err(Error::InvalidParameter(
                "windows require window_beta_days >= 2 and window_m_days >= 1".into(),
            ));
        }
        if self.mf_guess < 1.0 {
            return Err(Error::InvalidParameter(
                "the multiplication factor is at least one".into(),
            ));
        }
        if self.sim_n < 1000 || self.sim_b == 0 {
            return Err(Error::InvalidParameter(
                "embedded ensemble needs sim_n >= 1000 and sim_b >= 1".into(),
            ));
        }
        if self.c_threshold <= 0.0 {
            return Err(Error::InvalidParameter("c_threshold must be positive".into()));
        }
        Ok(())
    }
}

/// Time-indexed estimates with window metadata and per-day flags.
#[derive(Debug, Clone)]
pub struct EstimateSeries {
    /// Daily transmission-rate estimates (window ending at each day).
    pub beta_hat: Vec<Option<f64>>,
    /// Multiplication factor in force at each day (block value).
    pub m_hat: Vec<Option<f64>>,
    /// Effective reproduction number `(1 - m_hat c_tilde) beta_hat / gamma`.
    pub r_et_hat: Vec<Option<f64>>,
    /// Day was inside a clamped multiplication-factor block.
    pub clamped: Vec<bool>,
    /// Block update failed here; previous block value carried.
    pub carried: Vec<bool>,
    /// Outbreak start day (index into the series).
    pub start: usize,
    /// Day the reported share first exceeded the identification threshold.
    pub t0: Option<usize>,
    /// Block endpoints `(day, factor)` for interpolation-based adjustment.
    pub mf_blocks: Vec<(usize, f64)>,
    pub window_beta_days: usize,
    pub window_m_days: usize,
    pub gamma: f64,
}

impl EstimateSeries {
    pub fn len(&self) -> usize {
        self.beta_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_hat.is_empty()
    }
}

/// Ensemble of single-group simulation paths stepped in lockstep with the
/// estimation, so factor updates continue from stored states rather than
/// restarting.
pub struct SimPool {
    states: Vec<(EpidemicState, ChaCha12Rng)>,
    cfg: SimConfig,
    /// `c[b][d]`, `i[b][d]` aligned so `d = 0` is the pool's day 1.
    c: Vec<Vec<f64>>,
    i: Vec<Vec<f64>>,
}

impl SimPool {
    /// Seed `b` single-group paths of size `n` with mean contacts `k`.
    pub fn new(n: usize, k: f64, gamma: f64, b: usize, seed: u64) -> Result<Self> {
        let spec = GroupSpec::single_group(n, k)?;
        let cfg = SimConfig {
            spec,
            tau: vec![1.0 / k],
            gamma: vec![gamma],
            recovery: RecoveryMode::Geometric,
            contacts: ContactModel::Binomial,
            initial_infected_fraction: 1e-3,
            tau_scale: Some(vec![0.0]),
            replications: b,
            max_days: u32::MAX,
            master_seed: seed,
        };
        cfg.validate()?;
        let mut states = Vec::with_capacity(b);
        let mut c = Vec::with_capacity(b);
        let mut i = Vec::with_capacity(b);
        let n_f = n as f64;
        for rep in 0..b as u64 {
            let mut rng = replication_rng(seed, rep);
            let mut state = EpidemicState::new(&cfg.spec);
            state
                .seed_initial_infections(cfg.initial_infected_fraction, &mut rng)
                .expect("validated");
            c.push(vec![state.cumulative_by_group()[0] as f64 / n_f]);
            i.push(vec![state.active_total() as f64 / n_f]);
            states.push((state, rng));
        }
        Ok(Self { states, cfg, c, i })
    }

    pub fn recorded_days(&self) -> usize {
        self.c[0].len()
    }

    /// Step every path until `days` days are recorded. `beta[d]` drives the
    /// transition out of pool day `d + 1`; extinct paths extend their final
    /// values without consuming randomness.
    pub fn step_to(&mut self, days: usize, beta: &[f64]) {
        if days <= self.recorded_days() {
            return;
        }
        // Base tau is 1/k, so the per-day scale is the rate itself:
        // tau_eff(d) = beta[d] / k.
        self.cfg.tau_scale = Some(beta.to_vec());

        let cfg = &self.cfg;
        let n_f = cfg.spec.n() as f64;
        let work = |((state, rng), (c, i)): (
            &mut (EpidemicState, ChaCha12Rng),
            (&mut Vec<f64>, &mut Vec<f64>),
        )| {
            while c.len() < days {
                if state.active_total() == 0 {
                    let last = *c.last().unwrap();
                    c.push(last);
                    i.push(0.0);
                    state.day += 1;
                    continue;
                }
                crate::simcore::step_day(state, cfg, rng);
                c.push(state.cumulative_by_group()[0] as f64 / n_f);
                i.push(state.active_total() as f64 / n_f);
            }
        };

        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            self.states
                .par_iter_mut()
                .zip(self.c.par_iter_mut().zip(self.i.par_iter_mut()))
                .for_each(work);
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.states
                .iter_mut()
                .zip(self.c.iter_mut().zip(self.i.iter_mut()))
                .for_each(work);
        }
    }

    /// Ensemble mean cumulative share at pool day index `d`.
    pub fn mean_c(&self, d: usize) -> f64 {
        self.c.iter().map(|c| c[d]).sum::<f64>() / self.c.len() as f64
    }

    /// Ensemble mean of `e^{-beta i^{(b)}_d}` at pool day index `d`.
    pub fn mean_survival(&self, beta: f64, d: usize) -> f64 {
        self.i
            .iter()
            .map(|i| (-beta * i[d]).exp())
            .sum::<f64>()
            / self.i.len() as f64
    }

    /// Per-path daily new cases at pool day index `d`, for fan charts.
    pub fn new_cases_column(&self, d: usize) -> Vec<f64> {
        self.c
            .iter()
            .map(|c| if d == 0 { c[0] } else { c[d] - c[d - 1] })
            .collect()
    }

    pub fn paths(&self) -> usize {
        self.c.len()
    }
}

/// Jointly estimate the daily transmission rate and the under-reporting
/// multiplication factor from a reported cumulative-case series.
///
/// Until the reported share reaches `c_threshold` the rate is fitted with
/// the guessed factor; the first factor estimate is the ratio of mean
/// simulated to reported cases at that day. Thereafter rate windows use the
/// factor of their block and the factor updates every `window_m_days` from
/// simulated moments, with simulations continuing from stored states.
pub fn joint_estimate(c_tilde: &[f64], cfg: &JointConfig) -> Result<EstimateSeries> {
    joint_estimate_with_pool(c_tilde, cfg).map(|(series, _)| series)
}

/// As [`joint_estimate`], additionally returning the embedded simulation
/// pool (the calibrated ensemble) when identification was reached.
pub fn joint_estimate_with_pool(
    c_tilde: &[f64],
    cfg: &JointConfig,
) -> Result<(EstimateSeries, Option<SimPool>)> {
    cfg.validate()?;
    let days = c_tilde.len();
    if days < cfg.window_beta_days + 2 {
        return Err(Error::InvalidParameter(
            "series shorter than one estimation window".into(),
        ));
    }
    if c_tilde.iter().any(|&c| !(0.0..1.0).contains(&c)) {
        return Err(Error::InvalidParameter(
            "reported shares must lie in [0, 1)".into(),
        ));
    }

    let r_tilde = recursive_removed(c_tilde, cfg.gamma);
    let i_tilde: Vec<f64> = c_tilde
        .iter()
        .zip(&r_tilde)
        .map(|(c, r)| (c - r).max(0.0))
        .collect();

    // Outbreak start: smoothed daily new cases exceed the threshold.
    let start = (0..days)
        .find(|&t| {
            let prev = if t == 0 { 0.0 } else { c_tilde[t - 1] };
            c_tilde[t] - prev > cfg.start_threshold
        })
        .ok_or_else(|| {
            Error::Undefined("outbreak start never reached the detection threshold".into())
        })?;

    let w_b = cfg.window_beta_days;
    let w_m = cfg.window_m_days;
    let first_estimable = start + w_b;
    let t0 = (0..days).find(|&t| c_tilde[t] > cfg.c_threshold);

    let mut beta_hat: Vec<Option<f64>> = vec![None; days];
    let mut m_hat: Vec<Option<f64>> = vec![None; days];
    let mut clamped = vec![false; days];
    let mut carried = vec![false; days];
    let mut mf_blocks: Vec<(usize, f64)> = Vec::new();

    // Effective series under a constant factor within each window.
    let fit_with_m = |t: usize, m: f64| -> Option<f64> {
        let c_eff: Vec<f64> = c_tilde.iter().map(|c| (c * m).min(1.0 - 1e-12)).collect();
        let i_eff: Vec<f64> = i_tilde.iter().map(|i| i * m).collect();
        if t < first_estimable {
            return None;
        }
        fit_beta_window(&c_eff, &i_eff, t, w_b)
    };

    // Phase one: guessed factor up to the identification day.
    let phase_one_end = t0.unwrap_or(days - 1);
    for t in first_estimable..=phase_one_end {
        beta_hat[t] = fit_with_m(t, cfg.mf_guess);
    }

    let Some(t0) = t0 else {
        // Identification never reached: the factor stays undefined.
        return Ok((
            EstimateSeries {
                beta_hat,
                m_hat,
                r_et_hat: vec![None; days],
                clamped,
                carried,
                start,
                t0: None,
                mf_blocks,
                window_beta_days: w_b,
                window_m_days: w_m,
                gamma: cfg.gamma,
            },
            None,
        ));
    };

    // Simulation path: pool day 1 corresponds to data day `start`. Days
    // before the first defined estimate are pinned to the first estimate
    // consistent with the reproduction-number cap.
    let pin = first_capped_estimate(&beta_hat, cfg)
        .ok_or_else(|| Error::Undefined("no usable early transmission estimate".into()))?;
    let beta_for_sim = |beta_hat: &[Option<f64>], d: usize| -> f64 {
        // d is a data index >= start.
        beta_hat
            .get(d)
            .copied()
            .flatten()
            .unwrap_or(pin)
    };

    let mut pool = SimPool::new(cfg.sim_n, cfg.sim_k, cfg.gamma, cfg.sim_b, cfg.seed)?;
    let mut sim_beta: Vec<f64> = Vec::new();
    let mut extend_sim = |pool: &mut SimPool,
                          sim_beta: &mut Vec<f64>,
                          beta_hat: &[Option<f64>],
                          upto: usize| {
        // Pool day d+1 (index d) steps with the beta of data day start + d.
        while sim_beta.len() < upto.saturating_sub(start) {
            let data_day = start + sim_beta.len();
            sim_beta.push(beta_for_sim(beta_hat, data_day));
        }
        pool.step_to(upto - start + 1, sim_beta);
    };

    // First factor estimate: mean calibrated over realized cases at t0.
    extend_sim(&mut pool, &mut sim_beta, &beta_hat, t0);
    let mut current_m = (pool.mean_c(t0 - start) / c_tilde[t0]).max(1.0);
    let clamped_first = pool.mean_c(t0 - start) / c_tilde[t0] < 1.0;
    mf_blocks.push((t0, current_m));
    for t in t0..days {
        // Overwritten block by block below; initialise with the first value.
        m_hat[t] = Some(current_m);
        clamped[t] = clamped_first;
    }

    // Alternate: estimate rates through the block, advance simulations,
    // update the factor at the block end.
    let mut block_start = t0;
    loop {
        let block_end = (block_start + w_m).min(days - 1);
        for t in (block_start + 1)..=block_end {
            beta_hat[t] = fit_with_m(t, current_m);
            m_hat[t] = Some(current_m);
        }
        extend_sim(&mut pool, &mut sim_beta, &beta_hat, block_end);

        if block_end == days - 1 {
            break;
        }

        // Survival factors g_tau = mean_b e^{-beta_{tau-1} i^(b)_{tau-1}}.
        let survival: Vec<Option<f64>> = (0..days)
            .map(|tau| {
                if tau == 0 || tau <= start || tau > block_end {
                    return None;
                }
                let lag = tau - 1;
                beta_hat[lag]
                    .or(if lag >= start { Some(pin) } else { None })
                    .map(|b| pool.mean_survival(b, lag - start))
            })
            .collect();
        let update = estimate_mf_window(c_tilde, &survival, block_end, w_m);
        match update.value {
            Some(m) => {
                current_m = m;
                for t in block_end..days {
                    m_hat[t] = Some(m);
                    clamped[t] = update.clamped;
                    carried[t] = false;
                }
            }
            None => {
                for t in block_end..days {
                    carried[t] = true;
                }
            }
        }
        mf_blocks.push((block_end, current_m));
        block_start = block_end;
    }

    let r_et_hat: Vec<Option<f64>> = (0..days)
        .map(|t| match (beta_hat[t], m_hat[t]) {
            (Some(b), Some(m)) => Some((1.0 - m * c_tilde[t]) * b / cfg.gamma),
            _ => None,
        })
        .collect();

    Ok(EstimateSeries {
        beta_hat,
        m_hat,
        r_et_hat,
        clamped,
        carried,
        start,
        t0: Some(t0),
        mf_blocks,
        window_beta_days: w_b,
        window_m_days: w_m,
        gamma: cfg.gamma,
    })
}

/// First defined estimate whose implied reproduction number respects the
/// cap; without a cap, simply the first defined estimate.
fn first_capped_estimate(beta_hat: &[Option<f64>], cfg: &JointConfig) -> Option<f64> {
    let capped = beta_hat.iter().flatten().copied().find(|b| match cfg.r0_cap {
        Some(cap) => b / cfg.gamma < cap,
        None => true,
    });
    capped.or_else(|| beta_hat.iter().flatten().copied().next())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_match_contract() {
        let cfg = JointConfig::default();
        assert_eq!(cfg.c_threshold, 0.01);
        assert_eq!(cfg.mf_guess, 5.0);
        assert_eq!(cfg.sim_n, 50_000);
        assert_eq!(cfg.sim_b, 500);
        assert_eq!(cfg.window_beta_days, 14);
        assert!((cfg.gamma - 1.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn series_below_threshold_leaves_factor_undefined() {
        let cfg = JointConfig {
            sim_n: 2_000,
            sim_b: 8,
            seed: 3,
            ..Default::default()
        };
        // Slow linear growth that never approaches the 1% threshold.
        let c: Vec<f64> = (0..60).map(|t| 2e-5 * t as f64).collect();
        let est = joint_estimate(&c, &cfg).unwrap();
        assert_eq!(est.t0, None);
        assert!(est.m_hat.iter().all(|m| m.is_none()));
        assert!(est.beta_hat.iter().any(|b| b.is_some()));
    }
}
