use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::summary::EnsembleResult;
use super::{ContactModel, EpidemicState, RecoveryMode, SimConfig};
use crate::netgen::{
    binomial_contact_counts, count_active_contacts, sample_power_law_network, sample_sbm_network,
    ContactNetwork,
};
use crate::rng::replication_rng;

/// Hook applied at the start of every simulated day (vaccination rollouts
/// and similar). Implementations own any randomness they need.
pub trait DailyIntervention {
    fn apply(&mut self, state: &mut EpidemicState, day: u32);
}

/// Group and aggregate time series of one replication, recorded daily from
/// day 1 (seeding) to extinction or `max_days`.
#[derive(Debug, Clone)]
pub struct Replication {
    pub weights: Vec<f64>,
    pub sizes: Vec<usize>,
    /// `cum[d][l]` = cumulative infected in group `l` on day `d + 1`.
    pub cum: Vec<Vec<u64>>,
    /// `rem[d][l]` = removed in group `l` on day `d + 1`.
    pub rem: Vec<Vec<u64>>,
    /// First day with zero active cases, capped at `max_days`.
    pub t_star: u32,
    /// True if active cases remained at `max_days`.
    pub undying: bool,
}

impl Replication {
    pub fn days(&self) -> usize {
        self.cum.len()
    }

    /// Per-capita cumulative infections in group `l`, padded to `len`.
    pub fn c_group(&self, l: usize, len: usize) -> Vec<f64> {
        let n = self.sizes[l] as f64;
        pad_tail(self.cum.iter().map(|d| d[l] as f64 / n).collect(), len)
    }

    /// Aggregate per-capita cumulative infections, padded to `len`.
    pub fn c_aggregate(&self, len: usize) -> Vec<f64> {
        let n: usize = self.sizes.iter().sum();
        pad_tail(
            self.cum
                .iter()
                .map(|d| d.iter().sum::<u64>() as f64 / n as f64)
                .collect(),
            len,
        )
    }

    /// Aggregate per-capita active cases, padded to `len` (zero after
    /// extinction).
    pub fn i_aggregate(&self, len: usize) -> Vec<f64> {
        let n: usize = self.sizes.iter().sum();
        pad_tail(
            self.cum
                .iter()
                .zip(&self.rem)
                .map(|(c, r)| (c.iter().sum::<u64>() - r.iter().sum::<u64>()) as f64 / n as f64)
                .collect(),
            len,
        )
    }

    /// Aggregate per-capita removed, padded to `len`.
    pub fn r_aggregate(&self, len: usize) -> Vec<f64> {
        let n: usize = self.sizes.iter().sum();
        pad_tail(
            self.rem
                .iter()
                .map(|d| d.iter().sum::<u64>() as f64 / n as f64)
                .collect(),
            len,
        )
    }

    pub fn i_group(&self, l: usize, len: usize) -> Vec<f64> {
        let n = self.sizes[l] as f64;
        pad_tail(
            self.cum
                .iter()
                .zip(&self.rem)
                .map(|(c, r)| (c[l] - r[l]) as f64 / n)
                .collect(),
            len,
        )
    }

    pub fn r_group(&self, l: usize, len: usize) -> Vec<f64> {
        let n = self.sizes[l] as f64;
        pad_tail(self.rem.iter().map(|d| d[l] as f64 / n).collect(), len)
    }
}

fn pad_tail(mut v: Vec<f64>, len: usize) -> Vec<f64> {
    let last = *v.last().expect("series never empty");
    v.resize(len, last);
    v
}

/// Daily new-case series from a cumulative series (`dc_1 = c_1`).
pub(crate) fn new_cases(c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len());
    let mut prev = 0.0;
    for &x in c {
        out.push(x - prev);
        prev = x;
    }
    out
}

/// One recovery pass over the active set at the start of the day.
///
/// Geometric mode removes each active individual with probability `gamma_l`;
/// truncated mode uses the duration-dependent hazard with certain removal
/// once the duration reaches the cap.
pub fn step_recovery<R: Rng + ?Sized>(
    state: &mut EpidemicState,
    gamma: &[f64],
    mode: &RecoveryMode,
    rng: &mut R,
) {
    let day = state.day;
    for l in 0..state.group_count() {
        let range = state.group_range(l);
        for i in range {
            if !state.is_active(i) {
                continue;
            }
            let remove = match mode {
                RecoveryMode::Geometric => rng.random::<f64>() < gamma[l],
                RecoveryMode::Truncated(caps) => {
                    // Candidate duration if removed now.
                    let s = day + 1 - state.infection_day[i];
                    if s >= caps[l] {
                        true
                    } else {
                        rng.random::<f64>() < truncated_hazard(gamma[l], s, caps[l])
                    }
                }
            };
            if remove {
                state.remove(i, l);
            }
        }
    }
}

/// Hazard of recovering on duration day `s` under the geometric law
/// truncated at `cap`.
pub fn truncated_hazard(gamma: f64, s: u32, cap: u32) -> f64 {
    let q = 1.0 - gamma;
    let qs = q.powi(s as i32 - 1);
    gamma * qs / (qs - q.powi(cap as i32))
}

/// Infection pass from per-susceptible active-contact counts.
///
/// `counts[l][j]` belongs to the `j`-th susceptible of group `l` in index
/// order at the time the counts were drawn. A susceptible with `m` active
/// contacts becomes infected with probability `1 - exp(-(tau_l / mu_i) m)`:
/// a fresh exponential resilience draw against the day's exposure.
pub fn step_infection_counts<R: Rng + ?Sized>(
    state: &mut EpidemicState,
    counts: &[Vec<u32>],
    tau_eff: &[f64],
    rng: &mut R,
) {
    let next_day = state.day + 1;
    for l in 0..state.group_count() {
        let range = state.group_range(l);
        let mut at = 0usize;
        for i in range {
            // Each index is visited once, so `infected[i]` here means
            // infected at the start of the day: in-pass infections only
            // mark the index currently being visited.
            if state.infected[i] {
                continue;
            }
            let m = counts[l][at];
            at += 1;
            if m == 0 {
                continue;
            }
            let theta = tau_eff[l] / state.immunity[i];
            let p = 1.0 - (-theta * m as f64).exp();
            if rng.random::<f64>() < p {
                state.infect(i, l, next_day);
            }
        }
        debug_assert_eq!(at, counts[l].len());
    }
}

/// Infection pass against an explicit network's per-node active-contact
/// counts.
pub fn step_infection_network<R: Rng + ?Sized>(
    state: &mut EpidemicState,
    net: &ContactNetwork,
    tau_eff: &[f64],
    rng: &mut R,
) {
    let active = state.active_mask();
    let counts = count_active_contacts(net, &active);
    let next_day = state.day + 1;
    for l in 0..state.group_count() {
        let range = state.group_range(l);
        for i in range {
            if state.infected[i] {
                continue;
            }
            let m = counts[i];
            if m == 0 {
                continue;
            }
            let theta = tau_eff[l] / state.immunity[i];
            let p = 1.0 - (-theta * m as f64).exp();
            if rng.random::<f64>() < p {
                state.infect(i, l, next_day);
            }
        }
    }
}

/// Advance one day: contact draws from the start-of-day active set, recovery
/// over start-of-day actives, then infections. Individuals infected while
/// forming day `t + 1` cannot recover or transmit the same day.
pub(crate) fn step_day(state: &mut EpidemicState, cfg: &SimConfig, rng: &mut ChaCha12Rng) {
    let scale = cfg.tau_scale_at(state.day);
    let tau_eff: Vec<f64> = cfg.tau.iter().map(|t| t * scale).collect();

    match &cfg.contacts {
        ContactModel::Binomial => {
            let active = state.active_by_group();
            let susceptible = state.susceptible_by_group();
            let counts = binomial_contact_counts(&active, &susceptible, &cfg.spec, rng);
            step_recovery(state, &cfg.gamma, &cfg.recovery, rng);
            step_infection_counts(state, &counts, &tau_eff, rng);
        }
        ContactModel::ExplicitNetwork => {
            let net = sample_sbm_network(&cfg.spec, rng);
            step_recovery(state, &cfg.gamma, &cfg.recovery, rng);
            step_infection_network(state, &net, &tau_eff, rng);
        }
        ContactModel::PowerLaw(law) => {
            let net = sample_power_law_network(cfg.spec.n(), law, rng)
                .expect("power-law parameters validated");
            step_recovery(state, &cfg.gamma, &cfg.recovery, rng);
            step_infection_network(state, &net, &tau_eff, rng);
        }
    }
    state.day += 1;
}

/// Run one replication; deterministic given `(master_seed, replication)`.
pub fn run_replication(cfg: &SimConfig, replication: u64) -> Replication {
    run_replication_with(cfg, replication, None)
}

/// Run one replication with an optional start-of-day intervention.
pub fn run_replication_with(
    cfg: &SimConfig,
    replication: u64,
    mut intervention: Option<&mut dyn DailyIntervention>,
) -> Replication {
    let mut rng = replication_rng(cfg.master_seed, replication);
    let mut state = EpidemicState::new(&cfg.spec);
    state
        .seed_initial_infections(cfg.initial_infected_fraction, &mut rng)
        .expect("config validated");

    let mut cum = Vec::new();
    let mut rem = Vec::new();
    let mut t_star = None;
    loop {
        if let Some(hook) = intervention.as_deref_mut() {
            hook.apply(&mut state, state.day);
        }
        cum.push(state.cumulative_by_group().to_vec());
        rem.push(state.removed_by_group().to_vec());
        if state.active_total() == 0 {
            t_star = Some(state.day);
            break;
        }
        if state.day >= cfg.max_days {
            break;
        }
        step_day(&mut state, cfg, &mut rng);
    }
    Replication {
        weights: cfg.spec.weights().to_vec(),
        sizes: cfg.spec.sizes().to_vec(),
        cum,
        rem,
        t_star: t_star.unwrap_or(cfg.max_days),
        undying: t_star.is_none(),
    }
}

/// Run the configured ensemble, in parallel when the `parallel` feature is
/// enabled.
pub fn run_ensemble(cfg: &SimConfig) -> EnsembleResult {
    run_ensemble_with(cfg, |_| None)
}

/// Run the configured ensemble strictly sequentially (the feature-independent
/// fallback; identical output to [`run_ensemble`]).
pub fn run_ensemble_sequential(cfg: &SimConfig) -> EnsembleResult {
    let reps: Vec<Replication> = (0..cfg.replications as u64)
        .map(|b| run_replication(cfg, b))
        .collect();
    EnsembleResult::assemble(cfg, reps)
}

/// Run an ensemble with a per-replication intervention factory.
#[cfg(feature = "parallel")]
pub fn run_ensemble_with<F>(cfg: &SimConfig, make_intervention: F) -> EnsembleResult
where
    F: Fn(u64) -> Option<Box<dyn DailyIntervention>> + Sync,
{
    use rayon::prelude::*;
    let reps: Vec<Replication> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|b| {
            let mut hook = make_intervention(b);
            run_replication_with(cfg, b, hook.as_deref_mut())
        })
        .collect();
    EnsembleResult::assemble(cfg, reps)
}

/// Run an ensemble with a per-replication intervention factory.
#[cfg(not(feature = "parallel"))]
pub fn run_ensemble_with<F>(cfg: &SimConfig, make_intervention: F) -> EnsembleResult
where
    F: Fn(u64) -> Option<Box<dyn DailyIntervention>> + Sync,
{
    let reps: Vec<Replication> = (0..cfg.replications as u64)
        .map(|b| {
            let mut hook = make_intervention(b);
            run_replication_with(cfg, b, hook.as_deref_mut())
        })
        .collect();
    EnsembleResult::assemble(cfg, reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::GroupSpec;

    fn small_cfg(seed: u64) -> SimConfig {
        let mut cfg = SimConfig::single_group(2_000, 10.0, 3.0 / 14.0, 1.0 / 14.0, seed).unwrap();
        cfg.replications = 4;
        cfg
    }

    #[test]
    fn same_seed_bit_identical() {
        let cfg = small_cfg(99);
        let a = run_replication(&cfg, 3);
        let b = run_replication(&cfg, 3);
        assert_eq!(a.cum, b.cum);
        assert_eq!(a.rem, b.rem);
        assert_eq!(a.t_star, b.t_star);
    }

    #[test]
    fn zero_exposure_never_grows() {
        let spec = GroupSpec::single_group(1_000, 10.0).unwrap();
        let cfg = SimConfig {
            spec,
            tau: vec![0.0],
            gamma: vec![1.0 / 14.0],
            recovery: RecoveryMode::Geometric,
            contacts: ContactModel::Binomial,
            initial_infected_fraction: 1e-3,
            tau_scale: None,
            replications: 1,
            max_days: 1000,
            master_seed: 1,
        };
        cfg.validate().unwrap();
        let rep = run_replication(&cfg, 0);
        let final_c = rep.cum.last().unwrap().iter().sum::<u64>();
        assert_eq!(final_c, 1, "no spread at tau = 0");
        assert!(!rep.undying);
        // All seeded individuals recover in geometric time; the tail bound
        // P(T* > 400) for one individual is (13/14)^400 ~ 1e-13.
        assert!(rep.t_star < 400);
    }

    #[test]
    fn conservation_and_monotonicity() {
        let cfg = small_cfg(7);
        let rep = run_replication(&cfg, 0);
        let n: u64 = rep.sizes.iter().map(|&s| s as u64).sum();
        let mut prev_c = 0u64;
        let mut prev_r = 0u64;
        for (c, r) in rep.cum.iter().zip(&rep.rem) {
            let ct: u64 = c.iter().sum();
            let rt: u64 = r.iter().sum();
            assert!(ct >= prev_c && rt >= prev_r, "monotone tallies");
            assert!(rt <= ct);
            assert!(ct <= n);
            prev_c = ct;
            prev_r = rt;
        }
        // Once active hits zero the series has ended.
        let last = rep.cum.len() - 1;
        assert_eq!(
            rep.cum[last].iter().sum::<u64>(),
            rep.rem[last].iter().sum::<u64>()
        );
    }

    #[test]
    fn infection_probability_matches_closed_form() {
        // theta = 0.1, m = 2 contacts: infection probability 1 - e^{-0.2}.
        let spec = GroupSpec::single_group(2, 1.0).unwrap();
        let trials = 100_000;
        let mut hits = 0u64;
        let mut rng = replication_rng(11, 0);
        for _ in 0..trials {
            let mut state = EpidemicState::new(&spec);
            state.infect(0, 0, 1);
            state.day = 1;
            step_infection_counts(&mut state, &[vec![2]], &[0.1], &mut rng);
            if state.infected[1] {
                hits += 1;
            }
        }
        let p = 1.0 - (-0.2_f64).exp();
        let freq = hits as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * se, "freq {freq} vs {p}");
    }

    #[test]
    fn near_certain_infection_at_huge_tau() {
        // Complete graph on two nodes, tau = 50: the susceptible is
        // essentially always infected on the first step.
        let spec = GroupSpec::single_group(2, 1.0).unwrap();
        let mut rng = replication_rng(12, 0);
        let mut infected = 0;
        for _ in 0..1000 {
            let mut state = EpidemicState::new(&spec);
            state.infect(0, 0, 1);
            let active = state.active_by_group();
            let sus = state.susceptible_by_group();
            let counts = binomial_contact_counts(&active, &sus, &spec, &mut rng);
            step_infection_counts(&mut state, &counts, &[50.0], &mut rng);
            if state.infected[1] {
                infected += 1;
            }
        }
        assert_eq!(infected, 1000);
    }

    #[test]
    fn geometric_recovery_rate_matches_gamma() {
        let spec = GroupSpec::single_group(10_000, 10.0).unwrap();
        let gamma = 1.0 / 14.0;
        let mut state = EpidemicState::new(&spec);
        for i in 0..10_000 {
            state.infect(i, 0, 1);
        }
        let mut rng = replication_rng(13, 0);
        step_recovery(&mut state, &[gamma], &RecoveryMode::Geometric, &mut rng);
        let removed = state.removed_by_group()[0] as f64;
        let se = (10_000.0 * gamma * (1.0 - gamma)).sqrt();
        assert!((removed - 10_000.0 * gamma).abs() < 3.0 * se);
    }

    #[test]
    fn truncated_hazard_shape() {
        let gamma = 1.0 / 14.0;
        // Large cap: hazard collapses to gamma for small durations.
        assert!((truncated_hazard(gamma, 1, 10_000) - gamma).abs() < 1e-10);
        // cap = 28: starts at the normalizing constant, rises monotonically,
        // and reaches certainty at the cap.
        let cap = 28;
        let a = gamma / (1.0 - (1.0 - gamma).powi(cap as i32));
        assert!((truncated_hazard(gamma, 1, cap) - a).abs() < 1e-12);
        let mut prev = 0.0;
        for s in 1..=cap {
            let h = truncated_hazard(gamma, s, cap);
            assert!(h > prev, "hazard must rise with duration");
            prev = h;
        }
        assert!((truncated_hazard(gamma, cap, cap) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn truncated_recovery_forces_removal_at_cap() {
        let spec = GroupSpec::single_group(100, 5.0).unwrap();
        let mut state = EpidemicState::new(&spec);
        for i in 0..100 {
            state.infect(i, 0, 1);
        }
        state.day = 7;
        let mode = RecoveryMode::Truncated(vec![7]);
        let mut rng = replication_rng(14, 0);
        // Duration if removed now: day + 1 - 1 = 7 = cap, so removal is sure.
        step_recovery(&mut state, &[0.05], &mode, &mut rng);
        assert_eq!(state.removed_by_group()[0], 100);
    }

    #[test]
    fn one_step_recovery_moment() {
        // E(R_{t+1}) = (1 - gamma) R_t + gamma C_t on a frozen state.
        let spec = GroupSpec::single_group(50, 5.0).unwrap();
        let gamma = 0.2;
        let trials = 100_000;
        let mut total = 0u64;
        let mut rng = replication_rng(15, 0);
        for _ in 0..trials {
            let mut state = EpidemicState::new(&spec);
            for i in 0..30 {
                state.infect(i, 0, 1);
            }
            for i in 0..10 {
                state.remove(i, 0);
            }
            step_recovery(&mut state, &[gamma], &RecoveryMode::Geometric, &mut rng);
            total += state.removed_by_group()[0];
        }
        let mean = total as f64 / trials as f64;
        let expect = (1.0 - gamma) * 10.0 + gamma * 30.0;
        let se = (20.0 * gamma * (1.0 - gamma) / trials as f64).sqrt();
        assert!((mean - expect).abs() < 3.0 * se, "mean {mean} vs {expect}");
    }
}
