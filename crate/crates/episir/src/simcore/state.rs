use rand::Rng;

use crate::netgen::GroupSpec;
use crate::{Error, Result};

/// Per-individual epidemic state with per-group running tallies.
///
/// `infected` is the ever-infected indicator (monotone), `removed` the
/// removed indicator (monotone, implies infected); active means infected and
/// not removed. Individuals are laid out contiguously by group.
#[derive(Debug, Clone)]
pub struct EpidemicState {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    pub infected: Vec<bool>,
    pub removed: Vec<bool>,
    /// Day the individual became infected; 0 while never infected.
    pub infection_day: Vec<u32>,
    /// Mean of the individual's resilience threshold (raised by vaccination).
    pub immunity: Vec<f64>,
    cum: Vec<u64>,
    rem: Vec<u64>,
    pub day: u32,
}

impl EpidemicState {
    pub fn new(spec: &GroupSpec) -> Self {
        let n = spec.n();
        let groups = spec.group_count();
        Self {
            sizes: spec.sizes().to_vec(),
            offsets: (0..groups).map(|l| spec.group_range(l).start).collect(),
            infected: vec![false; n],
            removed: vec![false; n],
            infection_day: vec![0; n],
            immunity: vec![1.0; n],
            cum: vec![0; groups],
            rem: vec![0; groups],
            day: 1,
        }
    }

    pub fn n(&self) -> usize {
        self.infected.len()
    }

    pub fn group_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn group_range(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l]..self.offsets[l] + self.sizes[l]
    }

    /// Cumulative infected per group (`C_l`).
    pub fn cumulative_by_group(&self) -> &[u64] {
        &self.cum
    }

    /// Removed per group (`R_l`).
    pub fn removed_by_group(&self) -> &[u64] {
        &self.rem
    }

    /// Active per group (`I_l = C_l - R_l`).
    pub fn active_by_group(&self) -> Vec<u64> {
        self.cum.iter().zip(&self.rem).map(|(c, r)| c - r).collect()
    }

    pub fn active_total(&self) -> u64 {
        self.cum.iter().sum::<u64>() - self.rem.iter().sum::<u64>()
    }

    /// Susceptible head-count per group (`S_l = n_l - C_l`).
    pub fn susceptible_by_group(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .zip(&self.cum)
            .map(|(&n, &c)| n - c as usize)
            .collect()
    }

    #[inline]
    pub fn is_active(&self, i: usize) -> bool {
        self.infected[i] && !self.removed[i]
    }

    pub fn active_mask(&self) -> Vec<bool> {
        self.infected
            .iter()
            .zip(&self.removed)
            .map(|(&x, &y)| x && !y)
            .collect()
    }

    /// Mark individual `i` of group `l` infected as of `day`.
    pub(crate) fn infect(&mut self, i: usize, l: usize, day: u32) {
        debug_assert!(!self.infected[i]);
        self.infected[i] = true;
        self.infection_day[i] = day;
        self.cum[l] += 1;
    }

    /// Mark active individual `i` of group `l` removed.
    pub(crate) fn remove(&mut self, i: usize, l: usize) {
        debug_assert!(self.infected[i] && !self.removed[i]);
        self.removed[i] = true;
        self.rem[l] += 1;
    }

    /// Seed `round(fraction * n)` infections uniformly without replacement
    /// across the whole population, dated day 1.
    pub fn seed_initial_infections<R: Rng + ?Sized>(
        &mut self,
        fraction: f64,
        rng: &mut R,
    ) -> Result<()> {
        let n = self.n();
        let count = (fraction * n as f64).round() as usize;
        if count == 0 {
            return Err(Error::InvalidParameter(format!(
                "initial infected fraction {fraction} rounds to zero individuals"
            )));
        }
        for idx in rand::seq::index::sample(rng, n, count) {
            let l = self.group_of(idx);
            self.infect(idx, l, 1);
        }
        Ok(())
    }

    pub fn group_of(&self, i: usize) -> usize {
        match self.offsets.binary_search(&i) {
            Ok(l) => l,
            Err(ins) => ins - 1,
        }
    }

    /// Integer conservation check `S_l + I_l + R_l = n_l`, used by tests.
    pub fn conservation_holds(&self) -> bool {
        (0..self.group_count()).all(|l| {
            let c = self.cum[l];
            let r = self.rem[l];
            let s = self.sizes[l] as u64 - c;
            s + (c - r) + r == self.sizes[l] as u64
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replication_rng;

    #[test]
    fn seeding_counts_and_errors() {
        let spec = GroupSpec::german_five_group(10_000).unwrap();
        let mut state = EpidemicState::new(&spec);
        let mut rng = replication_rng(5, 0);
        state.seed_initial_infections(0.001, &mut rng).unwrap();
        assert_eq!(state.cumulative_by_group().iter().sum::<u64>(), 10);
        assert_eq!(state.removed_by_group().iter().sum::<u64>(), 0);

        let mut empty = EpidemicState::new(&spec);
        assert!(empty.seed_initial_infections(0.0, &mut rng).is_err());
    }

    #[test]
    fn seed_group_shares_are_multinomial() {
        let spec = GroupSpec::german_five_group(10_000).unwrap();
        let draws = 1000;
        let per_draw = 10.0;
        let mut totals = [0u64; 5];
        for rep in 0..draws {
            let mut state = EpidemicState::new(&spec);
            let mut rng = replication_rng(6, rep);
            state.seed_initial_infections(0.001, &mut rng).unwrap();
            for (l, &c) in state.cumulative_by_group().iter().enumerate() {
                totals[l] += c;
            }
        }
        for (l, &w) in spec.weights().iter().enumerate() {
            let mean = totals[l] as f64 / draws as f64;
            let se = (per_draw * w * (1.0 - w) / draws as f64).sqrt();
            assert!(
                (mean - per_draw * w).abs() < 3.0 * se,
                "group {l}: mean {mean} vs {} (se {se})",
                per_draw * w
            );
        }
    }
}
