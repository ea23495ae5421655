//! Daily random contact structures.
//!
//! Generators for Erdős–Rényi, truncated power-law (configuration model),
//! and stochastic block model networks, together with
//! [`binomial_contact_counts`], a fast path that samples each susceptible's
//! number of active contacts directly. Because edges are independent
//! Bernoulli draws resampled every day, the count of active neighbours of a
//! susceptible in group `l` is exactly `sum_l' Binomial(I_l', p_ll')`, so the
//! fast path is distributionally identical to counting neighbours on a
//! freshly sampled network.

mod graphs;
mod spec;

pub use graphs::{
    count_active_contacts, draw_power_law_degrees, sample_er_network, sample_power_law_network,
    sample_sbm_network, solve_power_law_exponent, truncated_power_law_mean, ContactNetwork,
    DegreeKind, DegreeLaw,
};
pub use spec::{edge_probabilities, GroupSpec, DEFAULT_RECIPROCITY_TOL};

use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Sample, for every susceptible individual, its number of active contacts
/// for one day, without materializing a network.
///
/// `active` holds the active head-count per group, `susceptible` the number
/// of susceptibles per group. Returns one vector per group with counts in
/// susceptible-iteration order. Distribution is identical to counting active
/// neighbours on a network freshly sampled from `spec`'s edge probabilities.
pub fn binomial_contact_counts<R: Rng + ?Sized>(
    active: &[u64],
    susceptible: &[usize],
    spec: &GroupSpec,
    rng: &mut R,
) -> Vec<Vec<u32>> {
    let groups = spec.group_count();
    assert_eq!(active.len(), groups);
    assert_eq!(susceptible.len(), groups);
    for (l, &a) in active.iter().enumerate() {
        assert!(
            a <= spec.sizes()[l] as u64,
            "active count exceeds group size"
        );
    }

    let mut out = Vec::with_capacity(groups);
    for l in 0..groups {
        // One distribution per source group, shared by every susceptible in l.
        let dists: Vec<Option<Binomial>> = (0..groups)
            .map(|lp| {
                if active[lp] == 0 {
                    None
                } else {
                    Some(
                        Binomial::new(active[lp], spec.edge_probs()[l][lp])
                            .expect("edge probability validated in [0, 1]"),
                    )
                }
            })
            .collect();
        let mut counts = vec![0u32; susceptible[l]];
        for c in counts.iter_mut() {
            let mut m = 0u64;
            for d in dists.iter().flatten() {
                m += d.sample(rng);
            }
            *c = m as u32;
        }
        out.push(counts);
    }
    out
}
