use rand::seq::SliceRandom;
use rand::Rng;

use super::GroupSpec;
use crate::{Error, Result};

/// Degree distribution family for single-group networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeKind {
    /// Erdős–Rényi: Poisson degrees in the large-`n` limit.
    PoissonEr,
    /// Truncated power law `p_x ∝ x^{-alpha}` on `[k_min, k_max]`.
    PowerLaw,
}

/// Parametrized degree law.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeLaw {
    pub kind: DegreeKind,
    pub mean_k: f64,
    pub alpha: f64,
    pub k_min: usize,
    pub k_max: usize,
}

impl DegreeLaw {
    pub fn er(mean_k: f64) -> Self {
        Self {
            kind: DegreeKind::PoissonEr,
            mean_k,
            alpha: f64::NAN,
            k_min: 0,
            k_max: usize::MAX,
        }
    }

    /// Power law with exponent solved so the truncated mean equals
    /// `mean_k`.
    pub fn power_law(mean_k: f64, k_min: usize, k_max: usize) -> Result<Self> {
        let alpha = solve_power_law_exponent(mean_k, k_min, k_max)?;
        Ok(Self {
            kind: DegreeKind::PowerLaw,
            mean_k,
            alpha,
            k_min,
            k_max,
        })
    }

    /// Power law with a fixed exponent.
    pub fn power_law_with_alpha(alpha: f64, k_min: usize, k_max: usize) -> Result<Self> {
        if k_min < 1 || k_min > k_max {
            return Err(Error::InvalidParameter(
                "degree bounds require 1 <= k_min <= k_max".into(),
            ));
        }
        if alpha <= 1.0 {
            return Err(Error::InvalidParameter("power-law alpha must exceed 1".into()));
        }
        Ok(Self {
            kind: DegreeKind::PowerLaw,
            mean_k: truncated_power_law_mean(alpha, k_min, k_max),
            alpha,
            k_min,
            k_max,
        })
    }

    /// Probability mass `p_x` for `x` in `[k_min, k_max]`.
    pub fn pmf(&self) -> Vec<f64> {
        let norm: f64 = (self.k_min..=self.k_max)
            .map(|x| (x as f64).powf(-self.alpha))
            .sum();
        (self.k_min..=self.k_max)
            .map(|x| (x as f64).powf(-self.alpha) / norm)
            .collect()
    }
}

/// Mean of the truncated power-law degree distribution.
pub fn truncated_power_law_mean(alpha: f64, k_min: usize, k_max: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for x in k_min..=k_max {
        let x = x as f64;
        num += x.powf(1.0 - alpha);
        den += x.powf(-alpha);
    }
    num / den
}

/// Solve for the exponent `alpha` whose truncated power-law mean equals
/// `k_target`, by bisection on `alpha ∈ (1.0001, 10]` to 1e-8.
///
/// The truncated mean is strictly decreasing in `alpha`, so a sign check at
/// the bracket ends decides solvability.
pub fn solve_power_law_exponent(k_target: f64, k_min: usize, k_max: usize) -> Result<f64> {
    if k_min < 1 {
        return Err(Error::InvalidParameter("k_min must be at least 1".into()));
    }
    if !((k_min as f64) < k_target && k_target < k_max as f64) {
        return Err(Error::InvalidParameter(format!(
            "need k_min < k_target < k_max, got {k_min} < {k_target} < {k_max}"
        )));
    }
    let (mut lo, mut hi) = (1.0001_f64, 10.0_f64);
    let f = |alpha: f64| truncated_power_law_mean(alpha, k_min, k_max) - k_target;
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return Err(Error::NoRoot(format!(
            "no alpha in (1.0001, 10] gives mean degree {k_target} on [{k_min}, {k_max}]"
        )));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if f(lo).abs() < 1e-8 && hi - lo < 1e-9 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Simple undirected contact network for one day.
#[derive(Debug, Clone, Default)]
pub struct ContactNetwork {
    pub n: usize,
    /// Unordered edges stored as `(min, max)` pairs, no duplicates.
    pub edges: Vec<(u32, u32)>,
}

impl ContactNetwork {
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }
}

/// Count, per node, how many neighbours are active.
pub fn count_active_contacts(net: &ContactNetwork, active: &[bool]) -> Vec<u32> {
    let mut counts = vec![0u32; net.n];
    for &(a, b) in &net.edges {
        let (a, b) = (a as usize, b as usize);
        if active[a] {
            counts[b] += 1;
        }
        if active[b] {
            counts[a] += 1;
        }
    }
    counts
}

/// Geometric-skip sampler over a row-major grid of `total` candidate pairs,
/// keeping each with probability `p`. Yields kept linear indices.
fn sample_pair_indices<R: Rng + ?Sized>(total: u64, p: f64, rng: &mut R, mut keep: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        for idx in 0..total {
            keep(idx);
        }
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut idx: i128 = -1;
    loop {
        let r: f64 = rng.random();
        // Skip length ~ Geometric(p).
        let skip = ((1.0 - r).ln() / log_q).floor() as i128;
        idx += 1 + skip;
        if idx >= total as i128 {
            return;
        }
        keep(idx as u64);
    }
}

/// Erdős–Rényi network: each distinct pair present independently with
/// probability `k / (n - 1)`.
pub fn sample_er_network<R: Rng + ?Sized>(
    n: usize,
    k: f64,
    rng: &mut R,
) -> Result<ContactNetwork> {
    if n == 0 {
        return Err(Error::InvalidParameter("empty network".into()));
    }
    if !(0.0..=(n as f64 - 1.0)).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "mean degree {k} outside [0, n-1]"
        )));
    }
    let p = if n > 1 { k / (n as f64 - 1.0) } else { 0.0 };
    let mut edges = Vec::new();
    push_within_block_edges(0, n, p, rng, &mut edges);
    Ok(ContactNetwork { n, edges })
}

/// All pairs within a contiguous node block `[offset, offset + len)`.
fn push_within_block_edges<R: Rng + ?Sized>(
    offset: usize,
    len: usize,
    p: f64,
    rng: &mut R,
    edges: &mut Vec<(u32, u32)>,
) {
    if len < 2 {
        return;
    }
    // Linear index over pairs (i, j), i < j: row i has (len - 1 - i) pairs.
    // Enumerate as j-major triangular index for O(1) decoding.
    let total = len as u64 * (len as u64 - 1) / 2;
    sample_pair_indices(total, p, rng, |idx| {
        // Decode triangular index: find j such that j(j-1)/2 <= idx.
        let j = ((1.0 + 8.0 * idx as f64).sqrt() as u64 + 1) / 2;
        let j = if j * (j - 1) / 2 > idx { j - 1 } else { j };
        let i = idx - j * (j - 1) / 2;
        edges.push(((offset as u64 + i) as u32, (offset as u64 + j) as u32));
    });
}

/// All pairs across two disjoint blocks.
fn push_cross_block_edges<R: Rng + ?Sized>(
    offset_a: usize,
    len_a: usize,
    offset_b: usize,
    len_b: usize,
    p: f64,
    rng: &mut R,
    edges: &mut Vec<(u32, u32)>,
) {
    let total = len_a as u64 * len_b as u64;
    sample_pair_indices(total, p, rng, |idx| {
        let i = idx / len_b as u64;
        let j = idx % len_b as u64;
        edges.push((
            (offset_a as u64 + i) as u32,
            (offset_b as u64 + j) as u32,
        ));
    });
}

/// Stochastic block model: pair `((i,l),(j,l'))` present independently with
/// probability `p_ll'` from the spec's edge probabilities.
pub fn sample_sbm_network<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> ContactNetwork {
    let groups = spec.group_count();
    let mut edges = Vec::new();
    for l in 0..groups {
        let range_l = spec.group_range(l);
        push_within_block_edges(
            range_l.start,
            range_l.len(),
            spec.edge_probs()[l][l],
            rng,
            &mut edges,
        );
        for lp in (l + 1)..groups {
            let range_lp = spec.group_range(lp);
            push_cross_block_edges(
                range_l.start,
                range_l.len(),
                range_lp.start,
                range_lp.len(),
                spec.edge_probs()[l][lp],
                rng,
                &mut edges,
            );
        }
    }
    ContactNetwork { n: spec.n(), edges }
}

/// Draw an i.i.d. degree sequence from the truncated power law, redrawing
/// whole sequences until the stub total is even.
pub fn draw_power_law_degrees<R: Rng + ?Sized>(
    n: usize,
    law: &DegreeLaw,
    rng: &mut R,
) -> Vec<usize> {
    let pmf = law.pmf();
    let mut cdf = pmf.clone();
    for i in 1..cdf.len() {
        cdf[i] += cdf[i - 1];
    }
    loop {
        let mut degrees = Vec::with_capacity(n);
        let mut total = 0usize;
        for _ in 0..n {
            let u: f64 = rng.random();
            let pos = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
            let d = law.k_min + pos;
            total += d;
            degrees.push(d);
        }
        if total % 2 == 0 {
            return degrees;
        }
    }
}

/// Configuration-model network with power-law degrees: stubs matched
/// uniformly at random, then self-loops discarded and multi-edges collapsed.
pub fn sample_power_law_network<R: Rng + ?Sized>(
    n: usize,
    law: &DegreeLaw,
    rng: &mut R,
) -> Result<ContactNetwork> {
    if law.kind != DegreeKind::PowerLaw {
        return Err(Error::InvalidParameter(
            "configuration-model sampling requires a power-law degree law".into(),
        ));
    }
    if law.k_max >= n {
        return Err(Error::InvalidParameter(
            "k_max must be below the node count".into(),
        ));
    }
    let degrees = draw_power_law_degrees(n, law, rng);
    let mut stubs = Vec::with_capacity(degrees.iter().sum());
    for (node, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat(node as u32).take(d));
    }
    stubs.shuffle(rng);

    let mut edges: Vec<(u32, u32)> = stubs
        .chunks_exact(2)
        .filter(|pair| pair[0] != pair[1])
        .map(|pair| (pair[0].min(pair[1]), pair[0].max(pair[1])))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    Ok(ContactNetwork { n, edges })
}
