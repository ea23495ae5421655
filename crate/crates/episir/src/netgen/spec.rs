use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default relative tolerance for the reciprocity condition
/// `n_l * k_ll' = n_l' * k_l'l`.
///
/// Contact matrices from surveys are published rounded, so the condition
/// holds only approximately on real inputs; 8% admits matrices rounded to
/// two decimals while still rejecting structurally unbalanced ones.
pub const DEFAULT_RECIPROCITY_TOL: f64 = 0.08;

/// Population partition with contact rates and derived edge probabilities.
///
/// Individuals are indexed contiguously by group: group `l` owns the index
/// range `[offset_l, offset_l + n_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    sizes: Vec<usize>,
    weights: Vec<f64>,
    contact_matrix: Vec<Vec<f64>>,
    edge_probs: Vec<Vec<f64>>,
    offsets: Vec<usize>,
    n: usize,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GroupSpecFile {
    sizes: Vec<usize>,
    contact_matrix: Vec<Vec<f64>>,
    #[serde(default)]
    reciprocity_tol: Option<f64>,
}

impl GroupSpec {
    /// Validate sizes and contact rates and derive weights and edge
    /// probabilities.
    pub fn new(sizes: Vec<usize>, contact_matrix: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_reciprocity_tol(sizes, contact_matrix, DEFAULT_RECIPROCITY_TOL)
    }

    /// As [`GroupSpec::new`] with an explicit reciprocity tolerance.
    pub fn with_reciprocity_tol(
        sizes: Vec<usize>,
        contact_matrix: Vec<Vec<f64>>,
        reciprocity_tol: f64,
    ) -> Result<Self> {
        let groups = sizes.len();
        if groups == 0 {
            return Err(Error::InvalidSpec("at least one group required".into()));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidSpec(
                "group sizes must be positive (weights w_l > 0)".into(),
            ));
        }
        if contact_matrix.len() != groups || contact_matrix.iter().any(|r| r.len() != groups) {
            return Err(Error::InvalidSpec(format!(
                "contact matrix must be {groups}x{groups}"
            )));
        }
        if contact_matrix
            .iter()
            .any(|r| r.iter().any(|&k| !k.is_finite() || k < 0.0))
        {
            return Err(Error::InvalidSpec(
                "contact rates must be finite and non-negative".into(),
            ));
        }
        for (l, row) in contact_matrix.iter().enumerate() {
            if row[l] > 0.0 && sizes[l] < 2 {
                return Err(Error::InvalidSpec(format!(
                    "group {l} has within-group contacts but fewer than 2 members"
                )));
            }
        }
        // Reciprocity: total cross-group contacts must balance.
        for l in 0..groups {
            for lp in (l + 1)..groups {
                let a = sizes[l] as f64 * contact_matrix[l][lp];
                let b = sizes[lp] as f64 * contact_matrix[lp][l];
                let scale = a.max(b);
                if scale > 0.0 && (a - b).abs() / scale > reciprocity_tol {
                    return Err(Error::InvalidSpec(format!(
                        "reciprocity violated for groups ({l},{lp}): \
                         n_{l}*k_{l}{lp}={a} vs n_{lp}*k_{lp}{l}={b}"
                    )));
                }
            }
        }

        let n: usize = sizes.iter().sum();
        let edge_probs = edge_probabilities(&sizes, &contact_matrix)?;
        let weights = sizes.iter().map(|&s| s as f64 / n as f64).collect();
        let mut offsets = Vec::with_capacity(groups);
        let mut acc = 0usize;
        for &s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        Ok(Self {
            sizes,
            weights,
            contact_matrix,
            edge_probs,
            offsets,
            n,
        })
    }

    /// One homogeneous group of `n` individuals with mean daily contacts `k`.
    pub fn single_group(n: usize, k: f64) -> Result<Self> {
        Self::new(vec![n], vec![vec![k]])
    }

    /// Five age groups `[0,15), [15,30), [30,50), [50,65), 65+` with the
    /// German contact-survey rates, apportioned to a total population of `n`
    /// by largest remainder.
    pub fn german_five_group(n: usize) -> Result<Self> {
        let shares = [0.13, 0.17, 0.28, 0.20, 0.21];
        let total: f64 = shares.iter().sum();
        let raw: Vec<f64> = shares.iter().map(|s| n as f64 * s / total).collect();
        let mut sizes: Vec<usize> = raw.iter().map(|&x| x.floor() as usize).collect();
        let mut rem: Vec<(usize, f64)> = raw
            .iter()
            .enumerate()
            .map(|(i, &x)| (i, x - x.floor()))
            .collect();
        rem.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let mut short = n - sizes.iter().sum::<usize>();
        for &(i, _) in &rem {
            if short == 0 {
                break;
            }
            sizes[i] += 1;
            short -= 1;
        }
        Self::new(sizes, GERMAN_CONTACT_MATRIX.iter().map(|r| r.to_vec()).collect())
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let file: GroupSpecFile = serde_json::from_str(json)?;
        match file.reciprocity_tol {
            Some(tol) => Self::with_reciprocity_tol(file.sizes, file.contact_matrix, tol),
            None => Self::new(file.sizes, file.contact_matrix),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn group_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Population shares `w_l = n_l / n`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mean daily contacts `k_ll'`.
    pub fn contact_matrix(&self) -> &[Vec<f64>] {
        &self.contact_matrix
    }

    /// Symmetric per-pair daily contact probabilities `p_ll'`.
    pub fn edge_probs(&self) -> &[Vec<f64>] {
        &self.edge_probs
    }

    /// Index range owned by group `l`.
    pub fn group_range(&self, l: usize) -> Range<usize> {
        self.offsets[l]..self.offsets[l] + self.sizes[l]
    }

    /// Group of individual `i`.
    pub fn group_of(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        match self.offsets.binary_search(&i) {
            Ok(l) => l,
            Err(ins) => ins - 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sizes": self.sizes,
            "contact_matrix": self.contact_matrix,
        })
    }
}

/// German pre-pandemic mean daily contacts by age group (survey rates).
pub(crate) const GERMAN_CONTACT_MATRIX: [[f64; 5]; 5] = [
    [3.43, 1.10, 2.34, 0.67, 0.47],
    [0.87, 4.55, 2.72, 1.14, 0.41],
    [1.11, 1.64, 3.74, 1.42, 0.78],
    [0.45, 0.96, 1.99, 2.30, 0.92],
    [0.31, 0.34, 1.08, 0.91, 1.70],
];

/// Per-pair daily contact probabilities from group sizes and mean contacts.
///
/// Within group: `p_ll = k_ll / (n_l - 1)`; across groups (`l < l'`):
/// `p_ll' = k_ll' / n_l'`, mirrored to the lower triangle so the output is
/// symmetric by construction.
pub fn edge_probabilities(sizes: &[usize], contact_matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let groups = sizes.len();
    let mut probs = vec![vec![0.0; groups]; groups];
    for l in 0..groups {
        for lp in l..groups {
            let p = if l == lp {
                if contact_matrix[l][l] == 0.0 {
                    0.0
                } else {
                    contact_matrix[l][l] / (sizes[l] as f64 - 1.0)
                }
            } else {
                contact_matrix[l][lp] / sizes[lp] as f64
            };
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidSpec(format!(
                    "edge probability p_{l}{lp}={p} outside [0, 1]"
                )));
            }
            probs[l][lp] = p;
            probs[lp][l] = p;
        }
    }
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_group_probability() {
        let spec = GroupSpec::single_group(1000, 10.0).unwrap();
        let p = spec.edge_probs()[0][0];
        assert!((p - 10.0 / 999.0).abs() < 1e-15);
    }

    #[test]
    fn german_spec_probabilities() {
        let spec = GroupSpec::german_five_group(10_000).unwrap();
        assert_eq!(spec.sizes(), &[1313, 1717, 2829, 2020, 2121]);
        assert_eq!(spec.n(), 10_000);
        // p_12 = k_12 / n_2 exactly, and P symmetric.
        let p = spec.edge_probs();
        assert!((p[0][1] - 1.10 / 1717.0).abs() < 1e-15);
        for l in 0..5 {
            for lp in 0..5 {
                assert_eq!(p[l][lp], p[lp][l]);
                assert!((0.0..=1.0).contains(&p[l][lp]));
            }
        }
    }

    #[test]
    fn reciprocity_violation_rejected() {
        // Two equal groups whose cross rates differ by 10%.
        let err = GroupSpec::new(
            vec![1000, 1000],
            vec![vec![3.0, 1.0], vec![1.1, 3.0]],
        );
        assert!(matches!(err, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn weights_sum_to_one() {
        let spec = GroupSpec::german_five_group(9_900).unwrap();
        let total: f64 = spec.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(spec.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn json_round_trip_and_unknown_key() {
        let spec = GroupSpec::single_group(50, 4.0).unwrap();
        let json = spec.to_json().to_string();
        let back = GroupSpec::from_json_str(&json).unwrap();
        assert_eq!(spec, back);

        let bad = r#"{"sizes":[10],"contact_matrix":[[2.0]],"bogus":1}"#;
        assert!(GroupSpec::from_json_str(bad).is_err());
    }

    #[test]
    fn group_lookup() {
        let spec = GroupSpec::new(
            vec![3, 4, 5],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
        )
        .unwrap();
        assert_eq!(spec.group_range(1), 3..7);
        assert_eq!(spec.group_of(0), 0);
        assert_eq!(spec.group_of(3), 1);
        assert_eq!(spec.group_of(6), 1);
        assert_eq!(spec.group_of(11), 2);
    }
}
