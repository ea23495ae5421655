use std::io::Write;
use std::path::Path;

use super::run::{new_cases, Replication};
use super::SimConfig;
use crate::Result;

/// Percentile of a sample by linear interpolation between the two closest
/// order statistics. `q` in `[0, 1]`; the input need not be sorted.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    percentile_sorted(&sorted, q)
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Mean and fan-chart percentile bands of one series over replications.
#[derive(Debug, Clone)]
pub struct Band {
    pub mean: Vec<f64>,
    pub p10: Vec<f64>,
    pub p25: Vec<f64>,
    pub p50: Vec<f64>,
    pub p75: Vec<f64>,
    pub p90: Vec<f64>,
}

impl Band {
    /// Summarize day-major sample rows `paths[b][d]`.
    pub(crate) fn from_paths(paths: &[Vec<f64>]) -> Self {
        let days = paths[0].len();
        let b = paths.len();
        let mut mean = vec![0.0; days];
        let mut p10 = vec![0.0; days];
        let mut p25 = vec![0.0; days];
        let mut p50 = vec![0.0; days];
        let mut p75 = vec![0.0; days];
        let mut p90 = vec![0.0; days];
        let mut column = vec![0.0; b];
        for d in 0..days {
            for (slot, path) in column.iter_mut().zip(paths) {
                *slot = path[d];
            }
            mean[d] = column.iter().sum::<f64>() / b as f64;
            column.sort_by(|a, b| a.partial_cmp(b).unwrap());
            p10[d] = percentile_sorted(&column, 0.10);
            p25[d] = percentile_sorted(&column, 0.25);
            p50[d] = percentile_sorted(&column, 0.50);
            p75[d] = percentile_sorted(&column, 0.75);
            p90[d] = percentile_sorted(&column, 0.90);
        }
        Self {
            mean,
            p10,
            p25,
            p50,
            p75,
            p90,
        }
    }

    pub fn days(&self) -> usize {
        self.mean.len()
    }

    /// `day, mean, p10, p25, p50, p75, p90` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "day,mean,p10,p25,p50,p75,p90")?;
        for d in 0..self.days() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                d + 1,
                self.mean[d],
                self.p10[d],
                self.p25[d],
                self.p50[d],
                self.p75[d],
                self.p90[d]
            )?;
        }
        Ok(())
    }
}

/// Cumulative, daily-new, and active bands for one population slice.
#[derive(Debug, Clone)]
pub struct SeriesBands {
    pub cumulative: Band,
    pub new_cases: Band,
    pub active: Band,
}

/// Ensemble summary: per-replication series plus fan-chart bands and the
/// peak/duration statistics.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub replications: Vec<Replication>,
    pub days: usize,
    pub aggregate: SeriesBands,
    pub groups: Vec<SeriesBands>,
    /// Mean over replications of the peak aggregate infected share.
    pub c_star: f64,
    /// Mean peak infected share per group.
    pub c_star_by_group: Vec<f64>,
    /// Mean first day with zero active cases (censored at `max_days`).
    pub t_star: f64,
    /// Replications still active at `max_days`.
    pub undying: usize,
    pub b: usize,
    pub seed: u64,
}

impl EnsembleResult {
    pub(crate) fn assemble(cfg: &SimConfig, replications: Vec<Replication>) -> Self {
        let days = replications.iter().map(|r| r.days()).max().unwrap();
        let groups = cfg.spec.group_count();

        let agg_c: Vec<Vec<f64>> = replications.iter().map(|r| r.c_aggregate(days)).collect();
        let agg_i: Vec<Vec<f64>> = replications.iter().map(|r| r.i_aggregate(days)).collect();
        let agg_dc: Vec<Vec<f64>> = agg_c.iter().map(|c| new_cases(c)).collect();

        let aggregate = SeriesBands {
            cumulative: Band::from_paths(&agg_c),
            new_cases: Band::from_paths(&agg_dc),
            active: Band::from_paths(&agg_i),
        };

        let group_bands: Vec<SeriesBands> = (0..groups)
            .map(|l| {
                let c: Vec<Vec<f64>> =
                    replications.iter().map(|r| r.c_group(l, days)).collect();
                let i: Vec<Vec<f64>> =
                    replications.iter().map(|r| r.i_group(l, days)).collect();
                let dc: Vec<Vec<f64>> = c.iter().map(|c| new_cases(c)).collect();
                SeriesBands {
                    cumulative: Band::from_paths(&c),
                    new_cases: Band::from_paths(&dc),
                    active: Band::from_paths(&i),
                }
            })
            .collect();

        let b = replications.len();
        let c_star = agg_c
            .iter()
            .map(|c| c.iter().cloned().fold(0.0, f64::max))
            .sum::<f64>()
            / b as f64;
        let c_star_by_group = (0..groups)
            .map(|l| {
                replications
                    .iter()
                    .map(|r| r.c_group(l, days).iter().cloned().fold(0.0, f64::max))
                    .sum::<f64>()
                    / b as f64
            })
            .collect();
        let t_star =
            replications.iter().map(|r| r.t_star as f64).sum::<f64>() / b as f64;
        let undying = replications.iter().filter(|r| r.undying).count();

        Self {
            replications,
            days,
            aggregate,
            groups: group_bands,
            c_star,
            c_star_by_group,
            t_star,
            undying,
            b,
            seed: cfg.master_seed,
        }
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "c_star": self.c_star,
            "c_star_by_group": self.c_star_by_group,
            "T_star": self.t_star,
            "B": self.b,
            "seed": self.seed,
            "days": self.days,
            "undying": self.undying,
        })
    }
}
