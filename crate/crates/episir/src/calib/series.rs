use std::path::Path;

use chrono::NaiveDate;

use crate::{Error, Result};

/// Dated cumulative reported cases with population context.
///
/// After ingestion dates are strictly increasing and gap-free, and the
/// cumulative series is non-decreasing (negative daily increments are
/// clamped during cleaning).
#[derive(Debug, Clone)]
pub struct CaseSeries {
    pub dates: Vec<NaiveDate>,
    /// Raw cumulative counts after cleaning.
    pub cumulative: Vec<f64>,
    pub population: f64,
    /// Days inserted to fill calendar gaps.
    pub gap_filled: usize,
    /// Negative daily increments clamped to zero.
    pub clamp_warnings: usize,
}

impl CaseSeries {
    /// Parse a `date,cumulative_cases` CSV (header required, ISO-8601
    /// dates). Calendar gaps are filled by carrying the last cumulative
    /// value forward; decreases are clamped with a warning count.
    pub fn load(path: &Path, population: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, population)
    }

    pub fn parse(text: &str, population: f64) -> Result<Self> {
        if population <= 0.0 {
            return Err(Error::InvalidParameter("population must be positive".into()));
        }
        let mut lines = text.lines().enumerate();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse {
                row: 0,
                msg: "empty file".into(),
            })?
            .1
            .trim();
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["date", "cumulative_cases"] {
            return Err(Error::Parse {
                row: 1,
                msg: format!("expected header `date,cumulative_cases`, got `{header}`"),
            });
        }

        let mut raw: Vec<(NaiveDate, f64)> = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = idx + 1;
            let mut parts = line.split(',');
            let date_str = parts.next().unwrap_or("").trim();
            let count_str = parts.next().unwrap_or("").trim();
            if parts.next().is_some() {
                return Err(Error::Parse {
                    row,
                    msg: "too many columns".into(),
                });
            }
            let date = date_str.parse::<NaiveDate>().map_err(|e| Error::Parse {
                row,
                msg: format!("bad date `{date_str}`: {e}"),
            })?;
            let count = count_str.parse::<f64>().map_err(|e| Error::Parse {
                row,
                msg: format!("bad count `{count_str}`: {e}"),
            })?;
            if !count.is_finite() || count < 0.0 {
                return Err(Error::Parse {
                    row,
                    msg: format!("count {count} must be finite and non-negative"),
                });
            }
            if let Some(&(prev, _)) = raw.last() {
                if date <= prev {
                    return Err(Error::Parse {
                        row,
                        msg: format!("dates must be strictly increasing (got {date} after {prev})"),
                    });
                }
            }
            raw.push((date, count));
        }
        if raw.is_empty() {
            return Err(Error::Parse {
                row: 1,
                msg: "no data rows".into(),
            });
        }

        let mut dates = Vec::new();
        let mut cumulative: Vec<f64> = Vec::new();
        let mut gap_filled = 0;
        let mut clamp_warnings = 0;
        let mut expected = raw[0].0;
        for &(date, count) in &raw {
            while expected < date {
                dates.push(expected);
                cumulative.push(*cumulative.last().unwrap());
                gap_filled += 1;
                expected = expected.succ_opt().expect("date range");
            }
            let prev = cumulative.last().copied().unwrap_or(0.0);
            let value = if count < prev {
                clamp_warnings += 1;
                prev
            } else {
                count
            };
            dates.push(date);
            cumulative.push(value);
            expected = date.succ_opt().expect("date range");
        }

        Ok(Self {
            dates,
            cumulative,
            population,
            gap_filled,
            clamp_warnings,
        })
    }

    /// Per-capita cumulative shares.
    pub fn per_capita(&self) -> Vec<f64> {
        self.cumulative
            .iter()
            .map(|c| c / self.population)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Trailing 7-day moving average: each day averages itself and up to six
/// preceding days (fewer at the head).
pub fn smooth_7d(series: &[f64]) -> Vec<f64> {
    series
        .iter()
        .enumerate()
        .map(|(t, _)| {
            let lo = t.saturating_sub(6);
            let window = &series[lo..=t];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect()
}

/// Removed series from the recursion `R_1 = 0`,
/// `R_t = (1 - gamma) R_{t-1} + gamma C_{t-1}`.
pub fn recursive_removed(cumulative: &[f64], gamma: f64) -> Vec<f64> {
    let mut removed = Vec::with_capacity(cumulative.len());
    let mut r = 0.0;
    for t in 0..cumulative.len() {
        if t > 0 {
            r = (1.0 - gamma) * r + gamma * cumulative[t - 1];
        }
        removed.push(r);
    }
    removed
}

/// Accumulate factor-adjusted daily new cases.
///
/// `blocks` holds `(day index, factor)` points; the factor is linearly
/// interpolated between block days, held at the first value before the first
/// block and at the last value afterwards. Returns the running sum of
/// `m_t * delta_t`.
pub fn adjust_cumulative_mf(daily_new: &[f64], blocks: &[(usize, f64)]) -> Vec<f64> {
    assert!(!blocks.is_empty(), "need at least one factor block");
    let m_at = |t: usize| -> f64 {
        if t <= blocks[0].0 {
            return blocks[0].1;
        }
        for pair in blocks.windows(2) {
            let (d0, m0) = pair[0];
            let (d1, m1) = pair[1];
            if t <= d1 {
                let frac = (t - d0) as f64 / (d1 - d0) as f64;
                return m0 + frac * (m1 - m0);
            }
        }
        blocks.last().unwrap().1
    };
    let mut out = Vec::with_capacity(daily_new.len());
    let mut acc = 0.0;
    for (t, &d) in daily_new.iter().enumerate() {
        acc += m_at(t) * d;
        out.push(acc);
    }
    out
}
