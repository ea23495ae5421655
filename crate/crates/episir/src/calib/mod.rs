//! Reported-case ingestion, derived series, and the full calibration
//! pipeline.

mod pipeline;
mod series;

pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
pub use series::{adjust_cumulative_mf, recursive_removed, smooth_7d, CaseSeries};
