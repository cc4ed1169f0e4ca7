//! Experiment configuration, sweeps, metrics post-processing and CSV
//! emission.

mod config;
mod export;
mod records;
mod report;
mod sweep;

pub use config::{config_hash, ExperimentConfig};
pub use export::{
    read_partition_csv, write_curve_csv, write_partition_csv, write_value_grid_csv,
};
pub use records::{normalize, smooth, EpisodeStat, RunRecord};
pub use report::{read_summary, render_report, write_summary, SummaryRow};
pub use sweep::{run_sweep, CellFailure, SweepCell, SweepReport};
