//! Experiment sweeps: every (scheme, rate, seed) cell of a configuration,
//! run on a bounded worker pool, with results merged in cell-key order so
//! output files are byte-identical across reruns regardless of scheduling.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::harness::export::{write_curve_csv, write_partition_csv, write_value_grid_csv};
use crate::harness::report::{write_summary, SummaryRow};
use crate::harness::ExperimentConfig;
use crate::qcore::value_iteration;
use crate::schemes::{ceil_log2, run_scheme, SchemeKind, SchemeOutcome};
use crate::Result;

/// One unit of sweep work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SweepCell {
    pub scheme: SchemeKind,
    pub rate_bits: u32,
    pub seed: u64,
}

impl SweepCell {
    pub fn tag(&self) -> String {
        format!("{}_r{}_s{}", self.scheme, self.rate_bits, self.seed)
    }
}

#[derive(Debug, Clone)]
pub struct CellFailure {
    pub cell: SweepCell,
    pub message: String,
}

#[derive(Debug)]
pub struct SweepReport {
    /// Successful cells in cell-key order.
    pub results: Vec<(SweepCell, SchemeOutcome)>,
    pub failures: Vec<CellFailure>,
    /// Exact optimal expected return, the normalization denominator.
    pub centralized_optimum: f64,
    pub out_dir: PathBuf,
}

/// Rates a scheme is actually swept over: channel-dependent schemes follow
/// the configured rate list, the rest run once at their natural rate.
fn rates_for(scheme: SchemeKind, cfg: &ExperimentConfig) -> Vec<u32> {
    match scheme {
        SchemeKind::Saic | SchemeKind::Cic | SchemeKind::Lbic | SchemeKind::Hybrid => {
            cfg.rate_bits.clone()
        }
        SchemeKind::Centralized => vec![ceil_log2((cfg.grid_size as usize).pow(2))],
        SchemeKind::Hoc => vec![1],
        SchemeKind::Hnc | SchemeKind::NoComm => vec![0],
    }
}

/// All cells of a configuration, in deterministic order.
pub fn cells_of(cfg: &ExperimentConfig) -> Vec<SweepCell> {
    let mut cells = Vec::new();
    for &scheme in &cfg.schemes {
        for rate_bits in rates_for(scheme, cfg) {
            for &seed in &cfg.seeds {
                cells.push(SweepCell { scheme, rate_bits, seed });
            }
        }
    }
    cells
}

/// Run every cell and write learning curves, partition maps, value maps and
/// the summary CSV into `out_dir`.
pub fn run_sweep(cfg: &ExperimentConfig, out_dir: impl AsRef<Path>, workers: usize) -> Result<SweepReport> {
    cfg.validate()?;
    let out_dir = out_dir.as_ref().to_path_buf();
    std::fs::create_dir_all(&out_dir)?;

    let spec = cfg.grid_spec()?;
    let vi = value_iteration(&spec, cfg.gamma, 1e-10)?;
    let optimum = vi.mean_value_over_starts(&spec);

    let cells = cells_of(cfg);
    let queue: Mutex<VecDeque<SweepCell>> = Mutex::new(cells.iter().copied().collect());
    let done: Mutex<Vec<(SweepCell, std::result::Result<SchemeOutcome, String>)>> =
        Mutex::new(Vec::with_capacity(cells.len()));

    let workers = workers.max(1).min(cells.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let cell = match queue.lock().unwrap().pop_front() {
                    Some(c) => c,
                    None => break,
                };
                let train_cfg = match cfg.train_config(cell.seed) {
                    Ok(c) => c,
                    Err(e) => {
                        done.lock().unwrap().push((cell, Err(e.to_string())));
                        continue;
                    }
                };
                let outcome = run_scheme(cell.scheme, &spec, &train_cfg, cell.rate_bits, optimum)
                    .map_err(|e| e.to_string());
                done.lock().unwrap().push((cell, outcome));
            });
        }
    });

    let mut finished = done.into_inner().unwrap();
    finished.sort_by_key(|(cell, _)| *cell);

    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut summary_rows = Vec::new();
    for (cell, outcome) in finished {
        match outcome {
            Ok(outcome) => {
                let tag = cell.tag();
                if !outcome.result.record.is_empty() {
                    write_curve_csv(
                        out_dir.join(format!("curve_{tag}.csv")),
                        &outcome.result.record,
                        cfg.smooth_window,
                    )?;
                }
                if let Some(partition) = &outcome.partition {
                    write_partition_csv(
                        out_dir.join(format!("partition_{tag}.csv")),
                        partition,
                        spec.side(),
                    )?;
                }
                if let Some(values) = &outcome.marginal_values {
                    write_value_grid_csv(
                        out_dir.join(format!("values_{tag}.csv")),
                        values,
                        spec.side(),
                    )?;
                }
                summary_rows.push(SummaryRow::from_result(&outcome.result, cfg.smooth_window));
                results.push((cell, outcome));
            }
            Err(message) => failures.push(CellFailure { cell, message }),
        }
    }
    write_summary(out_dir.join("summary.csv"), &summary_rows)?;
    if !failures.is_empty() {
        let lines: Vec<String> =
            failures.iter().map(|f| format!("{}: {}", f.cell.tag(), f.message)).collect();
        std::fs::write(out_dir.join("failures.txt"), lines.join("\n") + "\n")?;
    }

    Ok(SweepReport { results, failures, centralized_optimum: optimum, out_dir })
}
