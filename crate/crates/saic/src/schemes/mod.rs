//! End-to-end pipelines for every scheme under comparison.

pub mod channel;
mod cic;
mod heuristics;
mod hybrid;
mod lbic;
mod policies;
pub(crate) mod saic;

pub use channel::{ceil_log2, Channel, CommPolicy};
pub use cic::run_cic;
pub use heuristics::{default_wait, run_hnc, run_hnc_with_wait, run_hoc, HncPolicy, HocPolicy};
pub use hybrid::{run_hybrid, train_hybrid_controller};
pub use lbic::{run_lbic, LbicTables};
pub use policies::{
    evaluate, evaluate_exact, evaluate_per_start, observation_occupancy, rollout, CentralPolicy,
    DistributedPolicy, Evaluation, HybridPolicy, JointPolicy,
};
pub use saic::{run_saic, SaicOutcome};

use crate::aggregation::{CompressionRatio, Partition};
use crate::gridworld::GridSpec;
use crate::harness::{normalize, RunRecord};
use crate::qcore::{train_centralized, train_distributed, TrainConfig, UpdateRule};
use crate::{Error, Result};

/// Stable scheme names used by the CLI and in output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeKind {
    Centralized,
    Saic,
    Cic,
    Lbic,
    Hnc,
    Hoc,
    Hybrid,
    NoComm,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 8] = [
        SchemeKind::Centralized,
        SchemeKind::Saic,
        SchemeKind::Cic,
        SchemeKind::Lbic,
        SchemeKind::Hnc,
        SchemeKind::Hoc,
        SchemeKind::Hybrid,
        SchemeKind::NoComm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Centralized => "centralized",
            SchemeKind::Saic => "saic",
            SchemeKind::Cic => "cic",
            SchemeKind::Lbic => "lbic",
            SchemeKind::Hnc => "hnc",
            SchemeKind::Hoc => "hoc",
            SchemeKind::Hybrid => "hybrid",
            SchemeKind::NoComm => "nocomm",
        }
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Metrics of one scheme run. The normalized return divides the exact mean
/// return of the executed policy by the centralized optimum for the same
/// grid.
#[derive(Debug, Clone)]
pub struct SchemeResult {
    pub scheme: SchemeKind,
    pub rate_bits: u32,
    pub seed: u64,
    pub record: RunRecord,
    pub mean_return: f64,
    pub std_error: f64,
    pub normalized: f64,
    /// Certified cluster radius (value-aggregation schemes only).
    pub epsilon: Option<f64>,
    /// Worst-case return gap implied by `epsilon`.
    pub bound: Option<f64>,
    /// Observation-to-message compression ratio, where a message
    /// distribution exists.
    pub compression: Option<CompressionRatio>,
}

/// A scheme result plus the artifacts some schemes produce along the way.
#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub result: SchemeResult,
    /// Observation partition (aggregation- and quantization-based schemes).
    pub partition: Option<Partition>,
    /// Per-observation marginal values (value-aggregation schemes).
    pub marginal_values: Option<Vec<f64>>,
}

/// Distinct deterministic seed per pipeline phase of one run.
pub(crate) fn phase_seed(seed: u64, phase: u64) -> u64 {
    seed ^ phase.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub(crate) const PHASE_CENTRAL: u64 = 0;
pub(crate) const PHASE_DISTRIBUTED: u64 = 1;
pub(crate) const PHASE_QUANTIZER: u64 = 2;

fn plain_result(
    scheme: SchemeKind,
    rate_bits: u32,
    seed: u64,
    record: RunRecord,
    eval: Evaluation,
    centralized_optimum: f64,
) -> Result<SchemeResult> {
    Ok(SchemeResult {
        scheme,
        rate_bits,
        seed,
        record,
        mean_return: eval.mean,
        std_error: eval.std_error,
        normalized: normalize(eval.mean, centralized_optimum)?,
        epsilon: None,
        bound: None,
        compression: None,
    })
}

/// Centralized Q-learning with perfect observation of both agents.
pub fn run_centralized(
    spec: &GridSpec,
    cfg: &TrainConfig,
    centralized_optimum: f64,
) -> Result<SchemeOutcome> {
    let train_cfg = cfg.with_seed(phase_seed(cfg.seed, PHASE_CENTRAL));
    let (q, record) = train_centralized(spec, &train_cfg);
    let eval = evaluate_exact(&CentralPolicy { table: &q }, spec, cfg.gamma, cfg.horizon);
    let rate = ceil_log2(spec.cells());
    Ok(SchemeOutcome {
        result: plain_result(SchemeKind::Centralized, rate, cfg.seed, record, eval, centralized_optimum)?,
        partition: None,
        marginal_values: None,
    })
}

/// Distributed learning with no channel at all: both agents send the single
/// zero-rate message. This is the code path every compression scheme
/// degenerates to at `R = 0`.
pub fn run_nocomm(
    spec: &GridSpec,
    cfg: &TrainConfig,
    centralized_optimum: f64,
) -> Result<SchemeOutcome> {
    let comm = CommPolicy::constant(spec.cells());
    let train_cfg = cfg.with_seed(phase_seed(cfg.seed, PHASE_DISTRIBUTED));
    let (q1, q2, record) =
        train_distributed(spec, &comm, &comm, &train_cfg, UpdateRule::Optimistic);
    let policy = DistributedPolicy { q1: &q1, q2: &q2, comm1: &comm, comm2: &comm };
    let eval = evaluate_exact(&policy, spec, cfg.gamma, cfg.horizon);
    Ok(SchemeOutcome {
        result: plain_result(SchemeKind::NoComm, 0, cfg.seed, record, eval, centralized_optimum)?,
        partition: None,
        marginal_values: None,
    })
}

/// Run any registered scheme at the given rate budget.
pub fn run_scheme(
    kind: SchemeKind,
    spec: &GridSpec,
    cfg: &TrainConfig,
    rate_bits: u32,
    centralized_optimum: f64,
) -> Result<SchemeOutcome> {
    match kind {
        SchemeKind::Centralized => run_centralized(spec, cfg, centralized_optimum),
        SchemeKind::Saic => {
            let out = run_saic(spec, cfg, rate_bits, centralized_optimum)?;
            Ok(SchemeOutcome {
                result: out.result,
                partition: Some(out.partition),
                marginal_values: Some(out.marginal_values),
            })
        }
        SchemeKind::Cic => run_cic(spec, cfg, rate_bits, centralized_optimum),
        SchemeKind::Lbic => run_lbic(spec, cfg, rate_bits, centralized_optimum),
        SchemeKind::Hnc => run_hnc(spec, cfg, centralized_optimum),
        SchemeKind::Hoc => {
            if rate_bits < 1 {
                return Err(Error::InvalidArgument(
                    "the arrival-flag heuristic needs a channel of at least 1 bit".into(),
                ));
            }
            run_hoc(spec, cfg, centralized_optimum)
        }
        SchemeKind::Hybrid => run_hybrid(spec, cfg, rate_bits, centralized_optimum),
        SchemeKind::NoComm => run_nocomm(spec, cfg, centralized_optimum),
    }
}
