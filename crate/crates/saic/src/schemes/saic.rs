//! The three-phase value-aggregation pipeline: centralized training,
//! k-median clustering of observation values into `2^R` message classes,
//! then distributed training against the frozen communication policy.
//!
//! Clustering input: each observation's best-case greedy value (its value
//! under the most favourable partner position), weighted by how often the
//! learned centralized policy actually visits the observation. Both choices
//! carry the near-goal structure the distributed phase lives off: under
//! this reward the best-case value is the pure distance profile, and the
//! occupancy weight of the goal-adjacent ring (where the earlier agent
//! waits for the later one) makes the cluster boundary fall exactly there.
//! A message class that unambiguously says "I am next to the goal" is what
//! lets both learners synchronize their final step.

use crate::aggregation::{
    compression_ratio, epsilon_of_partition, kmedian_1d_weighted, optimistic_marginal_value,
    return_gap_bound, uniform_non_goal, Partition,
};
use crate::gridworld::GridSpec;
use crate::harness::{normalize, RunRecord};
use crate::qcore::{train_centralized, train_distributed, CentralQTable, TrainConfig, UpdateRule};
use crate::schemes::{
    evaluate_exact, observation_occupancy, phase_seed, CentralPolicy, CommPolicy,
    DistributedPolicy, SchemeKind, SchemeResult, PHASE_CENTRAL, PHASE_DISTRIBUTED,
};
use crate::Result;

/// Everything a value-aggregation run produces.
#[derive(Debug, Clone)]
pub struct SaicOutcome {
    pub result: SchemeResult,
    /// The observation partition behind the communication policy.
    pub partition: Partition,
    /// Per-observation values the partition was built from.
    pub marginal_values: Vec<f64>,
    /// The frozen communication policy (identical for both agents).
    pub comm: CommPolicy,
    /// Learning curve of the centralized phase (the distributed phase's
    /// curve lives in `result.record`).
    pub central_record: RunRecord,
}

/// Phase b in isolation: the value-based observation partition derived from
/// a centralized Q-table.
pub fn value_partition(
    q: &CentralQTable,
    spec: &GridSpec,
    horizon: usize,
    clusters: usize,
) -> Result<(Partition, Vec<f64>)> {
    let values = optimistic_marginal_value(q);
    let occupancy = observation_occupancy(&CentralPolicy { table: q }, spec, horizon);
    let clustered = kmedian_1d_weighted(&values, &occupancy, clusters)?;
    Ok((clustered.partition, values))
}

pub fn run_saic(
    spec: &GridSpec,
    cfg: &TrainConfig,
    rate_bits: u32,
    centralized_optimum: f64,
) -> Result<SaicOutcome> {
    // Phase a: solve the centralized problem.
    let central_cfg = cfg.with_seed(phase_seed(cfg.seed, PHASE_CENTRAL));
    let (q, central_record) = train_centralized(spec, &central_cfg);

    // Phase b: cluster observations by value. Both agents share the
    // partition; the task is symmetric in the agents.
    let (partition, marginal_values) = value_partition(&q, spec, cfg.horizon, 1usize << rate_bits)?;
    let comm = CommPolicy::from_partition(&partition, rate_bits)?;

    // Phase c: distributed training with the frozen communication policy.
    let dist_cfg = cfg.with_seed(phase_seed(cfg.seed, PHASE_DISTRIBUTED));
    let (q1, q2, record) = train_distributed(spec, &comm, &comm, &dist_cfg, UpdateRule::Optimistic);

    let policy = DistributedPolicy { q1: &q1, q2: &q2, comm1: &comm, comm2: &comm };
    let eval = evaluate_exact(&policy, spec, cfg.gamma, cfg.horizon);

    let epsilon = epsilon_of_partition(&marginal_values, &partition);
    let bound = return_gap_bound(epsilon, cfg.gamma)?;
    let obs_dist = uniform_non_goal(spec);
    let compression = compression_ratio(&obs_dist, &comm.message_distribution(&obs_dist))?;

    let result = SchemeResult {
        scheme: SchemeKind::Saic,
        rate_bits,
        seed: cfg.seed,
        record,
        mean_return: eval.mean,
        std_error: eval.std_error,
        normalized: normalize(eval.mean, centralized_optimum)?,
        epsilon: Some(epsilon),
        bound: Some(bound),
        compression: Some(compression),
    };
    Ok(SaicOutcome { result, partition, marginal_values, comm, central_record })
}
