//! Hybrid scheme: the value-aggregation pipeline supplies the compression,
//! but a single central controller learns joint actions over the pair of
//! compressed observations — it never sees the raw cells.

use crate::gridworld::GridSpec;
use crate::harness::{normalize, RunRecord};
use crate::qcore::{train_centralized, train_joint_encoded, JointQ, TrainConfig, UpdateRule};
use crate::schemes::saic::value_partition;
use crate::schemes::{
    evaluate_exact, phase_seed, CommPolicy, HybridPolicy, SchemeKind, SchemeOutcome, SchemeResult,
    PHASE_CENTRAL, PHASE_DISTRIBUTED,
};
use crate::Result;

/// Q-learning over message pairs: the controller's state is
/// `(comm1(o1), comm2(o2))`.
pub fn train_hybrid_controller(
    spec: &GridSpec,
    comm1: &CommPolicy,
    comm2: &CommPolicy,
    cfg: &TrainConfig,
) -> (JointQ, RunRecord) {
    let space2 = comm2.message_space();
    let states = comm1.message_space() * space2;
    train_joint_encoded(spec, cfg, states, UpdateRule::Optimistic, |s| {
        comm1.message(s.o1) * space2 + comm2.message(s.o2)
    })
}

pub fn run_hybrid(
    spec: &GridSpec,
    cfg: &TrainConfig,
    rate_bits: u32,
    centralized_optimum: f64,
) -> Result<SchemeOutcome> {
    // Same aggregation phases as the value-aggregation scheme.
    let central_cfg = cfg.with_seed(phase_seed(cfg.seed, PHASE_CENTRAL));
    let (q, _) = train_centralized(spec, &central_cfg);
    let (partition, marginal_values) =
        value_partition(&q, spec, cfg.horizon, 1usize << rate_bits)?;
    let comm = CommPolicy::from_partition(&partition, rate_bits)?;

    // A fresh controller learns over the compressed state space.
    let hybrid_cfg = cfg.with_seed(phase_seed(cfg.seed, PHASE_DISTRIBUTED));
    let (table, record) = train_hybrid_controller(spec, &comm, &comm, &hybrid_cfg);
    let policy = HybridPolicy { q: &table, comm1: &comm, comm2: &comm };
    let eval = evaluate_exact(&policy, spec, cfg.gamma, cfg.horizon);

    Ok(SchemeOutcome {
        result: SchemeResult {
            scheme: SchemeKind::Hybrid,
            rate_bits,
            seed: cfg.seed,
            record,
            mean_return: eval.mean,
            std_error: eval.std_error,
            normalized: normalize(eval.mean, centralized_optimum)?,
            epsilon: None,
            bound: None,
            compression: None,
        },
        partition: Some(partition),
        marginal_values: Some(marginal_values),
    })
}
