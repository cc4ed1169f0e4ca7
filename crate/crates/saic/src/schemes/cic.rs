//! Conventional information compression: distributed training with lossless
//! communication first, then spatial Lloyd quantization of the empirical
//! observation distribution, then retraining on the quantized messages.
//! Distortion here is geometric, not value-based — the task has no say in
//! which observations share a message.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::aggregation::{compression_ratio, grid_points, lloyd_quantize};
use crate::gridworld::GridSpec;
use crate::harness::normalize;
use crate::qcore::{train_distributed, TrainConfig, UpdateRule};
use crate::schemes::{
    evaluate_exact, observation_occupancy, phase_seed, CommPolicy, DistributedPolicy, SchemeKind,
    SchemeOutcome, SchemeResult, PHASE_CENTRAL, PHASE_DISTRIBUTED, PHASE_QUANTIZER,
};
use crate::Result;

pub fn run_cic(
    spec: &GridSpec,
    cfg: &TrainConfig,
    rate_bits: u32,
    centralized_optimum: f64,
) -> Result<SchemeOutcome> {
    // Phase 1: train on an unconstrained channel (each observation its own
    // message) to obtain a behaviour worth profiling.
    let identity = CommPolicy::identity(spec.cells());
    let phase1_cfg = cfg.with_seed(phase_seed(cfg.seed, PHASE_CENTRAL));
    let (p1_q1, p1_q2, _) =
        train_distributed(spec, &identity, &identity, &phase1_cfg, UpdateRule::Optimistic);
    let phase1_policy =
        DistributedPolicy { q1: &p1_q1, q2: &p1_q2, comm1: &identity, comm2: &identity };
    let weights = observation_occupancy(&phase1_policy, spec, cfg.horizon);

    // Phase 2: Lloyd quantization of the observation space under the
    // empirical distribution.
    let mut rng = ChaCha8Rng::seed_from_u64(phase_seed(cfg.seed, PHASE_QUANTIZER));
    let lloyd = lloyd_quantize(&grid_points(spec.side()), &weights, 1usize << rate_bits, &mut rng)?;
    let comm = CommPolicy::from_partition(&lloyd.partition, rate_bits)?;

    // Phase 3: retrain against the quantized channel.
    let phase3_cfg = cfg.with_seed(phase_seed(cfg.seed, PHASE_DISTRIBUTED));
    let (q1, q2, record) = train_distributed(spec, &comm, &comm, &phase3_cfg, UpdateRule::Optimistic);
    let policy = DistributedPolicy { q1: &q1, q2: &q2, comm1: &comm, comm2: &comm };
    let eval = evaluate_exact(&policy, spec, cfg.gamma, cfg.horizon);

    let compression = compression_ratio(
        &crate::aggregation::uniform_non_goal(spec),
        &comm.message_distribution(&crate::aggregation::uniform_non_goal(spec)),
    )?;

    let result = SchemeResult {
        scheme: SchemeKind::Cic,
        rate_bits,
        seed: cfg.seed,
        record,
        mean_return: eval.mean,
        std_error: eval.std_error,
        normalized: normalize(eval.mean, centralized_optimum)?,
        epsilon: None,
        bound: None,
        compression: Some(compression),
    };
    Ok(SchemeOutcome { result, partition: Some(lloyd.partition), marginal_values: None })
}
