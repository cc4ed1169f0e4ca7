//! Q-learning training loops.
//!
//! Action selection is UCB and therefore deterministic given the visit
//! counts; the only randomness in a run is the episode reset stream, so a
//! fixed seed reproduces every table bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gridworld::{joint_moves, reset, step, GridSpec, JointState};
use crate::harness::RunRecord;
use crate::qcore::{ucb_select, TrainConfig, UpdateRule};
use crate::qcore::tables::{AgentQTable, CentralQTable, JointQ, VisitCounts};
use crate::schemes::{Channel, CommPolicy};

/// Q-learning over the joint MDP with an arbitrary state encoding.
///
/// The encoder maps a joint state to an index in `[0, states)`; the identity
/// encoding gives centralized learning, a lossy encoding gives the hybrid
/// compressed controller. Selection is UCB over the 25 joint moves.
pub fn train_joint_encoded<F>(
    spec: &GridSpec,
    cfg: &TrainConfig,
    states: usize,
    rule: UpdateRule,
    encode: F,
) -> (JointQ, RunRecord)
where
    F: Fn(JointState) -> usize,
{
    cfg.validate().expect("invalid TrainConfig");
    let mut q = JointQ::new(states);
    let mut counts = VisitCounts::new(states, crate::gridworld::JOINT_MOVES);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut record = RunRecord::with_capacity(cfg.episodes);

    for episode in 0..cfg.episodes {
        let mut s = reset(&mut rng, spec);
        let mut ret = 0.0;
        let mut discount = 1.0;
        let mut length = 0;
        for _ in 0..cfg.horizon {
            let si = encode(s);
            let mut a = ucb_select(q.row(si), counts.row(si), counts.total(si), cfg.ucb_c, &mut rng);
            if rng.gen_bool(crate::qcore::EXPLORATION_FLOOR) {
                a = rng.gen_range(0..crate::gridworld::JOINT_MOVES);
            }
            counts.increment(si, a);
            let (m1, m2) = joint_moves(a);
            let out = step(s, m1, m2, spec);
            let max_next = if out.terminal { 0.0 } else { q.max_row(encode(out.next)) };
            rule.apply(
                q.entry_mut(si, a),
                out.reward,
                max_next,
                out.terminal,
                cfg.gamma,
                cfg.alpha,
                counts.row(si)[a],
            );
            ret += discount * out.reward;
            discount *= cfg.gamma;
            length += 1;
            s = out.next;
            if out.terminal {
                break;
            }
        }
        record.push(episode, ret, length);
    }
    (q, record)
}

/// Centralized Q-learning: one controller sees both observations and picks
/// both moves.
pub fn train_centralized_with(
    spec: &GridSpec,
    cfg: &TrainConfig,
    rule: UpdateRule,
) -> (CentralQTable, RunRecord) {
    let cells = spec.cells();
    let (q, record) = train_joint_encoded(spec, cfg, cells * cells, rule, |s| {
        s.o1.index() * cells + s.o2.index()
    });
    (CentralQTable::from_joint(cells, q), record)
}

/// Centralized Q-learning with the default one-step update. The environment
/// is deterministic and fully observed here, so the max-based update is an
/// asynchronous value iteration and converges on visited pairs regardless
/// of the learning rate.
pub fn train_centralized(spec: &GridSpec, cfg: &TrainConfig) -> (CentralQTable, RunRecord) {
    train_centralized_with(spec, cfg, UpdateRule::Optimistic)
}

/// Distributed Q-learning under fixed communication policies, starting from
/// all-zero tables.
///
/// Each step both agents emit a message about their current observation,
/// receive the other's message over the rate-limited channel, select a move
/// by UCB over their `(own obs, received message)` row, and update with the
/// shared team reward.
pub fn train_distributed(
    spec: &GridSpec,
    comm1: &CommPolicy,
    comm2: &CommPolicy,
    cfg: &TrainConfig,
    rule: UpdateRule,
) -> (AgentQTable, AgentQTable, RunRecord) {
    let cells = spec.cells();
    let q1 = AgentQTable::new(cells, comm2.message_space());
    let q2 = AgentQTable::new(cells, comm1.message_space());
    train_distributed_from(spec, comm1, comm2, cfg, rule, q1, q2)
}

/// Distributed Q-learning warm-started from explicit initial tables (for
/// example, the message-aggregated centralized action values).
pub fn train_distributed_from(
    spec: &GridSpec,
    comm1: &CommPolicy,
    comm2: &CommPolicy,
    cfg: &TrainConfig,
    rule: UpdateRule,
    q1: AgentQTable,
    q2: AgentQTable,
) -> (AgentQTable, AgentQTable, RunRecord) {
    cfg.validate().expect("invalid TrainConfig");
    let cells = spec.cells();
    assert_eq!(comm1.cells(), cells, "comm policy 1 not total on this grid");
    assert_eq!(comm2.cells(), cells, "comm policy 2 not total on this grid");

    // Agent 1 is keyed by messages from agent 2 and vice versa.
    let mut q1 = q1;
    let mut q2 = q2;
    assert_eq!(q1.cells(), cells);
    assert_eq!(q1.messages(), comm2.message_space());
    assert_eq!(q2.cells(), cells);
    assert_eq!(q2.messages(), comm1.message_space());
    let mut n1 = VisitCounts::new(cells * comm2.message_space(), crate::gridworld::Move::COUNT);
    let mut n2 = VisitCounts::new(cells * comm1.message_space(), crate::gridworld::Move::COUNT);
    let chan1 = Channel::new(comm1.rate_bits());
    let chan2 = Channel::new(comm2.rate_bits());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut record = RunRecord::with_capacity(cfg.episodes);

    for episode in 0..cfg.episodes {
        let mut s = reset(&mut rng, spec);
        let mut ret = 0.0;
        let mut discount = 1.0;
        let mut length = 0;
        for _ in 0..cfg.horizon {
            let c1 = chan1.send(comm1.message(s.o1)).expect("message exceeds channel rate");
            let c2 = chan2.send(comm2.message(s.o2)).expect("message exceeds channel rate");

            let s1 = q1.state_index(s.o1.index(), c2);
            let mut m1 =
                ucb_select(q1.row(s.o1.index(), c2), n1.row(s1), n1.total(s1), cfg.ucb_c, &mut rng);
            if rng.gen_bool(crate::qcore::EXPLORATION_FLOOR) {
                m1 = rng.gen_range(0..crate::gridworld::Move::COUNT);
            }
            n1.increment(s1, m1);
            let s2 = q2.state_index(s.o2.index(), c1);
            let mut m2 =
                ucb_select(q2.row(s.o2.index(), c1), n2.row(s2), n2.total(s2), cfg.ucb_c, &mut rng);
            if rng.gen_bool(crate::qcore::EXPLORATION_FLOOR) {
                m2 = rng.gen_range(0..crate::gridworld::Move::COUNT);
            }
            n2.increment(s2, m2);

            let out = step(
                s,
                crate::gridworld::Move::from_index(m1),
                crate::gridworld::Move::from_index(m2),
                spec,
            );

            // Next-step messages are known to the simulator immediately, so
            // the delayed update of the online algorithm collapses to a
            // standard one-step update.
            let (max1, max2) = if out.terminal {
                (0.0, 0.0)
            } else {
                let nc1 = comm1.message(out.next.o1);
                let nc2 = comm2.message(out.next.o2);
                (q1.max_row(out.next.o1.index(), nc2), q2.max_row(out.next.o2.index(), nc1))
            };
            rule.apply(
                q1.entry_mut(s.o1.index(), c2, m1),
                out.reward,
                max1,
                out.terminal,
                cfg.gamma,
                cfg.alpha,
                n1.row(s1)[m1],
            );
            rule.apply(
                q2.entry_mut(s.o2.index(), c1, m2),
                out.reward,
                max2,
                out.terminal,
                cfg.gamma,
                cfg.alpha,
                n2.row(s2)[m2],
            );

            ret += discount * out.reward;
            discount *= cfg.gamma;
            length += 1;
            s = out.next;
            if out.terminal {
                break;
            }
        }
        record.push(episode, ret, length);
    }
    (q1, q2, record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::Obs;

    fn small_spec() -> GridSpec {
        GridSpec::new(3, Obs(8), 1.0, 10.0).unwrap()
    }

    fn small_cfg(episodes: usize, seed: u64) -> TrainConfig {
        TrainConfig::new(0.9, 0.07, 12.5, episodes, 100, seed).unwrap()
    }

    #[test]
    fn centralized_training_is_seed_deterministic() {
        let spec = small_spec();
        let cfg = small_cfg(500, 42);
        let (qa, ra) = train_centralized(&spec, &cfg);
        let (qb, rb) = train_centralized(&spec, &cfg);
        assert_eq!(qa.raw(), qb.raw());
        assert_eq!(ra, rb);

        // A different seed draws different episodes. (The converged tables
        // may still coincide: the max-based update has a seed-independent
        // fixed point on a deterministic environment.)
        let (_, rc) = train_centralized(&spec, &cfg.with_seed(43));
        assert_ne!(ra, rc);
    }

    #[test]
    fn recorded_returns_are_consistent_with_discounting() {
        // The env pays a single nonzero reward at termination, so every
        // recorded return must be 0, C1*g^(len-1) or C2*g^(len-1) with the
        // discount accumulated exactly as the trainer does.
        let spec = small_spec();
        let cfg = small_cfg(300, 7);
        let (_, record) = train_centralized(&spec, &cfg);
        for e in &record.episodes {
            let mut g = 1.0;
            for _ in 1..e.length {
                g *= cfg.gamma;
            }
            let candidates = [0.0, spec.reward_small * g, spec.reward_large * g];
            assert!(
                candidates.iter().any(|c| *c == e.ret),
                "episode return {} not explained by length {}",
                e.ret,
                e.length
            );
        }
    }

    #[test]
    fn q_entries_stay_within_reward_bound() {
        let spec = small_spec();
        let cfg = small_cfg(2000, 3);
        let (q, _) = train_centralized(&spec, &cfg);
        let bound = spec.reward_large / (1.0 - cfg.gamma);
        assert!(q.raw().iter().all(|&v| (0.0..=bound).contains(&v)));
    }

    #[test]
    fn terminal_rows_remain_at_zero() {
        let spec = small_spec();
        let cfg = small_cfg(2000, 3);
        let (q, _) = train_centralized(&spec, &cfg);
        let g = spec.goal().index();
        for o in 0..spec.cells() {
            for a in 0..crate::gridworld::JOINT_MOVES {
                let (m1, m2) = joint_moves(a);
                assert_eq!(q.get(g, o, m1, m2), 0.0);
                assert_eq!(q.get(o, g, m1, m2), 0.0);
            }
        }
    }

    #[test]
    fn distributed_training_is_seed_deterministic() {
        let spec = small_spec();
        let cfg = small_cfg(400, 11);
        let comm = CommPolicy::identity(spec.cells());
        let (a1, a2, r) = train_distributed(&spec, &comm, &comm, &cfg, UpdateRule::Optimistic);
        let (b1, b2, rb) = train_distributed(&spec, &comm, &comm, &cfg, UpdateRule::Optimistic);
        assert_eq!(a1.raw(), b1.raw());
        assert_eq!(a2.raw(), b2.raw());
        assert_eq!(r, rb);
    }

    #[test]
    fn optimistic_entries_never_decrease_across_training() {
        // Train twice with the same seed but different episode budgets; the
        // longer run's entries must dominate the shorter run's entries.
        let spec = small_spec();
        let comm = CommPolicy::identity(spec.cells());
        let (short1, _, _) = train_distributed(
            &spec,
            &comm,
            &comm,
            &small_cfg(200, 5),
            UpdateRule::Optimistic,
        );
        let (long1, _, _) = train_distributed(
            &spec,
            &comm,
            &comm,
            &small_cfg(400, 5),
            UpdateRule::Optimistic,
        );
        for (s, l) in short1.raw().iter().zip(long1.raw()) {
            assert!(l >= s, "optimistic entry decreased: {s} -> {l}");
        }
    }
}
