//! Policy bundles and their evaluation.
//!
//! Every scheme reduces at execution time to a deterministic joint policy:
//! given the joint state (and the in-episode step, for the time-scripted
//! heuristics) it produces both agents' moves. Learned bundles route the
//! other agent's observation through their communication policy, so a
//! policy can only use what its channel actually carries.

use rand::Rng;

use crate::gridworld::{step, GridSpec, JointState, Move};
use crate::qcore::{AgentQTable, CentralQTable, JointQ, ViSolution};
use crate::schemes::CommPolicy;

/// A deterministic joint policy; `t` is the 1-based step within the episode.
pub trait JointPolicy {
    fn joint_move(&self, s: JointState, t: usize) -> (Move, Move);
}

/// Greedy policy of a centralized Q-table.
pub struct CentralPolicy<'a> {
    pub table: &'a CentralQTable,
}

impl JointPolicy for CentralPolicy<'_> {
    fn joint_move(&self, s: JointState, _t: usize) -> (Move, Move) {
        crate::gridworld::joint_moves(self.table.argmax_joint(s.o1.index(), s.o2.index()))
    }
}

impl JointPolicy for ViSolution {
    fn joint_move(&self, s: JointState, _t: usize) -> (Move, Move) {
        self.greedy_joint(s)
    }
}

/// Greedy execution of two distributed learners under their communication
/// policies: each agent sees its own cell plus the other's message.
pub struct DistributedPolicy<'a> {
    pub q1: &'a AgentQTable,
    pub q2: &'a AgentQTable,
    pub comm1: &'a CommPolicy,
    pub comm2: &'a CommPolicy,
}

impl JointPolicy for DistributedPolicy<'_> {
    fn joint_move(&self, s: JointState, _t: usize) -> (Move, Move) {
        let c1 = self.comm1.message(s.o1);
        let c2 = self.comm2.message(s.o2);
        (self.q1.argmax_row(s.o1.index(), c2), self.q2.argmax_row(s.o2.index(), c1))
    }
}

/// Greedy execution of the hybrid controller: joint moves chosen from the
/// pair of compressed observations only.
pub struct HybridPolicy<'a> {
    pub q: &'a JointQ,
    pub comm1: &'a CommPolicy,
    pub comm2: &'a CommPolicy,
}

impl HybridPolicy<'_> {
    pub fn encode(&self, s: JointState) -> usize {
        self.comm1.message(s.o1) * self.comm2.message_space() + self.comm2.message(s.o2)
    }
}

impl JointPolicy for HybridPolicy<'_> {
    fn joint_move(&self, s: JointState, _t: usize) -> (Move, Move) {
        crate::gridworld::joint_moves(self.q.argmax_row(self.encode(s)))
    }
}

/// Discounted return of one greedy episode from `start`.
pub fn rollout<P: JointPolicy + ?Sized>(
    policy: &P,
    start: JointState,
    spec: &GridSpec,
    gamma: f64,
    horizon: usize,
) -> f64 {
    let mut s = start;
    let mut ret = 0.0;
    let mut discount = 1.0;
    for t in 1..=horizon {
        let (m1, m2) = policy.joint_move(s, t);
        let out = step(s, m1, m2, spec);
        ret += discount * out.reward;
        discount *= gamma;
        if out.terminal {
            break;
        }
        s = out.next;
    }
    ret
}

/// Mean discounted return with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub mean: f64,
    pub std_error: f64,
    pub episodes: usize,
}

/// Exact expected return under the reset distribution: one rollout from
/// every non-goal start pair. Deterministic policies make this the exact
/// expectation, so the standard error is zero.
pub fn evaluate_exact<P: JointPolicy + ?Sized>(
    policy: &P,
    spec: &GridSpec,
    gamma: f64,
    horizon: usize,
) -> Evaluation {
    let mut sum = 0.0;
    let mut count = 0usize;
    for o1 in spec.non_goal_observations() {
        for o2 in spec.non_goal_observations() {
            sum += rollout(policy, JointState::new(o1, o2), spec, gamma, horizon);
            count += 1;
        }
    }
    Evaluation { mean: sum / count as f64, std_error: 0.0, episodes: count }
}

/// Per-start-state returns, indexed `o1 * cells + o2`; terminal start pairs
/// (never drawn by resets) hold zero.
pub fn evaluate_per_start<P: JointPolicy + ?Sized>(
    policy: &P,
    spec: &GridSpec,
    gamma: f64,
    horizon: usize,
) -> Vec<f64> {
    let cells = spec.cells();
    let mut out = vec![0.0; cells * cells];
    for o1 in spec.non_goal_observations() {
        for o2 in spec.non_goal_observations() {
            out[o1.index() * cells + o2.index()] =
                rollout(policy, JointState::new(o1, o2), spec, gamma, horizon);
        }
    }
    out
}

/// Observation visit frequencies of a policy, pooled over both agents and
/// every non-goal start pair. Only decision-time observations count, so the
/// goal cell always carries zero mass.
pub fn observation_occupancy<P: JointPolicy + ?Sized>(
    policy: &P,
    spec: &GridSpec,
    horizon: usize,
) -> Vec<f64> {
    let mut counts = vec![0u64; spec.cells()];
    for o1 in spec.non_goal_observations() {
        for o2 in spec.non_goal_observations() {
            let mut s = JointState::new(o1, o2);
            for t in 1..=horizon {
                counts[s.o1.index()] += 1;
                counts[s.o2.index()] += 1;
                let (m1, m2) = policy.joint_move(s, t);
                let out = step(s, m1, m2, spec);
                if out.terminal {
                    break;
                }
                s = out.next;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Sampled evaluation: greedy rollouts from uniform random starts.
pub fn evaluate<P: JointPolicy + ?Sized, R: Rng>(
    policy: &P,
    spec: &GridSpec,
    episodes: usize,
    gamma: f64,
    horizon: usize,
    rng: &mut R,
) -> Evaluation {
    assert!(episodes >= 1, "need at least one evaluation episode");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..episodes {
        let start = crate::gridworld::reset(rng, spec);
        let ret = rollout(policy, start, spec, gamma, horizon);
        sum += ret;
        sum_sq += ret * ret;
    }
    let n = episodes as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let std_error = if episodes > 1 { (var / (n - 1.0)).sqrt() } else { 0.0 };
    Evaluation { mean, std_error, episodes }
}
