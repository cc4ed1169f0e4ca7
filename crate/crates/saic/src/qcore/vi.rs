//! Exact planning on the joint MDP, used as ground truth in tests and as
//! the normalization denominator for reported returns.

use crate::gridworld::{
    joint_moves, step, transition, GridSpec, JointState, Move, Obs, JOINT_MOVES,
};
use crate::{Error, Result};

/// Bellman-optimal values and a greedy joint policy for the joint MDP.
#[derive(Debug, Clone)]
pub struct ViSolution {
    cells: usize,
    gamma: f64,
    /// `V*[o1 * cells + o2]`; terminal states are 0 by convention.
    pub values: Vec<f64>,
    /// Greedy joint-move index per state, lowest index on ties.
    pub policy: Vec<usize>,
    pub iterations: usize,
}

impl ViSolution {
    #[inline]
    pub fn value(&self, o1: usize, o2: usize) -> f64 {
        self.values[o1 * self.cells + o2]
    }

    pub fn greedy_joint(&self, s: JointState) -> (Move, Move) {
        joint_moves(self.policy[s.o1.index() * self.cells + s.o2.index()])
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Expected optimal return from the reset distribution: the mean of `V*`
    /// over all non-goal start pairs.
    pub fn mean_value_over_starts(&self, spec: &GridSpec) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for o1 in spec.non_goal_observations() {
            for o2 in spec.non_goal_observations() {
                sum += self.value(o1.index(), o2.index());
                count += 1;
            }
        }
        sum / count as f64
    }
}

/// Synchronous value iteration to sup-norm tolerance `tol`.
pub fn value_iteration(spec: &GridSpec, gamma: f64, tol: f64) -> Result<ViSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} not in [0,1)")));
    }
    let cells = spec.cells();

    // Per-cell deterministic transitions.
    let mut next_cell = vec![0usize; cells * Move::COUNT];
    for o in 0..cells {
        for m in Move::ALL {
            next_cell[o * Move::COUNT + m.index()] = transition(Obs(o as u16), m, spec).index();
        }
    }
    let goal = spec.goal().index();
    let is_terminal = |o1: usize, o2: usize| o1 == goal || o2 == goal;

    let mut values = vec![0.0; cells * cells];
    let mut scratch = vec![0.0; cells * cells];
    let mut iterations = 0;
    let max_sweeps = 100_000;

    loop {
        let mut delta: f64 = 0.0;
        for o1 in 0..cells {
            for o2 in 0..cells {
                let s = o1 * cells + o2;
                let new = if is_terminal(o1, o2) {
                    0.0
                } else {
                    let mut best = f64::NEG_INFINITY;
                    for a in 0..JOINT_MOVES {
                        let (m1, m2) = joint_moves(a);
                        let n1 = next_cell[o1 * Move::COUNT + m1.index()];
                        let n2 = next_cell[o2 * Move::COUNT + m2.index()];
                        let reward = if n1 == goal && n2 == goal {
                            spec.reward_large
                        } else if n1 == goal || n2 == goal {
                            spec.reward_small
                        } else {
                            0.0
                        };
                        let v = if reward > 0.0 {
                            reward
                        } else {
                            reward + gamma * values[n1 * cells + n2]
                        };
                        if v > best {
                            best = v;
                        }
                    }
                    best
                };
                delta = delta.max((new - values[s]).abs());
                scratch[s] = new;
            }
        }
        std::mem::swap(&mut values, &mut scratch);
        iterations += 1;
        if delta < tol || iterations >= max_sweeps {
            break;
        }
    }

    // Greedy policy extraction, lowest-index tie-break.
    let mut policy = vec![0usize; cells * cells];
    for o1 in 0..cells {
        for o2 in 0..cells {
            if is_terminal(o1, o2) {
                continue;
            }
            let s = JointState::new(Obs(o1 as u16), Obs(o2 as u16));
            let mut best_a = 0;
            let mut best_v = f64::NEG_INFINITY;
            for a in 0..JOINT_MOVES {
                let (m1, m2) = joint_moves(a);
                let out = step(s, m1, m2, spec);
                let v = if out.terminal {
                    out.reward
                } else {
                    gamma * values[out.next.o1.index() * cells + out.next.o2.index()]
                };
                if v > best_v {
                    best_v = v;
                    best_a = a;
                }
            }
            policy[o1 * cells + o2] = best_a;
        }
    }

    Ok(ViSolution { cells, gamma, values, policy, iterations })
}
