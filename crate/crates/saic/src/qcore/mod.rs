//! Tabular reinforcement learning and exact planning on the joint MDP.
//!
//! Centralized Q-learning treats the pair of observations as one state and
//! the pair of moves as one action; distributed Q-learning gives each agent
//! a table over (own observation, received message). A value-iteration
//! solver provides ground truth on instances small enough to plan exactly.

mod io;
mod tables;
mod train;
mod vi;

pub use io::{load_agent_qtable, load_central_qtable, save_agent_qtable, save_central_qtable};
pub use tables::{AgentQTable, CentralQTable, JointQ, VisitCounts};
pub use train::{
    train_centralized, train_distributed, train_distributed_from, train_joint_encoded,
};
pub use vi::{value_iteration, ViSolution};

use rand::Rng;

use crate::{Error, Result};

/// Hyperparameters of a single training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Discount factor, in `[0, 1)`.
    pub gamma: f64,
    /// Constant learning rate, `> 0`.
    pub alpha: f64,
    /// UCB exploration constant, `>= 0`.
    pub ucb_c: f64,
    /// Number of training episodes.
    pub episodes: usize,
    /// Step cap per episode.
    pub horizon: usize,
    /// Seed for the run's random stream.
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(
        gamma: f64,
        alpha: f64,
        ucb_c: f64,
        episodes: usize,
        horizon: usize,
        seed: u64,
    ) -> Result<Self> {
        let cfg = TrainConfig { gamma, alpha, ucb_c, episodes, horizon, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidTrainConfig(format!("gamma {} not in [0,1)", self.gamma)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidTrainConfig(format!("alpha {} must be > 0", self.alpha)));
        }
        if !(self.ucb_c >= 0.0) {
            return Err(Error::InvalidTrainConfig(format!("ucb_c {} must be >= 0", self.ucb_c)));
        }
        if self.episodes == 0 {
            return Err(Error::InvalidTrainConfig("episodes must be >= 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidTrainConfig("horizon must be >= 1".into()));
        }
        Ok(())
    }

    /// Copy of this config with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Which one-step update the distributed learners apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateRule {
    /// `Q += alpha * (target - Q)`.
    Standard,
    /// `Q = max(Q, target)` — never decreases, exact for deterministic MMDPs.
    Optimistic,
    /// Max-based while a state-action pair is young, averaging afterwards.
    ///
    /// Independent learners on a shared-reward task punish an agent for its
    /// partner's exploration: averaging from the start locks in premature
    /// "defect" policies, while pure max updates keep best-case values that
    /// message aliasing can never deliver. Leniency gets both halves right:
    /// early max updates let the coordinated optimum be discovered, and the
    /// switch to averaging prunes the fantasies that never materialize.
    Lenient {
        /// Visit count of the entry below which updates stay max-based.
        optimism_visits: u32,
    },
    /// Two-rate update: the full `alpha` on positive TD errors, a reduced
    /// rate on negative ones.
    Hysteretic {
        /// Multiplier on `alpha` for negative errors, in `[0, 1]`.
        drop: f64,
    },
}

impl UpdateRule {
    #[inline]
    pub fn apply(
        self,
        entry: &mut f64,
        reward: f64,
        max_next: f64,
        terminal: bool,
        gamma: f64,
        alpha: f64,
        visits: u32,
    ) {
        match self {
            UpdateRule::Standard => q_update(entry, reward, max_next, terminal, gamma, alpha),
            UpdateRule::Optimistic => optimistic_q_update(entry, reward, max_next, terminal, gamma),
            UpdateRule::Lenient { optimism_visits } => {
                if visits <= optimism_visits {
                    optimistic_q_update(entry, reward, max_next, terminal, gamma);
                } else {
                    q_update(entry, reward, max_next, terminal, gamma, alpha);
                }
            }
            UpdateRule::Hysteretic { drop } => {
                let t = target(reward, max_next, terminal, gamma);
                let rate = if t >= *entry { alpha } else { alpha * drop };
                *entry += rate * (t - *entry);
            }
        }
    }
}

/// One-step bootstrap target; the next-state term is zeroed on terminal
/// transitions.
#[inline]
fn target(reward: f64, max_next: f64, terminal: bool, gamma: f64) -> f64 {
    if terminal {
        reward
    } else {
        reward + gamma * max_next
    }
}

/// Standard one-step Q-learning update on a table entry.
#[inline]
pub fn q_update(entry: &mut f64, reward: f64, max_next: f64, terminal: bool, gamma: f64, alpha: f64) {
    let t = target(reward, max_next, terminal, gamma);
    *entry += alpha * (t - *entry);
}

/// Max-based update: keeps the entry at the best target ever observed.
#[inline]
pub fn optimistic_q_update(entry: &mut f64, reward: f64, max_next: f64, terminal: bool, gamma: f64) {
    let t = target(reward, max_next, terminal, gamma);
    if t > *entry {
        *entry = t;
    }
}

/// Residual uniform exploration kept under the annealed confidence bonus.
///
/// Max-based values only improve on visit: without a floor, a state whose
/// exploration has annealed can never re-try an action whose downstream
/// values matured later, and a run occasionally freezes a miscoordinated
/// convention. One random move in a hundred is enough to re-touch every
/// action and costs the late training curve well under a percent.
pub(crate) const EXPLORATION_FLOOR: f64 = 0.01;

/// UCB action selection over one state's action row.
///
/// Unvisited actions take priority (lowest index first); otherwise the
/// action maximizing `q + c * ln(total) / n` wins — a confidence radius
/// that shrinks linearly in the visit count, the right rate when
/// transitions are deterministic and one visit pins an outcome. Exact score
/// ties are broken uniformly at random: two symmetric learners that share
/// every visit would otherwise mirror each other's choices forever and only
/// ever sample the diagonal of the joint action space.
pub fn ucb_select<R: Rng>(
    q_row: &[f64],
    n_row: &[u32],
    total_visits: u32,
    ucb_c: f64,
    rng: &mut R,
) -> usize {
    debug_assert_eq!(q_row.len(), n_row.len());
    debug_assert!(!q_row.is_empty());
    if let Some(a) = n_row.iter().position(|&n| n == 0) {
        return a;
    }
    let ln_total = f64::from(total_visits.max(1)).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    let mut ties = 0u32;
    for (a, (&q, &n)) in q_row.iter().zip(n_row).enumerate() {
        let score = q + ucb_c * ln_total / f64::from(n);
        if score > best_score {
            best_score = score;
            best = a;
            ties = 1;
        } else if score == best_score {
            // Reservoir choice among the tied actions.
            ties += 1;
            if rng.gen_range(0..ties) == 0 {
                best = a;
            }
        }
    }
    best
}
