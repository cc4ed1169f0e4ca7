//! Two-agent rendezvous environment on an `N x N` grid.
//!
//! Cells are numbered row-major starting from the bottom-left corner, so cell
//! `0` is the bottom-left cell and cell `N^2 - 1` the top-right one. Both
//! agents move simultaneously and independently; moving off the grid leaves
//! the agent in place. The episode ends on the first step whose post-move
//! state has at least one agent on the goal cell: the team earns the large
//! reward when both enter together and the small reward when only one does.

use rand::Rng;

use crate::{Error, Result};

/// A single agent's observation: its own cell index in `[0, N^2 - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Obs(pub u16);

impl Obs {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// (row, col) with row 0 at the bottom.
    #[inline]
    pub fn coords(self, side: u16) -> (u16, u16) {
        (self.0 / side, self.0 % side)
    }

    #[inline]
    pub fn from_coords(row: u16, col: u16, side: u16) -> Self {
        Obs(row * side + col)
    }
}

/// The joint state of the two-agent system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointState {
    pub o1: Obs,
    pub o2: Obs,
}

impl JointState {
    pub fn new(o1: Obs, o2: Obs) -> Self {
        JointState { o1, o2 }
    }
}

/// One of the five grid moves. The declared order is load-bearing: it fixes
/// table indexing and every lowest-index tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Move {
    Right = 0,
    Left = 1,
    Up = 2,
    Down = 3,
    Stop = 4,
}

impl Move {
    pub const ALL: [Move; 5] = [Move::Right, Move::Left, Move::Up, Move::Down, Move::Stop];
    pub const COUNT: usize = 5;

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Move {
        Move::ALL[i]
    }
}

/// Number of joint moves for two agents.
pub const JOINT_MOVES: usize = Move::COUNT * Move::COUNT;

/// Encode a pair of moves as a joint-action index in `[0, 24]`.
#[inline]
pub fn joint_index(m1: Move, m2: Move) -> usize {
    m1.index() * Move::COUNT + m2.index()
}

/// Inverse of [`joint_index`].
#[inline]
pub fn joint_moves(a: usize) -> (Move, Move) {
    (Move::from_index(a / Move::COUNT), Move::from_index(a % Move::COUNT))
}

/// Immutable environment parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    side: u16,
    goal: Obs,
    /// Reward when exactly one agent enters the goal.
    pub reward_small: f64,
    /// Reward when both agents enter the goal together.
    pub reward_large: f64,
}

impl GridSpec {
    pub fn new(side: u16, goal: Obs, reward_small: f64, reward_large: f64) -> Result<Self> {
        if side < 2 {
            return Err(Error::InvalidGridSpec(format!("side {side} < 2")));
        }
        if goal.index() >= (side as usize).pow(2) {
            return Err(Error::InvalidGridSpec(format!(
                "goal cell {} outside {side}x{side} grid",
                goal.0
            )));
        }
        if !(reward_small > 0.0 && reward_small < reward_large) {
            return Err(Error::InvalidGridSpec(format!(
                "rewards must satisfy 0 < C1 < C2, got C1={reward_small}, C2={reward_large}"
            )));
        }
        Ok(GridSpec { side, goal, reward_small, reward_large })
    }

    #[inline]
    pub fn side(&self) -> u16 {
        self.side
    }

    /// Number of cells `N^2`.
    #[inline]
    pub fn cells(&self) -> usize {
        (self.side as usize).pow(2)
    }

    #[inline]
    pub fn goal(&self) -> Obs {
        self.goal
    }

    pub fn observations(&self) -> impl Iterator<Item = Obs> {
        (0..self.cells() as u16).map(Obs)
    }

    /// All cells except the goal — the reset support.
    pub fn non_goal_observations(&self) -> impl Iterator<Item = Obs> + '_ {
        self.observations().filter(move |o| *o != self.goal)
    }

    /// True when the joint state has at least one agent on the goal.
    #[inline]
    pub fn is_terminal(&self, s: JointState) -> bool {
        s.o1 == self.goal || s.o2 == self.goal
    }

    /// Manhattan distance between two cells.
    pub fn manhattan(&self, a: Obs, b: Obs) -> u16 {
        let (ra, ca) = a.coords(self.side);
        let (rb, cb) = b.coords(self.side);
        ra.abs_diff(rb) + ca.abs_diff(cb)
    }
}

/// Deterministic single-agent transition; off-grid moves clamp in place.
pub fn transition(o: Obs, m: Move, spec: &GridSpec) -> Obs {
    let n = spec.side();
    let (row, col) = o.coords(n);
    let (row, col) = match m {
        Move::Right if col + 1 < n => (row, col + 1),
        Move::Left if col > 0 => (row, col - 1),
        Move::Up if row + 1 < n => (row + 1, col),
        Move::Down if row > 0 => (row - 1, col),
        _ => (row, col),
    };
    Obs::from_coords(row, col, n)
}

/// Result of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub next: JointState,
    pub reward: f64,
    pub terminal: bool,
}

/// Advance both agents one step and score the post-move state.
pub fn step(s: JointState, m1: Move, m2: Move, spec: &GridSpec) -> Step {
    let next = JointState::new(transition(s.o1, m1, spec), transition(s.o2, m2, spec));
    let at1 = next.o1 == spec.goal();
    let at2 = next.o2 == spec.goal();
    let reward = match (at1, at2) {
        (true, true) => spec.reward_large,
        (true, false) | (false, true) => spec.reward_small,
        (false, false) => 0.0,
    };
    Step { next, reward, terminal: reward > 0.0 }
}

/// Draw a start state: each agent uniform over the non-goal cells,
/// independently of the other.
pub fn reset<R: Rng>(rng: &mut R, spec: &GridSpec) -> JointState {
    let goal = spec.goal().0 as usize;
    let cells = spec.cells();
    let draw = |rng: &mut R| {
        // Sample [0, cells-2] and skip over the goal index.
        let raw = rng.gen_range(0..cells - 1);
        Obs(if raw >= goal { raw as u16 + 1 } else { raw as u16 })
    };
    let o1 = draw(rng);
    let o2 = draw(rng);
    JointState::new(o1, o2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec4() -> GridSpec {
        GridSpec::new(4, Obs(15), 1.0, 10.0).unwrap()
    }

    #[test]
    fn transition_matches_worked_cases() {
        let spec = spec4();
        assert_eq!(transition(Obs(4), Move::Up, &spec), Obs(8));
        assert_eq!(transition(Obs(0), Move::Down, &spec), Obs(0));
        assert_eq!(transition(Obs(7), Move::Stop, &spec), Obs(7));
        // Right edge clamps.
        assert_eq!(transition(Obs(7), Move::Right, &spec), Obs(7));
        assert_eq!(transition(Obs(5), Move::Right, &spec), Obs(6));
    }

    #[test]
    fn step_rewards_cover_all_three_cases() {
        let spec = spec4();
        // Both adjacent to the goal (15): 14 is left of it, 11 below it.
        let s = JointState::new(Obs(14), Obs(11));
        let out = step(s, Move::Right, Move::Up, &spec);
        assert_eq!(out.reward, 10.0);
        assert!(out.terminal);

        let out = step(s, Move::Right, Move::Down, &spec);
        assert_eq!(out.reward, 1.0);
        assert!(out.terminal);
        assert_eq!(out.next, JointState::new(Obs(15), Obs(7)));

        let out = step(s, Move::Left, Move::Down, &spec);
        assert_eq!(out.reward, 0.0);
        assert!(!out.terminal);
    }

    #[test]
    fn reset_never_starts_on_goal() {
        let spec = GridSpec::new(2, Obs(3), 1.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let s = reset(&mut rng, &spec);
            assert_ne!(s.o1, spec.goal());
            assert_ne!(s.o2, spec.goal());
            assert!(s.o1.index() < 4 && s.o2.index() < 4);
        }
    }

    #[test]
    fn reset_is_uniform_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};

        // Joint distribution over the 9 start pairs of a 2x2 grid with goal 3.
        let spec = GridSpec::new(2, Obs(3), 1.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(20240811);
        let trials = 100_000usize;
        let mut counts = [[0u64; 3]; 3];
        for _ in 0..trials {
            let s = reset(&mut rng, &spec);
            counts[s.o1.index()][s.o2.index()] += 1;
        }
        let expected = trials as f64 / 9.0;
        let chi2: f64 = counts
            .iter()
            .flatten()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        let crit = ChiSquared::new(8.0).unwrap().inverse_cdf(0.99);
        assert!(chi2 < crit, "chi2 {chi2} >= critical {crit}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(GridSpec::new(1, Obs(0), 1.0, 10.0).is_err());
        assert!(GridSpec::new(4, Obs(16), 1.0, 10.0).is_err());
        assert!(GridSpec::new(4, Obs(0), 10.0, 1.0).is_err());
        assert!(GridSpec::new(4, Obs(0), 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn transition_stays_in_bounds(cell in 0u16..64, mv in 0usize..5, side in 2u16..=8) {
            prop_assume!(cell < side * side);
            let spec = GridSpec::new(side, Obs(0), 1.0, 10.0).unwrap();
            let next = transition(Obs(cell), Move::from_index(mv), &spec);
            prop_assert!(next.index() < spec.cells());
        }

        #[test]
        fn unclamped_moves_are_reversible(cell in 0u16..64, side in 2u16..=8) {
            prop_assume!(cell < side * side);
            let spec = GridSpec::new(side, Obs(0), 1.0, 10.0).unwrap();
            let pairs = [
                (Move::Up, Move::Down),
                (Move::Down, Move::Up),
                (Move::Left, Move::Right),
                (Move::Right, Move::Left),
            ];
            for (fwd, back) in pairs {
                let there = transition(Obs(cell), fwd, &spec);
                if there != Obs(cell) {
                    prop_assert_eq!(transition(there, back, &spec), Obs(cell));
                }
            }
        }

        #[test]
        fn reward_is_exactly_one_of_three_values(o1 in 0u16..16, o2 in 0u16..16, a in 0usize..25) {
            let spec = spec4();
            let (m1, m2) = joint_moves(a);
            let out = step(JointState::new(Obs(o1), Obs(o2)), m1, m2, &spec);
            prop_assert!(out.reward == 0.0 || out.reward == 1.0 || out.reward == 10.0);
            prop_assert_eq!(out.terminal, out.reward > 0.0);
            prop_assert_eq!(out.terminal, spec.is_terminal(out.next));
            // Determinism: repeating the step gives identical output.
            let again = step(JointState::new(Obs(o1), Obs(o2)), m1, m2, &spec);
            prop_assert_eq!(out, again);
        }
    }
}
