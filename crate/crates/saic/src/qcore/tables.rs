//! Dense action-value and visit-count tables.

use crate::gridworld::JOINT_MOVES;
use crate::gridworld::Move;

/// Dense Q-table over an arbitrary encoded state space with the 25 joint
/// moves as actions. Backs both the centralized learner and the hybrid
/// compressed controller.
#[derive(Debug, Clone, PartialEq)]
pub struct JointQ {
    states: usize,
    q: Vec<f64>,
}

impl JointQ {
    pub fn new(states: usize) -> Self {
        JointQ { states, q: vec![0.0; states * JOINT_MOVES] }
    }

    #[inline]
    pub fn states(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn row(&self, state: usize) -> &[f64] {
        &self.q[state * JOINT_MOVES..(state + 1) * JOINT_MOVES]
    }

    #[inline]
    pub fn entry_mut(&mut self, state: usize, action: usize) -> &mut f64 {
        &mut self.q[state * JOINT_MOVES + action]
    }

    #[inline]
    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.q[state * JOINT_MOVES + action]
    }

    /// Max over the 25 joint moves.
    pub fn max_row(&self, state: usize) -> f64 {
        self.row(state).iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy joint move, lowest index on ties.
    pub fn argmax_row(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for (a, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.q
    }
}

/// Centralized action-value table `Q[o1][o2][m1][m2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralQTable {
    cells: usize,
    pub(crate) table: JointQ,
}

impl CentralQTable {
    pub fn new(cells: usize) -> Self {
        CentralQTable { cells, table: JointQ::new(cells * cells) }
    }

    pub(crate) fn from_joint(cells: usize, table: JointQ) -> Self {
        assert_eq!(table.states(), cells * cells);
        CentralQTable { cells, table }
    }

    /// Number of cells `N^2` per observation axis.
    #[inline]
    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn state_index(&self, o1: usize, o2: usize) -> usize {
        o1 * self.cells + o2
    }

    #[inline]
    pub fn get(&self, o1: usize, o2: usize, m1: Move, m2: Move) -> f64 {
        self.table.get(self.state_index(o1, o2), crate::gridworld::joint_index(m1, m2))
    }

    pub fn set(&mut self, o1: usize, o2: usize, m1: Move, m2: Move, v: f64) {
        let s = self.state_index(o1, o2);
        *self.table.entry_mut(s, crate::gridworld::joint_index(m1, m2)) = v;
    }

    /// Max over the 25 joint moves at `(o1, o2)`.
    #[inline]
    pub fn max_joint(&self, o1: usize, o2: usize) -> f64 {
        self.table.max_row(self.state_index(o1, o2))
    }

    /// Greedy joint-move index at `(o1, o2)`, lowest index on ties.
    #[inline]
    pub fn argmax_joint(&self, o1: usize, o2: usize) -> usize {
        self.table.argmax_row(self.state_index(o1, o2))
    }

    /// `V[o1][o2] = max_{m1,m2} Q[o1][o2][m1][m2]`, flattened row-major.
    pub fn greedy_value(&self) -> Vec<f64> {
        (0..self.cells * self.cells).map(|s| self.table.max_row(s)).collect()
    }

    pub fn raw(&self) -> &[f64] {
        self.table.values()
    }

    pub fn raw_mut(&mut self) -> &mut [f64] {
        self.table.values_mut()
    }
}

/// Per-agent action-value table `Q[own obs][received message][move]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentQTable {
    cells: usize,
    messages: usize,
    q: Vec<f64>,
}

impl AgentQTable {
    pub fn new(cells: usize, messages: usize) -> Self {
        AgentQTable { cells, messages, q: vec![0.0; cells * messages * Move::COUNT] }
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn messages(&self) -> usize {
        self.messages
    }

    #[inline]
    pub fn state_index(&self, obs: usize, msg: usize) -> usize {
        obs * self.messages + msg
    }

    #[inline]
    pub fn row(&self, obs: usize, msg: usize) -> &[f64] {
        let s = self.state_index(obs, msg) * Move::COUNT;
        &self.q[s..s + Move::COUNT]
    }

    #[inline]
    pub fn entry_mut(&mut self, obs: usize, msg: usize, mv: usize) -> &mut f64 {
        let s = self.state_index(obs, msg) * Move::COUNT;
        &mut self.q[s + mv]
    }

    pub fn max_row(&self, obs: usize, msg: usize) -> f64 {
        self.row(obs, msg).iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy move, lowest index on ties.
    pub fn argmax_row(&self, obs: usize, msg: usize) -> Move {
        let row = self.row(obs, msg);
        let mut best = 0;
        for (a, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = a;
            }
        }
        Move::from_index(best)
    }

    pub fn raw(&self) -> &[f64] {
        &self.q
    }

    pub fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.q
    }
}

/// Visit counts paired with a Q-table: per-(state, action) counts plus a
/// per-state total, both starting at zero and only ever incremented.
#[derive(Debug, Clone)]
pub struct VisitCounts {
    actions: usize,
    counts: Vec<u32>,
    totals: Vec<u32>,
}

impl VisitCounts {
    pub fn new(states: usize, actions: usize) -> Self {
        VisitCounts { actions, counts: vec![0; states * actions], totals: vec![0; states] }
    }

    #[inline]
    pub fn row(&self, state: usize) -> &[u32] {
        &self.counts[state * self.actions..(state + 1) * self.actions]
    }

    #[inline]
    pub fn total(&self, state: usize) -> u32 {
        self.totals[state]
    }

    #[inline]
    pub fn increment(&mut self, state: usize, action: usize) {
        self.counts[state * self.actions + action] += 1;
        self.totals[state] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_value_of_zero_table_is_zero() {
        let q = CentralQTable::new(9);
        assert!(q.greedy_value().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn greedy_value_sees_single_positive_entry() {
        let mut q = CentralQTable::new(4);
        q.set(1, 2, Move::Up, Move::Stop, 3.5);
        let v = q.greedy_value();
        for o1 in 0..4 {
            for o2 in 0..4 {
                let expect = if (o1, o2) == (1, 2) { 3.5 } else { 0.0 };
                assert_eq!(v[o1 * 4 + o2], expect);
            }
        }
    }

    #[test]
    fn agent_table_round_trips_entries() {
        let mut q = AgentQTable::new(9, 4);
        *q.entry_mut(3, 2, Move::Left.index()) = -1.5;
        assert_eq!(q.row(3, 2)[Move::Left.index()], -1.5);
        assert_eq!(q.argmax_row(3, 2), Move::Right); // all others zero, ties -> lowest index
        *q.entry_mut(3, 2, Move::Down.index()) = 2.0;
        assert_eq!(q.argmax_row(3, 2), Move::Down);
        assert_eq!(q.max_row(3, 2), 2.0);
    }

    #[test]
    fn visit_counts_track_rows_and_totals() {
        let mut c = VisitCounts::new(3, 5);
        c.increment(1, 4);
        c.increment(1, 4);
        c.increment(1, 0);
        assert_eq!(c.row(1), &[1, 0, 0, 0, 2]);
        assert_eq!(c.total(1), 3);
        assert_eq!(c.total(0), 0);
    }
}
