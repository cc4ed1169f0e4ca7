//! Value-based aggregation of the observation space.
//!
//! The pipeline: extract per-observation marginal values from a centralized
//! Q-table, cluster observations by value with an exact 1-D k-median, turn
//! the partition into a communication policy, and certify the cluster radius
//! that drives the return-gap bound. A weighted Lloyd quantizer provides the
//! distortion-based (task-agnostic) counterpart.

mod kmedian;
mod lloyd;

pub use kmedian::{kmedian_1d, kmedian_1d_weighted, ValueClusters};
pub use lloyd::{grid_points, lloyd_quantize, LloydResult};

use crate::gridworld::GridSpec;
use crate::qcore::CentralQTable;
use crate::schemes::CommPolicy;
use crate::{Error, Result};

const DIST_TOL: f64 = 1e-9;

/// A disjoint cover of the observation space by dense cluster ids
/// `0..num_clusters`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    num_clusters: usize,
}

impl Partition {
    /// Build from per-observation cluster ids; ids must be dense (every id
    /// in `0..max+1` used at least once).
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::InvalidPartition("empty assignment".into()));
        }
        let num_clusters = assignment.iter().max().unwrap() + 1;
        let mut seen = vec![false; num_clusters];
        for &c in &assignment {
            seen[c] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!(
                "cluster ids not dense: id {missing} unused"
            )));
        }
        Ok(Partition { assignment, num_clusters })
    }

    /// Every observation in its own cluster.
    pub fn identity(n: usize) -> Self {
        Partition { assignment: (0..n).collect(), num_clusters: n }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    #[inline]
    pub fn cluster_of(&self, o: usize) -> usize {
        self.assignment[o]
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == cluster)
            .map(|(o, _)| o)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_clusters];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

pub(crate) fn validate_distribution(dist: &[f64]) -> Result<()> {
    if dist.iter().any(|&p| p < 0.0) {
        return Err(Error::InvalidDistribution("negative probability mass".into()));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > DIST_TOL {
        return Err(Error::InvalidDistribution(format!("mass sums to {sum}, expected 1")));
    }
    Ok(())
}

/// The reset distribution: uniform over all non-goal cells.
pub fn uniform_non_goal(spec: &GridSpec) -> Vec<f64> {
    let mut dist = vec![1.0 / (spec.cells() - 1) as f64; spec.cells()];
    dist[spec.goal().index()] = 0.0;
    dist
}

/// Per-observation marginal value: the greedy joint value averaged over the
/// other agent's observation distribution,
/// `v[o] = sum_{o'} max_{m1,m2} Q[o][o'][m1][m2] * p(o')`.
pub fn marginal_value(q: &CentralQTable, obs_dist: &[f64]) -> Result<Vec<f64>> {
    if obs_dist.len() != q.cells() {
        return Err(Error::InvalidDistribution(format!(
            "distribution over {} cells, table has {}",
            obs_dist.len(),
            q.cells()
        )));
    }
    validate_distribution(obs_dist)?;
    let v = (0..q.cells())
        .map(|o| {
            obs_dist
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(other, &p)| q.max_joint(o, other) * p)
                .sum()
        })
        .collect();
    Ok(v)
}

/// Median of each cluster's values. Even-sized clusters take the midpoint of
/// the two middle values, which makes the certified radius deterministic.
pub fn cluster_medians(values: &[f64], partition: &Partition) -> Vec<f64> {
    assert_eq!(values.len(), partition.len());
    (0..partition.num_clusters())
        .map(|k| {
            let mut member_values: Vec<f64> =
                partition.members(k).map(|o| values[o]).collect();
            member_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = member_values.len();
            if n % 2 == 1 {
                member_values[n / 2]
            } else {
                0.5 * (member_values[n / 2 - 1] + member_values[n / 2])
            }
        })
        .collect()
}

/// The deterministic communication policy induced by a partition: message =
/// cluster id, at the minimal rate that fits all clusters.
pub fn comm_policy_from_partition(partition: &Partition) -> CommPolicy {
    let rate = crate::schemes::ceil_log2(partition.num_clusters());
    CommPolicy::from_partition(partition, rate).expect("minimal rate always fits")
}

/// Conditional distribution `p(observation | message)` consistent with a
/// communication policy: each message's support lies inside its preimage.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDist {
    rows: Vec<Vec<f64>>,
}

impl ConditionalDist {
    /// Validates support consistency and per-row normalization; messages
    /// with an empty preimage must have an all-zero row.
    pub fn new(rows: Vec<Vec<f64>>, comm: &CommPolicy) -> Result<Self> {
        if rows.len() != comm.message_space() {
            return Err(Error::InvalidDistribution(format!(
                "{} rows for a {}-message alphabet",
                rows.len(),
                comm.message_space()
            )));
        }
        for (c, row) in rows.iter().enumerate() {
            if row.len() != comm.cells() {
                return Err(Error::InvalidDistribution(format!(
                    "row {c} has {} entries, expected {}",
                    row.len(),
                    comm.cells()
                )));
            }
            if row.iter().any(|&p| p < 0.0) {
                return Err(Error::InvalidDistribution(format!("row {c} has negative mass")));
            }
            let sum: f64 = row.iter().sum();
            let preimage_size =
                (0..comm.cells()).filter(|&o| comm.message(crate::gridworld::Obs(o as u16)) == c).count();
            if preimage_size == 0 {
                if sum != 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "message {c} has no preimage but carries mass {sum}"
                    )));
                }
                continue;
            }
            if (sum - 1.0).abs() > DIST_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "row {c} sums to {sum}, expected 1"
                )));
            }
            for (o, &p) in row.iter().enumerate() {
                if p > 0.0 && comm.message(crate::gridworld::Obs(o as u16)) != c {
                    return Err(Error::InvalidDistribution(format!(
                        "mass on observation {o} outside the preimage of message {c}"
                    )));
                }
            }
        }
        Ok(ConditionalDist { rows })
    }

    /// Uniform over each message's preimage.
    pub fn uniform(comm: &CommPolicy) -> Self {
        let mut rows = vec![vec![0.0; comm.cells()]; comm.message_space()];
        let mut sizes = vec![0usize; comm.message_space()];
        for o in 0..comm.cells() {
            sizes[comm.message(crate::gridworld::Obs(o as u16))] += 1;
        }
        for o in 0..comm.cells() {
            let c = comm.message(crate::gridworld::Obs(o as u16));
            rows[c][o] = 1.0 / sizes[c] as f64;
        }
        ConditionalDist { rows }
    }

    /// Bayes posterior of an observation distribution given the message.
    /// Messages whose preimage carries no mass fall back to uniform over
    /// the preimage.
    pub fn from_obs_dist(comm: &CommPolicy, obs_dist: &[f64]) -> Result<Self> {
        validate_distribution(obs_dist)?;
        let msg_mass = comm.message_distribution(obs_dist);
        let mut rows = vec![vec![0.0; comm.cells()]; comm.message_space()];
        let mut sizes = vec![0usize; comm.message_space()];
        for o in 0..comm.cells() {
            sizes[comm.message(crate::gridworld::Obs(o as u16))] += 1;
        }
        for o in 0..comm.cells() {
            let c = comm.message(crate::gridworld::Obs(o as u16));
            rows[c][o] = if msg_mass[c] > 0.0 {
                obs_dist[o] / msg_mass[c]
            } else {
                1.0 / sizes[c] as f64
            };
        }
        Ok(ConditionalDist { rows })
    }

    pub fn row(&self, message: usize) -> &[f64] {
        &self.rows[message]
    }
}

/// Aggregated value table `V[o][message] = E[V(o, o') | message]`, the
/// conditional expectation of the joint value over each cluster.
pub fn aggregated_value(
    v_joint: &[f64],
    comm: &CommPolicy,
    cond: &ConditionalDist,
) -> Result<Vec<f64>> {
    let cells = comm.cells();
    if v_joint.len() != cells * cells {
        return Err(Error::InvalidArgument(format!(
            "joint value table has {} entries, expected {}",
            v_joint.len(),
            cells * cells
        )));
    }
    let msgs = comm.message_space();
    let mut out = vec![0.0; cells * msgs];
    for o in 0..cells {
        for c in 0..msgs {
            out[o * msgs + c] = cond
                .row(c)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(other, &p)| v_joint[o * cells + other] * p)
                .sum();
        }
    }
    Ok(out)
}

/// Best-case marginal value: the greedy joint value of an observation under
/// the most favourable partner position, `v[o] = max_{o'} max_{m1,m2}
/// Q[o][o'][m1][m2]`.
///
/// Unlike the expectation form, averaging over partner positions cannot
/// blur the distinctions that matter close to the goal: under the
/// rendezvous reward this is exactly the distance profile
/// `C2 * gamma^(d-1)`, whose value gaps shrink with distance, so a k-median
/// over it resolves the near field finely — in particular the
/// goal-adjacent ring becomes its own message class, which is what lets
/// the distributed learners synchronize their entry.
pub fn optimistic_marginal_value(q: &CentralQTable) -> Vec<f64> {
    (0..q.cells())
        .map(|o| {
            (0..q.cells())
                .map(|other| q.max_joint(o, other))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Message-aggregated per-agent action values: for each own observation,
/// received message and own move, the conditional expectation over the
/// message's cluster of the best-response joint value,
/// `Q[o][c][m] = E[ max_{m'} Q(o, o', m, m') | message c ]`.
///
/// This is the table a distributed learner starts from when warm-started
/// with centralized knowledge.
pub fn aggregated_agent_q(
    q: &CentralQTable,
    comm: &CommPolicy,
    cond: &ConditionalDist,
) -> Result<crate::qcore::AgentQTable> {
    let cells = q.cells();
    if comm.cells() != cells {
        return Err(Error::InvalidArgument(format!(
            "comm policy over {} cells, table has {}",
            comm.cells(),
            cells
        )));
    }
    let mut out = crate::qcore::AgentQTable::new(cells, comm.message_space());
    for o in 0..cells {
        for c in 0..comm.message_space() {
            for (other, &p) in cond.row(c).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for m in crate::gridworld::Move::ALL {
                    let best_reply = crate::gridworld::Move::ALL
                        .into_iter()
                        .map(|mj| q.get(o, other, m, mj))
                        .fold(f64::NEG_INFINITY, f64::max);
                    *out.entry_mut(o, c, m.index()) += p * best_reply;
                }
            }
        }
    }
    Ok(out)
}

/// The certified cluster radius: twice the largest deviation of any member's
/// value from its cluster median.
pub fn epsilon_of_partition(values: &[f64], partition: &Partition) -> f64 {
    let medians = cluster_medians(values, partition);
    let mut worst: f64 = 0.0;
    for (o, &c) in partition.assignment().iter().enumerate() {
        worst = worst.max((values[o] - medians[c]).abs());
    }
    2.0 * worst
}

/// Worst-case return gap of acting on the aggregated state space:
/// `2 * epsilon / (1 - gamma)^2`.
pub fn return_gap_bound(epsilon: f64, gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} not in [0,1)")));
    }
    Ok(2.0 * epsilon / ((1.0 - gamma) * (1.0 - gamma)))
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(dist: &[f64]) -> Result<f64> {
    validate_distribution(dist)?;
    Ok(dist.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum())
}

/// Compression ratio `ceil(H(observation)) : ceil(H(message))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionRatio {
    pub obs_bits: u32,
    pub msg_bits: u32,
}

impl std::fmt::Display for CompressionRatio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.obs_bits, self.msg_bits)
    }
}

fn ceil_bits(h: f64) -> u32 {
    // Guard against entropies that are integral up to rounding noise.
    (h - 1e-9).ceil().max(0.0) as u32
}

pub fn compression_ratio(obs_dist: &[f64], msg_dist: &[f64]) -> Result<CompressionRatio> {
    let h_obs = entropy(obs_dist)?;
    let h_msg = entropy(msg_dist)?;
    Ok(CompressionRatio { obs_bits: ceil_bits(h_obs), msg_bits: ceil_bits(h_msg) })
}
