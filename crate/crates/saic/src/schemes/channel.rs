//! The rate-limited inter-agent bit pipe and deterministic communication
//! policies over it.

use crate::aggregation::Partition;
use crate::gridworld::Obs;
use crate::{Error, Result};

/// Smallest `R` with `2^R >= n` (0 for `n <= 1`).
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// An error-free channel carrying `rate_bits` bits per step per direction;
/// delivery is instantaneous, oversized messages are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channel {
    rate_bits: u32,
}

impl Channel {
    pub fn new(rate_bits: u32) -> Self {
        Channel { rate_bits }
    }

    pub fn rate_bits(&self) -> u32 {
        self.rate_bits
    }

    /// Alphabet size `2^R`.
    pub fn alphabet(&self) -> usize {
        1usize << self.rate_bits
    }

    /// Deliver a message, verifying it fits the rate budget.
    pub fn send(&self, message: usize) -> Result<usize> {
        if message >= self.alphabet() {
            return Err(Error::MessageOverRate { message, rate_bits: self.rate_bits });
        }
        Ok(message)
    }
}

/// A deterministic map from an agent's observation to a message id that
/// fits in `rate_bits` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommPolicy {
    table: Vec<usize>,
    rate_bits: u32,
}

impl CommPolicy {
    pub fn new(table: Vec<usize>, rate_bits: u32) -> Result<Self> {
        let alphabet = 1usize << rate_bits;
        if let Some(&bad) = table.iter().find(|&&m| m >= alphabet) {
            return Err(Error::MessageOverRate { message: bad, rate_bits });
        }
        Ok(CommPolicy { table, rate_bits })
    }

    /// Each observation is its own message: `R = ceil(log2 cells)`.
    pub fn identity(cells: usize) -> Self {
        CommPolicy { table: (0..cells).collect(), rate_bits: ceil_log2(cells) }
    }

    /// A zero-rate channel: every observation maps to the single message 0.
    pub fn constant(cells: usize) -> Self {
        CommPolicy { table: vec![0; cells], rate_bits: 0 }
    }

    /// Message = cluster id, under an explicit rate budget.
    pub fn from_partition(partition: &Partition, rate_bits: u32) -> Result<Self> {
        let alphabet = 1usize << rate_bits;
        if partition.num_clusters() > alphabet {
            return Err(Error::InvalidPartition(format!(
                "{} clusters exceed the {alphabet}-message alphabet of a {rate_bits}-bit channel",
                partition.num_clusters()
            )));
        }
        Ok(CommPolicy { table: partition.assignment().to_vec(), rate_bits })
    }

    /// Number of observations the policy is defined on.
    pub fn cells(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn message(&self, o: Obs) -> usize {
        self.table[o.index()]
    }

    pub fn rate_bits(&self) -> u32 {
        self.rate_bits
    }

    /// Alphabet size `2^R` — the message-axis width of agent tables.
    pub fn message_space(&self) -> usize {
        1usize << self.rate_bits
    }

    /// Distribution of messages induced by an observation distribution.
    pub fn message_distribution(&self, obs_dist: &[f64]) -> Vec<f64> {
        let mut dist = vec![0.0; self.message_space()];
        for (o, &p) in obs_dist.iter().enumerate() {
            dist[self.table[o]] += p;
        }
        dist
    }

    /// Number of distinct messages actually used.
    pub fn messages_in_use(&self) -> usize {
        let mut seen = vec![false; self.message_space()];
        for &m in &self.table {
            seen[m] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }
}
