//! Exact 1-D k-median by dynamic programming over sorted values.
//!
//! An optimal k-median clustering of scalars partitions the sorted sequence
//! into contiguous segments, so a segment DP finds the global optimum in
//! `O(k n^2)`. The DP runs over runs of exactly-equal values, which both
//! guarantees that ties share a cluster and collapses clusters that would
//! come out empty.

use crate::aggregation::Partition;
use crate::{Error, Result};

/// A value-based clustering: the cover itself, the per-cluster value
/// medians (clusters ordered by ascending value) and the optimal total
/// absolute deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueClusters {
    pub partition: Partition,
    pub medians: Vec<f64>,
    pub cost: f64,
}

/// Globally optimal partition of `values` into at most `k` clusters
/// minimizing the summed absolute deviation from cluster medians.
///
/// Equal values always land in the same cluster; at most
/// `min(k, #distinct values)` clusters come back. On cost ties the DP keeps
/// the boundary that comes earliest in sorted order.
pub fn kmedian_1d(values: &[f64], k: usize) -> Result<ValueClusters> {
    if k < 1 {
        return Err(Error::InvalidArgument("cluster count must be >= 1".into()));
    }
    if values.is_empty() {
        return Err(Error::InvalidArgument("no values to cluster".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("values must be finite".into()));
    }

    // Sort points, remembering where each came from.
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();

    // Runs of exactly-equal values; DP boundaries may only fall between runs.
    let mut blocks: Vec<(usize, usize)> = Vec::new(); // inclusive point ranges
    let mut start = 0;
    for i in 1..sorted.len() {
        if sorted[i] != sorted[start] {
            blocks.push((start, i - 1));
            start = i;
        }
    }
    blocks.push((start, sorted.len() - 1));
    let m = blocks.len();
    let k_eff = k.min(m);

    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    prefix.push(0.0);
    for &v in &sorted {
        prefix.push(prefix.last().unwrap() + v);
    }
    // Cost of one cluster covering sorted points [i..=j]: upper-half sum
    // minus lower-half sum, which equals the absolute deviation from any
    // median of the segment.
    let seg_cost = |i: usize, j: usize| -> f64 {
        let len = j - i + 1;
        let half = len / 2;
        (prefix[j + 1] - prefix[j + 1 - half]) - (prefix[i + half] - prefix[i])
    };
    let block_cost =
        |bi: usize, bj: usize| -> f64 { seg_cost(blocks[bi].0, blocks[bj].1) };

    // f[c][j]: optimal cost of covering blocks 0..=j with c+1 clusters.
    let mut cost = vec![vec![f64::INFINITY; m]; k_eff];
    let mut back = vec![vec![0usize; m]; k_eff];
    for j in 0..m {
        cost[0][j] = block_cost(0, j);
    }
    for c in 1..k_eff {
        for j in c..m {
            let mut best = f64::INFINITY;
            let mut best_t = c - 1;
            for t in (c - 1)..j {
                let candidate = cost[c - 1][t] + block_cost(t + 1, j);
                if candidate < best {
                    best = candidate;
                    best_t = t;
                }
            }
            cost[c][j] = best;
            back[c][j] = best_t;
        }
    }

    // Recover cluster boundaries as block ranges, left to right.
    let mut ranges = vec![(0usize, 0usize); k_eff];
    let mut j = m - 1;
    for c in (0..k_eff).rev() {
        let t = if c == 0 { 0 } else { back[c][j] + 1 };
        ranges[c] = (t, j);
        if c > 0 {
            j = back[c][j];
        }
    }

    // Clusters are numbered by ascending value.
    let mut assignment_sorted = vec![0usize; sorted.len()];
    let mut medians = Vec::with_capacity(k_eff);
    for (cluster, &(bi, bj)) in ranges.iter().enumerate() {
        let (lo, hi) = (blocks[bi].0, blocks[bj].1);
        for slot in assignment_sorted.iter_mut().take(hi + 1).skip(lo) {
            *slot = cluster;
        }
        let len = hi - lo + 1;
        medians.push(if len % 2 == 1 {
            sorted[lo + len / 2]
        } else {
            0.5 * (sorted[lo + len / 2 - 1] + sorted[lo + len / 2])
        });
    }

    let mut assignment = vec![0usize; values.len()];
    for (pos, &orig) in order.iter().enumerate() {
        assignment[orig] = assignment_sorted[pos];
    }
    let partition = Partition::new(assignment)?;
    Ok(ValueClusters { partition, medians, cost: cost[k_eff - 1][m - 1] })
}

/// Weighted exact 1-D k-median: like [`kmedian_1d`] but each point counts
/// with a nonnegative weight.
///
/// Solved by integral replication into the unweighted DP: weights are
/// quantized to `1 + round(w * 1024 / max_w)` copies per point, so every
/// point stays represented and relative weights survive to about three
/// decimal places. Replicas of a point share its value and therefore always
/// land in one cluster.
pub fn kmedian_1d_weighted(values: &[f64], weights: &[f64], k: usize) -> Result<ValueClusters> {
    if weights.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} values",
            weights.len(),
            values.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument("weights must be finite and >= 0".into()));
    }
    let max_w = weights.iter().cloned().fold(0.0f64, f64::max);
    if max_w == 0.0 {
        return kmedian_1d(values, k);
    }

    let mut replicated = Vec::new();
    let mut owner = Vec::new();
    for (i, (&v, &w)) in values.iter().zip(weights).enumerate() {
        let copies = 1 + (w / max_w * 1024.0).round() as usize;
        for _ in 0..copies {
            replicated.push(v);
            owner.push(i);
        }
    }
    let clusters = kmedian_1d(&replicated, k)?;
    let mut assignment = vec![0usize; values.len()];
    for (pos, &orig) in owner.iter().enumerate() {
        assignment[orig] = clusters.partition.cluster_of(pos);
    }
    let partition = Partition::new(assignment)?;
    Ok(ValueClusters { partition, medians: clusters.medians, cost: clusters.cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Minimum cost over every assignment of points to at most `k` labels,
    /// scoring each cluster around its own median. Exponential; test-only.
    fn brute_force_cost(values: &[f64], k: usize) -> f64 {
        fn cluster_cost(mut vals: Vec<f64>) -> f64 {
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = vals.len();
            let med = if n % 2 == 1 {
                vals[n / 2]
            } else {
                0.5 * (vals[n / 2 - 1] + vals[n / 2])
            };
            vals.iter().map(|v| (v - med).abs()).sum()
        }
        let n = values.len();
        let mut best = f64::INFINITY;
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut labels = vec![0usize; n];
            let mut c = code;
            for l in labels.iter_mut() {
                *l = c % k;
                c /= k;
            }
            let cost: f64 = (0..k)
                .map(|cl| {
                    let members: Vec<f64> = (0..n)
                        .filter(|&i| labels[i] == cl)
                        .map(|i| values[i])
                        .collect();
                    if members.is_empty() {
                        0.0
                    } else {
                        cluster_cost(members)
                    }
                })
                .sum();
            if cost < best {
                best = cost;
            }
        }
        best
    }

    #[test]
    fn all_equal_values_collapse_to_one_cluster() {
        let out = kmedian_1d(&[2.5; 6], 3).unwrap();
        assert_eq!(out.partition.num_clusters(), 1);
        assert_eq!(out.cost, 0.0);
        assert_eq!(out.medians, vec![2.5]);
    }

    #[test]
    fn separable_pairs_split_cleanly() {
        let out = kmedian_1d(&[0.0, 0.0, 10.0, 10.0], 2).unwrap();
        assert_eq!(out.partition.num_clusters(), 2);
        assert_eq!(out.cost, 0.0);
        assert_eq!(out.partition.assignment(), &[0, 0, 1, 1]);
        assert_eq!(out.medians, vec![0.0, 10.0]);
    }

    #[test]
    fn eight_values_three_clusters_match_brute_force() {
        let values = [3.0, 11.0, 1.5, 7.0, 7.5, 20.0, 2.0, 12.5];
        let out = kmedian_1d(&values, 3).unwrap();
        assert_eq!(out.cost, brute_force_cost(&values, 3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kmedian_1d(&[1.0], 0).is_err());
        assert!(kmedian_1d(&[], 2).is_err());
        assert!(kmedian_1d(&[1.0, f64::NAN], 2).is_err());
        assert!(kmedian_1d_weighted(&[1.0, 2.0], &[0.5], 2).is_err());
        assert!(kmedian_1d_weighted(&[1.0, 2.0], &[0.5, -0.1], 2).is_err());
    }

    #[test]
    fn weighting_moves_the_cut() {
        // Four well-separated levels, one cluster budget short. Unweighted,
        // the cheapest merge is the small two-point gap; with the weight on
        // those points boosted, the cut moves there and the heavier small
        // gap splits off.
        let values = [0.0, 0.0, 0.0, 10.0, 11.0, 30.0, 30.0, 30.0];
        let unweighted = kmedian_1d(&values, 3).unwrap();
        assert_eq!(unweighted.partition.cluster_of(3), unweighted.partition.cluster_of(4));

        let weights = [0.01, 0.01, 0.01, 1.0, 1.0, 0.01, 0.01, 0.01];
        let weighted = kmedian_1d_weighted(&values, &weights, 3).unwrap();
        assert_ne!(weighted.partition.cluster_of(3), weighted.partition.cluster_of(4));
        // Still a disjoint cover with ties co-clustered.
        assert_eq!(weighted.partition.cluster_sizes().iter().sum::<usize>(), values.len());
        assert_eq!(weighted.partition.cluster_of(0), weighted.partition.cluster_of(2));
    }

    #[test]
    fn uniform_weights_match_unweighted() {
        let values = [3.0, 11.0, 1.5, 7.0, 7.5, 20.0, 2.0, 12.5];
        let a = kmedian_1d(&values, 3).unwrap();
        let b = kmedian_1d_weighted(&values, &[0.125; 8], 3).unwrap();
        assert_eq!(a.partition, b.partition);
    }

    #[test]
    fn reported_cost_matches_reported_medians() {
        let values = [4.0, -1.0, 0.5, 9.0, 9.0, 3.25, -7.5];
        let out = kmedian_1d(&values, 3).unwrap();
        let recomputed: f64 = values
            .iter()
            .enumerate()
            .map(|(o, v)| (v - out.medians[out.partition.cluster_of(o)]).abs())
            .sum();
        assert!((out.cost - recomputed).abs() < 1e-12);
    }

    proptest! {
        // Dyadic values (multiples of 0.5) keep every cluster cost exact in
        // binary floating point, so DP and brute force must agree bit for bit.
        #[test]
        fn dp_matches_brute_force(
            raw in proptest::collection::vec(-100i32..100, 2..10),
            k in 1usize..=3,
        ) {
            let values: Vec<f64> = raw.iter().map(|&x| x as f64 * 0.5).collect();
            let out = kmedian_1d(&values, k).unwrap();
            prop_assert_eq!(out.cost, brute_force_cost(&values, k));
        }

        #[test]
        fn partition_is_a_disjoint_cover_with_cotied_values(
            raw in proptest::collection::vec(-20i32..20, 1..40),
            k in 1usize..=8,
        ) {
            let values: Vec<f64> = raw.iter().map(|&x| x as f64).collect();
            let out = kmedian_1d(&values, k).unwrap();
            // Cover: every observation assigned exactly once by construction;
            // sizes sum to the total.
            let sizes = out.partition.cluster_sizes();
            prop_assert_eq!(sizes.iter().sum::<usize>(), values.len());
            prop_assert!(sizes.iter().all(|&s| s > 0));
            prop_assert!(out.partition.num_clusters() <= k);
            // Exact ties share a cluster.
            for i in 0..values.len() {
                for j in 0..values.len() {
                    if values[i] == values[j] {
                        prop_assert_eq!(
                            out.partition.cluster_of(i),
                            out.partition.cluster_of(j)
                        );
                    }
                }
            }
        }
    }
}
