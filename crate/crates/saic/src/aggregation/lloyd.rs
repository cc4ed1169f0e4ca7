//! Weighted Lloyd quantization of 2-D points under squared euclidean
//! distortion — the task-agnostic quantizer behind the conventional
//! compression baseline.

use rand::distributions::WeightedIndex;
use rand::prelude::*;

use crate::aggregation::{validate_distribution, Partition};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const RESTARTS: usize = 100;

/// Outcome of a Lloyd run.
#[derive(Debug, Clone)]
pub struct LloydResult {
    pub partition: Partition,
    /// Final centroid per cluster, in cluster-id order.
    pub centroids: Vec<(f64, f64)>,
    /// Final weighted squared-distance cost.
    pub cost: f64,
    /// Cost after each assignment phase; non-increasing.
    pub cost_history: Vec<f64>,
}

/// (row, col) coordinates of every cell of an `side x side` grid, in cell
/// index order.
pub fn grid_points(side: u16) -> Vec<(f64, f64)> {
    (0..side as usize * side as usize)
        .map(|c| ((c / side as usize) as f64, (c % side as usize) as f64))
        .collect()
}

#[inline]
fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dr = a.0 - b.0;
    let dc = a.1 - b.1;
    dr * dr + dc * dc
}

/// Draw `k` distinct point indices, by weight while positive mass remains
/// and uniformly afterwards.
fn sample_initial_centroids<R: Rng>(
    points: &[(f64, f64)],
    weights: &[f64],
    k: usize,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    let mut remaining: Vec<usize> = (0..points.len()).collect();
    let mut chosen = Vec::with_capacity(k);
    while chosen.len() < k {
        let w: Vec<f64> = remaining.iter().map(|&i| weights[i]).collect();
        let pick = match WeightedIndex::new(&w) {
            Ok(dist) => dist.sample(rng),
            // All remaining mass is zero: fall back to uniform.
            Err(_) => rng.gen_range(0..remaining.len()),
        };
        chosen.push(points[remaining[pick]]);
        remaining.swap_remove(pick);
    }
    chosen
}

/// Weighted Lloyd quantization: the best of 100 restarts, each iterating
/// assignment (nearest centroid) and update (weighted mean) until the
/// assignment stabilizes or 100 iterations pass. Each restart converges to
/// a local optimum of the weighted squared-distance cost; restarting is
/// what reliably separates the heavy regions of lopsided distributions.
pub fn lloyd_quantize<R: Rng>(
    points: &[(f64, f64)],
    weights: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<LloydResult> {
    if k < 1 {
        return Err(Error::InvalidArgument("quantization levels must be >= 1".into()));
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("no points to quantize".into()));
    }
    if weights.len() != points.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} points",
            weights.len(),
            points.len()
        )));
    }
    validate_distribution(weights)?;

    let k = k.min(points.len());
    let mut best: Option<LloydResult> = None;
    for _ in 0..RESTARTS {
        let run = lloyd_once(points, weights, k, rng)?;
        if best.as_ref().map_or(true, |b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd_once<R: Rng>(
    points: &[(f64, f64)],
    weights: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<LloydResult> {
    let mut centroids = sample_initial_centroids(points, weights, k, rng);
    let mut assignment = vec![usize::MAX; points.len()];
    let mut cost_history = Vec::new();

    for _ in 0..MAX_ITERATIONS {
        // Assignment phase: nearest centroid, lowest index on ties.
        let mut changed = false;
        let mut cost = 0.0;
        for (i, &p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, &centroid) in centroids.iter().enumerate() {
                let d = dist2(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
            cost += weights[i] * best_d;
        }
        cost_history.push(cost);
        if !changed {
            break;
        }

        // Update phase: weighted means; weightless clusters keep their spot.
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let mut wsum = 0.0;
            let mut acc = (0.0, 0.0);
            for (i, &p) in points.iter().enumerate() {
                if assignment[i] == c {
                    wsum += weights[i];
                    acc.0 += weights[i] * p.0;
                    acc.1 += weights[i] * p.1;
                }
            }
            if wsum > 0.0 {
                *centroid = (acc.0 / wsum, acc.1 / wsum);
            }
        }
    }

    // Relabel clusters densely in order of first appearance.
    let mut relabel = vec![usize::MAX; k];
    let mut dense_centroids = Vec::new();
    let mut next = 0;
    for a in assignment.iter_mut() {
        if relabel[*a] == usize::MAX {
            relabel[*a] = next;
            dense_centroids.push(centroids[*a]);
            next += 1;
        }
        *a = relabel[*a];
    }
    let cost = *cost_history.last().unwrap();
    Ok(LloydResult {
        partition: Partition::new(assignment)?,
        centroids: dense_centroids,
        cost,
        cost_history,
    })
}
