//! Per-episode training metrics and their post-processing.

use crate::{Error, Result};

/// One trained episode: its (0-based) index, discounted return and length
/// in steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStat {
    pub episode: usize,
    pub ret: f64,
    pub length: usize,
}

/// The per-episode metrics stream of a single training run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRecord {
    pub episodes: Vec<EpisodeStat>,
}

impl RunRecord {
    pub fn with_capacity(n: usize) -> Self {
        RunRecord { episodes: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, episode: usize, ret: f64, length: usize) {
        self.episodes.push(EpisodeStat { episode, ret, length });
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn returns(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.ret).collect()
    }

    /// Trailing moving average of the return series.
    pub fn smoothed(&self, window: usize) -> Vec<f64> {
        smooth(&self.returns(), window)
    }

    /// Last value of the smoothed return series, if any episodes were run.
    pub fn final_smoothed(&self, window: usize) -> Option<f64> {
        self.smoothed(window).last().copied()
    }
}

/// Trailing moving average: entry `i` is the mean of the last
/// `min(window, i + 1)` values. Output length equals input length.
pub fn smooth(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "smoothing window must be >= 1");
    let mut prefix = Vec::with_capacity(series.len() + 1);
    prefix.push(0.0);
    for &x in series {
        prefix.push(prefix.last().unwrap() + x);
    }
    (0..series.len())
        .map(|i| {
            let w = window.min(i + 1);
            (prefix[i + 1] - prefix[i + 1 - w]) / w as f64
        })
        .collect()
}

/// Return ratio to the centralized optimum.
pub fn normalize(raw: f64, centralized_optimum: f64) -> Result<f64> {
    if centralized_optimum <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "normalization denominator must be positive, got {centralized_optimum}"
        )));
    }
    Ok(raw / centralized_optimum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn smooth_window_one_is_identity() {
        let s = [3.0, -1.0, 2.5, 0.0];
        assert_eq!(smooth(&s, 1), s.to_vec());
    }

    #[test]
    fn smooth_constant_series_is_constant() {
        let s = vec![0.7; 50];
        for v in smooth(&s, 8) {
            assert_abs_diff_eq!(v, 0.7, epsilon = 1e-12);
        }
    }

    #[test]
    fn smooth_partial_head_window() {
        assert_eq!(smooth(&[0.0, 10.0], 2), vec![0.0, 5.0]);
    }

    #[test]
    fn normalize_basic() {
        assert_eq!(normalize(5.0, 5.0).unwrap(), 1.0);
        assert_eq!(normalize(0.0, 5.0).unwrap(), 0.0);
        assert!(normalize(1.0, 0.0).is_err());
        assert!(normalize(1.0, -2.0).is_err());
    }

    proptest! {
        #[test]
        fn smooth_is_bounded_and_linear(
            series in proptest::collection::vec(-100.0f64..100.0, 1..200),
            window in 1usize..50,
        ) {
            let out = smooth(&series, window);
            prop_assert_eq!(out.len(), series.len());
            let lo = series.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for v in &out {
                prop_assert!(*v >= lo - 1e-9 && *v <= hi + 1e-9);
            }
            // Linearity: smooth(2x) == 2 * smooth(x) up to rounding.
            let doubled: Vec<f64> = series.iter().map(|x| 2.0 * x).collect();
            for (a, b) in smooth(&doubled, window).iter().zip(&out) {
                prop_assert!((a - 2.0 * b).abs() <= 1e-9);
            }
        }
    }
}
