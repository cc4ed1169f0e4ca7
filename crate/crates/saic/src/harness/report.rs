//! Summary CSV (schema v1) and the text report rendered from it.
//!
//! Summary floats use Rust's shortest round-trip formatting so a reload
//! reconstructs every field exactly; the rendered report rounds to six
//! significant digits for reading.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::harness::export::sig6;
use crate::schemes::SchemeResult;
use crate::Result;

/// One summary row per (scheme, rate, seed) cell. Schema v1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: String,
    pub rate_bits: u32,
    pub seed: u64,
    pub mean_return: f64,
    pub std_error: f64,
    pub normalized: f64,
    pub epsilon: Option<f64>,
    pub bound: Option<f64>,
    /// Compression ratio `a:b`, where a message distribution exists.
    pub compression: Option<String>,
    /// Final smoothed training return (absent for evaluated-only schemes).
    pub final_smoothed: Option<f64>,
}

impl SummaryRow {
    pub fn from_result(result: &SchemeResult, smooth_window: usize) -> Self {
        SummaryRow {
            scheme: result.scheme.name().to_string(),
            rate_bits: result.rate_bits,
            seed: result.seed,
            mean_return: result.mean_return,
            std_error: result.std_error,
            normalized: result.normalized,
            epsilon: result.epsilon,
            bound: result.bound,
            compression: result.compression.map(|r| r.to_string()),
            final_smoothed: result.record.final_smoothed(smooth_window),
        }
    }
}

pub fn write_summary(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

/// Fixed-width text table of a summary, sorted by (scheme, rate, seed).
pub fn render_report(rows: &[SummaryRow]) -> String {
    let mut rows: Vec<&SummaryRow> = rows.iter().collect();
    rows.sort_by(|a, b| {
        (&a.scheme, a.rate_bits, a.seed).cmp(&(&b.scheme, b.rate_bits, b.seed))
    });
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>4} {:>6} {:>12} {:>12} {:>10} {:>10} {:>10} {:>6} {:>12}\n",
        "scheme", "R", "seed", "mean", "se", "norm", "epsilon", "bound", "ratio", "smoothed"
    ));
    for r in rows {
        let opt = |o: Option<f64>| o.map(sig6).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<12} {:>4} {:>6} {:>12} {:>12} {:>10} {:>10} {:>10} {:>6} {:>12}\n",
            r.scheme,
            r.rate_bits,
            r.seed,
            sig6(r.mean_return),
            sig6(r.std_error),
            format!("{:.4}", r.normalized),
            opt(r.epsilon),
            opt(r.bound),
            r.compression.as_deref().unwrap_or("-"),
            opt(r.final_smoothed),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<SummaryRow> {
        vec![
            SummaryRow {
                scheme: "saic".into(),
                rate_bits: 2,
                seed: 1,
                mean_return: 5.0 / 3.0,
                std_error: 0.0,
                normalized: 0.1 + 0.2,
                epsilon: Some(0.12345678901234),
                bound: Some(2.5e2),
                compression: Some("6:2".into()),
                final_smoothed: Some(5.43),
            },
            SummaryRow {
                scheme: "hnc".into(),
                rate_bits: 0,
                seed: 1,
                mean_return: 2.287679245,
                std_error: 0.0,
                normalized: 0.43,
                epsilon: None,
                bound: None,
                compression: None,
                final_smoothed: None,
            },
        ]
    }

    #[test]
    fn summary_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        let rows = sample_rows();
        write_summary(&path, &rows).unwrap();
        let loaded = read_summary(&path).unwrap();
        assert_eq!(loaded, rows);
    }

    #[test]
    fn report_renders_all_rows() {
        let text = render_report(&sample_rows());
        assert!(text.contains("saic"));
        assert!(text.contains("hnc"));
        assert!(text.contains("6:2"));
        assert_eq!(text.lines().count(), 3);
    }
}
