//! Grid-shaped CSV exports: partition maps and value maps.
//!
//! Cells are numbered row-major from the bottom-left, but files list the top
//! grid row first so the text layout matches the picture. Values are printed
//! with six significant digits; partition maps are plain integers and load
//! back losslessly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::aggregation::Partition;
use crate::harness::RunRecord;
use crate::{Error, Result};

/// Six-significant-digit formatting for report numbers.
pub(crate) fn sig6(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.5e}")
    }
}

/// Write a partition as an integer grid, one CSV row per grid row, top row
/// first.
pub fn write_partition_csv(path: impl AsRef<Path>, partition: &Partition, side: u16) -> Result<()> {
    let cells = side as usize * side as usize;
    if partition.len() != cells {
        return Err(Error::InvalidArgument(format!(
            "partition over {} observations cannot map onto a {side}x{side} grid",
            partition.len()
        )));
    }
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    for row in (0..side as usize).rev() {
        let line: Vec<String> = (0..side as usize)
            .map(|col| partition.cluster_of(row * side as usize + col).to_string())
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Load a partition grid written by [`write_partition_csv`].
pub fn read_partition_csv(path: impl AsRef<Path>) -> Result<(Partition, u16)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<usize>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            line.split(',')
                .map(|t| {
                    t.trim().parse::<usize>().map_err(|e| Error::Malformed {
                        path: path.display().to_string(),
                        reason: format!("bad cluster id `{t}`: {e}"),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let side = rows.len();
    if side == 0 || rows.iter().any(|r| r.len() != side) {
        return Err(Error::Malformed {
            path: path.display().to_string(),
            reason: "partition grid is not square".into(),
        });
    }
    let mut assignment = vec![0usize; side * side];
    for (file_row, row) in rows.iter().enumerate() {
        let grid_row = side - 1 - file_row;
        for (col, &id) in row.iter().enumerate() {
            assignment[grid_row * side + col] = id;
        }
    }
    Ok((Partition::new(assignment)?, side as u16))
}

/// Write per-cell scalar values as a grid, top row first.
pub fn write_value_grid_csv(path: impl AsRef<Path>, values: &[f64], side: u16) -> Result<()> {
    let cells = side as usize * side as usize;
    if values.len() != cells {
        return Err(Error::InvalidArgument(format!(
            "{} values cannot map onto a {side}x{side} grid",
            values.len()
        )));
    }
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    for row in (0..side as usize).rev() {
        let line: Vec<String> =
            (0..side as usize).map(|col| sig6(values[row * side as usize + col])).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Write a learning curve: episode index, raw return, episode length and the
/// smoothed return.
pub fn write_curve_csv(path: impl AsRef<Path>, record: &RunRecord, window: usize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    writeln!(w, "episode,return,length,smoothed")?;
    let smoothed = record.smoothed(window);
    for (e, s) in record.episodes.iter().zip(smoothed) {
        writeln!(w, "{},{},{},{}", e.episode, sig6(e.ret), e.length, sig6(s))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_grid_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let partition = Partition::new(vec![0, 0, 1, 1, 2, 2, 0, 1, 2]).unwrap();
        write_partition_csv(&path, &partition, 3).unwrap();
        let (loaded, side) = read_partition_csv(&path).unwrap();
        assert_eq!(side, 3);
        assert_eq!(loaded, partition);

        // Top row of the file is the top grid row (cells 6,7,8).
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "0,1,2");
    }

    #[test]
    fn value_grid_uses_six_significant_digits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        let values: Vec<f64> = (0..4).map(|i| i as f64 * std::f64::consts::PI).collect();
        write_value_grid_csv(&path, &values, 2).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("3.14159e0"), "unexpected formatting: {text}");
    }

    #[test]
    fn curve_csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let mut record = RunRecord::default();
        record.push(0, 0.0, 100);
        record.push(1, 8.1, 3);
        write_curve_csv(&path, &record, 2).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "episode,return,length,smoothed");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1,8.10000e0,3,"), "unexpected row: {}", lines[2]);
    }
}
