//! Q-table dump format: a short text header followed by one value per line.
//!
//! ```text
//! saic-qtable v1
//! kind central          (or: agent)
//! dims 64 64 5 5        (central: cells cells 5 5; agent: cells messages 5)
//! gamma 0.9
//! seed 42
//! <entry 0>
//! <entry 1>
//! ...
//! ```
//!
//! Entries are written row-major in table order with `f64`'s shortest
//! round-trip formatting, so a load reproduces the table bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::qcore::tables::{AgentQTable, CentralQTable};
use crate::{Error, Result};

const MAGIC: &str = "saic-qtable v1";

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::Malformed { path: path.display().to_string(), reason: reason.into() }
}

fn write_values(w: &mut impl Write, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn save_central_qtable(
    path: impl AsRef<Path>,
    table: &CentralQTable,
    gamma: f64,
    seed: u64,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "kind central")?;
    writeln!(w, "dims {} {} 5 5", table.cells(), table.cells())?;
    writeln!(w, "gamma {gamma}")?;
    writeln!(w, "seed {seed}")?;
    write_values(&mut w, table.raw())?;
    w.flush()?;
    Ok(())
}

pub fn save_agent_qtable(
    path: impl AsRef<Path>,
    table: &AgentQTable,
    gamma: f64,
    seed: u64,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "kind agent")?;
    writeln!(w, "dims {} {} 5", table.cells(), table.messages())?;
    writeln!(w, "gamma {gamma}")?;
    writeln!(w, "seed {seed}")?;
    write_values(&mut w, table.raw())?;
    w.flush()?;
    Ok(())
}

struct Header {
    kind: String,
    dims: Vec<usize>,
    gamma: f64,
    seed: u64,
}

fn read_header(lines: &mut impl Iterator<Item = std::io::Result<String>>, path: &Path) -> Result<Header> {
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .ok_or_else(|| malformed(path, format!("missing {what} line")))?
            .map_err(Error::from)
    };
    let magic = next("magic")?;
    if magic != MAGIC {
        return Err(malformed(path, format!("bad magic `{magic}`")));
    }
    let kind_line = next("kind")?;
    let kind = kind_line
        .strip_prefix("kind ")
        .ok_or_else(|| malformed(path, "bad kind line"))?
        .to_string();
    let dims_line = next("dims")?;
    let dims = dims_line
        .strip_prefix("dims ")
        .ok_or_else(|| malformed(path, "bad dims line"))?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| malformed(path, format!("bad dim `{t}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let gamma_line = next("gamma")?;
    let gamma = gamma_line
        .strip_prefix("gamma ")
        .ok_or_else(|| malformed(path, "bad gamma line"))?
        .parse::<f64>()
        .map_err(|e| malformed(path, format!("bad gamma: {e}")))?;
    let seed_line = next("seed")?;
    let seed = seed_line
        .strip_prefix("seed ")
        .ok_or_else(|| malformed(path, "bad seed line"))?
        .parse::<u64>()
        .map_err(|e| malformed(path, format!("bad seed: {e}")))?;
    Ok(Header { kind, dims, gamma, seed })
}

fn read_values(
    lines: impl Iterator<Item = std::io::Result<String>>,
    expected: usize,
    path: &Path,
) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(expected);
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        values.push(
            line.parse::<f64>().map_err(|e| malformed(path, format!("bad value `{line}`: {e}")))?,
        );
    }
    if values.len() != expected {
        return Err(malformed(path, format!("expected {expected} values, found {}", values.len())));
    }
    Ok(values)
}

pub fn load_central_qtable(path: impl AsRef<Path>) -> Result<(CentralQTable, f64, u64)> {
    let path = path.as_ref();
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = read_header(&mut lines, path)?;
    if header.kind != "central" {
        return Err(malformed(path, format!("expected kind central, got {}", header.kind)));
    }
    match header.dims.as_slice() {
        [c1, c2, 5, 5] if c1 == c2 => {
            let cells = *c1;
            let values = read_values(lines, cells * cells * 25, path)?;
            let mut table = CentralQTable::new(cells);
            table.raw_mut().copy_from_slice(&values);
            Ok((table, header.gamma, header.seed))
        }
        other => Err(malformed(path, format!("bad central dims {other:?}"))),
    }
}

pub fn load_agent_qtable(path: impl AsRef<Path>) -> Result<(AgentQTable, f64, u64)> {
    let path = path.as_ref();
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = read_header(&mut lines, path)?;
    if header.kind != "agent" {
        return Err(malformed(path, format!("expected kind agent, got {}", header.kind)));
    }
    match header.dims.as_slice() {
        [cells, messages, 5] => {
            let values = read_values(lines, cells * messages * 5, path)?;
            let mut table = AgentQTable::new(*cells, *messages);
            table.raw_mut().copy_from_slice(&values);
            Ok((table, header.gamma, header.seed))
        }
        other => Err(malformed(path, format!("bad agent dims {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::Move;

    #[test]
    fn central_dump_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.tbl");
        let mut q = CentralQTable::new(4);
        q.set(1, 2, Move::Up, Move::Left, 0.1 + 0.2); // deliberately non-terse float
        q.set(3, 0, Move::Stop, Move::Stop, -7.25);
        save_central_qtable(&path, &q, 0.9, 1234).unwrap();
        let (loaded, gamma, seed) = load_central_qtable(&path).unwrap();
        assert_eq!(loaded.raw(), q.raw());
        assert_eq!(gamma, 0.9);
        assert_eq!(seed, 1234);
    }

    #[test]
    fn agent_dump_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.tbl");
        let mut q = AgentQTable::new(9, 4);
        *q.entry_mut(5, 3, 2) = 1e-300;
        *q.entry_mut(0, 0, 0) = f64::MIN_POSITIVE;
        save_agent_qtable(&path, &q, 0.95, 9).unwrap();
        let (loaded, gamma, seed) = load_agent_qtable(&path).unwrap();
        assert_eq!(loaded.raw(), q.raw());
        assert_eq!(gamma, 0.95);
        assert_eq!(seed, 9);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.tbl");
        let q = CentralQTable::new(3);
        save_central_qtable(&path, &q, 0.9, 0).unwrap();
        assert!(load_agent_qtable(&path).is_err());
    }
}
