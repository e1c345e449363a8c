use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use sparsenet_core::{CubePoint, LabeledSample, SparseNet};

/// A problem with the invocation or its input files; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

pub fn read_net(path: &Path) -> anyhow::Result<SparseNet> {
    let text = read_text(path)?;
    SparseNet::from_json(&text).with_context(|| format!("invalid network in {}", path.display()))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid JSON in {}: {e}", path.display())))
}

/// Reads a dataset CSV whose header is `x1,...,xn,y`.
pub fn read_dataset(path: &Path) -> anyhow::Result<Vec<LabeledSample>> {
    let bad = |msg: String| usage(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let n = headers.len().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| bad("need x columns and y".into()))?;
    for (i, h) in headers.iter().enumerate() {
        let want = if i == n { "y".to_string() } else { format!("x{}", i + 1) };
        if h.trim() != want {
            return Err(bad(format!("column {} is {h:?}, expected {want:?}", i + 1)));
        }
    }
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let line = row + 2;
        let mut signs = Vec::with_capacity(n);
        for field in record.iter().take(n) {
            match field.trim() {
                "1" | "+1" => signs.push(1i8),
                "-1" => signs.push(-1i8),
                other => return Err(bad(format!("line {line}: {other:?} is not ±1"))),
            }
        }
        let y: f64 = record[n]
            .trim()
            .parse()
            .map_err(|_| bad(format!("line {line}: label {:?} is not a number", &record[n])))?;
        out.push(LabeledSample::new(CubePoint::from_signs(&signs)?, y)?);
    }
    if out.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok(out)
}

/// Writes `bytes` to `out`, or to standard output.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn json_bytes<T: serde::Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
