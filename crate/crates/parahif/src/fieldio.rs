//! Raw field snapshots: little-endian doubles in row-major interior-node
//! order, with a plain-text sidecar so a dump is self-describing.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Writes `u` to `path` as raw little-endian f64 values, plus `path.txt`
/// with the grid dimension, n, simulation time, and field min/max. The raw
/// bytes are bit-exact: the sidecar is the only human-readable part.
pub fn dump_field(u: &[f64], grid: &GridSpec, time: f64, path: &Path) -> Result<()> {
    assert_eq!(u.len(), grid.n_dofs(), "field length must match the grid");
    let mut bytes = Vec::with_capacity(u.len() * 8);
    for v in u {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, &bytes)?;

    let (min, max) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let (min, max) = if u.is_empty() { (0.0, 0.0) } else { (min, max) };
    let mut sidecar = fs::File::create(sidecar_path(path))?;
    writeln!(sidecar, "dimension {}", grid.dim)?;
    writeln!(sidecar, "n {}", grid.n)?;
    writeln!(sidecar, "time {}", time)?;
    writeln!(sidecar, "min {}", min)?;
    writeln!(sidecar, "max {}", max)?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".txt");
    std::path::PathBuf::from(name)
}

/// Reads a raw dump back. The expected length comes from the caller (the
/// sidecar records n but the raw file is the source of truth).
pub fn read_field(path: &Path, len: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() != len * 8 {
        return Err(Error::Config(format!(
            "field file {} holds {} bytes, expected {}",
            path.display(),
            bytes.len(),
            len * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
