//! Flat binary field snapshots with a JSON sidecar.
//!
//! Layout of `<stem>.bin`: the 8 magic bytes `GHXFLD01`, then `n`, `N` and the
//! component count as little-endian `u64`, then every component as `N^{2n}`
//! little-endian `f64` in grid order (component-major). `<stem>.json`
//! describes the same content.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::TorusContext;
use crate::error::{GhxError, Result};

const MAGIC: &[u8; 8] = b"GHXFLD01";
const HEADER_BYTES: usize = 8 + 3 * 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema: String,
    pub n: usize,
    pub grid: usize,
    pub axes: Vec<String>,
    pub components: Vec<String>,
    pub header_bytes: usize,
    pub dtype: String,
    pub layout: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub grid: usize,
    pub components: Vec<Vec<f64>>,
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut p = stem.as_os_str().to_owned();
    p.push(".");
    p.push(ext);
    PathBuf::from(p)
}

/// Writes `<stem>.bin` and `<stem>.json`; returns both paths.
pub fn write_snapshot(stem: &Path, ctx: &TorusContext, components: &[(&str, &[f64])]) -> Result<(PathBuf, PathBuf)> {
    for (name, data) in components {
        if data.len() != ctx.points() {
            return Err(GhxError::Grid(format!(
                "component {name} has {} values, grid has {}",
                data.len(),
                ctx.points()
            )));
        }
    }
    let bin = with_ext(stem, "bin");
    let mut w = BufWriter::new(fs::File::create(&bin)?);
    w.write_all(MAGIC)?;
    for v in [ctx.dim(), ctx.grid(), components.len()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for (_, data) in components {
        for x in *data {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;

    let sidecar = Sidecar {
        schema: crate::json::SCHEMA.to_string(),
        n: ctx.dim(),
        grid: ctx.grid(),
        axes: ctx.axis_names(),
        components: components.iter().map(|(name, _)| name.to_string()).collect(),
        header_bytes: HEADER_BYTES,
        dtype: "f64le".into(),
        layout: "component-major; row-major grid, last axis fastest".into(),
    };
    let json = with_ext(stem, "json");
    fs::write(&json, serde_json::to_string_pretty(&sidecar).map_err(|e| GhxError::Io(e.to_string()))?)?;
    Ok((bin, json))
}

pub fn read_snapshot(bin: &Path) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    fs::File::open(bin)?.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_BYTES || &bytes[..8] != MAGIC {
        return Err(GhxError::Io(format!("{} is not a field snapshot", bin.display())));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().expect("8 bytes")) as usize;
    let (n, grid, count) = (word(0), word(1), word(2));
    let points = grid.checked_pow(2 * n as u32).unwrap_or(usize::MAX);
    if bytes.len() != HEADER_BYTES + 8 * points * count {
        return Err(GhxError::Io(format!("{} has the wrong length", bin.display())));
    }
    let components = (0..count)
        .map(|c| {
            let start = HEADER_BYTES + 8 * points * c;
            bytes[start..start + 8 * points]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect()
        })
        .collect();
    Ok(Snapshot { n, grid, components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::stream;
    use crate::torus::ScalarField;

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = TorusContext::new(1, 8).unwrap();
        let f = ScalarField::random_band_limited(&ctx, &mut stream(0, 0), 3, 1.0);
        let stem = dir.path().join("psi");
        let (bin, json) = write_snapshot(&stem, &ctx, &[("psi", f.values())]).unwrap();
        let snap = read_snapshot(&bin).unwrap();
        assert_eq!((snap.n, snap.grid), (1, 8));
        assert_eq!(snap.components[0], f.values());
        let side: Sidecar = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(side.axes, vec!["x1", "y1"]);
        assert_eq!(side.header_bytes, 32);
    }
}
