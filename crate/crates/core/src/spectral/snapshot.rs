//! Portable field snapshots.
//!
//! A snapshot is a pair of files: `<stem>.bin` with the physical samples as
//! little-endian `f64` in grid order (row-major, `y` rows of `Nx` values), and
//! `<stem>.json` describing the grid, the time and the model.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Grid, SpectralField};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub time: f64,
    pub model: String,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("json"))
}

/// Writes `field` as `<stem>.bin` plus `<stem>.json`.
pub fn write_snapshot(stem: &Path, field: &mut SpectralField, time: f64, model: &str) -> Result<()> {
    let grid = field.grid().clone();
    let header = SnapshotHeader {
        nx: grid.nx(),
        ny: grid.ny(),
        lx: grid.lx(),
        ly: grid.ly(),
        time,
        model: model.to_string(),
    };
    let bytes: Vec<u8> = field.real().iter().flat_map(|v| v.to_le_bytes()).collect();
    let (bin, json) = paths(stem);
    fs::write(bin, bytes)?;
    fs::write(json, serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`].
pub fn read_snapshot(stem: &Path) -> Result<(SnapshotHeader, SpectralField)> {
    let (bin, json) = paths(stem);
    let header: SnapshotHeader = serde_json::from_str(&fs::read_to_string(json)?)?;
    let bytes = fs::read(bin)?;
    if bytes.len() != 8 * header.nx * header.ny {
        return Err(Error::InvalidGrid(format!(
            "snapshot holds {} bytes, expected {}",
            bytes.len(),
            8 * header.nx * header.ny
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight bytes")))
        .collect();
    let grid = Grid::new(header.nx, header.ny, header.lx, header.ly)?;
    Ok((header, SpectralField::from_real(&grid, samples)))
}
