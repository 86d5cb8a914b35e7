//! Binary snapshots.
//!
//! Layout: the 8-byte magic `OLDB2D01`, then little-endian `u32` version,
//! `u32 n`, `f64 L`, `f64 t`, seven `f64` parameters
//! `(ν, μ, K, α, β, b, q_flag)`, and the physical-space arrays of `ω`, `τ₁₁`,
//! `τ₁₂`, `τ₂₂` (row-major, `n²` values each).
//!
//! Loaded fields keep the stored samples verbatim, so saving a loaded
//! snapshot reproduces the file byte for byte.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::{ModelParams, SimState};
use crate::spectral::{Grid, ScalarField, SymTensorField};

pub const MAGIC: &[u8; 8] = b"OLDB2D01";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 8 * 9;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {found} (this build reads version {VERSION})")]
    Version { found: u32 },
    #[error("truncated snapshot: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("snapshot has {extra} unexpected trailing bytes")]
    TrailingBytes { extra: usize },
    #[error("snapshot header is invalid: {0}")]
    Header(String),
}

/// Contents of a snapshot file.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub grid: Grid,
    pub t: f64,
    /// `(ν, μ, K, α, β, b, q_flag)` as stored.
    pub params: [f64; 7],
    pub omega: ScalarField,
    pub tau: SymTensorField,
}

impl Snapshot {
    /// Rebuilds the state under the given variant.
    pub fn state(&self, params: &ModelParams) -> Result<SimState, crate::model::ModelError> {
        SimState::for_variant(self.t, self.omega.clone(), self.tau.clone(), params.variant)
    }
}

pub fn encode(state: &SimState, params: &ModelParams) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    let q_flag = if params.q_enabled { 1.0 } else { 0.0 };
    for v in [
        g.length(),
        state.t,
        params.nu,
        params.mu,
        params.coupling,
        params.alpha,
        params.beta,
        params.slip,
        q_flag,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let tau = state.tau();
    for f in [state.omega(), &tau.xx, &tau.xy, &tau.yy] {
        for v in f.physical() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
    if bytes.len() < MAGIC.len() || &bytes[..8] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(SnapshotError::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let version = u32_at(bytes, 8);
    if version != VERSION {
        return Err(SnapshotError::Version { found: version });
    }
    let n = u32_at(bytes, 12) as usize;
    let length = f64_at(bytes, 16);
    let grid = Grid::new(n, length).map_err(|e| SnapshotError::Header(e.to_string()))?;
    let t = f64_at(bytes, 24);
    let mut params = [0.0; 7];
    for (i, p) in params.iter_mut().enumerate() {
        *p = f64_at(bytes, 32 + 8 * i);
    }
    let expected = HEADER_LEN + 4 * 8 * n * n;
    if bytes.len() < expected {
        return Err(SnapshotError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(SnapshotError::TrailingBytes {
            extra: bytes.len() - expected,
        });
    }
    let field = |k: usize| {
        let start = HEADER_LEN + k * 8 * n * n;
        let values: Vec<f64> = (0..n * n).map(|i| f64_at(bytes, start + 8 * i)).collect();
        ScalarField::from_physical(&grid, values).expect("length checked")
    };
    Ok(Snapshot {
        t,
        params,
        omega: field(0),
        tau: SymTensorField::new(field(1), field(2), field(3)),
        grid,
    })
}

pub fn save_snapshot(state: &SimState, params: &ModelParams, path: &Path) -> Result<(), SnapshotError> {
    fs::write(path, encode(state, params))?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    decode(&fs::read(path)?)
}
