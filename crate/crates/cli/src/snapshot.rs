//! Binary snapshot format.
//!
//! ```text
//! magic    "ELSIM1\0"                 7 bytes
//! version  u16                        2
//! n        3 × u32                    12
//! box      3 × f64                    24
//! time     f64                        8
//! params   alpha, nu, lambda, gamma   32
//! theta    f64 (0 in direct mode)     8
//! payload  u₀ u₁ u₂ d₀ d₁ d₂ p        7 · N · 8, x fastest
//! ```
//!
//! All numbers are little-endian.

use std::io::{Read, Write};
use std::path::Path;

use elsim::{Grid, ModelParams, ScalarField, SimState, VectorField};
use thiserror::Error;

pub const MAGIC: &[u8; 7] = b"ELSIM1\0";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 7 + 2 + 12 + 24 + 8 + 32 + 8;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not a snapshot (bad magic)")]
    Magic,
    #[error("unsupported snapshot version {0}")]
    Version(u16),
    #[error("snapshot header is truncated")]
    Header,
    #[error("payload holds {got} bytes, header implies {expected}")]
    Length { expected: usize, got: usize },
    #[error("invalid snapshot header: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub state: SimState,
    /// Mollifier scale, 0 in direct mode.
    pub theta: f64,
}

pub fn encode(state: &SimState, theta: f64) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 7 * 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for n in g.n() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    let p = state.params;
    for v in g.box_length().into_iter().chain([state.t, p.alpha, p.nu, p.lambda, p.gamma, theta]) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for f in state.u.comps().iter().chain(state.d.comps()).chain([&state.p]) {
        for v in f.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
    if bytes.len() < MAGIC.len() || &bytes[..7] != MAGIC {
        return Err(SnapshotError::Magic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(SnapshotError::Header);
    }
    let version = u16::from_le_bytes([bytes[7], bytes[8]]);
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let mut n = [0usize; 3];
    for (a, v) in n.iter_mut().enumerate() {
        *v = u32::from_le_bytes(bytes[9 + 4 * a..13 + 4 * a].try_into().expect("4 bytes")) as usize;
    }
    let f = |k: usize| f64_at(bytes, 21 + 8 * k);
    let box_length = [f(0), f(1), f(2)];
    let (t, alpha, nu, lambda, gamma, theta) = (f(3), f(4), f(5), f(6), f(7), f(8));
    let grid = Grid::new(n, box_length).map_err(|e| SnapshotError::Invalid(e.to_string()))?;
    let len = grid.len();
    let expected = 7 * 8 * len;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(SnapshotError::Length { expected, got: payload.len() });
    }
    let arrays: Vec<ScalarField> = (0..7)
        .map(|c| {
            let data = (0..len).map(|i| f64_at(payload, 8 * (c * len + i))).collect();
            ScalarField::new(grid, data).expect("length checked")
        })
        .collect();
    let mut it = arrays.into_iter();
    let mut next = || it.next().expect("seven arrays");
    let u = VectorField::from_components([next(), next(), next()]).expect("same grid");
    let d = VectorField::from_components([next(), next(), next()]).expect("same grid");
    let p = next();
    // Parameters are stored as written; validation is the reader's business.
    let params = ModelParams { alpha, nu, lambda, gamma };
    Ok(Snapshot { state: SimState { u, d, p, t, params }, theta })
}

pub fn write(path: &Path, state: &SimState, theta: f64) -> Result<(), SnapshotError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&encode(state, theta))?;
    f.flush()?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Snapshot, SnapshotError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn file_name(step: usize) -> String {
    format!("snap_{step:06}.elsim")
}
