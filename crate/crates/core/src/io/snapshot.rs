//! Binary field snapshots.
//!
//! Layout, all little-endian: the 8-byte magic `DECMHD01`, `u32` `nx`, `ny`,
//! `f64` `lx`, `ly`, `x0`, `y0`, `t`, then the arrays `V^x`, `V^y`, `B^x`,
//! `B^y`, `P` as `f64` in storage order.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::dec::{Form1, Kind};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::integrator::State;

pub const MAGIC: &[u8; 8] = b"DECMHD01";

/// Size in bytes of a snapshot of an `nx * ny` grid.
pub fn snapshot_len(nx: usize, ny: usize) -> usize {
    8 + 8 + 5 * 8 + 5 * nx * ny * 8
}

pub fn encode(s: &State) -> Vec<u8> {
    let g = s.grid();
    let mut out = Vec::with_capacity(snapshot_len(g.nx, g.ny));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.nx as u32).to_le_bytes());
    out.extend_from_slice(&(g.ny as u32).to_le_bytes());
    for v in [g.lx, g.ly, g.x0, g.y0, s.t] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for a in [&s.v.x, &s.v.y, &s.b.x, &s.b.y, &s.p] {
        for v in a.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<State> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::Snapshot("bad magic: not a DECMHD01 snapshot".into()));
    }
    let header = 8 + 8 + 40;
    if bytes.len() < header {
        return Err(Error::Snapshot(format!("truncated header: {} bytes", bytes.len())));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nx, ny) = (u32_at(8), u32_at(12));
    let expected = snapshot_len(nx, ny);
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!(
            "expected {expected} bytes for a {nx}x{ny} grid, found {}",
            bytes.len()
        )));
    }
    let grid = Grid::new(nx, ny, f64_at(16), f64_at(24), f64_at(32), f64_at(40))
        .map_err(|e| Error::Snapshot(e.to_string()))?;
    let t = f64_at(48);
    let n = nx * ny;
    let arr = |b: usize| -> Vec<f64> { (0..n).map(|k| f64_at(header + 8 * (b * n + k))).collect() };
    State::new(
        Form1::new(grid, Kind::Primal, arr(0), arr(1))?,
        Form1::new(grid, Kind::Primal, arr(2), arr(3))?,
        arr(4),
        t,
    )
}

pub fn write_snapshot(s: &State, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    w.write_all(&encode(s)).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<State> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dec::testutil::{random_vec, rng};

    fn random_state() -> State {
        let g = Grid::new(32, 32, 2.0, 2.0, 0.0, 0.0).unwrap();
        let mut r = rng(81);
        let n = g.len();
        State::new(
            Form1::new(g, Kind::Primal, random_vec(&mut r, n), random_vec(&mut r, n)).unwrap(),
            Form1::new(g, Kind::Primal, random_vec(&mut r, n), random_vec(&mut r, n)).unwrap(),
            random_vec(&mut r, n),
            1.7,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let s = random_state();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        write_snapshot(&s, &p).unwrap();
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 41016);
        let back = read_snapshot(&p).unwrap();
        assert_eq!(back.pack().iter().map(|x| x.to_bits()).collect::<Vec<_>>(), s.pack().iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert_eq!(back.t.to_bits(), s.t.to_bits());
        assert_eq!(back.grid(), s.grid());
    }

    #[test]
    fn size_formula() {
        assert_eq!(snapshot_len(32, 32), 8 + 8 + 40 + 5 * 32 * 32 * 8);
    }

    #[test]
    fn bad_magic_and_truncation_rejected() {
        let mut b = encode(&random_state());
        let short = b[..1000].to_vec();
        assert!(matches!(decode(&short), Err(Error::Snapshot(_))));
        b[7] = b'2';
        let err = decode(&b).unwrap_err();
        assert!(err.to_string().contains("magic"));
        assert_eq!(err.exit_code(), 3);
    }
}
