//! `KP5S` binary snapshots of spectral fields.
//!
//! Layout (all little-endian): magic `b"KP5S"`, version `u32`, `nx: u32`,
//! `ny: u32`, `lx: f64`, `ly: f64`, then `nx * ny` coefficients as
//! `(re: f64, im: f64)` pairs in row-major `(j, k)` FFT order. Flags are not
//! stored; the loader recomputes them from the coefficients.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid2D;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"KP5S";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, s: &SpectralField) -> std::io::Result<()> {
    let g = s.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.nx as u32).to_le_bytes())?;
    w.write_all(&(g.ny as u32).to_le_bytes())?;
    w.write_all(&g.lx.to_le_bytes())?;
    w.write_all(&g.ly.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * s.coeffs().len());
    for c in s.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<SpectralField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| Error::Snapshot(format!("read failed: {e}")))?;
    parse(&bytes)
}

fn parse(bytes: &[u8]) -> Result<SpectralField> {
    const HEADER: usize = 4 + 4 + 4 + 4 + 8 + 8;
    if bytes.len() < HEADER {
        return Err(Error::Snapshot(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let (nx, ny) = (u32_at(8) as usize, u32_at(12) as usize);
    let grid = Grid2D::new(nx, ny, f64_at(16), f64_at(24))?;
    let expected = HEADER + 16 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!(
            "expected {expected} bytes for {nx}x{ny}, found {}",
            bytes.len()
        )));
    }
    let coeffs = (0..grid.len())
        .map(|i| {
            let o = HEADER + 16 * i;
            Complex64::new(f64_at(o), f64_at(o + 8))
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

pub fn save(path: &Path, s: &SpectralField) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_snapshot(std::io::BufWriter::new(f), s).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<SpectralField> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PhysicalField;

    #[test]
    fn round_trip_recovers_coefficients_and_flags() {
        let g = Grid2D::new(8, 6, 3.0, 2.5).unwrap();
        let s = PhysicalField::from_fn(g, |x, y| (x + 0.3).sin() * (2.0 * y).cos() + x * 0.01)
            .unwrap()
            .forward()
            .project_zero_x_mean();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &s).unwrap();
        assert_eq!(&buf[..4], b"KP5S");
        assert_eq!(buf.len(), 32 + 16 * g.len());
        let back = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        assert!(back.is_hermitian() && back.is_zero_x_mean());
    }

    #[test]
    fn rejects_bad_magic_and_length() {
        let g = Grid2D::square(4, 1.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &SpectralField::zeros(g)).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_snapshot(bad.as_slice()).is_err());
        buf.pop();
        assert!(read_snapshot(buf.as_slice()).is_err());
    }

    #[test]
    fn loader_detects_broken_symmetry() {
        let g = Grid2D::square(4, 1.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &SpectralField::zeros(g)).unwrap();
        // coefficient (j=1, k=1): re
        let o = 32 + 16 * (g.ny + 1);
        buf[o..o + 8].copy_from_slice(&1.0f64.to_le_bytes());
        let s = read_snapshot(buf.as_slice()).unwrap();
        assert!(!s.is_hermitian());
    }
}
