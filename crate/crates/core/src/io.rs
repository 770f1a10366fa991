//! Binary field files and CSV surfaces.
//!
//! Field file layout, all little-endian: magic `NLSF`, `u32` version, `u64` N,
//! `f64` x0, dx, t, then N interleaved `(re, im)` pairs of `f64`.

use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid};

pub const MAGIC: [u8; 4] = *b"NLSF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 8 + 3 * 8;

pub fn encode(field: &ComplexField) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * field.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(field.len() as u64).to_le_bytes());
    for v in [field.grid.x0, field.grid.dx, field.t] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &field.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<ComplexField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("file too short for header: {} bytes", bytes.len())));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected NLSF".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let payload = bytes.len() - HEADER_LEN;
    if n.checked_mul(16) != Some(payload as u64) {
        return Err(Error::Format(format!("payload is {payload} bytes, header says {n} samples")));
    }
    let (x0, dx, t) = (f64_at(bytes, 16), f64_at(bytes, 24), f64_at(bytes, 32));
    let grid = Grid::new(x0, dx, n as usize).map_err(|e| Error::Format(e.to_string()))?;
    let values = (0..n as usize)
        .map(|i| {
            let at = HEADER_LEN + 16 * i;
            Complex64::new(f64_at(bytes, at), f64_at(bytes, at + 8))
        })
        .collect();
    ComplexField::new(grid, t, values).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_field(w: &mut impl Write, field: &ComplexField) -> Result<()> {
    w.write_all(&encode(field))?;
    Ok(())
}

pub fn read_field(r: &mut impl Read) -> Result<ComplexField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save(path: impl AsRef<Path>, field: &ComplexField) -> Result<()> {
    std::fs::write(path, encode(field))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<ComplexField> {
    decode(&std::fs::read(path)?)
}

/// `x,t,abs2` rows, grouped by time then ordered by `x`.
pub fn surface_csv(w: &mut impl Write, frames: &[ComplexField]) -> Result<()> {
    writeln!(w, "x,t,abs2")?;
    for f in frames {
        for (x, v) in f.grid.points().zip(&f.values) {
            writeln!(w, "{:?},{:?},{:?}", x, f.t, v.norm_sqr())?;
        }
    }
    Ok(())
}
