//! Flat binary container for fields.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic    4 bytes  "FRHT"
//! version  u32      1
//! dim      u32
//! points   u32 x dim
//! L        f64
//! kind     u8       0 = physical, 1 = spectral
//! payload  f64 x M^N (physical) or (re, im) f64 pairs x M^N (spectral)
//! ```
//!
//! Payload order is row-major over the lattice; spectral data uses FFT order
//! (wavenumber 0 first, negative wavenumbers in the upper half).

use std::io::{Read, Write};

use num_complex::Complex64;

use super::field::{PhysicalField, SpectralField};
use super::grid::Grid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FRHT";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum StoredField {
    Physical(PhysicalField),
    Spectral(SpectralField),
}

impl StoredField {
    pub fn grid(&self) -> &Grid {
        match self {
            StoredField::Physical(f) => f.grid(),
            StoredField::Spectral(f) => f.grid(),
        }
    }
}

fn write_header(w: &mut impl Write, grid: &Grid, kind: u8) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for _ in 0..grid.dim() {
        w.write_all(&(grid.points() as u32).to_le_bytes())?;
    }
    w.write_all(&grid.half_length().to_le_bytes())?;
    w.write_all(&[kind])?;
    Ok(())
}

pub fn write_physical(w: &mut impl Write, field: &PhysicalField) -> Result<()> {
    write_header(w, field.grid(), 0)?;
    let mut buf = Vec::with_capacity(field.samples().len() * 8);
    for v in field.samples() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_spectral(w: &mut impl Write, field: &SpectralField) -> Result<()> {
    write_header(w, field.grid(), 1)?;
    let mut buf = Vec::with_capacity(field.coeffs().len() * 16);
    for c in field.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_field(r: &mut impl Read) -> Result<StoredField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(r)? as usize;
    if !(1..=3).contains(&dim) {
        return Err(Error::Format(format!("bad dimension {dim}")));
    }
    let mut points = Vec::with_capacity(dim);
    for _ in 0..dim {
        points.push(read_u32(r)? as usize);
    }
    if points.iter().any(|&m| m != points[0]) {
        return Err(Error::Format("anisotropic lattices are not supported".into()));
    }
    let half_length = read_f64(r)?;
    let grid = Grid::new(dim, points[0], half_length)?;
    let mut kind = [0u8; 1];
    r.read_exact(&mut kind)?;
    match kind[0] {
        0 => {
            let samples = (0..grid.len()).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
            Ok(StoredField::Physical(PhysicalField::new(grid, samples)?))
        }
        1 => {
            let coeffs = (0..grid.len())
                .map(|_| Ok(Complex64::new(read_f64(r)?, read_f64(r)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(StoredField::Spectral(SpectralField::new(grid, coeffs)?))
        }
        k => Err(Error::Format(format!("unknown field kind {k}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(2, 16, 2.5).unwrap();
        let mut buf = Vec::new();
        write_physical(&mut buf, &PhysicalField::constant(g, 1.0)).unwrap();
        assert_eq!(&buf[0..4], b"FRHT");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 16);
        assert_eq!(u32::from_le_bytes(buf[16..20].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(buf[20..28].try_into().unwrap()), 2.5);
        assert_eq!(buf[28], 0);
        assert_eq!(buf.len(), 29 + 8 * 256);
    }

    #[test]
    fn spectral_round_trip() {
        let g = Grid::new(1, 32, 1.0).unwrap();
        let f = PhysicalField::from_fn(g, |x| (3.0 * x[0]).sin()).to_spectral();
        let mut buf = Vec::new();
        write_spectral(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 25 + 16 * 32);
        match read_field(&mut buf.as_slice()).unwrap() {
            StoredField::Spectral(back) => assert_eq!(back, f),
            other => panic!("wrong kind {other:?}"),
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_field(&mut &b"NOPE\x01\x00\x00\x00"[..]), Err(Error::Format(_))));
        let g = Grid::new(1, 16, 1.0).unwrap();
        let mut buf = Vec::new();
        write_physical(&mut buf, &PhysicalField::zeros(g)).unwrap();
        buf.truncate(40);
        assert!(read_field(&mut buf.as_slice()).is_err());
    }
}
