//! SLF1 raw field files.
//!
//! Layout (all little-endian):
//! - 16-byte header: 12-byte magic (`b"SLF1FIELD\0\0\0"` for vector fields,
//!   `b"SLF1MASK\0\0\0\0"` for 0/1 byte masks) followed by a `u32` format
//!   version (currently 1),
//! - `n: u32` cells per axis,
//! - `box_length: f64`,
//! - payload: `3·n³` `f64` values in x-fastest order, component-major, for
//!   fields; `n³` bytes (0 or 1) for masks.
//!
//! Values are stored as `f64` regardless of the in-memory scalar type.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, VectorField3D};
use crate::scalar::Scalar;

const MAGIC_FIELD: &[u8; 12] = b"SLF1FIELD\0\0\0";
const MAGIC_MASK: &[u8; 12] = b"SLF1MASK\0\0\0\0";
const VERSION: u32 = 1;

fn write_header(w: &mut impl Write, magic: &[u8; 12], grid_n: u32, box_length: f64) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&grid_n.to_le_bytes())?;
    w.write_all(&box_length.to_le_bytes())?;
    Ok(())
}

fn read_header(r: &mut impl Read, magic: &[u8; 12]) -> Result<(u32, f64)> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[..12] != magic {
        return Err(Error::Format("bad magic, not an SLF1 file of this kind".into()));
    }
    let version = u32::from_le_bytes(head[12..16].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported SLF1 version {version}")));
    }
    let mut nb = [0u8; 4];
    r.read_exact(&mut nb)?;
    let n = u32::from_le_bytes(nb);
    let mut lb = [0u8; 8];
    r.read_exact(&mut lb)?;
    let box_length = f64::from_le_bytes(lb);
    Ok((n, box_length))
}

pub fn write_field<T: Scalar>(path: &Path, field: &VectorField3D<T>) -> Result<()> {
    let grid = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, MAGIC_FIELD, grid.n() as u32, grid.box_length().to_f64_lossy())?;
    for comp in field.components() {
        for &v in comp {
            w.write_all(&v.to_f64_lossy().to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field<T: Scalar>(path: &Path) -> Result<VectorField3D<T>> {
    let mut r = BufReader::new(File::open(path)?);
    let (n, box_length) = read_header(&mut r, MAGIC_FIELD)?;
    let grid = GridSpec::new(n as usize, T::of(box_length))?;
    let cells = grid.cells();
    let mut components: [Vec<T>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut buf = vec![0u8; cells * 8];
    for comp in &mut components {
        r.read_exact(&mut buf)?;
        comp.reserve(cells);
        for chunk in buf.chunks_exact(8) {
            comp.push(T::of(f64::from_le_bytes(chunk.try_into().unwrap())));
        }
    }
    VectorField3D::from_components(grid, components)
}

/// Write a boolean occupancy grid as an SLF1 byte grid.
pub fn write_mask(path: &Path, n: usize, box_length: f64, occupancy: &[bool]) -> Result<()> {
    if occupancy.len() != n * n * n {
        return Err(Error::InvalidParameter(format!(
            "mask length {} does not match n = {n}",
            occupancy.len()
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, MAGIC_MASK, n as u32, box_length)?;
    let bytes: Vec<u8> = occupancy.iter().map(|&b| b as u8).collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn read_mask(path: &Path) -> Result<(usize, f64, Vec<bool>)> {
    let mut r = BufReader::new(File::open(path)?);
    let (n, box_length) = read_header(&mut r, MAGIC_MASK)?;
    let n = n as usize;
    let mut bytes = vec![0u8; n * n * n];
    r.read_exact(&mut bytes)?;
    Ok((n, box_length, bytes.into_iter().map(|b| b != 0).collect()))
}
