//! Grid exports.
//!
//! CSV: header `cx,cy,attack,defend`, one row per cell in row-major order,
//! masked cells with empty values.
//!
//! Binary (little-endian): magic `SPCG`, `u32 nx`, `u32 ny`, then `nx * ny`
//! `f64` attack values followed by `nx * ny` `f64` defend values, both
//! row-major. Masked cells are NaN.

use std::io::{self, Read, Write};

use super::ControlGrid;

pub const GRID_MAGIC: &[u8; 4] = b"SPCG";

pub fn write_grid_csv<W: Write>(grid: &ControlGrid, writer: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cx", "cy", "attack", "defend"])?;
    for i in 0..grid.spec.len() {
        let c = grid.spec.center(i);
        let (a, d) = if grid.spec.is_masked(i) {
            (String::new(), String::new())
        } else {
            (grid.attack[i].to_string(), grid.defend[i].to_string())
        };
        w.write_record([c.x.to_string(), c.y.to_string(), a, d])?;
    }
    w.flush()
}

pub fn write_grid_binary<W: Write>(grid: &ControlGrid, mut writer: W) -> io::Result<()> {
    let to_u32 = |n: usize| u32::try_from(n).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "grid too large"));
    writer.write_all(GRID_MAGIC)?;
    writer.write_all(&to_u32(grid.spec.nx)?.to_le_bytes())?;
    writer.write_all(&to_u32(grid.spec.ny)?.to_le_bytes())?;
    for plane in [&grid.attack, &grid.defend] {
        for (i, v) in plane.iter().enumerate() {
            let v = if grid.spec.is_masked(i) { f64::NAN } else { *v };
            writer.write_all(&v.to_le_bytes())?;
        }
    }
    writer.flush()
}

/// Decoded binary grid block: `(nx, ny, attack, defend)`.
pub fn read_grid_binary<R: Read>(mut reader: R) -> io::Result<(usize, usize, Vec<f64>, Vec<f64>)> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != GRID_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "not an SPCG grid block"));
    }
    let mut word = [0u8; 4];
    reader.read_exact(&mut word)?;
    let nx = u32::from_le_bytes(word) as usize;
    reader.read_exact(&mut word)?;
    let ny = u32::from_le_bytes(word) as usize;
    let mut plane = || -> io::Result<Vec<f64>> {
        let mut out = Vec::with_capacity(nx * ny);
        let mut buf = [0u8; 8];
        for _ in 0..nx * ny {
            reader.read_exact(&mut buf)?;
            out.push(f64::from_le_bytes(buf));
        }
        Ok(out)
    };
    let attack = plane()?;
    let defend = plane()?;
    Ok((nx, ny, attack, defend))
}
