//! Grid function serialization.
//!
//! CSV: a version line `# fracdo-gridfunction v1 n=<n> N=<N> L=<L>`, a header
//! (`x,re,im` or `x1,x2,re,im`) and one row per node.
//!
//! Binary (little endian): magic `FDGF`, version `u32`, `n: u32`, `N: u32`,
//! `L: f64`, 8 reserved zero bytes (32 bytes total), then `re, im` pairs as
//! `f64` in node order.

use super::{GridFunction, TorusGrid};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::{BufRead, Read, Write};

pub const FORMAT_VERSION: u32 = 1;
pub const MAGIC: &[u8; 4] = b"FDGF";
pub const HEADER_BYTES: usize = 32;

pub fn write_csv<W: Write>(u: &GridFunction, mut w: W) -> Result<()> {
    let g = u.grid;
    writeln!(w, "# fracdo-gridfunction v{FORMAT_VERSION} n={} N={} L={}", g.dim, g.n, g.length)?;
    writeln!(w, "{}", if g.dim == 1 { "x,re,im" } else { "x1,x2,re,im" })?;
    for (i, v) in u.values.iter().enumerate() {
        let x = g.node(i);
        for c in &x {
            write!(w, "{c},")?;
        }
        writeln!(w, "{},{}", v.re, v.im)?;
    }
    Ok(())
}

fn header_field(line: &str, key: &str) -> Result<String> {
    line.split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")).map(str::to_string))
        .ok_or_else(|| Error::Format(format!("missing '{key}' in version line")))
}

pub fn read_csv<R: BufRead>(r: R) -> Result<GridFunction> {
    let mut lines = r.lines();
    let first = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
    if !first.starts_with("# fracdo-gridfunction v") {
        return Err(Error::Format("missing version line".into()));
    }
    let version: u32 = first
        .trim_start_matches("# fracdo-gridfunction v")
        .split_whitespace()
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("bad version".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let parse = |s: String| -> Result<f64> { s.parse().map_err(|_| Error::Format(format!("bad number '{s}'"))) };
    let dim = parse(header_field(&first, "n")?)? as usize;
    let n = parse(header_field(&first, "N")?)? as usize;
    let length = parse(header_field(&first, "L")?)?;
    let grid = TorusGrid::new(dim, n, length)?;
    lines.next().ok_or_else(|| Error::Format("missing header".into()))??;
    let mut values = Vec::with_capacity(grid.len());
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != dim + 2 {
            return Err(Error::Format(format!("row {} has {} columns", k + 1, cols.len())));
        }
        let re = parse(cols[dim].trim().to_string())?;
        let im = parse(cols[dim + 1].trim().to_string())?;
        values.push(Complex64::new(re, im));
    }
    GridFunction::new(grid, values)
}

pub fn write_binary<W: Write>(u: &GridFunction, mut w: W) -> Result<()> {
    let g = u.grid;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(g.dim as u32).to_le_bytes())?;
    w.write_all(&(g.n as u32).to_le_bytes())?;
    w.write_all(&g.length.to_le_bytes())?;
    w.write_all(&[0u8; 8])?;
    for v in &u.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridFunction> {
    let mut h = [0u8; HEADER_BYTES];
    r.read_exact(&mut h)?;
    if &h[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(h[o..o + 4].try_into().expect("4 bytes"));
    let version = u32_at(4);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32_at(8) as usize;
    let n = u32_at(12) as usize;
    let length = f64::from_le_bytes(h[16..24].try_into().expect("8 bytes"));
    let grid = TorusGrid::new(dim, n, length)?;
    let mut buf = vec![0u8; grid.len() * 16];
    r.read_exact(&mut buf)?;
    let values = buf
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..16].try_into().expect("8 bytes")),
            )
        })
        .collect();
    GridFunction::new(grid, values)
}
