//! The AFK1 binary field format.
//!
//! Layout (little-endian): magic `AFK1`, version `u32` (= 1), 8 reserved
//! bytes; then `n: u32`, `m: u32`, `n` axis sizes as `u32`, `n` pairs of
//! `f64` box bounds (lo, hi), a mask flag `u8`, the mask as one byte per
//! node when the flag is 1, and finally the values as `f64`, node-major
//! with components inner.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{DomainField, DomainSpec, GridSpec, PeriodicField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AFK1";
const VERSION: u32 = 1;

/// A field read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Periodic(PeriodicField),
    Domain(DomainField),
}

impl AnyField {
    pub fn grid(&self) -> &GridSpec {
        match self {
            AnyField::Periodic(f) => f.grid(),
            AnyField::Domain(f) => f.grid(),
        }
    }
    pub fn m(&self) -> usize {
        match self {
            AnyField::Periodic(f) => f.m(),
            AnyField::Domain(f) => f.m(),
        }
    }
    pub fn values(&self) -> &[f64] {
        match self {
            AnyField::Periodic(f) => f.values(),
            AnyField::Domain(f) => f.values(),
        }
    }
    pub fn mask(&self) -> Option<&[bool]> {
        match self {
            AnyField::Periodic(_) => None,
            AnyField::Domain(f) => Some(f.mask()),
        }
    }
}

pub fn encode_afk1(grid: &GridSpec, m: usize, mask: Option<&[bool]>, values: &[f64]) -> Result<Vec<u8>> {
    if values.len() != grid.len() * m {
        return Err(Error::DimensionMismatch("values do not match grid".into()));
    }
    let mut buf = Vec::with_capacity(64 + values.len() * 8 + grid.len());
    buf.write_all(MAGIC)?;
    buf.write_u32::<LittleEndian>(VERSION)?;
    buf.write_all(&[0u8; 8])?;
    buf.write_u32::<LittleEndian>(grid.n() as u32)?;
    buf.write_u32::<LittleEndian>(m as u32)?;
    for &d in &grid.dims {
        buf.write_u32::<LittleEndian>(d as u32)?;
    }
    for a in 0..grid.n() {
        buf.write_f64::<LittleEndian>(grid.lo[a])?;
        buf.write_f64::<LittleEndian>(grid.hi[a])?;
    }
    match mask {
        Some(mask) => {
            buf.write_u8(1)?;
            buf.extend(mask.iter().map(|&b| b as u8));
        }
        None => buf.write_u8(0)?,
    }
    for &v in values {
        buf.write_f64::<LittleEndian>(v)?;
    }
    Ok(buf)
}

pub fn decode_afk1(mut r: impl Read) -> Result<AnyField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("missing AFK1 magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported AFK1 version {version}")));
    }
    let mut reserved = [0u8; 8];
    r.read_exact(&mut reserved)?;
    let n = r.read_u32::<LittleEndian>()? as usize;
    let m = r.read_u32::<LittleEndian>()? as usize;
    if n == 0 || n > 8 || m == 0 || m > 1024 {
        return Err(Error::Format(format!("implausible header n = {n}, m = {m}")));
    }
    let dims = (0..n).map(|_| r.read_u32::<LittleEndian>().map(|v| v as usize)).collect::<std::io::Result<Vec<_>>>()?;
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for _ in 0..n {
        lo.push(r.read_f64::<LittleEndian>()?);
        hi.push(r.read_f64::<LittleEndian>()?);
    }
    let grid = GridSpec::new(dims, lo, hi)?;
    let mask = match r.read_u8()? {
        0 => None,
        1 => {
            let mut bytes = vec![0u8; grid.len()];
            r.read_exact(&mut bytes)?;
            Some(bytes.into_iter().map(|b| b != 0).collect::<Vec<_>>())
        }
        f => return Err(Error::Format(format!("bad mask flag {f}"))),
    };
    let mut values = vec![0.0; grid.len() * m];
    r.read_f64_into::<LittleEndian>(&mut values)?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    Ok(match mask {
        None => AnyField::Periodic(PeriodicField::new(grid, m, values)?),
        Some(mask) => AnyField::Domain(DomainField::new(grid, m, mask, values, DomainSpec::Mask)?),
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_afk1(path: &Path, field: &AnyField) -> Result<()> {
    let bytes = encode_afk1(field.grid(), field.m(), field.mask(), field.values())?;
    write_atomic(path, &bytes)
}

pub fn read_afk1(path: &Path) -> Result<AnyField> {
    let bytes = std::fs::read(path)?;
    decode_afk1(bytes.as_slice())
}

/// CSV with node coordinates and the Euclidean magnitude of the field.
pub fn write_magnitude_csv(path: &Path, field: &AnyField) -> Result<()> {
    let grid = field.grid();
    let m = field.m();
    let mut out = String::new();
    for a in 0..grid.n() {
        out.push_str(&format!("x{a},"));
    }
    out.push_str("magnitude\n");
    let mask = field.mask();
    let mut x = vec![0.0; grid.n()];
    for (flat, v) in field.values().chunks_exact(m).enumerate() {
        if mask.is_some_and(|mk| !mk[flat]) {
            continue;
        }
        grid.node_into(flat, &mut x);
        for c in &x {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!("{}\n", v.iter().map(|t| t * t).sum::<f64>().sqrt()));
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_both_kinds() {
        let g = GridSpec::unit_cube(2, 8).unwrap();
        let p = PeriodicField::from_fn(g, 3, |x, o| {
            o[0] = x[0];
            o[1] = x[1] * 1e-300;
            o[2] = 1.0 / 3.0;
        })
        .unwrap();
        let bytes = encode_afk1(p.grid(), 3, None, p.values()).unwrap();
        assert_eq!(&bytes[..4], b"AFK1");
        assert_eq!(decode_afk1(bytes.as_slice()).unwrap(), AnyField::Periodic(p));

        let dom = DomainSpec::unit_disk();
        let gd = dom.grid(8, 0.25).unwrap();
        let f = DomainField::from_fn(dom, gd, 2, |x, o| o.copy_from_slice(x)).unwrap();
        let bytes = encode_afk1(f.grid(), 2, Some(f.mask()), f.values()).unwrap();
        match decode_afk1(bytes.as_slice()).unwrap() {
            AnyField::Domain(back) => {
                assert_eq!(back.values(), f.values());
                assert_eq!(back.mask(), f.mask());
            }
            _ => panic!("expected a domain field"),
        }
    }

    #[test]
    fn corrupt_input_rejected() {
        assert!(decode_afk1(&b"AFK2\x01\0\0\0\0\0\0\0\0\0\0\0"[..]).is_err());
        let g = GridSpec::unit_cube(1, 8).unwrap();
        let mut bytes = encode_afk1(&g, 1, None, &[0.0; 8]).unwrap();
        bytes.pop();
        assert!(decode_afk1(bytes.as_slice()).is_err());
    }
}
