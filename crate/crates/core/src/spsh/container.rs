//! Binary persistence of sphere-shaping tables.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic      4 bytes  "SPSH"
//! version    u16      1
//! algorithm  u8       0 = ESS trellis, 1 = shell-mapping tables
//! precision  u8       0 = full, 1 = bounded
//! n          u32      blocklength
//! n_a        u32      amplitude levels
//! e_max      u64      admissible maximum energy
//! shells     u32      L
//! n_m, n_p   u8, u8   mantissa/exponent widths (0 for full precision)
//! rows       u32      number of stored rows
//! per row:   u32 key (ESS: remaining length ℓ; SM: subsequence length)
//!            u32 entry count (= L)
//!            entries, by shell index:
//!              full:    u32 byte count, then the value's bytes (LE)
//!              bounded: u64 mantissa, u16 exponent
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_bigint::BigUint;

use super::{BoundedNumber, EssTrellis, Precision, SmTables, SphereShaper};
use crate::alphabet::AmplitudeAlphabet;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SPSH";
pub const VERSION: u16 = 1;

/// A persisted table set of either indexer.
#[derive(Debug, Clone, PartialEq)]
pub enum StoredShaper {
    Ess(EssTrellis),
    Sm(SmTables),
}

impl StoredShaper {
    pub fn as_shaper(&self) -> &dyn SphereShaper {
        match self {
            StoredShaper::Ess(t) => t,
            StoredShaper::Sm(t) => t,
        }
    }
}

fn write_header(out: &mut impl Write, algo: u8, s: &dyn SphereShaper, rows: usize) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    let (tag, n_m, n_p) = match s.precision() {
        Precision::Full => (0u8, 0u8, 0u8),
        Precision::Bounded {
            mantissa_bits,
            exponent_bits,
        } => (1, mantissa_bits as u8, exponent_bits as u8),
    };
    out.write_all(&[algo, tag])?;
    out.write_all(&(s.n() as u32).to_le_bytes())?;
    out.write_all(&(s.alphabet().len() as u32).to_le_bytes())?;
    out.write_all(&s.e_max().to_le_bytes())?;
    out.write_all(&(s.num_shells() as u32).to_le_bytes())?;
    out.write_all(&[n_m, n_p])?;
    out.write_all(&(rows as u32).to_le_bytes())?;
    Ok(())
}

fn write_row(out: &mut impl Write, key: usize, row: &[BigUint], precision: Precision) -> Result<()> {
    out.write_all(&(key as u32).to_le_bytes())?;
    out.write_all(&(row.len() as u32).to_le_bytes())?;
    for v in row {
        match precision {
            Precision::Full => {
                let bytes = v.to_bytes_le();
                out.write_all(&(bytes.len() as u32).to_le_bytes())?;
                out.write_all(&bytes)?;
            }
            Precision::Bounded {
                mantissa_bits,
                exponent_bits,
            } => {
                let b = BoundedNumber::round_down(v, mantissa_bits, exponent_bits)?;
                out.write_all(&b.mantissa.to_le_bytes())?;
                out.write_all(&(b.exponent as u16).to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn write(out: &mut impl Write, stored: &StoredShaper) -> Result<()> {
    match stored {
        StoredShaper::Ess(t) => {
            write_header(out, 0, t, t.rows().len())?;
            for (len, row) in t.rows().iter().enumerate() {
                write_row(out, len, row, t.precision())?;
            }
        }
        StoredShaper::Sm(t) => {
            write_header(out, 1, t, t.tables().len())?;
            for (len, row) in t.tables() {
                write_row(out, *len, row, t.precision())?;
            }
        }
    }
    Ok(())
}

struct Cursor<R> {
    inner: R,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Parse(format!("truncated table file: {e}")))?;
        Ok(buf)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
}

pub fn read(input: impl Read) -> Result<StoredShaper> {
    let mut c = Cursor { inner: input };
    if &c.bytes::<4>()? != MAGIC {
        return Err(Error::Parse("not a sphere-shaping table file".into()));
    }
    let version = c.u16()?;
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported table file version {version}")));
    }
    let algo = c.u8()?;
    let tag = c.u8()?;
    let n = c.u32()? as usize;
    let n_a = c.u32()? as usize;
    let e_max = c.u64()?;
    let shells = c.u32()? as usize;
    let (n_m, n_p) = (c.u8()? as u32, c.u8()? as u32);
    let precision = match tag {
        0 => Precision::Full,
        1 => Precision::bounded(n_m, n_p),
        t => return Err(Error::Parse(format!("unknown precision tag {t}"))),
    };
    let alph = AmplitudeAlphabet::with_size(n_a)?;
    let count = c.u32()? as usize;
    let mut rows = BTreeMap::new();
    for _ in 0..count {
        let key = c.u32()? as usize;
        let len = c.u32()? as usize;
        if len != shells {
            return Err(Error::Parse(format!("row {key} has {len} entries, expected {shells}")));
        }
        let mut row = Vec::with_capacity(len);
        for _ in 0..len {
            let v = match precision {
                Precision::Full => {
                    let size = c.u32()? as usize;
                    let mut buf = vec![0u8; size];
                    c.inner
                        .read_exact(&mut buf)
                        .map_err(|e| Error::Parse(format!("truncated table file: {e}")))?;
                    BigUint::from_bytes_le(&buf)
                }
                Precision::Bounded { .. } => {
                    let mantissa = c.u64()?;
                    let exponent = c.u16()? as u32;
                    BoundedNumber { mantissa, exponent }.value()
                }
            };
            row.push(v);
        }
        if rows.insert(key, row).is_some() {
            return Err(Error::Parse(format!("duplicate row {key}")));
        }
    }
    match algo {
        0 => {
            if rows.keys().copied().ne(0..=n) {
                return Err(Error::Parse("trellis rows must cover 0..=n".into()));
            }
            let rows = rows.into_values().collect();
            EssTrellis::from_parts(n, alph, e_max, precision, rows).map(StoredShaper::Ess)
        }
        1 => SmTables::from_parts(n, alph, e_max, precision, rows).map(StoredShaper::Sm),
        a => Err(Error::Parse(format!("unknown algorithm tag {a}"))),
    }
}
