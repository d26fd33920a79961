//! On-disk layout, little-endian:
//!
//! ```text
//! "CLT1" | version u8 | kind u8 | variant u8 | reserved u8 = 0 | N u64
//! payload: N elements for n = 1..=N (u64 for lambda64, u8 otherwise)
//! CRC32 of the payload bytes, u32
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crc32fast::Hasher;

use super::{RangeTable, TableData, TableKind, H_SENTINEL};
use crate::error::{Error, Result};
use crate::lambda::LambdaVariant;

pub const MAGIC: &[u8; 4] = b"CLT1";
pub const VERSION: u8 = 1;
const HEADER_LEN: u64 = 16;
const CHUNK: usize = 1 << 16;

pub fn write_table(t: &RangeTable, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_table_to(t, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_table_to<W: Write>(t: &RangeTable, w: &mut W) -> Result<()> {
    let mut header = [0u8; HEADER_LEN as usize];
    header[..4].copy_from_slice(MAGIC);
    header[4] = VERSION;
    header[5] = t.kind().code();
    header[6] = t.variant().code();
    header[7] = 0;
    header[8..].copy_from_slice(&t.limit().to_le_bytes());
    w.write_all(&header)?;

    let mut crc = Hasher::new();
    match t.data() {
        TableData::Narrow(v) => {
            let payload = &v[1..];
            crc.update(payload);
            w.write_all(payload)?;
        }
        TableData::Wide(v) => {
            let mut buf = Vec::with_capacity(CHUNK * 8);
            for chunk in v[1..].chunks(CHUNK) {
                buf.clear();
                chunk.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
                crc.update(&buf);
                w.write_all(&buf)?;
            }
        }
    }
    w.write_all(&crc.finalize().to_le_bytes())?;
    Ok(())
}

pub fn read_table(path: impl AsRef<Path>) -> Result<RangeTable> {
    read_table_from(BufReader::new(File::open(path)?))
}

/// Counts bytes so a short read can report how much was actually there.
struct Counting<R> {
    inner: R,
    read: u64,
}

impl<R: Read> Counting<R> {
    fn fill(&mut self, buf: &mut [u8], expected_total: u64) -> Result<()> {
        let mut filled = 0;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(Error::Truncated {
                        expected: expected_total,
                        found: self.read,
                    })
                }
                Ok(k) => {
                    filled += k;
                    self.read += k as u64;
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }
}

pub fn read_table_from<R: Read>(reader: R) -> Result<RangeTable> {
    let mut r = Counting {
        inner: reader,
        read: 0,
    };
    let mut header = [0u8; HEADER_LEN as usize];
    r.fill(&mut header, HEADER_LEN)?;
    if &header[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if header[4] != VERSION {
        return Err(Error::UnsupportedVersion(header[4]));
    }
    let kind = TableKind::from_code(header[5])
        .ok_or_else(|| Error::BadHeader(format!("unknown kind byte {}", header[5])))?;
    let variant = LambdaVariant::from_code(header[6])
        .ok_or_else(|| Error::BadHeader(format!("unknown variant byte {}", header[6])))?;
    if header[7] != 0 {
        return Err(Error::BadHeader("reserved byte is not zero".into()));
    }
    let limit = u64::from_le_bytes(header[8..].try_into().unwrap());
    let payload_len = limit
        .checked_mul(kind.element_width())
        .ok_or_else(|| Error::BadHeader(format!("implausible limit {limit}")))?;
    let total = HEADER_LEN + payload_len + 4;

    let mut crc = Hasher::new();
    let data = match kind {
        TableKind::Lambda64 => {
            let mut v = vec![0u64; limit as usize + 1];
            let mut buf = vec![0u8; CHUNK * 8];
            for chunk in v[1..].chunks_mut(CHUNK) {
                let bytes = &mut buf[..chunk.len() * 8];
                r.fill(bytes, total)?;
                crc.update(bytes);
                for (x, b) in chunk.iter_mut().zip(bytes.chunks_exact(8)) {
                    *x = u64::from_le_bytes(b.try_into().unwrap());
                }
            }
            TableData::Wide(v)
        }
        TableKind::L8 | TableKind::H8 => {
            let mut v = vec![0u8; limit as usize + 1];
            r.fill(&mut v[1..], total)?;
            crc.update(&v[1..]);
            if kind == TableKind::H8 {
                v[0] = H_SENTINEL;
            }
            TableData::Narrow(v)
        }
    };
    let mut tail = [0u8; 4];
    r.fill(&mut tail, total)?;
    let stored = u32::from_le_bytes(tail);
    let computed = crc.finalize();
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    let mut extra = [0u8; 1];
    if r.inner.read(&mut extra)? != 0 {
        return Err(Error::BadHeader("trailing bytes after checksum".into()));
    }
    Ok(RangeTable::new(kind, variant, limit, data))
}
