//! Binary cache for [`PrimeTable`].
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 8    | magic `b"PRMSIEVE"`                     |
//! | 8      | 4    | format version (`1`)                    |
//! | 12     | 4    | reserved, zero                          |
//! | 16     | 8    | limit `X_max`                           |
//! | 24     | 8    | segment size in bytes                   |
//! | 32     | 8    | word count `W`                          |
//! | 40     | 8W   | odd-only bitset, bit `i` marks `2i + 1` |
//!
//! Theta checkpoints are rebuilt on load.

use super::PrimeTable;
use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"PRMSIEVE";
pub const VERSION: u32 = 1;

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

impl PrimeTable {
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&0u32.to_le_bytes())?;
        w.write_all(&self.limit().to_le_bytes())?;
        w.write_all(&(self.segment_bytes() as u64).to_le_bytes())?;
        w.write_all(&(self.words().len() as u64).to_le_bytes())?;
        for word in self.words() {
            w.write_all(&word.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::InvalidInput(format!("{} is not a sieve cache", path.display())));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v)?;
        let version = u32::from_le_bytes(v);
        if version != VERSION {
            return Err(Error::InvalidInput(format!("sieve cache version {version}, expected {VERSION}")));
        }
        r.read_exact(&mut v)?;
        let limit = read_u64(&mut r)?;
        let segment = read_u64(&mut r)? as usize;
        let count = read_u64(&mut r)?;
        if count != limit / 128 + 1 {
            return Err(Error::InvalidInput("sieve cache word count does not match its limit".into()));
        }
        let mut bytes = vec![0u8; count as usize * 8];
        r.read_exact(&mut bytes)?;
        let words = bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
        PrimeTable::from_words(limit, segment, words)
    }

    /// Load from `cache` when it exists and covers `limit`, else sieve.
    pub fn load_or_build(limit: u64, cache: Option<&Path>) -> Result<Self> {
        if let Some(path) = cache {
            if path.exists() {
                let t = Self::read_cache(path)?;
                if t.limit() >= limit {
                    return Ok(t);
                }
            }
        }
        Self::build(limit)
    }
}
