//! Dataset ingestion and bit-exact persistence.
//!
//! Four little-endian binary formats, each with a four-byte magic and a
//! `u32` version:
//!
//! | magic  | contents                                                      |
//! |--------|---------------------------------------------------------------|
//! | `BCOD` | code database: 32-byte header (magic, version, N as u64, K as u32, zero padding), N rows of `ceil(K/8)` packed code bytes, then N `u32` labels |
//! | `BWGT` | bit weights: magic, version, K as u32, then K `f64` values    |
//! | `BMDL` | hash model: magic, version, kind (0 = LSH, 1 = ITQ), seed as u64, D and K as u32, then the mean (D), projection (D*K, row-major) and rotation (K*K, row-major) as `f64` blocks |
//! | `BTRP` | triplet batch: magic, version, K as u32, count and seed as u64, then per triplet the packed `a`, `b`, `c` ACDV rows, then count quadruplet index tuples as 4 `u64` each |
//!
//! Code rows pack bit k into byte `k / 8` at position `k % 8` (LSB-first),
//! matching the in-memory word layout, and every save/load pair is a
//! bit-exact identity. Codes produced by other tools can be imported by
//! writing the `BCOD` layout. Feature ingestion (CSV and IDX) lives in
//! [`load_features_csv`] and [`load_idx`].

mod binary;
mod features;

pub use binary::{
    load_codes, load_model, load_triplets, load_weights, save_codes, save_model, save_triplets,
    save_weights, save_weights_text,
};
pub use features::{load_features_csv, load_idx};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(buf: &'a [u8], path: &'a Path) -> Self {
        Self { buf, pos: 0, path }
    }

    pub(crate) fn err(&self, msg: impl Into<String>) -> Error {
        Error::format(self.path, msg)
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let slice = &self.buf[self.pos..end];
                self.pos = end;
                Ok(slice)
            }
            None => Err(self.err(format!(
                "unexpected end of file: wanted {n} bytes at offset {}, file has {}",
                self.pos,
                self.buf.len()
            ))),
        }
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn expect_magic(&mut self, magic: &[u8; 4]) -> Result<()> {
        let found = self.take(4)?;
        if found != magic {
            return Err(self.err(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(found),
                String::from_utf8_lossy(magic)
            )));
        }
        Ok(())
    }

    pub(crate) fn expect_version(&mut self, version: u32) -> Result<()> {
        let found = self.u32()?;
        if found != version {
            return Err(self.err(format!("unsupported version {found}, expected {version}")));
        }
        Ok(())
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(self.err(format!(
                "{} unexpected trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}
