//! The BCOD / BWGT / BMDL / BTRP binary formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::code::{Acdv, BinaryCode, CodeDatabase, MAX_BITS};
use crate::error::{Error, Result};
use crate::hashing::{HashKind, HashModel};
use crate::learner::BitWeights;
use crate::sampler::{AcdvTriplet, TripletBatch};

use super::ByteReader;

const FORMAT_VERSION: u32 = 1;
const CODE_MAGIC: &[u8; 4] = b"BCOD";
const WEIGHT_MAGIC: &[u8; 4] = b"BWGT";
const MODEL_MAGIC: &[u8; 4] = b"BMDL";
const TRIPLET_MAGIC: &[u8; 4] = b"BTRP";

const CODE_HEADER_LEN: usize = 32;

fn check_bits_field(reader: &ByteReader<'_>, bits: u32) -> Result<usize> {
    if bits == 0 || bits as usize > MAX_BITS {
        return Err(reader.err(format!("bit count {bits} out of range 1..={MAX_BITS}")));
    }
    Ok(bits as usize)
}

/// Writes a code database in the `BCOD` layout.
pub fn save_codes(path: impl AsRef<Path>, db: &CodeDatabase) -> Result<()> {
    let bits = db.bits();
    let mut buf = Vec::with_capacity(CODE_HEADER_LEN + db.len() * (bits.div_ceil(8) + 4));
    buf.extend_from_slice(CODE_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(db.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(bits as u32).to_le_bytes());
    buf.resize(CODE_HEADER_LEN, 0);
    for code in db.codes() {
        buf.extend_from_slice(&code.to_packed_bytes());
    }
    for &label in db.labels() {
        buf.extend_from_slice(&label.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Loads a `BCOD` code database.
pub fn load_codes(path: impl AsRef<Path>) -> Result<CodeDatabase> {
    let path = path.as_ref();
    let buf = fs::read(path)?;
    let mut r = ByteReader::new(&buf, path);
    r.expect_magic(CODE_MAGIC)?;
    r.expect_version(FORMAT_VERSION)?;
    let n = r.u64()? as usize;
    let raw_bits = r.u32()?;
    let bits = check_bits_field(&r, raw_bits)?;
    let reserved = r.take(CODE_HEADER_LEN - 20)?;
    if reserved.iter().any(|&b| b != 0) {
        return Err(r.err("reserved header bytes must be zero"));
    }
    let row_bytes = bits.div_ceil(8);
    let mut codes = Vec::with_capacity(n);
    for _ in 0..n {
        let row = r.take(row_bytes)?;
        codes.push(
            BinaryCode::from_packed_bytes(bits, row).map_err(|e| r.err(e.to_string()))?,
        );
    }
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(r.u32()?);
    }
    r.finish()?;
    CodeDatabase::new(codes, labels).map_err(|e| Error::format(path, e.to_string()))
}

/// Writes bit weights in the `BWGT` layout.
pub fn save_weights(path: impl AsRef<Path>, weights: &BitWeights) -> Result<()> {
    let mut buf = Vec::with_capacity(12 + 8 * weights.len());
    buf.extend_from_slice(WEIGHT_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(weights.len() as u32).to_le_bytes());
    for &v in weights.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Loads `BWGT` weights, rejecting negative or non-finite values.
pub fn load_weights(path: impl AsRef<Path>) -> Result<BitWeights> {
    let path = path.as_ref();
    let buf = fs::read(path)?;
    let mut r = ByteReader::new(&buf, path);
    r.expect_magic(WEIGHT_MAGIC)?;
    r.expect_version(FORMAT_VERSION)?;
    let raw_bits = r.u32()?;
    let bits = check_bits_field(&r, raw_bits)?;
    let mut values = Vec::with_capacity(bits);
    for k in 0..bits {
        let v = r.f64()?;
        if !v.is_finite() || v < 0.0 {
            return Err(r.err(format!(
                "weight {k} must be non-negative and finite, got {v}"
            )));
        }
        values.push(v);
    }
    r.finish()?;
    BitWeights::new(values).map_err(|e| Error::format(path, e.to_string()))
}

/// Dumps weights as plain text, one value per line, for inspection.
pub fn save_weights_text(path: impl AsRef<Path>, weights: &BitWeights) -> Result<()> {
    let mut out = String::new();
    for &v in weights.as_slice() {
        out.push_str(&format!("{v}\n"));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Writes a hash model in the `BMDL` layout.
pub fn save_model(path: impl AsRef<Path>, model: &HashModel) -> Result<()> {
    let (d, k) = (model.dim(), model.bits());
    let mut buf = Vec::with_capacity(28 + 8 * (d + d * k + k * k));
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let kind: u32 = match model.kind() {
        HashKind::Lsh => 0,
        HashKind::Itq => 1,
    };
    buf.extend_from_slice(&kind.to_le_bytes());
    buf.extend_from_slice(&model.seed().to_le_bytes());
    buf.extend_from_slice(&(d as u32).to_le_bytes());
    buf.extend_from_slice(&(k as u32).to_le_bytes());
    for &v in model.mean().iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for row in 0..d {
        for col in 0..k {
            buf.extend_from_slice(&model.projection()[(row, col)].to_le_bytes());
        }
    }
    for row in 0..k {
        for col in 0..k {
            buf.extend_from_slice(&model.rotation()[(row, col)].to_le_bytes());
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Loads a `BMDL` hash model, re-validating its invariants.
pub fn load_model(path: impl AsRef<Path>) -> Result<HashModel> {
    let path = path.as_ref();
    let buf = fs::read(path)?;
    let mut r = ByteReader::new(&buf, path);
    r.expect_magic(MODEL_MAGIC)?;
    r.expect_version(FORMAT_VERSION)?;
    let kind = match r.u32()? {
        0 => HashKind::Lsh,
        1 => HashKind::Itq,
        other => return Err(r.err(format!("unknown hash kind tag {other}"))),
    };
    let seed = r.u64()?;
    let d = r.u32()? as usize;
    let raw_bits = r.u32()?;
    let k = check_bits_field(&r, raw_bits)?;
    if d == 0 {
        return Err(r.err("feature dimension must be at least 1"));
    }
    let mut mean = DVector::zeros(d);
    for i in 0..d {
        mean[i] = r.f64()?;
    }
    let mut projection = DMatrix::zeros(d, k);
    for row in 0..d {
        for col in 0..k {
            projection[(row, col)] = r.f64()?;
        }
    }
    let mut rotation = DMatrix::zeros(k, k);
    for row in 0..k {
        for col in 0..k {
            rotation[(row, col)] = r.f64()?;
        }
    }
    r.finish()?;
    HashModel::new(kind, mean, projection, rotation, seed)
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Writes a triplet batch in the `BTRP` layout.
pub fn save_triplets(path: impl AsRef<Path>, batch: &TripletBatch) -> Result<()> {
    let bits = batch.bits();
    let row_bytes = bits.div_ceil(8);
    let mut buf = Vec::with_capacity(28 + batch.len() * (3 * row_bytes + 32));
    buf.extend_from_slice(TRIPLET_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(bits as u32).to_le_bytes());
    buf.extend_from_slice(&(batch.len() as u64).to_le_bytes());
    buf.extend_from_slice(&batch.seed().to_le_bytes());
    for t in batch.triplets() {
        buf.extend_from_slice(&t.dissimilar.to_packed_bytes());
        buf.extend_from_slice(&t.similar_a.to_packed_bytes());
        buf.extend_from_slice(&t.similar_b.to_packed_bytes());
    }
    for source in batch.sources() {
        for &idx in source {
            buf.extend_from_slice(&idx.to_le_bytes());
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Loads a `BTRP` triplet batch.
pub fn load_triplets(path: impl AsRef<Path>) -> Result<TripletBatch> {
    let path = path.as_ref();
    let buf = fs::read(path)?;
    let mut r = ByteReader::new(&buf, path);
    r.expect_magic(TRIPLET_MAGIC)?;
    r.expect_version(FORMAT_VERSION)?;
    let raw_bits = r.u32()?;
    let bits = check_bits_field(&r, raw_bits)?;
    let count = r.u64()? as usize;
    let seed = r.u64()?;
    let row_bytes = bits.div_ceil(8);
    let mut triplets = Vec::with_capacity(count);
    for _ in 0..count {
        let mut rows = [const { Vec::new() }; 3];
        for row in &mut rows {
            *row = r.take(row_bytes)?.to_vec();
        }
        let make = |bytes: &[u8]| -> Result<Acdv> {
            Acdv::from_packed_bytes(bits, bytes).map_err(|e| r.err(e.to_string()))
        };
        let triplet = AcdvTriplet::new(make(&rows[0])?, make(&rows[1])?, make(&rows[2])?)
            .map_err(|e| r.err(e.to_string()))?;
        triplets.push(triplet);
    }
    let mut sources = Vec::with_capacity(count);
    for _ in 0..count {
        sources.push([r.u64()?, r.u64()?, r.u64()?, r.u64()?]);
    }
    r.finish()?;
    TripletBatch::new(bits, triplets, seed, sources)
        .map_err(|e| Error::format(path, e.to_string()))
}
