//! Feature ingestion: numeric CSV and IDX (the MNIST distribution format).

use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hashing::FeatureMatrix;

/// Loads a rectangular numeric CSV (comma separator, `.` decimal point,
/// UTF-8). A header row is detected by a non-numeric first record; it is
/// required when `label_column` names the class column, whose cells must
/// be non-negative integers.
pub fn load_features_csv(
    path: impl AsRef<Path>,
    label_column: Option<&str>,
) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(File::open(path)?);

    let mut records = reader.records();
    let first = match records.next() {
        Some(record) => record.map_err(csv_error)?,
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty CSV file".into(),
            })
        }
    };

    let header: Option<Vec<String>> = if first.iter().any(|cell| cell.parse::<f64>().is_err()) {
        Some(first.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let label_index = match (label_column, &header) {
        (None, _) => None,
        (Some(name), Some(columns)) => {
            let idx = columns.iter().position(|c| c == name).ok_or(Error::Parse {
                line: 1,
                msg: format!("label column {name:?} not found in header"),
            })?;
            Some(idx)
        }
        (Some(name), None) => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("label column {name:?} requires a header row"),
            })
        }
    };

    let mut width = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<u32> = Vec::new();

    let data_records = if header.is_some() {
        None.into_iter().chain(records)
    } else {
        Some(Ok(first)).into_iter().chain(records)
    };

    let mut line = usize::from(header.is_some());
    for record in data_records {
        let record = record.map_err(csv_error)?;
        line += 1;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(line);

        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                line,
                msg: format!("row has {} fields, expected {expected}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, cell) in record.iter().enumerate() {
            if Some(col) == label_index {
                let label: u32 = cell.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("label cell {cell:?} is not a non-negative integer"),
                })?;
                labels.push(label);
            } else {
                let value: f64 = cell.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("cell {cell:?} is not a number"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("cell {cell:?} is not finite"),
                    });
                }
                row.push(value);
            }
        }
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "CSV file has a header but no data rows".into(),
        });
    }
    FeatureMatrix::from_rows(&rows, label_index.map(|_| labels))
}

fn csv_error(err: csv::Error) -> Error {
    let line = err
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or_default();
    Error::Parse {
        line,
        msg: err.to_string(),
    }
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(reader: &super::ByteReader<'_>, bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| reader.err("unexpected end of file in IDX header"))
}

/// Loads an IDX image/label file pair into pixel features scaled to
/// `[0, 1]`. IDX headers are big-endian, per that format.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let images = std::fs::read(images_path)?;
    let labels = std::fs::read(labels_path)?;
    let img_reader = super::ByteReader::new(&images, images_path);
    let lbl_reader = super::ByteReader::new(&labels, labels_path);

    let magic = be_u32(&img_reader, &images, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(img_reader.err(format!(
            "bad IDX image magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"
        )));
    }
    let n = be_u32(&img_reader, &images, 4)? as usize;
    let rows = be_u32(&img_reader, &images, 8)? as usize;
    let cols = be_u32(&img_reader, &images, 12)? as usize;
    let dim = rows
        .checked_mul(cols)
        .ok_or_else(|| img_reader.err("IDX image dimensions overflow"))?;
    let expected = n
        .checked_mul(dim)
        .and_then(|p| p.checked_add(16))
        .ok_or_else(|| img_reader.err("IDX image dimensions overflow"))?;
    if images.len() != expected {
        return Err(img_reader.err(format!(
            "IDX image payload is {} bytes, expected {expected} for {n} images of {rows}x{cols}",
            images.len()
        )));
    }

    let magic = be_u32(&lbl_reader, &labels, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(lbl_reader.err(format!(
            "bad IDX label magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"
        )));
    }
    let n_labels = be_u32(&lbl_reader, &labels, 4)? as usize;
    if labels.len() != n_labels + 8 {
        return Err(lbl_reader.err(format!(
            "IDX label payload is {} bytes, expected {} for {n_labels} labels",
            labels.len(),
            n_labels + 8
        )));
    }
    if n != n_labels {
        return Err(lbl_reader.err(format!(
            "{n} images in {} but {n_labels} labels",
            images_path.display()
        )));
    }

    let pixels = &images[16..];
    let data = DMatrix::from_fn(n, dim, |r, c| f64::from(pixels[r * dim + c]) / 255.0);
    let labels = labels[8..].iter().map(|&b| u32::from(b)).collect();
    FeatureMatrix::new(data, Some(labels))
}
