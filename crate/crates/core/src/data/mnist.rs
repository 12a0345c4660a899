//! MNIST IDX ingestion.
//!
//! Big-endian files: images carry magic `0x00000803` followed by the item
//! count, rows and columns; labels carry `0x00000801` and the item count.

use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};
use crate::rng::{streams, RandomStream};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub struct MnistSet {
    /// One flattened image per row, pixels scaled to `[0, 1]`.
    pub images: Mat<f64>,
    pub labels: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
}

impl MnistSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The first `count` items of a seeded shuffle, plus the chosen indices.
    pub fn subset(&self, count: usize, seed: u64) -> Result<(MnistSet, Vec<usize>)> {
        if count == 0 || count > self.len() {
            return Err(Error::usage(format!(
                "subset size {count} outside 1..={}",
                self.len()
            )));
        }
        let mut rng = RandomStream::new(seed, streams::SHUFFLE);
        let idx: Vec<usize> = rng.permutation(self.len()).into_iter().take(count).collect();
        let images = Mat::from_fn(count, self.images.ncols(), |i, j| self.images.read(idx[i], j));
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        Ok((
            MnistSet {
                images,
                labels,
                rows: self.rows,
                cols: self.cols,
            },
            idx,
        ))
    }
}

fn be_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{what}: truncated header")))
}

fn check_magic(found: u32, expected: u32, what: &str) -> Result<()> {
    if found != expected {
        return Err(Error::Format(format!(
            "{what}: bad magic 0x{found:08x}, expected 0x{expected:08x}"
        )));
    }
    Ok(())
}

/// Parses an IDX image file into `(count x rows*cols)` pixels scaled by 1/255.
pub fn parse_images(bytes: &[u8]) -> Result<(Mat<f64>, usize, usize)> {
    check_magic(be_u32(bytes, 0, "images")?, IMAGES_MAGIC, "images")?;
    let count = be_u32(bytes, 4, "images")? as usize;
    let rows = be_u32(bytes, 8, "images")? as usize;
    let cols = be_u32(bytes, 12, "images")? as usize;
    let pixels = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("images: dimensions overflow".into()))?;
    let need = count
        .checked_mul(pixels)
        .and_then(|v| v.checked_add(16))
        .ok_or_else(|| Error::Format("images: dimensions overflow".into()))?;
    if bytes.len() < need {
        return Err(Error::Format(format!(
            "images: truncated file ({} bytes, header promises {need})",
            bytes.len()
        )));
    }
    if bytes.len() > need {
        return Err(Error::Format(format!(
            "images: {} trailing bytes after {count} images",
            bytes.len() - need
        )));
    }
    let data = &bytes[16..];
    let images = Mat::from_fn(count, pixels, |i, j| data[i * pixels + j] as f64 / 255.0);
    Ok((images, rows, cols))
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(be_u32(bytes, 0, "labels")?, LABELS_MAGIC, "labels")?;
    let count = be_u32(bytes, 4, "labels")? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(Error::Format(format!(
            "labels: header promises {count} labels, file holds {}",
            body.len()
        )));
    }
    Ok(body.to_vec())
}

pub fn parse_idx(image_bytes: &[u8], label_bytes: &[u8]) -> Result<MnistSet> {
    let (images, rows, cols) = parse_images(image_bytes)?;
    let labels = parse_labels(label_bytes)?;
    if labels.len() != images.nrows() {
        return Err(Error::Format(format!(
            "{} images but {} labels",
            images.nrows(),
            labels.len()
        )));
    }
    Ok(MnistSet {
        images,
        labels,
        rows,
        cols,
    })
}

pub fn load_mnist_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<MnistSet> {
    let read = |p: &Path| std::fs::read(p).map_err(|e| Error::io(p, e));
    parse_idx(&read(images_path.as_ref())?, &read(labels_path.as_ref())?)
}
