//! MNIST IDX reading/writing, thresholding, and labelled splits.
//!
//! IDX layout: a big-endian `u32` magic (`0x0000_0803` for images,
//! `0x0000_0801` for labels), big-endian `u32` dimension sizes, then an
//! unsigned-byte payload.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::image::BinaryImage;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const DEFAULT_THRESHOLD: u8 = 127;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("bad IDX magic {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("truncated IDX file: need {needed} bytes, have {available}")]
    TruncatedFile { needed: usize, available: usize },
    #[error("IDX payload is {actual} bytes but the header declares {declared}")]
    DimensionMismatch { declared: usize, actual: usize },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("label {0} is not a digit")]
    BadLabel(u8),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<DatasetError>,
    },
}

/// An 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u8>,
}

fn read_be_u32(bytes: &[u8], at: usize) -> Result<u32, DatasetError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DatasetError::TruncatedFile { needed: at + 4, available: bytes.len() })
}

fn payload(bytes: &[u8], header_len: usize, declared: usize) -> Result<&[u8], DatasetError> {
    let available = bytes.len() - header_len;
    match available.cmp(&declared) {
        std::cmp::Ordering::Less => Err(DatasetError::TruncatedFile { needed: header_len + declared, available: bytes.len() }),
        std::cmp::Ordering::Greater => Err(DatasetError::DimensionMismatch { declared, actual: available }),
        std::cmp::Ordering::Equal => Ok(&bytes[header_len..]),
    }
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), DatasetError> {
    let found = read_be_u32(bytes, 0)?;
    if found != expected {
        return Err(DatasetError::BadMagic { expected, found });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<GrayImage>, DatasetError> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = read_be_u32(bytes, 4)? as usize;
    let rows = read_be_u32(bytes, 8)? as usize;
    let cols = read_be_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let data = payload(bytes, 16, count * size)?;
    if size == 0 {
        return Ok(vec![GrayImage { rows, cols, data: Vec::new() }; count]);
    }
    Ok(data.chunks_exact(size).map(|c| GrayImage { rows, cols, data: c.to_vec() }).collect())
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DatasetError> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = read_be_u32(bytes, 4)? as usize;
    Ok(payload(bytes, 8, count)?.to_vec())
}

/// Panics if the images do not all share one shape.
pub fn write_idx_images<W: Write>(mut w: W, images: &[GrayImage]) -> std::io::Result<()> {
    let (rows, cols) = images.first().map_or((0, 0), |g| (g.rows, g.cols));
    assert!(images.iter().all(|g| g.rows == rows && g.cols == cols && g.data.len() == rows * cols));
    w.write_all(&IMAGE_MAGIC.to_be_bytes())?;
    for dim in [images.len(), rows, cols] {
        w.write_all(&(dim as u32).to_be_bytes())?;
    }
    for g in images {
        w.write_all(&g.data)?;
    }
    w.flush()
}

pub fn write_idx_labels<W: Write>(mut w: W, labels: &[u8]) -> std::io::Result<()> {
    w.write_all(&LABEL_MAGIC.to_be_bytes())?;
    w.write_all(&(labels.len() as u32).to_be_bytes())?;
    w.write_all(labels)?;
    w.flush()
}

/// Object iff `gray > threshold`.
pub fn binarize(gray: &GrayImage, threshold: u8) -> BinaryImage {
    BinaryImage::from_pixels(gray.cols, gray.rows, gray.data.iter().map(|&v| v > threshold).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSample {
    pub image: BinaryImage,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub image_path: PathBuf,
    pub label_path: PathBuf,
    pub threshold: u8,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub samples: Vec<LabeledSample>,
    pub provenance: Provenance,
}

fn read_file(path: &Path) -> Result<Vec<u8>, DatasetError> {
    fs::read(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })
}

fn in_file<T>(path: &Path, r: Result<T, DatasetError>) -> Result<T, DatasetError> {
    r.map_err(|e| DatasetError::InFile { path: path.to_path_buf(), source: Box::new(e) })
}

/// Loads an image/label file pair in file order. `limit` keeps only a
/// file-order prefix.
pub fn load_split(image_path: &Path, label_path: &Path, threshold: u8, limit: Option<usize>) -> Result<DatasetSplit, DatasetError> {
    let images = in_file(image_path, parse_idx_images(&read_file(image_path)?))?;
    let labels = in_file(label_path, parse_idx_labels(&read_file(label_path)?))?;
    if images.len() != labels.len() {
        return Err(DatasetError::CountMismatch { images: images.len(), labels: labels.len() });
    }
    let take = limit.unwrap_or(images.len()).min(images.len());
    let samples = images
        .iter()
        .zip(&labels)
        .take(take)
        .map(|(g, &label)| {
            if label > 9 {
                return Err(DatasetError::BadLabel(label));
            }
            Ok(LabeledSample { image: binarize(g, threshold), label })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DatasetSplit {
        samples,
        provenance: Provenance { image_path: image_path.to_path_buf(), label_path: label_path.to_path_buf(), threshold, limit },
    })
}

impl DatasetError {
    /// The innermost error, skipping file-context wrappers.
    pub fn root(&self) -> &DatasetError {
        match self {
            DatasetError::InFile { source, .. } => source.root(),
            other => other,
        }
    }
}
