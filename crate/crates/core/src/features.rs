//! The 125-dimensional bay feature vector.
//!
//! Layout (version [`LAYOUT_VERSION`]): five blocks of 25, in order global,
//! top-left, top-right, bottom-left, bottom-right quadrant. Inside a block
//! the directions run left, right, top, bottom with six features each
//! (f1..f6, see [`DirectionalBayFeatures`]), followed by the perimeter
//! contact count.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::deficiency::{build_deficiency_map, perimeter_contact_count, scan_direction, Direction, DirectionalBayFeatures};
use crate::geometry::{graham_scan, polygon_centroid};
use crate::image::BinaryImage;
use crate::par;

pub const LAYOUT_VERSION: &str = "bays125.v1";
pub const BLOCK_LEN: usize = 25;
pub const FEATURE_COUNT: usize = 125;
pub const BLOCK_NAMES: [&str; 5] = ["global", "q_tl", "q_tr", "q_bl", "q_br"];

pub type FeatureBlock = [f64; BLOCK_LEN];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("image has no object pixels")]
    EmptyImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn zeros() -> Self {
        Self([0.0; FEATURE_COUNT])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn global_block(&self) -> &[f64] {
        &self.0[..BLOCK_LEN]
    }

    /// Quadrant blocks in order top-left, top-right, bottom-left, bottom-right.
    pub fn quadrant_block(&self, q: usize) -> &[f64] {
        assert!(q < 4);
        let start = BLOCK_LEN * (q + 1);
        &self.0[start..start + BLOCK_LEN]
    }
}

/// Column names in layout order, e.g. `q_tr.top.f3_mean_dcp`.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_COUNT);
    for block in BLOCK_NAMES {
        for dir in Direction::ALL {
            for f in DirectionalBayFeatures::NAMES {
                names.push(format!("{block}.{}.{f}", dir.name()));
            }
        }
        names.push(format!("{block}.perimeter_contacts"));
    }
    names
}

/// 24 directional features plus the perimeter contact count. Images whose
/// hull is degenerate (empty, under three points, collinear) give zeros.
pub fn extract_global_block(img: &BinaryImage) -> FeatureBlock {
    block_or_zeros(img).0
}

fn block_or_zeros(img: &BinaryImage) -> (FeatureBlock, bool) {
    let mut block = [0.0; BLOCK_LEN];
    let Ok(map) = build_deficiency_map(img) else {
        return (block, true);
    };
    for (d, dir) in Direction::ALL.into_iter().enumerate() {
        block[d * 6..d * 6 + 6].copy_from_slice(&scan_direction(&map, dir).to_array());
    }
    block[24] = f64::from(perimeter_contact_count(&map));
    (block, false)
}

/// Splits around `centroid` into top-left, top-right, bottom-left,
/// bottom-right sub-images of the original size. A pixel goes right when
/// `x >= ceil(c_x)` and down when `y >= ceil(c_y)`.
pub fn split_quadrants(img: &BinaryImage, centroid: (f64, f64)) -> [BinaryImage; 4] {
    let (w, h) = (img.width(), img.height());
    let cut_x = centroid.0.ceil();
    let cut_y = centroid.1.ceil();
    let mut out = std::array::from_fn(|_| BinaryImage::new(w, h));
    for y in 0..h {
        for x in 0..w {
            if img.get(x, y) {
                let right = x as f64 >= cut_x;
                let bottom = y as f64 >= cut_y;
                out[usize::from(bottom) * 2 + usize::from(right)].set(x, y, true);
            }
        }
    }
    out
}

/// Feature vector plus how many of its five blocks fell back to zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub features: FeatureVector,
    pub degenerate_blocks: u8,
}

pub fn extract_feature_vector(img: &BinaryImage) -> Result<FeatureVector, FeatureError> {
    extract_detailed(img).map(|e| e.features)
}

pub fn extract_detailed(img: &BinaryImage) -> Result<Extraction, FeatureError> {
    let points = img.object_points();
    if points.is_empty() {
        return Err(FeatureError::EmptyImage);
    }
    // Every subset of a degenerate set is degenerate too, so the whole vector is zero.
    let Ok(hull) = graham_scan(&points) else {
        return Ok(Extraction { features: FeatureVector::zeros(), degenerate_blocks: 5 });
    };
    let centroid = polygon_centroid(&hull).expect("strictly convex hull has positive area");

    let mut features = FeatureVector::zeros();
    let mut degenerate_blocks = 0;
    let (global, degenerate) = block_or_zeros(img);
    features.0[..BLOCK_LEN].copy_from_slice(&global);
    degenerate_blocks += u8::from(degenerate);
    for (q, sub) in split_quadrants(img, centroid).iter().enumerate() {
        let (block, degenerate) = block_or_zeros(sub);
        let start = BLOCK_LEN * (q + 1);
        features.0[start..start + BLOCK_LEN].copy_from_slice(&block);
        degenerate_blocks += u8::from(degenerate);
    }
    Ok(Extraction { features, degenerate_blocks })
}

/// Extracts every image; parallel under the `parallel` feature.
pub fn extract_batch(images: &[BinaryImage]) -> Vec<Result<Extraction, FeatureError>> {
    par::map(images, extract_detailed)
}

pub fn extract_batch_sequential(images: &[BinaryImage]) -> Vec<Result<Extraction, FeatureError>> {
    par::map_sequential(images, extract_detailed)
}

#[derive(Debug, Error)]
pub enum FeatureFileError {
    #[error("feature layout mismatch: expected {expected}, found {found}")]
    LayoutVersionMismatch { expected: String, found: String },
    #[error("malformed feature file at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Labelled feature rows, as written by `extract` and read by `train`/`eval`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    pub labels: Vec<u8>,
    pub rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, label: u8, row: FeatureVector) {
        self.labels.push(label);
        self.rows.push(row);
    }

    /// Comma-separated text: a `#layout=` line, a column header, then one
    /// `label,f0,...,f124` row per sample.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "#layout={LAYOUT_VERSION}")?;
        writeln!(w, "label,{}", feature_names().join(","))?;
        for (label, row) in self.labels.iter().zip(&self.rows) {
            write!(w, "{label}")?;
            for v in row.as_slice() {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, FeatureFileError> {
        let mut lines = r.lines();
        let malformed = |line: usize, reason: &str| FeatureFileError::Malformed { line, reason: reason.to_string() };

        let first = lines.next().ok_or_else(|| malformed(1, "empty file"))??;
        let found = first.strip_prefix("#layout=").ok_or_else(|| malformed(1, "missing #layout= header"))?;
        if found != LAYOUT_VERSION {
            return Err(FeatureFileError::LayoutVersionMismatch { expected: LAYOUT_VERSION.to_string(), found: found.to_string() });
        }
        let header = lines.next().ok_or_else(|| malformed(2, "missing column header"))??;
        if header.split(',').count() != FEATURE_COUNT + 1 {
            return Err(malformed(2, "column header does not have 126 columns"));
        }

        let mut out = FeatureMatrix::default();
        for (i, line) in lines.enumerate() {
            let line_no = i + 3;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut cells = line.split(',');
            let label: u8 = cells
                .next()
                .and_then(|c| c.parse().ok())
                .filter(|&l| l < 10)
                .ok_or_else(|| malformed(line_no, "label must be a digit 0-9"))?;
            let mut row = FeatureVector::zeros();
            let mut n = 0;
            for cell in cells {
                if n == FEATURE_COUNT {
                    return Err(malformed(line_no, "too many columns"));
                }
                row.0[n] = cell.parse().map_err(|_| malformed(line_no, "unparseable feature value"))?;
                n += 1;
            }
            if n != FEATURE_COUNT {
                return Err(malformed(line_no, "too few columns"));
            }
            out.push(label, row);
        }
        Ok(out)
    }
}
