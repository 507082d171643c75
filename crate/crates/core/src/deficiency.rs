//! Convex deficiency of a binary pattern and the directional bay scans.
//!
//! Every pixel is labelled object, deficiency (inside or on the hull but not
//! object; covers both bays and lakes) or background. Scans then walk each
//! row or column from one side, measuring `d_cp`: the number of cells from
//! the first hull cell on that line to the first object cell.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{graham_scan, point_in_polygon, raster_segment, ConvexHull, GeometryError, GridPoint, Location};
use crate::image::BinaryImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DeficiencyError {
    #[error("image has no object pixels")]
    EmptyImage,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Object,
    Deficiency,
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
    Top,
    Bottom,
}

impl Direction {
    /// Block order used throughout the feature layout.
    pub const ALL: [Direction; 4] = [Direction::Left, Direction::Right, Direction::Top, Direction::Bottom];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::Top => "top",
            Direction::Bottom => "bottom",
        }
    }
}

/// Six bay features seen from one side of the image.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DirectionalBayFeatures {
    /// f1: largest `d_cp`.
    pub max_dcp: u32,
    /// f2: scan lines with `d_cp > 0`.
    pub positive_lines: u32,
    /// f3: mean `d_cp` over the positive lines, 0 if none.
    pub mean_dcp: f64,
    /// f4: mean index of the positive lines (row for left/right scans,
    /// column for top/bottom), 0 if none.
    pub mean_positive_index: f64,
    /// f5: scan lines with `d_cp = 0`.
    pub zero_lines: u32,
    /// f6: maximal runs of consecutive positive lines.
    pub bay_count: u32,
}

impl DirectionalBayFeatures {
    pub const LEN: usize = 6;
    pub const NAMES: [&'static str; 6] =
        ["f1_max_dcp", "f2_positive_lines", "f3_mean_dcp", "f4_mean_positive_index", "f5_zero_lines", "f6_bay_count"];

    pub fn to_array(&self) -> [f64; 6] {
        [
            f64::from(self.max_dcp),
            f64::from(self.positive_lines),
            self.mean_dcp,
            self.mean_positive_index,
            f64::from(self.zero_lines),
            f64::from(self.bay_count),
        ]
    }
}

/// Per-pixel labelling of an image against its convex hull.
#[derive(Debug, Clone)]
pub struct DeficiencyMap {
    width: usize,
    height: usize,
    labels: Vec<Label>,
    hull: ConvexHull,
    boundary: Vec<GridPoint>,
}

impl DeficiencyMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn hull(&self) -> &ConvexHull {
        &self.hull
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    /// Rasterised hull perimeter, sorted, each pixel once.
    pub fn hull_boundary_pixels(&self) -> &[GridPoint] {
        &self.boundary
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Text dump: `1` hull boundary, `2` object, `+` deficiency, `0` background.
    pub fn render(&self) -> String {
        let mut grid: Vec<char> = self
            .labels
            .iter()
            .map(|l| match l {
                Label::Object => '2',
                Label::Deficiency => '+',
                Label::Background => '0',
            })
            .collect();
        for p in &self.boundary {
            grid[p.y as usize * self.width + p.x as usize] = '1';
        }
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in grid.chunks(self.width) {
            let _ = writeln!(out, "{}", row.iter().collect::<String>());
        }
        out
    }
}

/// Hull of the object pixels plus per-pixel labels and the rasterised hull
/// perimeter.
pub fn build_deficiency_map(img: &BinaryImage) -> Result<DeficiencyMap, DeficiencyError> {
    let points = img.object_points();
    if points.is_empty() {
        return Err(DeficiencyError::EmptyImage);
    }
    let hull = graham_scan(&points)?;

    let (width, height) = (img.width(), img.height());
    let mut labels = vec![Label::Background; width * height];
    let (min_x, min_y, max_x, max_y) = hull.bounds();
    for y in min_y..=max_y {
        for x in min_x..=max_x {
            if point_in_polygon(GridPoint::new(x, y), &hull) != Location::Outside {
                labels[y as usize * width + x as usize] = Label::Deficiency;
            }
        }
    }
    for p in &points {
        labels[p.y as usize * width + p.x as usize] = Label::Object;
    }

    let mut boundary: Vec<GridPoint> = hull.edges().flat_map(|(a, b)| raster_segment(a, b)).collect();
    boundary.sort_unstable_by_key(|p| (p.y, p.x));
    boundary.dedup();

    Ok(DeficiencyMap { width, height, labels, hull, boundary })
}

/// `d_cp` for every scan line that meets the hull, as `(line index, d_cp)`.
pub fn scan_profile(map: &DeficiencyMap, dir: Direction) -> Vec<(usize, u32)> {
    let (lines, len) = match dir {
        Direction::Left | Direction::Right => (map.height, map.width),
        Direction::Top | Direction::Bottom => (map.width, map.height),
    };
    let at = |line: usize, pos: usize| match dir {
        Direction::Left | Direction::Right => map.label(pos, line),
        Direction::Top | Direction::Bottom => map.label(line, pos),
    };
    let forward = matches!(dir, Direction::Left | Direction::Top);

    let mut profile = Vec::new();
    for line in 0..lines {
        // Walk from the entry side; positions are counted from that side.
        let ordered = |k: usize| if forward { k } else { len - 1 - k };
        let Some(entry) = (0..len).find(|&k| at(line, ordered(k)) != Label::Background) else {
            continue;
        };
        let exit = (0..len).rev().find(|&k| at(line, ordered(k)) != Label::Background).unwrap_or(entry);
        let dcp = (entry..=exit).find(|&k| at(line, ordered(k)) == Label::Object).map_or(exit - entry + 1, |k| k - entry);
        profile.push((line, dcp as u32));
    }
    profile
}

/// The six directional features for one side.
pub fn scan_direction(map: &DeficiencyMap, dir: Direction) -> DirectionalBayFeatures {
    let profile = scan_profile(map, dir);
    let mut f = DirectionalBayFeatures::default();
    let (mut dcp_sum, mut index_sum) = (0u64, 0u64);
    let mut prev_positive: Option<usize> = None;
    for &(line, dcp) in &profile {
        if dcp == 0 {
            f.zero_lines += 1;
            continue;
        }
        f.positive_lines += 1;
        f.max_dcp = f.max_dcp.max(dcp);
        dcp_sum += u64::from(dcp);
        index_sum += line as u64;
        if prev_positive.is_none_or(|p| p + 1 != line) {
            f.bay_count += 1;
        }
        prev_positive = Some(line);
    }
    if f.positive_lines > 0 {
        let n = f64::from(f.positive_lines);
        f.mean_dcp = dcp_sum as f64 / n;
        f.mean_positive_index = index_sum as f64 / n;
    }
    f
}

/// Rasterised hull perimeter pixels that are object pixels.
pub fn perimeter_contact_count(map: &DeficiencyMap) -> u32 {
    map.boundary.iter().filter(|p| map.label(p.x as usize, p.y as usize) == Label::Object).count() as u32
}
