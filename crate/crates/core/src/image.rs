use std::fmt;

use crate::geometry::GridPoint;

/// A binary raster, row-major, `true` = object pixel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    /// All-background image.
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, pixels: vec![false; width * height] }
    }

    /// Panics if `pixels.len() != width * height`.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<bool>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel buffer does not match {width}x{height}");
        Self { width, height, pixels }
    }

    /// Parses rows of `'1'`/`'#'` (object) and `'0'`/`'.'` (background).
    /// Whitespace inside a row is ignored. Handy for fixtures.
    ///
    /// Panics on ragged rows or unknown characters.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let parsed: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| {
                r.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '1' | '#' => true,
                        '0' | '.' => false,
                        other => panic!("unexpected pixel character {other:?}"),
                    })
                    .collect()
            })
            .collect();
        let height = parsed.len();
        let width = parsed.first().map_or(0, Vec::len);
        assert!(parsed.iter().all(|r| r.len() == width), "ragged rows");
        Self::from_pixels(width, height, parsed.into_iter().flatten().collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Out-of-range coordinates read as background.
    #[inline]
    pub fn get_point(&self, p: GridPoint) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height && self.get(p.x as usize, p.y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn object_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    /// Object pixel coordinates in row-major order.
    pub fn object_points(&self) -> Vec<GridPoint> {
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(|(i, _)| GridPoint::new((i % self.width) as i64, (i / self.width) as i64))
            .collect()
    }

    /// Left-right mirror.
    pub fn mirror_horizontal(&self) -> Self {
        let mut out = Self::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(self.width - 1 - x, y, self.get(x, y));
            }
        }
        out
    }

    /// Top-bottom mirror.
    pub fn mirror_vertical(&self) -> Self {
        let mut out = Self::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x, self.height - 1 - y, self.get(x, y));
            }
        }
        out
    }

    /// Adds background margins around the image.
    pub fn pad(&self, left: usize, top: usize, right: usize, bottom: usize) -> Self {
        let mut out = Self::new(self.width + left + right, self.height + top + bottom);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x + left, y + top, self.get(x, y));
            }
        }
        out
    }
}

impl fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryImage {}x{}", self.width, self.height)?;
        for row in self.pixels.chunks(self.width.max(1)) {
            let line: String = row.iter().map(|&p| if p { '#' } else { '.' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
