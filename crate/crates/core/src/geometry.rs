//! Integer-lattice convex hulls (Graham scan) plus polygon area, centroid
//! and point location.
//!
//! Orientation convention: a "left turn" is a positive cross product
//! `(b - a) x (c - a) > 0` in raw `(x, y)` coordinates, and hulls are listed
//! in that positive (counter-clockwise) order so the shoelace sum is
//! positive. The anchor vertex is the rightmost point among those with the
//! smallest `y`.

use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    /// Fewer than three distinct points, or all points collinear.
    #[error("degenerate hull: fewer than 3 distinct points or all points collinear")]
    DegenerateHull,
    #[error("polygon has zero area")]
    ZeroArea,
}

/// A lattice point. `x` is the column, `y` the row when taken from a raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

impl From<(i64, i64)> for GridPoint {
    fn from((x, y): (i64, i64)) -> Self {
        Self { x, y }
    }
}

/// Twice the signed area of triangle `a, b, c`; positive for a left turn.
#[inline]
pub fn cross(a: GridPoint, b: GridPoint, c: GridPoint) -> i64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[inline]
fn dist2(a: GridPoint, b: GridPoint) -> i64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    dx * dx + dy * dy
}

/// A strictly convex polygon with at least three vertices.
///
/// Vertices run counter-clockwise (positive cross products), start at the
/// anchor (smallest `y`, then largest `x`) and close implicitly. No three
/// consecutive vertices are collinear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexHull {
    vertices: Vec<GridPoint>,
}

impl ConvexHull {
    pub fn vertices(&self) -> &[GridPoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// Always false; a hull has at least three vertices.
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Consecutive vertex pairs, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (GridPoint, GridPoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Builds a hull from vertices already in hull order. Fails unless they
    /// form a strictly convex counter-clockwise polygon.
    pub fn from_ccw_vertices(vertices: Vec<GridPoint>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::DegenerateHull);
        }
        let convex = (0..n).all(|i| cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) > 0);
        if !convex {
            return Err(GeometryError::DegenerateHull);
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned bounds `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (i64, i64, i64, i64) {
        let mut b = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        for p in &self.vertices {
            b.0 = b.0.min(p.x);
            b.1 = b.1.min(p.y);
            b.2 = b.2.max(p.x);
            b.3 = b.3.max(p.y);
        }
        b
    }
}

/// Convex hull by Graham scan.
///
/// The anchor is the rightmost of the lowest (minimum `y`) points. The rest
/// are sorted by angle around it; among points at the same angle only the
/// farthest is kept. The stack then admits a point only when it makes a
/// strict left turn with the two points below it.
pub fn graham_scan(points: &[GridPoint]) -> Result<ConvexHull, GeometryError> {
    let anchor = *points.iter().min_by(|a, b| a.y.cmp(&b.y).then(b.x.cmp(&a.x))).ok_or(GeometryError::DegenerateHull)?;

    let mut rest: Vec<GridPoint> = points.iter().copied().filter(|&p| p != anchor).collect();
    // Every remaining point has y > anchor.y, or y == anchor.y and x < anchor.x,
    // so all polar angles lie in (0, pi] and the cross product is a total order.
    rest.sort_unstable_by(|&a, &b| match cross(anchor, a, b).cmp(&0) {
        Ordering::Greater => Ordering::Less,
        Ordering::Less => Ordering::Greater,
        Ordering::Equal => dist2(anchor, b).cmp(&dist2(anchor, a)),
    });
    // Ties: the farthest point comes first within each angle; drop the rest.
    rest.dedup_by(|later, first| cross(anchor, *first, *later) == 0);

    if rest.len() < 2 {
        return Err(GeometryError::DegenerateHull);
    }

    let mut stack = Vec::with_capacity(rest.len() + 1);
    stack.push(anchor);
    stack.push(rest[0]);
    let mut i = 1;
    while i < rest.len() {
        let top = stack[stack.len() - 1];
        let below = stack[stack.len() - 2];
        if cross(below, top, rest[i]) > 0 {
            stack.push(rest[i]);
            i += 1;
        } else {
            // rest[0] is a hull vertex, so the stack never drops below two.
            stack.pop();
        }
    }

    if stack.len() < 3 {
        return Err(GeometryError::DegenerateHull);
    }
    Ok(ConvexHull { vertices: stack })
}

/// Shoelace area. Positive for counter-clockwise vertex order.
pub fn polygon_area(hull: &ConvexHull) -> f64 {
    twice_signed_area(hull) as f64 / 2.0
}

fn twice_signed_area(hull: &ConvexHull) -> i64 {
    hull.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum()
}

/// Area centroid `(c_x, c_y)`.
pub fn polygon_centroid(hull: &ConvexHull) -> Result<(f64, f64), GeometryError> {
    let twice_area = twice_signed_area(hull);
    if twice_area == 0 {
        return Err(GeometryError::ZeroArea);
    }
    let (mut sx, mut sy) = (0i64, 0i64);
    for (a, b) in hull.edges() {
        let w = a.x * b.y - b.x * a.y;
        sx += (a.x + b.x) * w;
        sy += (a.y + b.y) * w;
    }
    // 1 / (6A) = 1 / (3 * 2A)
    let denom = 3.0 * twice_area as f64;
    Ok((sx as f64 / denom, sy as f64 / denom))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    OnBoundary,
    Outside,
}

/// Exact point location against a convex counter-clockwise hull.
pub fn point_in_polygon(p: GridPoint, hull: &ConvexHull) -> Location {
    let mut on_edge = false;
    for (a, b) in hull.edges() {
        match cross(a, b, p).cmp(&0) {
            Ordering::Less => return Location::Outside,
            Ordering::Equal => on_edge = true,
            Ordering::Greater => {}
        }
    }
    if on_edge {
        Location::OnBoundary
    } else {
        Location::Inside
    }
}

/// Lattice points along the segment `a -> b` using integer midpoint
/// (Bresenham) stepping, both endpoints included.
pub fn raster_segment(a: GridPoint, b: GridPoint) -> Vec<GridPoint> {
    let dx = (b.x - a.x).abs();
    let dy = -(b.y - a.y).abs();
    let sx = if a.x < b.x { 1 } else { -1 };
    let sy = if a.y < b.y { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (a.x, a.y);
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push(GridPoint::new(x, y));
        if x == b.x && y == b.y {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}
