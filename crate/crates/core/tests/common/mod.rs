//! Independent reference implementations used by the integration suites.
//! Nothing here calls into the hull, location or area code under test.
#![allow(dead_code)]

use std::collections::BTreeSet;

use hullbay::{
    build_deficiency_map, perimeter_contact_count, scan_direction, BinaryImage, DeficiencyMap, Direction, DirectionalBayFeatures,
    GridPoint, Label, Location,
};
use rand::Rng;

fn orient(a: GridPoint, b: GridPoint, c: GridPoint) -> i64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(p: GridPoint, a: GridPoint, b: GridPoint) -> bool {
    orient(a, b, p) == 0 && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed containment in a non-degenerate triangle; collinear triples are
/// covered by `on_segment` instead.
fn in_closed_triangle(p: GridPoint, a: GridPoint, b: GridPoint, c: GridPoint) -> bool {
    if orient(a, b, c) == 0 {
        return false;
    }
    let d1 = orient(a, b, p);
    let d2 = orient(b, c, p);
    let d3 = orient(c, a, p);
    let has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    let has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    !(has_neg && has_pos)
}

/// Hull vertex set by exhaustion: a point is a vertex iff no segment or
/// triangle of the other points contains it. `None` for degenerate input
/// (fewer than three distinct points, or all collinear).
pub fn brute_hull_vertices(points: &[GridPoint]) -> Option<BTreeSet<GridPoint>> {
    let uniq: Vec<GridPoint> = points.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let n = uniq.len();
    if n < 3 {
        return None;
    }
    let (a, b) = (uniq[0], uniq[1]);
    if uniq.iter().all(|&c| orient(a, b, c) == 0) {
        return None;
    }
    let mut verts = BTreeSet::new();
    'outer: for (i, &p) in uniq.iter().enumerate() {
        let others: Vec<GridPoint> = uniq.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &q)| q).collect();
        let m = others.len();
        for x in 0..m {
            for y in x + 1..m {
                if on_segment(p, others[x], others[y]) {
                    continue 'outer;
                }
                for z in y + 1..m {
                    if in_closed_triangle(p, others[x], others[y], others[z]) {
                        continue 'outer;
                    }
                }
            }
        }
        verts.insert(p);
    }
    Some(verts)
}

/// Location by winding number (Sunday's crossing rules) plus an explicit
/// on-edge test. Works for any simple polygon, either orientation.
pub fn winding_location(p: GridPoint, poly: &[GridPoint]) -> Location {
    let n = poly.len();
    for i in 0..n {
        if on_segment(p, poly[i], poly[(i + 1) % n]) {
            return Location::OnBoundary;
        }
    }
    let mut wn = 0i32;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) > 0 {
                wn += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) < 0 {
            wn -= 1;
        }
    }
    if wn != 0 {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Area and centroid by fanning triangles from the first vertex.
pub fn fan_area_centroid(poly: &[GridPoint]) -> (f64, (f64, f64)) {
    let o = poly[0];
    let (mut area, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for w in poly[1..].windows(2) {
        let (a, b) = (w[0], w[1]);
        let t = orient(o, a, b) as f64 / 2.0;
        area += t;
        cx += t * (o.x + a.x + b.x) as f64 / 3.0;
        cy += t * (o.y + a.y + b.y) as f64 / 3.0;
    }
    (area, (cx / area, cy / area))
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> Vec<GridPoint> {
    (0..n).map(|_| GridPoint::new(rng.random_range(lo..=hi), rng.random_range(lo..=hi))).collect()
}

/// A blob image: a union of a few discs and rectangles with a few bites
/// taken out, so it has bays and sometimes lakes.
pub fn random_blob<R: Rng>(rng: &mut R, width: usize, height: usize) -> BinaryImage {
    let mut img = BinaryImage::new(width, height);
    let paint = |img: &mut BinaryImage, rng: &mut R, value: bool, max_r: i64| {
        let cx = rng.random_range(0..width as i64);
        let cy = rng.random_range(0..height as i64);
        let r = rng.random_range(1..=max_r);
        let disc = rng.random_bool(0.5);
        for y in 0..height as i64 {
            for x in 0..width as i64 {
                let (dx, dy) = (x - cx, y - cy);
                let hit = if disc { dx * dx + dy * dy <= r * r } else { dx.abs() <= r && dy.abs() <= r / 2 + 1 };
                if hit {
                    img.set(x as usize, y as usize, value);
                }
            }
        }
    };
    for _ in 0..rng.random_range(1..=4) {
        paint(&mut img, rng, true, 5);
    }
    for _ in 0..rng.random_range(0..=3) {
        paint(&mut img, rng, false, 2);
    }
    img
}

/// Random image with roughly `density` object pixels.
pub fn random_image<R: Rng>(rng: &mut R, width: usize, height: usize, density: f64) -> BinaryImage {
    BinaryImage::from_pixels(width, height, (0..width * height).map(|_| rng.random_bool(density)).collect())
}

/// Seven-segment masks for 0..=9: top, upper-left, upper-right, middle,
/// lower-left, lower-right, bottom.
const SEGMENTS: [[bool; 7]; 10] = [
    [true, true, true, false, true, true, true],
    [false, false, true, false, false, true, false],
    [true, false, true, true, true, false, true],
    [true, false, true, true, false, true, true],
    [false, true, true, true, false, true, false],
    [true, true, false, true, false, true, true],
    [true, true, false, true, true, true, true],
    [true, false, true, false, false, true, false],
    [true, true, true, true, true, true, true],
    [true, true, true, true, false, true, true],
];

/// A 28x28 gray seven-segment glyph for `digit`, jittered in position and
/// stroke width, with faint background noise below the default threshold.
pub fn synthetic_digit<R: Rng>(rng: &mut R, digit: u8) -> hullbay::dataset::GrayImage {
    let (w, h) = (28usize, 28usize);
    let mut data = vec![0u8; w * h];
    for v in data.iter_mut() {
        *v = rng.random_range(0..40);
    }
    let ox = rng.random_range(6..=10) as i64;
    let oy = rng.random_range(3..=6) as i64;
    let sw = rng.random_range(8..=11) as i64;
    let sh = rng.random_range(8..=10) as i64;
    let t = rng.random_range(2..=3) as i64;
    let segs = SEGMENTS[digit as usize];
    let mut rect = |x0: i64, y0: i64, x1: i64, y1: i64| {
        for y in y0..=y1 {
            for x in x0..=x1 {
                if (0..w as i64).contains(&x) && (0..h as i64).contains(&y) {
                    data[y as usize * w + x as usize] = rng.random_range(180..=255);
                }
            }
        }
    };
    let (l, r) = (ox, ox + sw);
    let (top, mid, bot) = (oy, oy + sh, oy + 2 * sh);
    if segs[0] {
        rect(l, top, r, top + t - 1);
    }
    if segs[1] {
        rect(l, top, l + t - 1, mid);
    }
    if segs[2] {
        rect(r - t + 1, top, r, mid);
    }
    if segs[3] {
        rect(l, mid, r, mid + t - 1);
    }
    if segs[4] {
        rect(l, mid, l + t - 1, bot);
    }
    if segs[5] {
        rect(r - t + 1, mid, r, bot);
    }
    if segs[6] {
        rect(l, bot - t + 1, r, bot);
    }
    hullbay::dataset::GrayImage { rows: h, cols: w, data }
}

/// Writes `n` synthetic digits (labels cycling 0..=9) as an IDX pair and
/// returns the two paths.
pub fn write_synthetic_idx(dir: &std::path::Path, stem: &str, n: usize, seed: u64) -> (std::path::PathBuf, std::path::PathBuf) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
    let images: Vec<_> = labels.iter().map(|&d| synthetic_digit(&mut rng, d)).collect();
    let ip = dir.join(format!("{stem}-images-idx3-ubyte"));
    let lp = dir.join(format!("{stem}-labels-idx1-ubyte"));
    hullbay::dataset::write_idx_images(std::fs::File::create(&ip).unwrap(), &images).unwrap();
    hullbay::dataset::write_idx_labels(std::fs::File::create(&lp).unwrap(), &labels).unwrap();
    (ip, lp)
}

/// Same features in every field, except f4 which is compared through its
/// integer index sum after `shift` maps `b`'s sum into `a`'s frame.
fn same_with_index(a: DirectionalBayFeatures, b: DirectionalBayFeatures, shift: impl Fn(i64, i64) -> i64) -> bool {
    let counts = [a.max_dcp, a.positive_lines, a.zero_lines, a.bay_count] == [b.max_dcp, b.positive_lines, b.zero_lines, b.bay_count];
    if !counts || a.mean_dcp != b.mean_dcp {
        return false;
    }
    let n = i64::from(a.positive_lines);
    if n == 0 {
        return a.mean_positive_index == 0.0 && b.mean_positive_index == 0.0;
    }
    let sum = |f: DirectionalBayFeatures| (f.mean_positive_index * n as f64).round() as i64;
    sum(a) == shift(sum(b), n)
}

fn fill_hull(map: &DeficiencyMap) -> BinaryImage {
    BinaryImage::from_pixels(map.width(), map.height(), map.labels().iter().map(|&l| l != Label::Background).collect())
}

/// Every labelling and scan invariant checked on one image. `None` when the
/// hull is degenerate; otherwise a description of each violation found.
pub fn blob_violations(img: &BinaryImage) -> Option<Vec<String>> {
    let map = build_deficiency_map(img).ok()?;
    let (w, h) = (img.width(), img.height());
    let mut bad = Vec::new();

    let hull = map.hull().vertices().to_vec();
    for y in 0..h {
        for x in 0..w {
            let loc = winding_location(GridPoint::new(x as i64, y as i64), &hull);
            let expect = if img.get(x, y) {
                Label::Object
            } else if loc != Location::Outside {
                Label::Deficiency
            } else {
                Label::Background
            };
            if map.label(x, y) != expect {
                bad.push(format!("label at ({x},{y}): {:?} vs {expect:?}", map.label(x, y)));
            }
        }
    }

    let feats: Vec<_> = Direction::ALL.iter().map(|&d| scan_direction(&map, d)).collect();
    let rows = (0..h).filter(|&y| (0..w).any(|x| map.label(x, y) != Label::Background)).count() as u32;
    let cols = (0..w).filter(|&x| (0..h).any(|y| map.label(x, y) != Label::Background)).count() as u32;
    for (i, f) in feats.iter().enumerate() {
        let (lines, extent) = if i < 2 { (rows, w) } else { (cols, h) };
        if f.positive_lines + f.zero_lines != lines {
            bad.push(format!("{:?}: f2+f5 = {} over {lines} lines", Direction::ALL[i], f.positive_lines + f.zero_lines));
        }
        if f.mean_dcp > f64::from(f.max_dcp) || f.bay_count > f.positive_lines || f.max_dcp as usize > extent {
            bad.push(format!("{:?}: bounds {f:?}", Direction::ALL[i]));
        }
    }

    // left-right mirror swaps the left and right scans; top/bottom f4 is a
    // column index and reflects
    let (xmax, ymax) = (w as i64 - 1, h as i64 - 1);
    let m = build_deficiency_map(&img.mirror_horizontal()).unwrap();
    if scan_direction(&m, Direction::Left) != feats[1] || scan_direction(&m, Direction::Right) != feats[0] {
        bad.push("horizontal mirror: left/right not swapped".into());
    }
    for (d, orig) in [(Direction::Top, feats[2]), (Direction::Bottom, feats[3])] {
        if !same_with_index(scan_direction(&m, d), orig, |sum, n| xmax * n - sum) {
            bad.push(format!("horizontal mirror: {d:?} not reflected"));
        }
    }
    let v = build_deficiency_map(&img.mirror_vertical()).unwrap();
    if scan_direction(&v, Direction::Top) != feats[3] || scan_direction(&v, Direction::Bottom) != feats[2] {
        bad.push("vertical mirror: top/bottom not swapped".into());
    }
    for (d, orig) in [(Direction::Left, feats[0]), (Direction::Right, feats[1])] {
        if !same_with_index(scan_direction(&v, d), orig, |sum, n| ymax * n - sum) {
            bad.push(format!("vertical mirror: {d:?} not reflected"));
        }
    }

    let filled = build_deficiency_map(&fill_hull(&map)).unwrap();
    for d in Direction::ALL {
        let f = scan_direction(&filled, d);
        if [f.max_dcp, f.positive_lines, f.bay_count] != [0, 0, 0] || f.mean_dcp != 0.0 || f.mean_positive_index != 0.0 {
            bad.push(format!("filled hull: {d:?} not null: {f:?}"));
        }
    }

    // translation leaves everything alone except f4, which shifts by the
    // padding on the scanned axis
    let padded = build_deficiency_map(&img.pad(3, 2, 1, 4)).unwrap();
    if perimeter_contact_count(&padded) != perimeter_contact_count(&map) {
        bad.push("translation changed the perimeter count".into());
    }
    for (i, d) in Direction::ALL.into_iter().enumerate() {
        let pad = if i < 2 { 2 } else { 3 };
        if !same_with_index(scan_direction(&padded, d), feats[i], |sum, n| sum + pad * n) {
            bad.push(format!("translation: {d:?} features moved wrongly"));
        }
    }
    Some(bad)
}
