//! Foreground isolation.
//!
//! Landmark sets become convex-hull masks for shielding people during
//! background matching. Extraction goes through the [`Segmenter`] trait; two
//! deterministic implementations ship here, one reading a mask supplied from
//! outside and one differencing against a known background.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BoundingRect, ImageBuf, MaskBuf, BACKGROUND, FOREGROUND};

const EPS: f64 = 1e-9;

pub const DEFAULT_DIFF_TAU: u8 = 30;

/// Body landmarks in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet {
    pub points: Vec<[f64; 2]>,
}

impl LandmarkSet {
    pub fn new(points: Vec<[f64; 2]>) -> Self {
        LandmarkSet { points }
    }

    /// Reads `{"points": [[x, y], ...]}`.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn check_bounds(&self, width: u32, height: u32) -> Result<()> {
        for &[x, y] in &self.points {
            if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 || x > width as f64 || y > height as f64 {
                return Err(Error::Bounds(format!(
                    "landmark ({x}, {y}) lies outside the {width}x{height} frame"
                )));
            }
        }
        Ok(())
    }
}

/// Strictly convex polygon, vertices in counter-clockwise order (positive
/// signed area in the x-right, y-down pixel frame).
#[derive(Debug, Clone, PartialEq)]
pub struct HullPolygon {
    vertices: Vec<[f64; 2]>,
}

impl HullPolygon {
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let [x0, y0] = self.vertices[i];
                let [x1, y1] = self.vertices[(i + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum::<f64>()
            / 2.0
    }

    /// True when `p` lies inside or on the boundary.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= -EPS)
    }

    /// Horizontal extent of the polygon along the line `y`, if it meets it.
    fn span_at(&self, y: f64) -> Option<(f64, f64)> {
        let n = self.vertices.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let [ax, ay] = self.vertices[i];
            let [bx, by] = self.vertices[(i + 1) % n];
            if y < ay.min(by) - EPS || y > ay.max(by) + EPS {
                continue;
            }
            if (by - ay).abs() <= EPS {
                lo = lo.min(ax.min(bx));
                hi = hi.max(ax.max(bx));
            } else {
                let t = ((y - ay) / (by - ay)).clamp(0.0, 1.0);
                let x = ax + t * (bx - ax);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain convex hull. Collinear boundary points are dropped.
pub fn convex_hull(points: &LandmarkSet) -> Result<HullPolygon> {
    if points.points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "convex hull needs at least 3 points, got {}",
            points.points.len()
        )));
    }
    let mut pts = points.points.clone();
    if pts.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::Degenerate("landmarks must be finite".into()));
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();

    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    let hull = HullPolygon { vertices: lower };
    if hull.vertices.len() < 3 || hull.area() <= 0.0 {
        return Err(Error::Degenerate("all landmarks are collinear".into()));
    }
    Ok(hull)
}

/// Rasterises a hull: pixels whose centres lie inside or on it become
/// foreground (0), the rest background (1).
pub fn hull_to_mask(hull: &HullPolygon, width: u32, height: u32) -> Result<MaskBuf> {
    let mut mask = MaskBuf::filled(width, height, BACKGROUND)?;
    for y in 0..height {
        let Some((lo, hi)) = hull.span_at(y as f64 + 0.5) else {
            continue;
        };
        let first = (lo - 0.5 - EPS).ceil().max(0.0);
        let last = (hi - 0.5 + EPS).floor().min(width as f64 - 1.0);
        if first > last {
            continue;
        }
        for x in first as u32..=last as u32 {
            mask.set(x, y, FOREGROUND);
        }
    }
    Ok(mask)
}

/// Binary foreground mask plus the tight box around its foreground pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub mask: MaskBuf,
    pub bbox: BoundingRect,
}

impl SegmentationResult {
    /// Wraps a mask, failing with [`Error::NoForeground`] when it has no foreground.
    pub fn from_mask(mask: MaskBuf) -> Result<Self> {
        let bbox = mask.bbox_of(FOREGROUND).ok_or(Error::NoForeground)?;
        Ok(SegmentationResult { mask, bbox })
    }
}

/// Side information a segmenter may need.
#[derive(Debug, Clone, Copy, Default)]
pub enum SegmentHint<'a> {
    #[default]
    None,
    /// A background image believed to underlie the frame.
    Background(&'a ImageBuf),
    /// An externally produced mask for this frame.
    Mask(&'a MaskBuf),
}

pub trait Segmenter: Send + Sync {
    fn name(&self) -> &'static str;

    fn segment(&self, img: &ImageBuf, hint: SegmentHint<'_>) -> Result<SegmentationResult>;

    /// A mask usable for shielding before any background is known.
    fn prior_mask(&self, _img: &ImageBuf) -> Option<MaskBuf> {
        None
    }
}

/// Uses a mask produced elsewhere: either the one passed as a hint, or one
/// loaded up front.
#[derive(Debug, Clone, Default)]
pub struct ProvidedMask {
    mask: Option<MaskBuf>,
}

impl ProvidedMask {
    pub fn new(mask: Option<MaskBuf>) -> Self {
        ProvidedMask { mask }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(ProvidedMask {
            mask: Some(MaskBuf::load_png(path)?),
        })
    }
}

impl Segmenter for ProvidedMask {
    fn name(&self) -> &'static str {
        "provided"
    }

    fn segment(&self, img: &ImageBuf, hint: SegmentHint<'_>) -> Result<SegmentationResult> {
        let mask = match hint {
            SegmentHint::Mask(m) => m,
            _ => self
                .mask
                .as_ref()
                .ok_or_else(|| Error::Config("provided-mask segmenter has no mask".into()))?,
        };
        if !mask.matches_image(img) {
            return Err(Error::Shape(format!(
                "mask {}x{} does not match image {}x{}",
                mask.width(),
                mask.height(),
                img.width(),
                img.height()
            )));
        }
        SegmentationResult::from_mask(mask.clone())
    }

    fn prior_mask(&self, img: &ImageBuf) -> Option<MaskBuf> {
        self.mask.as_ref().filter(|m| m.matches_image(img)).cloned()
    }
}

/// Marks pixels whose largest per-channel difference from a known background
/// exceeds `tau`, then applies one 3x3 majority pass.
#[derive(Debug, Clone, Copy)]
pub struct BackgroundDiff {
    pub tau: u8,
}

impl Default for BackgroundDiff {
    fn default() -> Self {
        BackgroundDiff { tau: DEFAULT_DIFF_TAU }
    }
}

impl Segmenter for BackgroundDiff {
    fn name(&self) -> &'static str {
        "background-diff"
    }

    fn segment(&self, img: &ImageBuf, hint: SegmentHint<'_>) -> Result<SegmentationResult> {
        let SegmentHint::Background(bg) = hint else {
            return Err(Error::Config(
                "background-diff segmenter needs a background hint".into(),
            ));
        };
        if !bg.same_shape(img) {
            return Err(Error::Shape(format!(
                "background {}x{} does not match image {}x{}",
                bg.width(),
                bg.height(),
                img.width(),
                img.height()
            )));
        }
        let raw = MaskBuf::from_fn(img.width(), img.height(), |x, y| {
            let (a, b) = (img.pixel(x, y), bg.pixel(x, y));
            let diff = (0..3).map(|c| a[c].abs_diff(b[c])).max().unwrap_or(0);
            if diff > self.tau {
                FOREGROUND
            } else {
                BACKGROUND
            }
        })?;
        SegmentationResult::from_mask(majority_3x3(&raw))
    }
}

/// Foreground = convex hull of a landmark set.
#[derive(Debug, Clone)]
pub struct HullSegmenter {
    pub landmarks: LandmarkSet,
}

impl HullSegmenter {
    pub fn new(landmarks: LandmarkSet) -> Self {
        HullSegmenter { landmarks }
    }

    pub fn mask_for(&self, width: u32, height: u32) -> Result<MaskBuf> {
        self.landmarks.check_bounds(width, height)?;
        hull_to_mask(&convex_hull(&self.landmarks)?, width, height)
    }
}

impl Segmenter for HullSegmenter {
    fn name(&self) -> &'static str {
        "landmark-hull"
    }

    fn segment(&self, img: &ImageBuf, _hint: SegmentHint<'_>) -> Result<SegmentationResult> {
        SegmentationResult::from_mask(self.mask_for(img.width(), img.height())?)
    }

    fn prior_mask(&self, img: &ImageBuf) -> Option<MaskBuf> {
        self.mask_for(img.width(), img.height()).ok()
    }
}

/// Each pixel takes the majority label of its in-bounds 3x3 neighbourhood;
/// exact ties keep the current label.
pub fn majority_3x3(mask: &MaskBuf) -> MaskBuf {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    MaskBuf::from_fn(mask.width(), mask.height(), |x, y| {
        let (mut fg, mut n) = (0, 0);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && nx < w && ny < h {
                    n += 1;
                    fg += usize::from(mask.get(nx as u32, ny as u32) == FOREGROUND);
                }
            }
        }
        match (2 * fg).cmp(&n) {
            std::cmp::Ordering::Greater => FOREGROUND,
            std::cmp::Ordering::Less => BACKGROUND,
            std::cmp::Ordering::Equal => mask.get(x, y),
        }
    })
    .expect("same dimensions as input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(points: &[[f64; 2]]) -> LandmarkSet {
        LandmarkSet::new(points.to_vec())
    }

    /// O(n^3) oracle: an ordered pair (a, b) is a hull edge iff every other
    /// point lies strictly left of it or on the segment.
    fn brute_hull_vertices(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let mut verts = Vec::new();
        for (i, &a) in points.iter().enumerate() {
            for (j, &b) in points.iter().enumerate() {
                if i == j || a == b {
                    continue;
                }
                let edge = points.iter().all(|&p| {
                    let c = cross(a, b, p);
                    c > 0.0 || (c == 0.0 && on_segment(a, b, p))
                });
                if edge {
                    verts.push(a);
                    verts.push(b);
                }
            }
        }
        verts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        verts.dedup();
        verts
    }

    fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
        p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
    }

    fn pixel_oracle(hull: &HullPolygon, w: u32, h: u32) -> MaskBuf {
        MaskBuf::from_fn(w, h, |x, y| {
            if hull.contains([x as f64 + 0.5, y as f64 + 0.5]) {
                FOREGROUND
            } else {
                BACKGROUND
            }
        })
        .unwrap()
    }

    #[test]
    fn triangle_is_its_own_hull() {
        let tri = [[0.0, 0.0], [10.0, 0.0], [3.0, 7.0]];
        let hull = convex_hull(&set(&tri)).unwrap();
        let mut v = hull.vertices().to_vec();
        v.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let mut expected = tri.to_vec();
        expected.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        assert_eq!(v, expected);
        assert!(hull.area() > 0.0);
    }

    #[test]
    fn interior_point_is_dropped() {
        let hull = convex_hull(&set(&[[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0], [2.0, 2.0]])).unwrap();
        assert_eq!(hull.vertices().len(), 4);
        assert!(!hull.vertices().contains(&[2.0, 2.0]));
    }

    #[test]
    fn collinear_edge_points_are_dropped() {
        let hull = convex_hull(&set(&[[0.0, 0.0], [2.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]])).unwrap();
        assert_eq!(hull.vertices().len(), 4);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            convex_hull(&set(&[[0.0, 0.0], [1.0, 1.0]])),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            convex_hull(&set(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            convex_hull(&set(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn hull_matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3usize, 10, 100, 200] {
            for _ in 0..5 {
                let pts: Vec<[f64; 2]> = (0..n)
                    .map(|_| [rng.gen_range(0..500) as f64, rng.gen_range(0..500) as f64])
                    .collect();
                let Ok(hull) = convex_hull(&set(&pts)) else { continue };
                let mut v = hull.vertices().to_vec();
                v.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
                assert_eq!(v, brute_hull_vertices(&pts), "n = {n}");
                assert!(pts.iter().all(|&p| hull.contains(p)));
            }
        }
    }

    #[test]
    fn full_frame_hull_is_all_foreground() {
        let hull = convex_hull(&set(&[[0.0, 0.0], [40.0, 0.0], [40.0, 30.0], [0.0, 30.0]])).unwrap();
        let mask = hull_to_mask(&hull, 40, 30).unwrap();
        assert_eq!(mask.count(FOREGROUND), 40 * 30);
    }

    #[test]
    fn triangle_mask_matches_pixel_oracle() {
        let hull = convex_hull(&set(&[[10.0, 10.0], [90.0, 20.0], [35.5, 80.25]])).unwrap();
        let mask = hull_to_mask(&hull, 100, 100).unwrap();
        let oracle = pixel_oracle(&hull, 100, 100);
        assert_eq!(mask.count(FOREGROUND), oracle.count(FOREGROUND));
        assert_eq!(mask, oracle);
        assert!(mask.count(FOREGROUND) > 0);
    }

    #[test]
    fn boundary_pixel_centres_count_as_foreground() {
        // Edge passes exactly through the centres of column 2.
        let hull = convex_hull(&set(&[[2.5, 0.0], [8.0, 0.0], [8.0, 8.0], [2.5, 8.0]])).unwrap();
        let mask = hull_to_mask(&hull, 10, 8).unwrap();
        assert!((0..8).all(|y| mask.get(2, y) == FOREGROUND));
        assert!((0..8).all(|y| mask.get(1, y) == BACKGROUND));
    }

    #[test]
    fn provided_mask_without_foreground() {
        let img = ImageBuf::filled(8, 8, [1, 2, 3]).unwrap();
        let seg = ProvidedMask::new(Some(MaskBuf::filled(8, 8, BACKGROUND).unwrap()));
        assert!(matches!(seg.segment(&img, SegmentHint::None), Err(Error::NoForeground)));
        assert!(matches!(
            ProvidedMask::default().segment(&img, SegmentHint::None),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn provided_mask_reads_png_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        MaskBuf::filled(8, 8, BACKGROUND).unwrap().save_png(&path).unwrap();
        let seg = ProvidedMask::from_file(&path).unwrap();
        let img = ImageBuf::filled(8, 8, [0; 3]).unwrap();
        assert!(matches!(seg.segment(&img, SegmentHint::None), Err(Error::NoForeground)));
    }

    #[test]
    fn background_diff_needs_hint_and_foreground() {
        let bg = crate::synth::texture(40, 40, 2);
        let seg = BackgroundDiff::default();
        assert!(matches!(seg.segment(&bg, SegmentHint::None), Err(Error::Config(_))));
        assert!(matches!(
            seg.segment(&bg, SegmentHint::Background(&bg)),
            Err(Error::NoForeground)
        ));
    }

    #[test]
    fn background_diff_finds_pasted_square() {
        let bg = ImageBuf::from_fn(50, 40, |x, y| [(x * 2) as u8, 100, (y * 3) as u8]).unwrap();
        let mut img = bg.clone();
        for y in 12..22 {
            for x in 30..40 {
                img.put_pixel(x, y, [255, 0, 0]);
            }
        }
        // Oracle: every pixel of the square differs by > 30 in some channel.
        for y in 12..22 {
            for x in 30..40 {
                let (a, b) = (img.pixel(x, y), bg.pixel(x, y));
                assert!((0..3).any(|c| a[c].abs_diff(b[c]) > 30));
            }
        }
        let res = BackgroundDiff { tau: 30 }
            .segment(&img, SegmentHint::Background(&bg))
            .unwrap();
        assert_eq!(res.bbox, BoundingRect::new(30, 12, 40, 22).unwrap());
    }

    #[test]
    fn majority_removes_specks() {
        let mut m = MaskBuf::filled(9, 9, BACKGROUND).unwrap();
        m.set(4, 4, FOREGROUND);
        assert_eq!(majority_3x3(&m).count(FOREGROUND), 0);
    }

    #[test]
    fn hull_segmenter_uses_landmarks() {
        let seg = HullSegmenter::new(set(&[[2.0, 2.0], [12.0, 2.0], [2.0, 12.0]]));
        let img = ImageBuf::filled(16, 16, [0; 3]).unwrap();
        let r = seg.segment(&img, SegmentHint::None).unwrap();
        assert_eq!(r.bbox, BoundingRect::new(2, 2, 12, 12).unwrap());
        assert_eq!(seg.prior_mask(&img), Some(r.mask));
        let tiny = ImageBuf::filled(8, 8, [0; 3]).unwrap();
        assert!(seg.segment(&tiny, SegmentHint::None).is_err());
        assert!(seg.prior_mask(&tiny).is_none());
    }

    #[test]
    fn landmarks_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.json");
        std::fs::write(&path, r#"{"points": [[1, 2], [3.5, 4], [9, 0]]}"#).unwrap();
        let l = LandmarkSet::load_json(&path).unwrap();
        assert_eq!(l.points, vec![[1.0, 2.0], [3.5, 4.0], [9.0, 0.0]]);
        assert!(l.check_bounds(10, 10).is_ok());
        assert!(l.check_bounds(5, 5).is_err());
    }

    proptest! {
        #[test]
        fn scanlines_are_contiguous(pts in proptest::collection::vec((0.0f64..64.0, 0.0f64..48.0), 3..40)) {
            let set = LandmarkSet::new(pts.iter().map(|&(x, y)| [x, y]).collect());
            if let Ok(hull) = convex_hull(&set) {
                let mask = hull_to_mask(&hull, 64, 48).unwrap();
                prop_assert_eq!(&mask, &pixel_oracle(&hull, 64, 48));
                for y in 0..48 {
                    let xs: Vec<u32> = (0..64).filter(|&x| mask.get(x, y) == FOREGROUND).collect();
                    if let (Some(a), Some(b)) = (xs.first(), xs.last()) {
                        prop_assert_eq!((b - a + 1) as usize, xs.len());
                    }
                }
            }
        }

        #[test]
        fn bbox_is_tight(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = MaskBuf::from_fn(20, 15, |_, _| u8::from(rng.gen_bool(0.9))).unwrap();
            if let Ok(res) = SegmentationResult::from_mask(m.clone()) {
                for y in 0..15 {
                    for x in 0..20 {
                        if m.get(x, y) == FOREGROUND {
                            prop_assert!(res.bbox.contains(x, y));
                        }
                    }
                }
                let b = res.bbox;
                prop_assert!((b.x1..b.x2).any(|x| m.get(x, b.y1) == FOREGROUND));
                prop_assert!((b.x1..b.x2).any(|x| m.get(x, b.y2 - 1) == FOREGROUND));
                prop_assert!((b.y1..b.y2).any(|y| m.get(b.x1, y) == FOREGROUND));
                prop_assert!((b.y1..b.y2).any(|y| m.get(b.x2 - 1, y) == FOREGROUND));
            }
        }
    }
}
