//! Oriented FAST keypoints, rotated BRIEF descriptors and Hamming matching.
//!
//! Detection runs FAST-9 on the luma plane at a single scale. Each keypoint
//! gets an intensity-centroid orientation over a radius-15 disk, and the
//! 256-bit descriptor compares Gaussian-smoothed (sigma 2) intensities at a
//! fixed table of point pairs rotated to one of 30 discrete angles.

mod pattern;

use std::f32::consts::TAU;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{apply_mask, ImageBuf, MaskBuf, BACKGROUND};
use pattern::BRIEF_PAIRS;

/// Radius of the orientation disk and of the BRIEF sampling area.
pub const PATCH_RADIUS: u32 = 15;
/// Keypoints are only reported this far from every image edge.
pub const BORDER: u32 = PATCH_RADIUS + 1;
/// Smallest accepted image side.
pub const MIN_IMAGE_SIDE: u32 = 32;
pub const ORIENTATION_BINS: usize = 30;
pub const DESCRIPTOR_BITS: u32 = 256;

pub const DEFAULT_FAST_THRESHOLD: u8 = 20;
pub const DEFAULT_MAX_KEYPOINTS: usize = 500;
pub const DEFAULT_HAMMING_THRESHOLD: u32 = 64;

const SMOOTHING_SIGMA: f32 = 2.0;
const SMOOTHING_RADIUS: i32 = 6;

/// Bresenham circle of radius 3, clockwise from 12 o'clock.
const CIRCLE: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];
const ARC: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f32,
    pub y: f32,
    pub response: f32,
    /// Radians in `[0, 2π)`.
    pub orientation: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Descriptor256(pub [u64; 4]);

impl Descriptor256 {
    pub const ZERO: Descriptor256 = Descriptor256([0; 4]);

    pub fn bit(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.0[i / 64] |= mask;
        } else {
            self.0[i / 64] &= !mask;
        }
    }

    pub fn flip_bit(&mut self, i: usize) {
        self.0[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn not(&self) -> Descriptor256 {
        Descriptor256(self.0.map(|w| !w))
    }

    pub fn count_ones(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    /// Little-endian words, 32 bytes.
    pub fn to_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (chunk, w) in out.chunks_exact_mut(8).zip(self.0) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Descriptor256 {
        let mut words = [0u64; 4];
        for (w, chunk) in words.iter_mut().zip(bytes.chunks_exact(8)) {
            *w = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        }
        Descriptor256(words)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MatchPair {
    pub index_a: usize,
    pub index_b: usize,
    pub distance: u32,
}

/// Detector settings shared by library building and querying.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureParams {
    pub fast_threshold: u8,
    pub max_keypoints: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            fast_threshold: DEFAULT_FAST_THRESHOLD,
            max_keypoints: DEFAULT_MAX_KEYPOINTS,
        }
    }
}

fn check_size(img: &ImageBuf) -> Result<()> {
    if img.width() < MIN_IMAGE_SIDE || img.height() < MIN_IMAGE_SIDE {
        return Err(Error::Shape(format!(
            "feature detection needs at least {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE}, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// FAST-9 score: zero when the segment test fails, otherwise the larger of
/// the summed bright and dark excesses over the threshold.
fn fast_score(gray: &[u8], w: usize, x: usize, y: usize, t: i32) -> i32 {
    let p = gray[y * w + x] as i32;
    let mut classes = [0i8; 16];
    let (mut bright_sum, mut dark_sum) = (0i32, 0i32);
    for (k, &(dx, dy)) in CIRCLE.iter().enumerate() {
        let v = gray[(y as i32 + dy) as usize * w + (x as i32 + dx) as usize] as i32;
        if v > p + t {
            classes[k] = 1;
            bright_sum += v - p - t;
        } else if v < p - t {
            classes[k] = -1;
            dark_sum += p - v - t;
        }
    }
    let has_arc = |class: i8| {
        let mut run = 0;
        for k in 0..16 + ARC - 1 {
            if classes[k % 16] == class {
                run += 1;
                if run >= ARC {
                    return true;
                }
            } else {
                run = 0;
            }
        }
        false
    };
    let mut score = 0;
    if has_arc(1) {
        score = bright_sum;
    }
    if has_arc(-1) {
        score = score.max(dark_sum);
    }
    score
}

fn intensity_centroid_angle(gray: &[u8], w: usize, x: usize, y: usize) -> f32 {
    let r = PATCH_RADIUS as i32;
    let (mut m10, mut m01) = (0i64, 0i64);
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy > r * r {
                continue;
            }
            let v = gray[(y as i32 + dy) as usize * w + (x as i32 + dx) as usize] as i64;
            m10 += dx as i64 * v;
            m01 += dy as i64 * v;
        }
    }
    let a = (m01 as f64).atan2(m10 as f64) as f32;
    let a = if a < 0.0 { a + TAU } else { a };
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Detects FAST-9 corners, keeps 3x3 local maxima of the score and returns the
/// `max_keypoints` strongest, ordered by response then raster position.
pub fn detect_keypoints(img: &ImageBuf, fast_threshold: u8, max_keypoints: usize) -> Result<Vec<Keypoint>> {
    check_size(img)?;
    if fast_threshold == 0 {
        return Err(Error::Parameter("fast_threshold must be at least 1".into()));
    }
    let gray = img.to_gray();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let t = fast_threshold as i32;
    let b = BORDER as usize;

    let mut scores = vec![0i32; w * h];
    // One extra ring so suppression sees the neighbours of edge candidates.
    for y in b - 1..h - b + 1 {
        for x in b - 1..w - b + 1 {
            scores[y * w + x] = fast_score(&gray, w, x, y, t);
        }
    }

    let mut found = Vec::new();
    for y in b..h - b {
        for x in b..w - b {
            let s = scores[y * w + x];
            if s == 0 {
                continue;
            }
            let is_max = (-1i32..=1)
                .all(|dy| (-1i32..=1).all(|dx| scores[(y as i32 + dy) as usize * w + (x as i32 + dx) as usize] <= s));
            if is_max {
                found.push((s, y, x));
            }
        }
    }
    found.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    found.truncate(max_keypoints);

    Ok(found
        .into_iter()
        .map(|(s, y, x)| Keypoint {
            x: x as f32,
            y: y as f32,
            response: s as f32,
            orientation: intensity_centroid_angle(&gray, w, x, y),
        })
        .collect())
}

fn gaussian_kernel() -> Vec<f32> {
    let k: Vec<f32> = (-SMOOTHING_RADIUS..=SMOOTHING_RADIUS)
        .map(|i| (-(i * i) as f32 / (2.0 * SMOOTHING_SIGMA * SMOOTHING_SIGMA)).exp())
        .collect();
    let sum: f32 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

/// Separable Gaussian blur with clamped edges.
fn smooth(gray: &[u8], w: usize, h: usize) -> Vec<f32> {
    let kernel = gaussian_kernel();
    let r = SMOOTHING_RADIUS;
    let mut tmp = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0f32;
            for (i, &k) in kernel.iter().enumerate() {
                let sx = (x as i32 + i as i32 - r).clamp(0, w as i32 - 1) as usize;
                acc += k * gray[y * w + sx] as f32;
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0f32;
            for (i, &k) in kernel.iter().enumerate() {
                let sy = (y as i32 + i as i32 - r).clamp(0, h as i32 - 1) as usize;
                acc += k * tmp[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

type RotatedPattern = [[i8; 4]; 256];

fn rotated_patterns() -> &'static [RotatedPattern; ORIENTATION_BINS] {
    static TABLES: OnceLock<[RotatedPattern; ORIENTATION_BINS]> = OnceLock::new();
    TABLES.get_or_init(|| {
        std::array::from_fn(|bin| {
            let angle = bin as f64 * std::f64::consts::TAU / ORIENTATION_BINS as f64;
            let (sin, cos) = angle.sin_cos();
            let rot = |x: i8, y: i8| -> (i8, i8) {
                let (x, y) = (x as f64, y as f64);
                ((x * cos - y * sin).round() as i8, (x * sin + y * cos).round() as i8)
            };
            BRIEF_PAIRS.map(|[x1, y1, x2, y2]| {
                let (a, b) = rot(x1, y1);
                let (c, d) = rot(x2, y2);
                [a, b, c, d]
            })
        })
    })
}

pub fn orientation_bin(angle: f32) -> usize {
    let step = TAU / ORIENTATION_BINS as f32;
    ((angle / step).round() as i64).rem_euclid(ORIENTATION_BINS as i64) as usize
}

/// Computes one rotated-BRIEF descriptor per keypoint.
///
/// Bit `i` is set when the smoothed intensity at the first point of pair `i`
/// is lower than at the second.
pub fn describe(img: &ImageBuf, kps: &[Keypoint]) -> Result<Vec<Descriptor256>> {
    check_size(img)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let r = PATCH_RADIUS as i64;
    for kp in kps {
        let (x, y) = (kp.x.round() as i64, kp.y.round() as i64);
        if x < r || y < r || x + r >= w as i64 || y + r >= h as i64 {
            return Err(Error::Bounds(format!(
                "keypoint ({}, {}) is within {r} px of the {w}x{h} image border",
                kp.x, kp.y
            )));
        }
    }
    let smoothed = smooth(&img.to_gray(), w, h);
    let tables = rotated_patterns();
    Ok(kps
        .iter()
        .map(|kp| {
            let (cx, cy) = (kp.x.round() as i64, kp.y.round() as i64);
            let at = |dx: i8, dy: i8| smoothed[(cy + dy as i64) as usize * w + (cx + dx as i64) as usize];
            let mut d = Descriptor256::ZERO;
            for (i, &[x1, y1, x2, y2]) in tables[orientation_bin(kp.orientation)].iter().enumerate() {
                d.set_bit(i, at(x1, y1) < at(x2, y2));
            }
            d
        })
        .collect())
}

#[inline]
pub fn hamming(a: &Descriptor256, b: &Descriptor256) -> u32 {
    a.0.iter().zip(&b.0).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// One-directional nearest-neighbour matching from `da` into `db`.
///
/// Emits at most one pair per query descriptor, only when the nearest
/// distance is `<= t`; ties go to the lowest `index_b`.
pub fn match_descriptors(da: &[Descriptor256], db: &[Descriptor256], t: u32) -> Vec<MatchPair> {
    if db.is_empty() {
        return Vec::new();
    }
    da.iter()
        .enumerate()
        .filter_map(|(ia, a)| {
            let (ib, dist) = db
                .iter()
                .enumerate()
                .map(|(ib, b)| (ib, hamming(a, b)))
                .min_by_key(|&(ib, dist)| (dist, ib))?;
            (dist <= t).then_some(MatchPair {
                index_a: ia,
                index_b: ib,
                distance: dist,
            })
        })
        .collect()
}

/// Number of matches; same as `match_descriptors(..).len()` without allocating.
pub fn match_count(da: &[Descriptor256], db: &[Descriptor256], t: u32) -> usize {
    if db.is_empty() {
        return 0;
    }
    da.iter()
        .filter(|a| db.iter().map(|b| hamming(a, b)).min().is_some_and(|d| d <= t))
        .count()
}

/// Detects and describes in one pass.
pub fn extract(img: &ImageBuf, params: FeatureParams) -> Result<(Vec<Keypoint>, Vec<Descriptor256>)> {
    let kps = detect_keypoints(img, params.fast_threshold, params.max_keypoints)?;
    let descs = describe(img, &kps)?;
    Ok((kps, descs))
}

/// Features of `img` with foreground pixels (mask value 0) blacked out.
pub fn extract_masked(
    img: &ImageBuf,
    mask: Option<&MaskBuf>,
    params: FeatureParams,
) -> Result<(Vec<Keypoint>, Vec<Descriptor256>)> {
    match mask {
        Some(m) => extract(&apply_mask(img, m, BACKGROUND)?, params),
        None => extract(img, params),
    }
}
