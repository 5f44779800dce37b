//! Raster primitives: RGB images, binary masks, PSNR, proportional resizing,
//! masking and compositing.
//!
//! Mask convention used throughout the crate: `0` marks foreground (the
//! person or key object), `1` marks background.

use std::fmt;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::{shape, Error, Result};

pub const CHANNELS: usize = 3;

/// Mask value for foreground pixels.
pub const FOREGROUND: u8 = 0;
/// Mask value for background pixels.
pub const BACKGROUND: u8 = 1;

/// Row-major 8-bit RGB image.
#[derive(Clone, PartialEq, Eq)]
pub struct ImageBuf {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl fmt::Debug for ImageBuf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImageBuf")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl ImageBuf {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(shape(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * CHANNELS;
        if data.len() != expected {
            return Err(shape(format!(
                "{width}x{height} RGB image needs {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(ImageBuf { width, height, data })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self> {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width as usize * height as usize * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Number of 8-bit samples (`width * height * 3`).
    pub fn sample_count(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * CHANNELS
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn put_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = self.offset(x, y);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Luma conversion with integer BT.601 weights, rounded.
    pub fn to_gray(&self) -> Vec<u8> {
        self.data
            .chunks_exact(CHANNELS)
            .map(|p| ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000) as u8)
            .collect()
    }

    pub fn full_rect(&self) -> BoundingRect {
        BoundingRect {
            x1: 0,
            y1: 0,
            x2: self.width,
            y2: self.height,
        }
    }

    pub fn same_shape(&self, other: &ImageBuf) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Copies the pixels inside `rect`.
    pub fn sub_image(&self, rect: &BoundingRect) -> Result<ImageBuf> {
        rect.check_within(self.width, self.height)?;
        let mut data = Vec::with_capacity(rect.area() * CHANNELS);
        for y in rect.y1..rect.y2 {
            let start = self.offset(rect.x1, y);
            let end = self.offset(rect.x2 - 1, y) + CHANNELS;
            data.extend_from_slice(&self.data[start..end]);
        }
        ImageBuf::new(rect.width(), rect.height(), data)
    }

    /// Rotates by 90 degrees clockwise: output pixel `(h-1-y, x)` takes input `(x, y)`.
    pub fn rotate90_cw(&self) -> ImageBuf {
        let (w, h) = (self.width, self.height);
        let mut out = ImageBuf {
            width: h,
            height: w,
            data: vec![0; self.data.len()],
        };
        for y in 0..h {
            for x in 0..w {
                out.put_pixel(h - 1 - y, x, self.pixel(x, y));
            }
        }
        out
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<ImageBuf> {
        let img = image::open(path.as_ref())?.to_rgb8();
        let (w, h) = img.dimensions();
        ImageBuf::new(w, h, img.into_raw())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        image::save_buffer_with_format(
            path.as_ref(),
            &self.data,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
            image::ImageFormat::Png,
        )?;
        Ok(())
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        let encoder = image::codecs::png::PngEncoder::new(std::io::Cursor::new(&mut out));
        image::ImageEncoder::write_image(
            encoder,
            &self.data,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
        )?;
        Ok(out)
    }

    pub fn decode_png(bytes: &[u8]) -> Result<ImageBuf> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgb8();
        let (w, h) = img.dimensions();
        ImageBuf::new(w, h, img.into_raw())
    }
}

/// Binary per-pixel mask; `0` = foreground, `1` = background.
#[derive(Clone, PartialEq, Eq)]
pub struct MaskBuf {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl fmt::Debug for MaskBuf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MaskBuf")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("foreground", &self.count(FOREGROUND))
            .finish()
    }
}

impl MaskBuf {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(shape(format!("mask dimensions must be positive, got {width}x{height}")));
        }
        if data.len() != width as usize * height as usize {
            return Err(shape(format!(
                "{width}x{height} mask needs {} values, got {}",
                width as usize * height as usize,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|&&v| v > 1) {
            return Err(shape(format!("mask values must be 0 or 1, found {bad}")));
        }
        Ok(MaskBuf { width, height, data })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        debug_assert!(value <= 1);
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count(&self, value: u8) -> usize {
        self.data.iter().filter(|&&v| v == value).count()
    }

    pub fn matches_image(&self, img: &ImageBuf) -> bool {
        self.width == img.width && self.height == img.height
    }

    /// Swaps foreground and background.
    pub fn inverted(&self) -> MaskBuf {
        MaskBuf {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| 1 - v).collect(),
        }
    }

    /// Tight bounding box of the pixels equal to `value`, if any.
    pub fn bbox_of(&self, value: u8) -> Option<BoundingRect> {
        let (mut x1, mut y1, mut x2, mut y2) = (u32::MAX, u32::MAX, 0u32, 0u32);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) == value {
                    x1 = x1.min(x);
                    y1 = y1.min(y);
                    x2 = x2.max(x + 1);
                    y2 = y2.max(y + 1);
                }
            }
        }
        (x1 != u32::MAX).then_some(BoundingRect { x1, y1, x2, y2 })
    }

    pub fn sub_mask(&self, rect: &BoundingRect) -> Result<MaskBuf> {
        rect.check_within(self.width, self.height)?;
        let mut data = Vec::with_capacity(rect.area());
        for y in rect.y1..rect.y2 {
            for x in rect.x1..rect.x2 {
                data.push(self.get(x, y));
            }
        }
        MaskBuf::new(rect.width(), rect.height(), data)
    }

    /// Reads a single-channel PNG: `0` is foreground, anything >= 128 background.
    pub fn load_png(path: impl AsRef<Path>) -> Result<MaskBuf> {
        let img = image::open(path.as_ref())?.to_luma8();
        let (w, h) = img.dimensions();
        let data = img.into_raw().into_iter().map(|v| u8::from(v >= 128)).collect();
        MaskBuf::new(w, h, data)
    }

    /// Writes a single-channel PNG with `0` = foreground and `255` = background.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let bytes: Vec<u8> = self.data.iter().map(|&v| v * 255).collect();
        image::save_buffer_with_format(
            path.as_ref(),
            &bytes,
            self.width,
            self.height,
            image::ExtendedColorType::L8,
            image::ImageFormat::Png,
        )?;
        Ok(())
    }
}

/// Axis-aligned rectangle, inclusive top-left and exclusive bottom-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub struct BoundingRect {
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

impl BoundingRect {
    pub fn new(x1: u32, y1: u32, x2: u32, y2: u32) -> Result<Self> {
        if x1 >= x2 || y1 >= y2 {
            return Err(shape(format!("empty rect ({x1},{y1})-({x2},{y2})")));
        }
        Ok(BoundingRect { x1, y1, x2, y2 })
    }

    pub fn width(&self) -> u32 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> u32 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> usize {
        self.width() as usize * self.height() as usize
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x1 && x < self.x2 && y >= self.y1 && y < self.y2
    }

    pub fn check_within(&self, width: u32, height: u32) -> Result<()> {
        if self.x1 >= self.x2 || self.y1 >= self.y2 || self.x2 > width || self.y2 > height {
            return Err(shape(format!(
                "rect ({},{})-({},{}) does not fit a {width}x{height} frame",
                self.x1, self.y1, self.x2, self.y2
            )));
        }
        Ok(())
    }

    /// Grows the rect by `pad` pixels on every side, clamped to the frame.
    pub fn padded(&self, pad: u32, width: u32, height: u32) -> BoundingRect {
        BoundingRect {
            x1: self.x1.saturating_sub(pad),
            y1: self.y1.saturating_sub(pad),
            x2: self.x2.saturating_add(pad).min(width),
            y2: self.y2.saturating_add(pad).min(height),
        }
    }

    pub fn union(&self, other: &BoundingRect) -> BoundingRect {
        BoundingRect {
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
            x2: self.x2.max(other.x2),
            y2: self.y2.max(other.y2),
        }
    }
}

/// Peak signal-to-noise ratio in dB for 8-bit samples.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Psnr {
    Db(f64),
    /// Identical inputs (zero MSE).
    Infinite,
}

impl Psnr {
    pub fn from_mse(mse: f64) -> Psnr {
        if mse <= 0.0 {
            Psnr::Infinite
        } else {
            Psnr::Db(10.0 * (255.0f64 * 255.0 / mse).log10())
        }
    }

    /// The dB value, with `f64::INFINITY` for the infinite marker.
    pub fn as_f64(self) -> f64 {
        match self {
            Psnr::Db(v) => v,
            Psnr::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Psnr::Infinite)
    }

    pub fn from_f64(v: f64) -> Psnr {
        if v.is_infinite() && v > 0.0 {
            Psnr::Infinite
        } else {
            Psnr::Db(v)
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Db(v) => write!(f, "{v:.4}"),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Psnr::Db(v) => s.serialize_f64(*v),
            Psnr::Infinite => s.serialize_str("inf"),
        }
    }
}

pub fn mse(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(shape(format!(
            "psnr needs equal shapes, got {}x{} and {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    let sum: u64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.data.len() as f64)
}

pub fn psnr(a: &ImageBuf, b: &ImageBuf) -> Result<Psnr> {
    mse(a, b).map(Psnr::from_mse)
}

/// Bilinear resampling with pixel-centre alignment and edge clamping.
pub fn resize_bilinear(img: &ImageBuf, width: u32, height: u32) -> Result<ImageBuf> {
    if width == 0 || height == 0 {
        return Err(shape("resize target must be at least 1x1"));
    }
    if width == img.width && height == img.height {
        return Ok(img.clone());
    }
    let sx = img.width as f64 / width as f64;
    let sy = img.height as f64 / height as f64;
    let axis = |dst: u32, scale: f64, len: u32| -> (usize, usize, f64) {
        let src = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = src.floor() as usize;
        let i1 = (i0 + 1).min(len as usize - 1);
        (i0, i1, src - i0 as f64)
    };
    let xs: Vec<_> = (0..width).map(|x| axis(x, sx, img.width)).collect();
    let mut data = Vec::with_capacity(width as usize * height as usize * CHANNELS);
    let stride = img.width as usize * CHANNELS;
    for y in 0..height {
        let (y0, y1, fy) = axis(y, sy, img.height);
        for &(x0, x1, fx) in &xs {
            for c in 0..CHANNELS {
                let p00 = img.data[y0 * stride + x0 * CHANNELS + c] as f64;
                let p01 = img.data[y0 * stride + x1 * CHANNELS + c] as f64;
                let p10 = img.data[y1 * stride + x0 * CHANNELS + c] as f64;
                let p11 = img.data[y1 * stride + x1 * CHANNELS + c] as f64;
                let top = p00 + (p01 - p00) * fx;
                let bottom = p10 + (p11 - p10) * fx;
                let v = top + (bottom - top) * fy;
                data.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    ImageBuf::new(width, height, data)
}

/// Output dimensions for a proportional downscale by `scale`.
pub fn scaled_dims(width: u32, height: u32, scale: f32) -> (u32, u32) {
    let s = scale as f64;
    let dim = |d: u32| ((d as f64 * s).floor() as u32).max(1);
    (dim(width), dim(height))
}

/// Largest `f32` scale whose [`scaled_dims`] area stays within `max_pixels`.
///
/// Starts from `sqrt(max_pixels / area)`; falls back to a search when the
/// one-pixel floor on a thin image would otherwise overshoot the budget.
pub fn proportional_scale(width: u32, height: u32, max_pixels: u64) -> f32 {
    let area = width as u64 * height as u64;
    if area <= max_pixels {
        return 1.0;
    }
    let fits = |s: f32| {
        let (w, h) = scaled_dims(width, height, s);
        (w as u64 * h as u64) <= max_pixels
    };
    let start = ((max_pixels as f64 / area as f64).sqrt()) as f32;
    if fits(start) {
        return start;
    }
    // Positive f32 values order like their bit patterns.
    let (mut lo, mut hi) = (0u32, start.to_bits());
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(f32::from_bits(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    f32::from_bits(lo).max(f32::MIN_POSITIVE)
}

/// Downscales `img` so its area is at most `max_pixels`, preserving aspect.
///
/// Returns the input unchanged with scale 1 when it already fits.
pub fn resize_proportional(img: &ImageBuf, max_pixels: u64) -> Result<(ImageBuf, f32)> {
    if max_pixels == 0 {
        return Err(Error::Parameter("max_pixels must be at least 1".into()));
    }
    let scale = proportional_scale(img.width, img.height, max_pixels);
    if scale >= 1.0 {
        return Ok((img.clone(), 1.0));
    }
    let (w, h) = scaled_dims(img.width, img.height, scale);
    Ok((resize_bilinear(img, w, h)?, scale))
}

/// Keeps pixels whose mask value equals `keep`, blacks out the rest.
pub fn apply_mask(img: &ImageBuf, mask: &MaskBuf, keep: u8) -> Result<ImageBuf> {
    if !mask.matches_image(img) {
        return Err(shape(format!(
            "mask {}x{} does not match image {}x{}",
            mask.width, mask.height, img.width, img.height
        )));
    }
    if keep > 1 {
        return Err(Error::Parameter(format!("keep must be 0 or 1, got {keep}")));
    }
    let mut out = img.clone();
    for (px, &m) in out.data.chunks_exact_mut(CHANNELS).zip(&mask.data) {
        if m != keep {
            px.fill(0);
        }
    }
    Ok(out)
}

/// Pastes `patch` into a copy of `background` at `rect`.
///
/// With `patch_mask`, only foreground (`0`) patch pixels are written.
pub fn composite(
    background: &ImageBuf,
    patch: &ImageBuf,
    rect: &BoundingRect,
    patch_mask: Option<&MaskBuf>,
) -> Result<ImageBuf> {
    rect.check_within(background.width, background.height)?;
    if patch.width != rect.width() || patch.height != rect.height() {
        return Err(shape(format!(
            "patch {}x{} does not match rect {}x{}",
            patch.width,
            patch.height,
            rect.width(),
            rect.height()
        )));
    }
    if let Some(m) = patch_mask {
        if !m.matches_image(patch) {
            return Err(shape("patch mask does not match patch dimensions"));
        }
    }
    let mut out = background.clone();
    for y in 0..patch.height {
        for x in 0..patch.width {
            if patch_mask.is_none_or(|m| m.get(x, y) == FOREGROUND) {
                out.put_pixel(rect.x1 + x, rect.y1 + y, patch.pixel(x, y));
            }
        }
    }
    Ok(out)
}
