//! Key-information crops: cut the foreground box out of a frame, remember
//! where it came from, and paste the received crop back onto a background.

use serde::Serialize;

use crate::error::{shape, Result};
use crate::imaging::{composite, resize_bilinear, BoundingRect, ImageBuf, MaskBuf};

/// Pixels added on each side of the segmenter's box before cropping.
pub const DEFAULT_PAD: u32 = 2;

/// Everything the receiver needs to put a crop back in place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CropRecord {
    /// Crop position in original-frame coordinates.
    pub rect: BoundingRect,
    pub original_width: u32,
    pub original_height: u32,
    /// Downscale applied before transmission, in `(0, 1]`.
    pub scale: f32,
    pub background_id: u32,
}

impl CropRecord {
    pub fn validate(&self) -> Result<()> {
        self.rect.check_within(self.original_width, self.original_height)?;
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(shape(format!("crop scale {} is outside (0, 1]", self.scale)));
        }
        Ok(())
    }
}

/// Plain copy of `rect` out of `img`.
pub fn extract(img: &ImageBuf, rect: &BoundingRect) -> Result<ImageBuf> {
    img.sub_image(rect)
}

/// Reassembles a full frame from a received crop and the matched background.
///
/// A downscaled crop is resized back to the rect first. A background of a
/// different size is resized to the original frame. Pixels outside the rect
/// come from the background unchanged.
pub fn restore(
    received_crop: &ImageBuf,
    record: &CropRecord,
    background: &ImageBuf,
    crop_mask: Option<&MaskBuf>,
) -> Result<ImageBuf> {
    record.validate()?;
    let (rw, rh) = (record.rect.width(), record.rect.height());
    let crop = if (received_crop.width(), received_crop.height()) == (rw, rh) {
        received_crop.clone()
    } else if record.scale < 1.0 {
        resize_bilinear(received_crop, rw, rh)?
    } else {
        return Err(shape(format!(
            "crop {}x{} does not match rect {rw}x{rh} at scale 1",
            received_crop.width(),
            received_crop.height()
        )));
    };
    let bg = if (background.width(), background.height()) == (record.original_width, record.original_height) {
        background.clone()
    } else {
        resize_bilinear(background, record.original_width, record.original_height)?
    };
    composite(&bg, &crop, &record.rect, crop_mask)
}
