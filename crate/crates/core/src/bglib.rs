//! Background library: entries with precomputed features, best-match
//! selection with a minimum-match fallback, and the `.bgl` file format.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! "SBGL" | version u8 | entry count u32
//! per entry:
//!   id u32 | png length u32 | png bytes
//!   keypoint count u32 | count * (x f32, y f32, response f32, orientation f32)
//!   count * 32-byte descriptor
//! CRC-32 of all preceding bytes
//! ```

use std::path::Path;

use serde::Serialize;

use crate::codec::{self, put_f32, put_u32, Reader};
use crate::error::{Error, FormatError, Result};
use crate::features::{extract_masked, match_count, Descriptor256, FeatureParams, Keypoint};
use crate::imaging::{ImageBuf, MaskBuf};

pub const MAGIC: [u8; 4] = *b"SBGL";
pub const FORMAT_VERSION: u8 = 1;
pub const DEFAULT_N_MIN: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundEntry {
    pub id: u32,
    pub image: ImageBuf,
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor256>,
}

/// Computes the features of a candidate background.
///
/// With `person_mask`, features come from the image with its foreground
/// (mask value 0) blacked out.
pub fn build_entry(
    id: u32,
    image: ImageBuf,
    person_mask: Option<&MaskBuf>,
    params: FeatureParams,
) -> Result<BackgroundEntry> {
    let (keypoints, descriptors) = extract_masked(&image, person_mask, params)?;
    Ok(BackgroundEntry {
        id,
        image,
        keypoints,
        descriptors,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BackgroundLibrary {
    entries: Vec<BackgroundEntry>,
}

impl BackgroundLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<BackgroundEntry>) -> Result<Self> {
        let mut lib = Self::new();
        for e in entries {
            lib.push(e)?;
        }
        Ok(lib)
    }

    /// Appends an entry; ids must be strictly increasing.
    pub fn push(&mut self, entry: BackgroundEntry) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if entry.id <= last.id {
                return Err(Error::Input(format!(
                    "library ids must increase: {} follows {}",
                    entry.id, last.id
                )));
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[BackgroundEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&BackgroundEntry> {
        self.entries
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn next_id(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.id + 1)
    }

    pub fn format_version(&self) -> u8 {
        FORMAT_VERSION
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        put_u32(&mut out, self.entries.len() as u32);
        for e in &self.entries {
            put_u32(&mut out, e.id);
            let png = e.image.encode_png()?;
            put_u32(&mut out, png.len() as u32);
            out.extend_from_slice(&png);
            put_u32(&mut out, e.keypoints.len() as u32);
            for kp in &e.keypoints {
                put_f32(&mut out, kp.x);
                put_f32(&mut out, kp.y);
                put_f32(&mut out, kp.response);
                put_f32(&mut out, kp.orientation);
            }
            for d in &e.descriptors {
                out.extend_from_slice(&d.to_bytes());
            }
        }
        codec::seal(&mut out);
        Ok(out)
    }

    /// Parses a library file. The checksum is verified before any field is read.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let body = codec::verify_crc(bytes, 9)?;
        let mut r = Reader::new(body);
        codec::check_header(&mut r, MAGIC, FORMAT_VERSION)?;
        let count = r.u32()? as usize;
        let mut entries = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let id = r.u32()?;
            let png_len = r.u32()? as usize;
            let image = ImageBuf::decode_png(r.take(png_len)?).map_err(|e| {
                Error::Format(FormatError::InvalidField {
                    field: "image",
                    reason: e.to_string(),
                })
            })?;
            let n = r.u32()? as usize;
            if n.saturating_mul(48) > r.remaining() {
                return Err(FormatError::Truncated {
                    offset: 0,
                    needed: n.saturating_mul(48),
                    available: r.remaining(),
                }
                .into());
            }
            let mut keypoints = Vec::with_capacity(n);
            for _ in 0..n {
                keypoints.push(Keypoint {
                    x: r.f32()?,
                    y: r.f32()?,
                    response: r.f32()?,
                    orientation: r.f32()?,
                });
            }
            let mut descriptors = Vec::with_capacity(n);
            for _ in 0..n {
                descriptors.push(Descriptor256::from_bytes(&r.array::<32>()?));
            }
            entries.push(BackgroundEntry {
                id,
                image,
                keypoints,
                descriptors,
            });
        }
        r.finish()?;
        Self::from_entries(entries).map_err(|e| {
            Error::Format(FormatError::InvalidField {
                field: "id",
                reason: e.to_string(),
            })
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchOutcome {
    pub matched: bool,
    pub background_id: Option<u32>,
    /// Match count of the best entry (zero for an empty library).
    pub match_count: usize,
    /// `(id, N_k)` for every entry, in library order.
    pub counts: Vec<(u32, usize)>,
}

/// Picks the entry with the most descriptor matches.
///
/// Ties go to the lowest id. The outcome is unmatched when the best count is
/// below `n_min` or the library is empty; callers then transmit directly.
pub fn best_match(query: &[Descriptor256], lib: &BackgroundLibrary, t: u32, n_min: usize) -> MatchOutcome {
    let counts: Vec<(u32, usize)> = lib
        .entries
        .iter()
        .map(|e| (e.id, match_count(query, &e.descriptors, t)))
        .collect();
    let best = counts.iter().copied().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
    match best {
        Some((id, n)) if n >= n_min => MatchOutcome {
            matched: true,
            background_id: Some(id),
            match_count: n,
            counts,
        },
        Some((_, n)) => MatchOutcome {
            matched: false,
            background_id: None,
            match_count: n,
            counts,
        },
        None => MatchOutcome {
            matched: false,
            background_id: None,
            match_count: 0,
            counts,
        },
    }
}
