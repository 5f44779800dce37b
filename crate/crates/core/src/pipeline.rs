//! End-to-end flows.
//!
//! [`transmit_image`] is the sender and receiver of one frame. It matches
//! the frame against the background library. On a match it sends only the
//! padded foreground crop through the channel and pastes the decoded crop
//! onto the receiver's copy of the background. Otherwise it sends the whole
//! frame. Both paths pass through a [`WireFrame`], and the receiver side
//! ([`reconstruct`]) works from that frame alone plus the shared library.
//!
//! [`transmit_video`] builds a background per scene from the first frames of
//! the scene, and [`eval_sweep`] compares the two paths over a grid of SNRs
//! and seeds.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::bglib::{best_match, build_entry, BackgroundLibrary, DEFAULT_N_MIN};
use crate::channel::{self, ChannelConfig, SymbolPayload};
use crate::codec::{self, put_f32, put_u32, Reader};
use crate::dynbg::{split_scenes, stitch, Aggregator, FrameSequence, SceneSegment, SplitParams};
use crate::error::{Error, FormatError, Result};
use crate::features::{extract_masked, FeatureParams, DEFAULT_HAMMING_THRESHOLD, MIN_IMAGE_SIDE};
use crate::imaging::{psnr, resize_bilinear, scaled_dims, BoundingRect, ImageBuf, MaskBuf, Psnr, CHANNELS};
use crate::keyinfo::{self, CropRecord, DEFAULT_PAD};
use crate::segmentation::{BackgroundDiff, ProvidedMask, SegmentHint, Segmenter};
use crate::synth;

pub const WIRE_MAGIC: [u8; 4] = *b"SJSC";
pub const WIRE_VERSION: u8 = 1;
/// Background id written into direct-mode frames.
pub const NO_BACKGROUND: u32 = u32::MAX;
pub const DEFAULT_MAX_PIXELS: u64 = 512 * 512;
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.25;
pub const MAX_WARMUP_FRAMES: usize = 30;

const HEADER_LEN: usize = 4 + 1 + 1 + 4 + 16 + 8 + 4 + 4 + 4 + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Direct,
    KeyInfo,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::KeyInfo => "keyinfo",
        }
    }
}

/// Sender-side settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knobs {
    /// Hamming threshold for descriptor matches.
    pub t: u32,
    /// Minimum match count for a background to be accepted.
    pub n_min: usize,
    /// Resolution gate: larger images or crops are downscaled to this area.
    pub max_pixels: u64,
    pub features: FeatureParams,
    /// Pixels added around the foreground box.
    pub pad: u32,
    /// Paste only the foreground pixels of the crop, using the sender's mask.
    pub mask_gated: bool,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            t: DEFAULT_HAMMING_THRESHOLD,
            n_min: DEFAULT_N_MIN,
            max_pixels: DEFAULT_MAX_PIXELS,
            features: FeatureParams::default(),
            pad: DEFAULT_PAD,
            mask_gated: false,
        }
    }
}

/// One transmitted frame, exactly as it travels.
///
/// Layout (little-endian): magic `SJSC`, version u8, mode u8, background id
/// u32, rect x1 y1 x2 y2 u32, original width and height u32, scale f32, gain
/// f32, SNR dB f32, symbol count u32, symbols f32, CRC-32 of everything
/// before it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WireFrame {
    pub mode: Mode,
    pub background_id: u32,
    pub rect: BoundingRect,
    pub original_width: u32,
    pub original_height: u32,
    pub scale: f32,
    pub gain: f32,
    pub snr_db: f32,
    #[serde(skip)]
    pub symbols: Vec<f32>,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Format(FormatError::InvalidField {
        field,
        reason: reason.into(),
    })
}

impl WireFrame {
    /// Size of the image the symbols encode.
    pub fn coded_dims(&self) -> (u32, u32) {
        scaled_dims(self.rect.width(), self.rect.height(), self.scale)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.symbols.len() + 4);
        out.extend_from_slice(&WIRE_MAGIC);
        out.push(WIRE_VERSION);
        out.push(match self.mode {
            Mode::Direct => 0,
            Mode::KeyInfo => 1,
        });
        put_u32(&mut out, self.background_id);
        for v in [self.rect.x1, self.rect.y1, self.rect.x2, self.rect.y2] {
            put_u32(&mut out, v);
        }
        put_u32(&mut out, self.original_width);
        put_u32(&mut out, self.original_height);
        put_f32(&mut out, self.scale);
        put_f32(&mut out, self.gain);
        put_f32(&mut out, self.snr_db);
        put_u32(&mut out, self.symbols.len() as u32);
        for &s in &self.symbols {
            put_f32(&mut out, s);
        }
        codec::seal(&mut out);
        out
    }

    /// Parses and checks a frame. The checksum is verified first, so a
    /// damaged frame never yields partial fields.
    pub fn from_bytes(bytes: &[u8]) -> Result<WireFrame> {
        let body = codec::verify_crc(bytes, HEADER_LEN)?;
        let mut r = Reader::new(body);
        codec::check_header(&mut r, WIRE_MAGIC, WIRE_VERSION)?;
        let mode = match r.u8()? {
            0 => Mode::Direct,
            1 => Mode::KeyInfo,
            m => return Err(invalid("mode", format!("unknown mode {m}"))),
        };
        let background_id = r.u32()?;
        let rect = BoundingRect {
            x1: r.u32()?,
            y1: r.u32()?,
            x2: r.u32()?,
            y2: r.u32()?,
        };
        let original_width = r.u32()?;
        let original_height = r.u32()?;
        let scale = r.f32()?;
        let gain = r.f32()?;
        let snr_db = r.f32()?;
        let count = r.u32()? as usize;
        if count.saturating_mul(4) != r.remaining() {
            return Err(invalid(
                "symbol count",
                format!("header says {count} symbols, body holds {} bytes", r.remaining()),
            ));
        }
        let symbols = (0..count).map(|_| r.f32()).collect::<Result<Vec<_>, _>>()?;
        r.finish()?;
        let frame = WireFrame {
            mode,
            background_id,
            rect,
            original_width,
            original_height,
            scale,
            gain,
            snr_db,
            symbols,
        };
        frame.check_fields()?;
        Ok(frame)
    }

    fn check_fields(&self) -> Result<()> {
        if self.rect.x1 >= self.rect.x2 || self.rect.y1 >= self.rect.y2 {
            return Err(invalid("rect", "empty rectangle"));
        }
        if self.rect.x2 > self.original_width || self.rect.y2 > self.original_height {
            return Err(invalid(
                "rect",
                format!(
                    "extends past the {}x{} frame",
                    self.original_width, self.original_height
                ),
            ));
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(invalid("scale", format!("{} is outside (0, 1]", self.scale)));
        }
        if !(self.gain >= 0.0 && self.gain.is_finite()) {
            return Err(invalid(
                "gain",
                format!("{} is not a finite non-negative value", self.gain),
            ));
        }
        if !self.snr_db.is_finite() {
            return Err(invalid("snr_db", "not finite"));
        }
        if self.mode == Mode::Direct && self.rect != full_rect(self.original_width, self.original_height) {
            return Err(invalid("rect", "direct frames cover the whole image"));
        }
        Ok(())
    }

    /// Checks the symbol count against the budget for the coded size.
    pub fn check_budget(&self, mu: f64) -> Result<()> {
        let (w, h) = self.coded_dims();
        let expected = channel::symbol_budget(w as usize * h as usize * CHANNELS, mu);
        if self.symbols.len() != expected {
            return Err(invalid(
                "symbol count",
                format!(
                    "{} symbols for {w}x{h}x3 at mu={mu}, expected {expected}",
                    self.symbols.len()
                ),
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<WireFrame> {
        WireFrame::from_bytes(&std::fs::read(path)?)
    }
}

fn full_rect(w: u32, h: u32) -> BoundingRect {
    BoundingRect {
        x1: 0,
        y1: 0,
        x2: w,
        y2: h,
    }
}

/// Rebuilds the frame a receiver would display.
///
/// Key-info frames need their background in `lib`. `crop_mask`, when given,
/// restricts the paste to the crop's foreground pixels.
pub fn reconstruct(
    frame: &WireFrame,
    lib: &BackgroundLibrary,
    cfg: &ChannelConfig,
    crop_mask: Option<&MaskBuf>,
) -> Result<ImageBuf> {
    frame.check_fields()?;
    frame.check_budget(cfg.mu)?;
    let (w, h) = frame.coded_dims();
    let payload = SymbolPayload {
        symbols: frame.symbols.iter().map(|&s| s as f64).collect(),
        width: w,
        height: h,
        channels: CHANNELS as u32,
        gain: frame.gain as f64,
    };
    let rx_cfg = ChannelConfig {
        snr_db: frame.snr_db as f64,
        ..*cfg
    };
    let decoded = channel::decode(&payload, &rx_cfg)?;
    match frame.mode {
        Mode::Direct => {
            if (w, h) == (frame.original_width, frame.original_height) {
                Ok(decoded)
            } else {
                resize_bilinear(&decoded, frame.original_width, frame.original_height)
            }
        }
        Mode::KeyInfo => {
            let entry = lib
                .get(frame.background_id)
                .ok_or_else(|| Error::Input(format!("background {} is not in the library", frame.background_id)))?;
            let record = CropRecord {
                rect: frame.rect,
                original_width: frame.original_width,
                original_height: frame.original_height,
                scale: frame.scale,
                background_id: frame.background_id,
            };
            keyinfo::restore(&decoded, &record, &entry.image, crop_mask)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransmitReport {
    pub mode: Mode,
    #[serde(skip)]
    pub reconstructed: ImageBuf,
    pub psnr: Psnr,
    pub symbols_sent: usize,
    /// Source samples of the original frame per channel symbol.
    pub compression_factor: f64,
    pub background_id: Option<u32>,
    /// Best match count during background selection.
    pub match_count: usize,
    pub frame: WireFrame,
}

/// Scale for `w x h` under the resolution gate, never below one codec block.
fn gate_scale(w: u32, h: u32, max_pixels: u64, block: usize) -> f32 {
    let block = block as u32;
    let mut s = crate::imaging::proportional_scale(w, h, max_pixels);
    if w < block || h < block {
        return s;
    }
    while s < 1.0 {
        let (sw, sh) = scaled_dims(w, h, s);
        if sw >= block && sh >= block {
            break;
        }
        s = f32::from_bits(s.to_bits() + 1);
    }
    s.min(1.0)
}

fn gated(img: &ImageBuf, max_pixels: u64, block: usize) -> Result<(ImageBuf, f32)> {
    let s = gate_scale(img.width(), img.height(), max_pixels, block);
    if s >= 1.0 {
        return Ok((img.clone(), 1.0));
    }
    let (w, h) = scaled_dims(img.width(), img.height(), s);
    Ok((resize_bilinear(img, w, h)?, s))
}

/// Grows `rect` to at least `min_side` on each axis, staying inside the frame.
fn at_least(rect: BoundingRect, min_side: u32, w: u32, h: u32) -> BoundingRect {
    let grow = |lo: u32, hi: u32, limit: u32| -> (u32, u32) {
        let need = min_side.min(limit);
        if hi - lo >= need {
            return (lo, hi);
        }
        let lo = lo.min(limit - need);
        (lo, lo + need.max(hi - lo))
    };
    let (x1, x2) = grow(rect.x1, rect.x2, w);
    let (y1, y2) = grow(rect.y1, rect.y2, h);
    BoundingRect { x1, y1, x2, y2 }
}

/// Per-call inputs describing the foreground of one frame.
#[derive(Clone, Copy)]
pub struct Foreground<'a> {
    /// Finds the crop once a background has matched.
    pub segmenter: &'a dyn Segmenter,
    /// Supplies the person mask used while matching, when it differs from
    /// `segmenter`.
    pub shield: Option<&'a dyn Segmenter>,
    /// Region the crop must also cover, e.g. holes in a stitched background.
    pub must_cover: Option<BoundingRect>,
}

impl<'a> Foreground<'a> {
    pub fn new(segmenter: &'a dyn Segmenter) -> Self {
        Foreground {
            segmenter,
            shield: None,
            must_cover: None,
        }
    }

    pub fn with_shield(mut self, shield: &'a dyn Segmenter) -> Self {
        self.shield = Some(shield);
        self
    }
}

/// Sends one frame and reconstructs it at the receiver.
pub fn transmit_image(
    img: &ImageBuf,
    lib: &BackgroundLibrary,
    cfg: &ChannelConfig,
    knobs: &Knobs,
    fg: Foreground<'_>,
) -> Result<TransmitReport> {
    cfg.validate()?;
    if knobs.max_pixels == 0 {
        return Err(Error::Parameter("max_pixels must be at least 1".into()));
    }
    let prior = fg.segmenter.prior_mask(img);
    let shield = match fg.shield {
        Some(s) => s.prior_mask(img),
        None => prior.clone(),
    };
    let mut match_count = 0;
    let mut keyinfo_plan = None;
    if img.width() >= MIN_IMAGE_SIDE && img.height() >= MIN_IMAGE_SIDE && !lib.is_empty() {
        let (_, query) = extract_masked(img, shield.as_ref(), knobs.features)?;
        let outcome = best_match(&query, lib, knobs.t, knobs.n_min);
        match_count = outcome.match_count;
        if let Some(id) = outcome.background_id {
            let entry = lib.get(id).expect("matched id is in the library");
            let bg = if entry.image.same_shape(img) {
                entry.image.clone()
            } else {
                resize_bilinear(&entry.image, img.width(), img.height())?
            };
            let hint = match &prior {
                Some(m) => SegmentHint::Mask(m),
                None => SegmentHint::Background(&bg),
            };
            match fg.segmenter.segment(img, hint) {
                Ok(seg) => keyinfo_plan = Some((id, seg)),
                Err(Error::NoForeground) => {}
                Err(e) => return Err(e),
            }
        }
    }

    let (w, h) = (img.width(), img.height());
    let (mode, background_id, rect, mask) = match keyinfo_plan {
        Some((id, seg)) => {
            let mut rect = seg.bbox.padded(knobs.pad, w, h);
            if let Some(extra) = fg.must_cover {
                rect = rect.union(&extra);
            }
            let rect = at_least(rect, cfg.block as u32, w, h);
            (Mode::KeyInfo, id, rect, Some(seg.mask))
        }
        None => (Mode::Direct, NO_BACKGROUND, full_rect(w, h), None),
    };

    let source = keyinfo::extract(img, &rect)?;
    let (coded, scale) = gated(&source, knobs.max_pixels, cfg.block)?;
    let sent = channel::encode(&coded, cfg)?;
    let received = channel::awgn(&sent, cfg.snr_db, cfg.seed);
    let frame = WireFrame {
        mode,
        background_id,
        rect,
        original_width: w,
        original_height: h,
        scale,
        gain: sent.gain as f32,
        snr_db: cfg.snr_db as f32,
        symbols: received.symbols.iter().map(|&s| s as f32).collect(),
    };
    let crop_mask = match (&mask, knobs.mask_gated) {
        (Some(m), true) => Some(m.sub_mask(&rect)?),
        _ => None,
    };
    let reconstructed = reconstruct(&frame, lib, cfg, crop_mask.as_ref())?;
    let symbols_sent = frame.symbols.len();
    Ok(TransmitReport {
        mode,
        psnr: psnr(img, &reconstructed)?,
        reconstructed,
        symbols_sent,
        compression_factor: img.sample_count() as f64 / symbols_sent as f64,
        background_id: (mode == Mode::KeyInfo).then_some(background_id),
        match_count,
        frame,
    })
}

/// Settings for [`transmit_video`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VideoKnobs {
    /// Share of each scene used to build its background, capped at
    /// [`MAX_WARMUP_FRAMES`].
    pub warmup_fraction: f64,
    pub aggregator: Aggregator,
    pub split: SplitParams,
}

impl Default for VideoKnobs {
    fn default() -> Self {
        VideoKnobs {
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            aggregator: Aggregator::Mean,
            split: SplitParams::default(),
        }
    }
}

/// Warm-up frames for a scene of `len` frames.
pub fn warmup_len(len: usize, fraction: f64) -> usize {
    let n = (fraction * len as f64 - 1e-9).ceil().max(0.0) as usize;
    n.min(MAX_WARMUP_FRAMES).min(len)
}

#[derive(Debug, Clone)]
pub struct VideoOutcome {
    pub reports: Vec<TransmitReport>,
    pub segments: Vec<SceneSegment>,
    /// One stitched background per segment; id = segment index. Segments
    /// whose warm-up is empty get no entry.
    pub library: BackgroundLibrary,
    /// Pixels of each segment's background that no warm-up frame showed.
    pub never_visible: Vec<usize>,
}

/// Sends a video frame by frame.
///
/// Each scene starts with a warm-up: those frames go out directly, and the
/// receiver stitches their decoded pixels (background per the frame masks)
/// into a background for the scene. Remaining frames are matched against
/// that background alone. Frame `k` uses noise seed `cfg.seed + k`.
pub fn transmit_video(
    seq: &FrameSequence,
    cfg: &ChannelConfig,
    knobs: &Knobs,
    video: &VideoKnobs,
) -> Result<VideoOutcome> {
    if !(0.0..=1.0).contains(&video.warmup_fraction) {
        return Err(Error::Parameter(format!(
            "warm-up fraction must lie in [0, 1], got {}",
            video.warmup_fraction
        )));
    }
    let segments = split_scenes(seq.frames(), seq.masks(), &video.split)?;
    let empty = BackgroundLibrary::new();
    let mut library = BackgroundLibrary::new();
    let mut reports = Vec::with_capacity(seq.len());
    let mut never_visible = Vec::new();
    for (sid, seg) in segments.iter().enumerate() {
        let warm = warmup_len(seg.len(), video.warmup_fraction);
        let mut received = Vec::with_capacity(warm);
        for k in seg.start..seg.start + warm {
            let frame_cfg = cfg.with_seed(cfg.seed.wrapping_add(k as u64));
            let provided = ProvidedMask::new(Some(seq.masks()[k].clone()));
            let report = transmit_image(&seq.frames()[k], &empty, &frame_cfg, knobs, Foreground::new(&provided))?;
            received.push(report.reconstructed.clone());
            reports.push(report);
        }
        if warm == seg.len() {
            continue;
        }
        let mut current = BackgroundLibrary::new();
        let mut holes = None;
        if warm > 0 {
            let masks = seq.masks()[seg.start..seg.start + warm].to_vec();
            let stitched = stitch(&FrameSequence::new(received, masks)?, video.aggregator)?;
            never_visible.push(stitched.never_visible());
            holes = stitched.valid.bbox_of(0);
            let entry = build_entry(sid as u32, stitched.image, Some(&stitched.valid), knobs.features)?;
            current.push(entry.clone())?;
            library.push(entry)?;
        }
        for k in seg.start + warm..seg.end {
            let frame_cfg = cfg.with_seed(cfg.seed.wrapping_add(k as u64));
            let provided = ProvidedMask::new(Some(seq.masks()[k].clone()));
            let fg = Foreground {
                must_cover: holes,
                ..Foreground::new(&provided)
            };
            reports.push(transmit_image(&seq.frames()[k], &current, &frame_cfg, knobs, fg)?);
        }
    }
    Ok(VideoOutcome {
        reports,
        segments,
        library,
        never_visible,
    })
}

/// One image of an evaluation set.
#[derive(Debug, Clone)]
pub struct EvalScene {
    pub name: String,
    pub image: ImageBuf,
    /// Foreground mask (`0` = foreground) if known. Scenes without one are
    /// segmented by difference from the matched background.
    pub person_mask: Option<MaskBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proposed,
    Direct,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Direct => "direct",
        }
    }
}

/// Width and height of [`synthetic_eval_set`] scenes.
pub const SYNTHETIC_EVAL_SIZE: (u32, u32) = (160, 120);

/// `n` scenes of [`SYNTHETIC_EVAL_SIZE`], each a library texture (seed
/// `1000 + i`) with a sprite a fifth as wide and two fifths as tall pasted at
/// a seeded position. Entry `i` of the returned library is scene `i`'s
/// background.
pub fn synthetic_eval_set(n: usize, features: FeatureParams) -> Result<(Vec<EvalScene>, BackgroundLibrary)> {
    let (w, h) = SYNTHETIC_EVAL_SIZE;
    let mut lib = BackgroundLibrary::new();
    let mut scenes = Vec::with_capacity(n);
    for i in 0..n {
        let bg = synth::texture(w, h, 1000 + i as u64);
        let scene = synth::random_scene(&bg, w / 5, h * 2 / 5, i as u64);
        lib.push(build_entry(i as u32, bg, None, features)?)?;
        scenes.push(EvalScene {
            name: format!("synthetic-{i:03}"),
            image: scene.image,
            person_mask: Some(scene.person_mask),
        });
    }
    Ok((scenes, lib))
}

/// One CSV row. Average rows carry `seed = None` and print `mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub scene: String,
    pub snr_db: f64,
    pub seed: Option<u64>,
    pub method: Method,
    pub psnr: Psnr,
    pub symbols: f64,
    pub compression_factor: f64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scene: &'a str,
    snr_db: f64,
    seed: String,
    method: &'static str,
    psnr_db: String,
    symbols: f64,
    compression_factor: f64,
}

/// Runs both methods for every scene x SNR x seed on up to `jobs` threads
/// (0 = rayon default). Data rows come first, in grid order, then one
/// average row per (scene, SNR, method).
pub fn eval_sweep(
    scenes: &[EvalScene],
    lib: &BackgroundLibrary,
    snrs: &[f64],
    seeds: &[u64],
    mu: f64,
    knobs: &Knobs,
    jobs: usize,
) -> Result<Vec<EvalRow>> {
    if scenes.is_empty() || snrs.is_empty() || seeds.is_empty() {
        return Err(Error::Input("eval needs at least one scene, SNR and seed".into()));
    }
    let grid: Vec<(usize, usize, usize)> = (0..scenes.len())
        .flat_map(|a| (0..snrs.len()).flat_map(move |b| (0..seeds.len()).map(move |c| (a, b, c))))
        .collect();
    let empty = BackgroundLibrary::new();
    let run = |&(a, b, c): &(usize, usize, usize)| -> Result<[EvalRow; 2]> {
        let scene = &scenes[a];
        let cfg = ChannelConfig::new(snrs[b], seeds[c]).with_mu(mu);
        let provided = ProvidedMask::new(scene.person_mask.clone());
        let diff = BackgroundDiff::default();
        let fg = match scene.person_mask {
            Some(_) => Foreground::new(&provided),
            None => Foreground::new(&diff),
        };
        let proposed = transmit_image(&scene.image, lib, &cfg, knobs, fg)?;
        let direct = transmit_image(&scene.image, &empty, &cfg, knobs, fg)?;
        let row = |method, r: &TransmitReport| EvalRow {
            scene: scene.name.clone(),
            snr_db: snrs[b],
            seed: Some(seeds[c]),
            method,
            psnr: r.psnr,
            symbols: r.symbols_sent as f64,
            compression_factor: r.compression_factor,
        };
        Ok([row(Method::Proposed, &proposed), row(Method::Direct, &direct)])
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let pairs: Vec<[EvalRow; 2]> = pool.install(|| grid.par_iter().map(run).collect::<Result<Vec<_>>>())?;
    let mut rows: Vec<EvalRow> = pairs.into_iter().flatten().collect();

    let mut averages = Vec::new();
    for scene in scenes {
        for &snr in snrs {
            for method in [Method::Proposed, Method::Direct] {
                let group: Vec<&EvalRow> = rows
                    .iter()
                    .filter(|r| r.scene == scene.name && r.snr_db == snr && r.method == method)
                    .collect();
                let n = group.len() as f64;
                let psnr = if group.iter().any(|r| r.psnr.is_infinite()) {
                    Psnr::Infinite
                } else {
                    Psnr::Db(group.iter().map(|r| r.psnr.as_f64()).sum::<f64>() / n)
                };
                averages.push(EvalRow {
                    scene: scene.name.clone(),
                    snr_db: snr,
                    seed: None,
                    method,
                    psnr,
                    symbols: group.iter().map(|r| r.symbols).sum::<f64>() / n,
                    compression_factor: group.iter().map(|r| r.compression_factor).sum::<f64>() / n,
                });
            }
        }
    }
    rows.extend(averages);
    Ok(rows)
}

/// Writes rows as `scene,snr_db,seed,method,psnr_db,symbols,compression_factor`.
pub fn write_csv<W: Write>(rows: &[EvalRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            scene: &r.scene,
            snr_db: r.snr_db,
            seed: r.seed.map_or_else(|| "mean".to_string(), |s| s.to_string()),
            method: r.method.as_str(),
            psnr_db: r.psnr.to_string(),
            symbols: r.symbols,
            compression_factor: r.compression_factor,
        })?;
    }
    w.flush()?;
    Ok(())
}
