//! Backgrounds recovered from video.
//!
//! Every frame comes with a mask (`1` = background). Stitching collects, per
//! pixel, the frames in which that pixel was background and aggregates their
//! values. Pixels that are never background stay black and are flagged
//! invalid. Scene splitting cuts a video wherever a frame stops resembling
//! the first frame of the current segment.

use crate::error::{shape, Error, Result};
use crate::features::{extract, extract_masked, match_count, Descriptor256, FeatureParams};
use crate::imaging::{ImageBuf, MaskBuf, BACKGROUND, CHANNELS, FOREGROUND};

/// Default similarity threshold, in matched descriptors. Suited to frames of
/// roughly 128 pixels per side or more; smaller frames yield fewer keypoints
/// than this and every frame would start a new segment.
pub const DEFAULT_SIM_THRESHOLD: usize = 150;
/// Default Hamming threshold for scene similarity. Tighter than the
/// background-matching default: at 64 bits unrelated textures already share
/// most nearest-neighbour matches.
pub const DEFAULT_SPLIT_HAMMING: u32 = 32;

/// Frames with their background masks. All share one size.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    frames: Vec<ImageBuf>,
    masks: Vec<MaskBuf>,
}

impl FrameSequence {
    pub fn new(frames: Vec<ImageBuf>, masks: Vec<MaskBuf>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::Input("frame sequence is empty".into()));
        };
        if masks.len() != frames.len() {
            return Err(shape(format!("{} frames but {} masks", frames.len(), masks.len())));
        }
        for (k, (f, m)) in frames.iter().zip(&masks).enumerate() {
            if !f.same_shape(first) || !m.matches_image(first) {
                return Err(shape(format!(
                    "frame {k} is {}x{} with a {}x{} mask, expected {}x{}",
                    f.width(),
                    f.height(),
                    m.width(),
                    m.height(),
                    first.width(),
                    first.height()
                )));
            }
        }
        Ok(FrameSequence { frames, masks })
    }

    pub fn frames(&self) -> &[ImageBuf] {
        &self.frames
    }

    pub fn masks(&self) -> &[MaskBuf] {
        &self.masks
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> u32 {
        self.frames[0].width()
    }

    pub fn height(&self) -> u32 {
        self.frames[0].height()
    }

    /// Frames `start..end` as their own sequence.
    pub fn slice(&self, start: usize, end: usize) -> Result<FrameSequence> {
        if start >= end || end > self.len() {
            return Err(Error::Bounds(format!("frame range {start}..{end} of {}", self.len())));
        }
        FrameSequence::new(self.frames[start..end].to_vec(), self.masks[start..end].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    /// Value from the earliest frame that saw the pixel as background.
    First,
    /// Rounded mean over all frames that saw the pixel as background.
    #[default]
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StitchedBackground {
    pub image: ImageBuf,
    /// `1` where at least one frame showed background (OR of the masks).
    pub valid: MaskBuf,
    /// `1` where every frame showed background (AND of the masks).
    pub always_background: MaskBuf,
}

impl StitchedBackground {
    /// Pixels no frame ever showed.
    pub fn never_visible(&self) -> usize {
        self.valid.count(0)
    }
}

pub fn stitch(seq: &FrameSequence, aggregator: Aggregator) -> Result<StitchedBackground> {
    let (w, h) = (seq.width(), seq.height());
    let n = (w * h) as usize;
    let mut sum = vec![0u32; n * CHANNELS];
    let mut seen = vec![0u32; n];
    for (frame, mask) in seq.frames.iter().zip(&seq.masks) {
        let data = frame.data();
        for (i, &m) in mask.data().iter().enumerate() {
            if m != BACKGROUND {
                continue;
            }
            if aggregator == Aggregator::Mean || seen[i] == 0 {
                for c in 0..CHANNELS {
                    sum[i * CHANNELS + c] += data[i * CHANNELS + c] as u32;
                }
            }
            seen[i] += 1;
        }
    }
    let total = seq.len() as u32;
    let pixels: Vec<u8> = (0..n * CHANNELS)
        .map(|j| {
            let k = match aggregator {
                Aggregator::First => seen[j / CHANNELS].min(1),
                Aggregator::Mean => seen[j / CHANNELS],
            };
            (sum[j] + k / 2).checked_div(k).unwrap_or(0) as u8
        })
        .collect();
    let flag = |cond: bool| if cond { BACKGROUND } else { FOREGROUND };
    Ok(StitchedBackground {
        image: ImageBuf::new(w, h, pixels)?,
        valid: MaskBuf::new(w, h, seen.iter().map(|&s| flag(s > 0)).collect())?,
        always_background: MaskBuf::new(w, h, seen.iter().map(|&s| flag(s == total)).collect())?,
    })
}

/// Frames `start..end`, compared against frame `reference_frame` (= `start`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SceneSegment {
    pub start: usize,
    pub end: usize,
    pub reference_frame: usize,
}

impl SceneSegment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitParams {
    pub sim_threshold: usize,
    /// Hamming threshold for descriptor matches.
    pub t: u32,
    pub features: FeatureParams,
    /// Compare whole frames instead of background-only frames.
    pub raw: bool,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams {
            sim_threshold: DEFAULT_SIM_THRESHOLD,
            t: DEFAULT_SPLIT_HAMMING,
            features: FeatureParams::default(),
            raw: false,
        }
    }
}

/// Descriptors used for scene similarity, one list per frame.
pub fn frame_descriptors(
    frames: &[ImageBuf],
    masks: &[MaskBuf],
    raw: bool,
    params: FeatureParams,
) -> Result<Vec<Vec<Descriptor256>>> {
    if !raw && masks.len() != frames.len() {
        return Err(shape(format!("{} frames but {} masks", frames.len(), masks.len())));
    }
    frames
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let (_, d) = if raw {
                extract(f, params)?
            } else {
                extract_masked(f, Some(&masks[k]), params)?
            };
            Ok(d)
        })
        .collect()
}

/// Greedy splitting over precomputed per-frame descriptors.
pub fn split_by_descriptors(descriptors: &[Vec<Descriptor256>], sim_threshold: usize, t: u32) -> Vec<SceneSegment> {
    let mut out = Vec::new();
    if descriptors.is_empty() {
        return out;
    }
    let mut reference = 0;
    for i in 1..descriptors.len() {
        if match_count(&descriptors[i], &descriptors[reference], t) < sim_threshold {
            out.push(SceneSegment {
                start: reference,
                end: i,
                reference_frame: reference,
            });
            reference = i;
        }
    }
    out.push(SceneSegment {
        start: reference,
        end: descriptors.len(),
        reference_frame: reference,
    });
    out
}

/// Splits a video into segments that each look like their first frame.
///
/// Frame `i` stays in the current segment when at least `sim_threshold` of
/// its descriptors match the reference frame's within Hamming distance `t`.
/// Descriptors come from background-only frames unless `params.raw` is set,
/// in which case `masks` may be empty.
pub fn split_scenes(frames: &[ImageBuf], masks: &[MaskBuf], params: &SplitParams) -> Result<Vec<SceneSegment>> {
    if frames.is_empty() {
        return Err(Error::Input("cannot split an empty video".into()));
    }
    let descriptors = frame_descriptors(frames, masks, params.raw, params.features)?;
    Ok(split_by_descriptors(&descriptors, params.sim_threshold, params.t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use proptest::prelude::*;

    fn seq(frames: Vec<ImageBuf>, masks: Vec<MaskBuf>) -> FrameSequence {
        FrameSequence::new(frames, masks).unwrap()
    }

    #[test]
    fn sequence_validation() {
        assert!(FrameSequence::new(vec![], vec![]).is_err());
        let f = synth::texture(8, 8, 1);
        let m = MaskBuf::filled(8, 8, 1).unwrap();
        assert!(FrameSequence::new(vec![f.clone()], vec![]).is_err());
        let g = synth::texture(9, 8, 1);
        assert!(FrameSequence::new(vec![f.clone(), g], vec![m.clone(), m.clone()]).is_err());
        assert_eq!(seq(vec![f.clone(), f], vec![m.clone(), m]).len(), 2);
    }

    #[test]
    fn all_background_first_and_mean() {
        let a = synth::texture(16, 12, 1);
        let b = synth::texture(16, 12, 2);
        let m = MaskBuf::filled(16, 12, 1).unwrap();
        let s = seq(vec![a.clone(), b.clone()], vec![m.clone(), m.clone()]);
        let first = stitch(&s, Aggregator::First).unwrap();
        assert_eq!(first.image, a);
        assert_eq!(first.valid.count(1), 16 * 12);
        assert_eq!(first.always_background, first.valid);
        let mean = stitch(&s, Aggregator::Mean).unwrap();
        for (j, v) in mean.image.data().iter().enumerate() {
            let expect = (a.data()[j] as u32 + b.data()[j] as u32).div_ceil(2) as u8;
            assert_eq!(*v, expect);
        }
    }

    #[test]
    fn single_frame_half_foreground() {
        let a = synth::texture(10, 10, 3);
        let m = MaskBuf::from_fn(10, 10, |x, _| u8::from(x >= 5)).unwrap();
        let out = stitch(&seq(vec![a.clone()], vec![m.clone()]), Aggregator::Mean).unwrap();
        assert_eq!(out.valid, m);
        assert_eq!(out.never_visible(), 50);
        for y in 0..10 {
            for x in 0..10 {
                let expect = if x >= 5 { a.pixel(x, y) } else { [0; 3] };
                assert_eq!(out.image.pixel(x, y), expect);
            }
        }
    }

    #[test]
    fn moving_occluder_is_recovered() {
        let v = synth::moving_occluder_video();
        let s = seq(v.frames.clone(), v.masks.clone());
        for agg in [Aggregator::First, Aggregator::Mean] {
            let out = stitch(&s, agg).unwrap();
            for y in 0..64 {
                for x in 0..64 {
                    let hidden = x < synth::HIDDEN_CORNER && y < synth::HIDDEN_CORNER;
                    assert_eq!(out.valid.get(x, y) == 0, hidden);
                    if hidden {
                        assert_eq!(out.image.pixel(x, y), [0; 3]);
                    } else {
                        assert_eq!(out.image.pixel(x, y), v.backgrounds[0].pixel(x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn identical_frames_form_one_segment() {
        let f = synth::texture(128, 128, 5);
        let m = MaskBuf::filled(128, 128, 1).unwrap();
        let segs = split_scenes(&vec![f; 5], &vec![m; 5], &SplitParams::default()).unwrap();
        assert_eq!(
            segs,
            vec![SceneSegment {
                start: 0,
                end: 5,
                reference_frame: 0
            }]
        );
    }

    #[test]
    fn two_scene_video_splits_at_the_cut() {
        let v = synth::two_scene_video(128, 128, 10, 6, 11);
        let segs = split_scenes(&v.frames, &v.masks, &SplitParams::default()).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!((segs[0].start, segs[0].end), (0, 6));
        assert_eq!((segs[1].start, segs[1].end, segs[1].reference_frame), (6, 10, 6));
        let raw = SplitParams {
            raw: true,
            ..SplitParams::default()
        };
        assert_eq!(split_scenes(&v.frames, &[], &raw).unwrap(), segs);
    }

    #[test]
    fn zero_threshold_never_splits() {
        let v = synth::two_scene_video(64, 64, 6, 3, 2);
        let p = SplitParams {
            sim_threshold: 0,
            ..SplitParams::default()
        };
        assert_eq!(split_scenes(&v.frames, &v.masks, &p).unwrap().len(), 1);
    }

    #[test]
    fn empty_video_is_an_input_error() {
        assert!(matches!(
            split_scenes(&[], &[], &SplitParams::default()),
            Err(Error::Input(_))
        ));
    }

    fn random_mask(w: u32, h: u32, seed: u64) -> MaskBuf {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        MaskBuf::from_fn(w, h, |_, _| u8::from(rng.gen_bool(0.6))).unwrap()
    }

    proptest! {
        #[test]
        fn masks_fold_to_and_or(seed in any::<u64>(), n in 1usize..6) {
            let frames: Vec<_> = (0..n as u64).map(|k| synth::texture(12, 9, seed ^ k)).collect();
            let masks: Vec<_> = (0..n as u64).map(|k| random_mask(12, 9, seed.wrapping_add(k))).collect();
            let out = stitch(&seq(frames.clone(), masks.clone()), Aggregator::First).unwrap();
            for y in 0..9 {
                for x in 0..12 {
                    let any = masks.iter().any(|m| m.get(x, y) == 1);
                    let all = masks.iter().all(|m| m.get(x, y) == 1);
                    prop_assert_eq!(out.valid.get(x, y), u8::from(any));
                    prop_assert_eq!(out.always_background.get(x, y), u8::from(all));
                    let first = masks.iter().position(|m| m.get(x, y) == 1);
                    let expect = first.map_or([0; 3], |k| frames[k].pixel(x, y));
                    prop_assert_eq!(out.image.pixel(x, y), expect);
                }
            }
        }

        #[test]
        fn static_truth_is_reproduced_on_always_background(seed in any::<u64>(), n in 1usize..5) {
            let bg = synth::texture(12, 9, seed);
            let masks: Vec<_> = (0..n as u64).map(|k| random_mask(12, 9, seed ^ (k + 1))).collect();
            let frames: Vec<_> = masks
                .iter()
                .map(|m| ImageBuf::from_fn(12, 9, |x, y| if m.get(x, y) == 1 { bg.pixel(x, y) } else { [255, 0, 255] }).unwrap())
                .collect();
            let out = stitch(&seq(frames, masks), Aggregator::Mean).unwrap();
            for y in 0..9 {
                for x in 0..12 {
                    if out.valid.get(x, y) == 1 {
                        prop_assert_eq!(out.image.pixel(x, y), bg.pixel(x, y));
                    }
                }
            }
        }

        #[test]
        fn segments_partition_the_video(lens in prop::collection::vec(0usize..40, 1..12), thr in 0usize..40) {
            // Descriptor lists with overlapping content give varied match counts.
            let pool: Vec<Descriptor256> = (0..60u64).map(|i| Descriptor256([i.wrapping_mul(0x9e37_79b9_7f4a_7c15); 4])).collect();
            let descs: Vec<Vec<Descriptor256>> = lens.iter().enumerate().map(|(k, &l)| pool[k..(k + l).min(60)].to_vec()).collect();
            let segs = split_by_descriptors(&descs, thr, 0);
            prop_assert_eq!(segs[0].start, 0);
            prop_assert_eq!(segs.last().unwrap().end, descs.len());
            for w in segs.windows(2) {
                prop_assert_eq!(w[0].end, w[1].start);
            }
            for s in &segs {
                prop_assert!(!s.is_empty());
                prop_assert_eq!(s.reference_frame, s.start);
            }
        }
    }

    #[test]
    fn higher_threshold_never_merges_on_synthetic_videos() {
        for (seed, cut) in [(1u64, 4usize), (7, 2), (13, 6)] {
            let v = synth::two_scene_video(128, 128, 8, cut, seed);
            let d = frame_descriptors(&v.frames, &v.masks, false, FeatureParams::default()).unwrap();
            let mut prev = 0;
            for thr in (0..=600).step_by(10) {
                let n = split_by_descriptors(&d, thr, DEFAULT_SPLIT_HAMMING).len();
                assert!(n >= prev, "seed {seed}: threshold {thr} gave {n} < {prev}");
                prev = n;
            }
        }
    }
}
