//! Splits a two-scene video at its cut and stitches a clean background for
//! each scene from the frames where the walking sprite is out of the way.

use semtx::dynbg::{split_scenes, stitch, Aggregator, FrameSequence, SplitParams};
use semtx::{imaging, synth};

fn main() -> semtx::Result<()> {
    let video = synth::two_scene_video(128, 128, 16, 9, 21);
    let segments = split_scenes(&video.frames, &video.masks, &SplitParams::default())?;
    let seq = FrameSequence::new(video.frames.clone(), video.masks.clone())?;

    for seg in &segments {
        let bg = stitch(&seq.slice(seg.start, seg.end)?, Aggregator::Mean)?;
        let truth = &video.backgrounds[seg.start];
        println!(
            "frames {:2}..{:2} (reference {:2}): {} pixels never seen, PSNR against the true background {}",
            seg.start,
            seg.end,
            seg.reference_frame,
            bg.never_visible(),
            imaging::psnr(truth, &bg.image)?
        );
    }
    Ok(())
}
