//! The `semtx` command line.
//!
//! Exit codes: `0` success, `1` domain error (including `match --require`
//! without a match), `2` usage error. Results go to the declared output
//! paths (or standard output where noted); diagnostics go to standard error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bglib::{best_match, build_entry, BackgroundLibrary, DEFAULT_N_MIN};
use crate::channel::{ChannelConfig, DEFAULT_MU};
use crate::dynbg::{self, Aggregator, FrameSequence, SplitParams, DEFAULT_SIM_THRESHOLD, DEFAULT_SPLIT_HAMMING};
use crate::error::{Error, Result};
use crate::features::{
    extract_masked, FeatureParams, DEFAULT_FAST_THRESHOLD, DEFAULT_HAMMING_THRESHOLD, DEFAULT_MAX_KEYPOINTS,
};
use crate::imaging::{ImageBuf, MaskBuf};
use crate::keyinfo::DEFAULT_PAD;
use crate::pipeline::{
    self, EvalScene, Foreground, Knobs, VideoKnobs, WireFrame, DEFAULT_MAX_PIXELS, DEFAULT_WARMUP_FRACTION,
};
use crate::scheduler::{self, Job};
use crate::segmentation::{BackgroundDiff, HullSegmenter, LandmarkSet, ProvidedMask, Segmenter, DEFAULT_DIFF_TAU};

#[derive(Debug, Parser)]
#[command(
    name = "semtx",
    version,
    about = "Semantic-aware image and video transmission simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build background libraries.
    #[command(subcommand)]
    Bglib(BglibCommand),
    /// Find the best library background for an image.
    Match(MatchArgs),
    /// Send one image through the channel and reconstruct it.
    Transmit(TransmitArgs),
    /// Reconstruct an image from a saved wire frame.
    Receive(ReceiveArgs),
    /// Send a video (directory of PNG frames) frame by frame.
    TransmitVideo(VideoArgs),
    /// Plan per-user transmission modes under a power budget.
    Schedule(ScheduleArgs),
    /// Compare the proposed pipeline with direct transmission over SNRs and seeds.
    Eval(EvalArgs),
}

#[derive(Debug, Subcommand)]
enum BglibCommand {
    /// Library from background images, one entry per PNG (ids in file-name order).
    Build(BuildArgs),
    /// Library stitched from a video, one entry per detected scene.
    BuildDynamic(BuildDynamicArgs),
}

#[derive(Debug, Args)]
struct FeatureFlags {
    /// FAST intensity threshold.
    #[arg(long, default_value_t = DEFAULT_FAST_THRESHOLD, value_parser = clap::value_parser!(u8).range(1..))]
    fast_threshold: u8,
    /// Keypoints kept per image.
    #[arg(long, default_value_t = DEFAULT_MAX_KEYPOINTS)]
    max_keypoints: usize,
}

impl FeatureFlags {
    fn params(&self) -> FeatureParams {
        FeatureParams {
            fast_threshold: self.fast_threshold,
            max_keypoints: self.max_keypoints,
        }
    }
}

#[derive(Debug, Args)]
struct MatchFlags {
    /// Hamming threshold for a descriptor match.
    #[arg(short = 't', long = "hamming", default_value_t = DEFAULT_HAMMING_THRESHOLD, value_parser = clap::value_parser!(u32).range(0..=256))]
    t: u32,
    /// Minimum matched descriptors to accept a background.
    #[arg(long, default_value_t = DEFAULT_N_MIN)]
    n_min: usize,
}

#[derive(Debug, Args)]
struct PersonFlags {
    /// Foreground mask PNG (black = foreground).
    #[arg(long, conflicts_with = "landmarks")]
    mask: Option<PathBuf>,
    /// JSON landmark set; its convex hull is the foreground.
    #[arg(long)]
    landmarks: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitFlags {
    /// Matched descriptors a frame needs to stay in the current scene.
    #[arg(long, default_value_t = DEFAULT_SIM_THRESHOLD)]
    sim_threshold: usize,
    /// Hamming threshold used for scene similarity.
    #[arg(long, default_value_t = DEFAULT_SPLIT_HAMMING, value_parser = clap::value_parser!(u32).range(0..=256))]
    split_hamming: u32,
    /// Compare whole frames instead of background-only frames.
    #[arg(long)]
    raw_similarity: bool,
    /// How background pixels from several frames are combined.
    #[arg(long, value_enum, default_value_t = AggregatorArg::Mean)]
    aggregator: AggregatorArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregatorArg {
    First,
    Mean,
}

impl From<AggregatorArg> for Aggregator {
    fn from(a: AggregatorArg) -> Self {
        match a {
            AggregatorArg::First => Aggregator::First,
            AggregatorArg::Mean => Aggregator::Mean,
        }
    }
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Background PNGs, or directories of them.
    #[arg(long, required = true, num_args = 1..)]
    images: Vec<PathBuf>,
    /// Directory of masks named like the images; people in them are ignored.
    #[arg(long)]
    masks: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    features: FeatureFlags,
}

#[derive(Debug, Args)]
struct BuildDynamicArgs {
    /// Directory of numbered PNG frames.
    #[arg(long)]
    frames: PathBuf,
    /// Directory of per-frame masks with the same file names.
    #[arg(long)]
    masks: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the detected scenes and never-visible pixel counts as JSON.
    #[arg(long)]
    segments_out: Option<PathBuf>,
    #[command(flatten)]
    split: SplitFlags,
    #[command(flatten)]
    features: FeatureFlags,
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(long)]
    lib: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[command(flatten)]
    person: PersonFlags,
    #[command(flatten)]
    matching: MatchFlags,
    #[command(flatten)]
    features: FeatureFlags,
    /// Exit with status 1 when no background matches.
    #[arg(long)]
    require: bool,
    /// Write the JSON result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ChannelFlags {
    #[arg(long, allow_negative_numbers = true)]
    snr_db: f64,
    /// Noise seed.
    #[arg(long)]
    seed: u64,
    /// Channel symbols per source sample.
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SegmenterArg {
    /// The mask from --mask, or the hull of --landmarks.
    Provided,
    /// Pixels that differ from the matched background.
    Diff,
}

#[derive(Debug, Args)]
struct SenderFlags {
    /// Downscale images or crops larger than this many pixels.
    #[arg(long, default_value_t = DEFAULT_MAX_PIXELS, value_parser = clap::value_parser!(u64).range(1..))]
    max_pixels: u64,
    /// Pixels added around the foreground box.
    #[arg(long, default_value_t = DEFAULT_PAD)]
    pad: u32,
    /// Paste only foreground pixels of the received crop.
    #[arg(long)]
    mask_gated: bool,
}

#[derive(Debug, Args)]
struct TransmitArgs {
    #[arg(long)]
    lib: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[command(flatten)]
    channel: ChannelFlags,
    #[command(flatten)]
    person: PersonFlags,
    /// How the foreground is found once a background matched.
    #[arg(long, value_enum, default_value_t = SegmenterArg::Provided)]
    segmenter: SegmenterArg,
    /// Threshold for the difference segmenter.
    #[arg(long, default_value_t = DEFAULT_DIFF_TAU)]
    diff_tau: u8,
    #[command(flatten)]
    matching: MatchFlags,
    #[command(flatten)]
    sender: SenderFlags,
    #[command(flatten)]
    features: FeatureFlags,
    /// Reconstructed image (PNG).
    #[arg(long)]
    out: PathBuf,
    /// Save the wire frame.
    #[arg(long)]
    frame_out: Option<PathBuf>,
    /// Save a JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReceiveArgs {
    #[arg(long)]
    frame: PathBuf,
    /// Library holding the frame's background (key-info frames only).
    #[arg(long)]
    lib: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VideoArgs {
    #[arg(long)]
    frames: PathBuf,
    #[arg(long)]
    masks: PathBuf,
    #[command(flatten)]
    channel: ChannelFlags,
    /// Share of each scene used to build its background (at most 30 frames).
    #[arg(long, default_value_t = DEFAULT_WARMUP_FRACTION)]
    warmup_fraction: f64,
    #[command(flatten)]
    split: SplitFlags,
    #[command(flatten)]
    matching: MatchFlags,
    #[command(flatten)]
    sender: SenderFlags,
    #[command(flatten)]
    features: FeatureFlags,
    /// Directory for reconstructed frames.
    #[arg(long)]
    out_dir: PathBuf,
    /// Save the stitched backgrounds as a library.
    #[arg(long)]
    lib_out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    /// Job JSON: users plus gain, loss, deadline_s, p_max, alpha, p_quantum.
    #[arg(long)]
    job: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Use exhaustive search (at most 16 users) instead of the planner.
    #[arg(long)]
    brute_force: bool,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["scenes", "synthetic"])))]
struct EvalArgs {
    /// Directory of scene PNGs; `NAME.mask.png` next to `NAME.png` is its mask.
    #[arg(long, requires = "lib")]
    scenes: Option<PathBuf>,
    /// Generate this many synthetic scenes and their library instead.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long)]
    lib: Option<PathBuf>,
    /// Comma-separated SNR values in dB.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    snrs: Vec<f64>,
    /// Comma-separated noise seeds.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: f64,
    #[command(flatten)]
    matching: MatchFlags,
    #[command(flatten)]
    sender: SenderFlags,
    #[command(flatten)]
    features: FeatureFlags,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Bglib(BglibCommand::Build(a)) => build(a),
        Command::Bglib(BglibCommand::BuildDynamic(a)) => build_dynamic(a),
        Command::Match(a) => match_cmd(a),
        Command::Transmit(a) => transmit(a),
        Command::Receive(a) => receive(a),
        Command::TransmitVideo(a) => transmit_video(a),
        Command::Schedule(a) => schedule(a),
        Command::Eval(a) => eval(a),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn pngs_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    out.retain(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")));
    out.sort();
    Ok(out)
}

fn expand_images(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            out.extend(pngs_in(p)?);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::Input("no PNG images given".into()));
    }
    Ok(out)
}

fn load_video(frames: &Path, masks: &Path) -> Result<FrameSequence> {
    let files = pngs_in(frames)?;
    let mut fs_ = Vec::with_capacity(files.len());
    let mut ms = Vec::with_capacity(files.len());
    for f in &files {
        let name = f.file_name().expect("listed file has a name");
        fs_.push(ImageBuf::load_png(f)?);
        ms.push(MaskBuf::load_png(masks.join(name))?);
    }
    FrameSequence::new(fs_, ms)
}

fn person_segmenter(p: &PersonFlags, img: &ImageBuf) -> Result<Box<dyn Segmenter>> {
    if let Some(path) = &p.landmarks {
        let lm = LandmarkSet::load_json(path)?;
        lm.check_bounds(img.width(), img.height())?;
        return Ok(Box::new(HullSegmenter::new(lm)));
    }
    Ok(Box::new(match &p.mask {
        Some(path) => ProvidedMask::from_file(path)?,
        None => ProvidedMask::default(),
    }))
}

fn knobs(m: &MatchFlags, s: &SenderFlags, f: &FeatureFlags) -> Knobs {
    Knobs {
        t: m.t,
        n_min: m.n_min,
        max_pixels: s.max_pixels,
        features: f.params(),
        pad: s.pad,
        mask_gated: s.mask_gated,
    }
}

fn split_params(s: &SplitFlags, f: &FeatureFlags) -> SplitParams {
    SplitParams {
        sim_threshold: s.sim_threshold,
        t: s.split_hamming,
        features: f.params(),
        raw: s.raw_similarity,
    }
}

fn build(a: BuildArgs) -> Result<i32> {
    let files = expand_images(&a.images)?;
    let mut lib = BackgroundLibrary::new();
    for (id, path) in files.iter().enumerate() {
        let img = ImageBuf::load_png(path)?;
        let mask = match &a.masks {
            Some(dir) => {
                let name = path.file_name().expect("image path has a name");
                Some(MaskBuf::load_png(dir.join(name))?)
            }
            None => None,
        };
        let entry = build_entry(id as u32, img, mask.as_ref(), a.features.params())?;
        eprintln!("{}: id {id}, {} descriptors", path.display(), entry.descriptors.len());
        lib.push(entry)?;
    }
    lib.save(&a.out)?;
    Ok(0)
}

#[derive(Serialize)]
struct DynamicSummary {
    segments: Vec<dynbg::SceneSegment>,
    never_visible: Vec<usize>,
}

fn build_dynamic(a: BuildDynamicArgs) -> Result<i32> {
    let seq = load_video(&a.frames, &a.masks)?;
    let segments = dynbg::split_scenes(seq.frames(), seq.masks(), &split_params(&a.split, &a.features))?;
    let mut lib = BackgroundLibrary::new();
    let mut never_visible = Vec::new();
    for (id, seg) in segments.iter().enumerate() {
        let stitched = dynbg::stitch(&seq.slice(seg.start, seg.end)?, a.split.aggregator.into())?;
        never_visible.push(stitched.never_visible());
        lib.push(build_entry(
            id as u32,
            stitched.image,
            Some(&stitched.valid),
            a.features.params(),
        )?)?;
    }
    lib.save(&a.out)?;
    if let Some(path) = &a.segments_out {
        write_json(
            path,
            &DynamicSummary {
                segments,
                never_visible,
            },
        )?;
    }
    Ok(0)
}

fn match_cmd(a: MatchArgs) -> Result<i32> {
    let lib = BackgroundLibrary::load(&a.lib)?;
    let img = ImageBuf::load_png(&a.image)?;
    let seg = person_segmenter(&a.person, &img)?;
    let mask = seg.prior_mask(&img);
    let (_, query) = extract_masked(&img, mask.as_ref(), a.features.params())?;
    let outcome = best_match(&query, &lib, a.matching.t, a.matching.n_min);
    let text = serde_json::to_string_pretty(&outcome)? + "\n";
    match &a.out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(if a.require && !outcome.matched { 1 } else { 0 })
}

fn transmit(a: TransmitArgs) -> Result<i32> {
    let lib = BackgroundLibrary::load(&a.lib)?;
    let img = ImageBuf::load_png(&a.image)?;
    let cfg = ChannelConfig::new(a.channel.snr_db, a.channel.seed).with_mu(a.channel.mu);
    let person = person_segmenter(&a.person, &img)?;
    let diff = BackgroundDiff { tau: a.diff_tau };
    let fg = match a.segmenter {
        SegmenterArg::Provided => Foreground::new(person.as_ref()),
        SegmenterArg::Diff => Foreground::new(&diff).with_shield(person.as_ref()),
    };
    let k = knobs(&a.matching, &a.sender, &a.features);
    let report = pipeline::transmit_image(&img, &lib, &cfg, &k, fg)?;
    report.reconstructed.save_png(&a.out)?;
    if let Some(p) = &a.frame_out {
        report.frame.save(p)?;
    }
    if let Some(p) = &a.report {
        write_json(p, &report)?;
    }
    eprintln!(
        "mode {}, {} symbols, PSNR {} dB",
        report.mode.as_str(),
        report.symbols_sent,
        report.psnr
    );
    Ok(0)
}

fn receive(a: ReceiveArgs) -> Result<i32> {
    let frame = WireFrame::load(&a.frame)?;
    let lib = match &a.lib {
        Some(p) => BackgroundLibrary::load(p)?,
        None => BackgroundLibrary::new(),
    };
    let cfg = ChannelConfig::new(frame.snr_db as f64, 0).with_mu(a.mu);
    pipeline::reconstruct(&frame, &lib, &cfg, None)?.save_png(&a.out)?;
    Ok(0)
}

#[derive(Serialize)]
struct VideoSummary<'a> {
    segments: &'a [dynbg::SceneSegment],
    never_visible: &'a [usize],
    frames: &'a [pipeline::TransmitReport],
}

fn transmit_video(a: VideoArgs) -> Result<i32> {
    let seq = load_video(&a.frames, &a.masks)?;
    let cfg = ChannelConfig::new(a.channel.snr_db, a.channel.seed).with_mu(a.channel.mu);
    let video = VideoKnobs {
        warmup_fraction: a.warmup_fraction,
        aggregator: a.split.aggregator.into(),
        split: split_params(&a.split, &a.features),
    };
    let out = pipeline::transmit_video(&seq, &cfg, &knobs(&a.matching, &a.sender, &a.features), &video)?;
    fs::create_dir_all(&a.out_dir)?;
    for (k, r) in out.reports.iter().enumerate() {
        r.reconstructed.save_png(a.out_dir.join(format!("{k:05}.png")))?;
    }
    if let Some(p) = &a.lib_out {
        out.library.save(p)?;
    }
    if let Some(p) = &a.report {
        write_json(
            p,
            &VideoSummary {
                segments: &out.segments,
                never_visible: &out.never_visible,
                frames: &out.reports,
            },
        )?;
    }
    Ok(0)
}

fn schedule(a: ScheduleArgs) -> Result<i32> {
    let job: Job = serde_json::from_slice(&fs::read(&a.job)?)?;
    let plan = if a.brute_force {
        scheduler::brute_force(&job.users, &job.params)?
    } else {
        scheduler::optimize(&job.users, &job.params)?
    };
    write_json(&a.out, &plan)?;
    Ok(0)
}

fn eval(a: EvalArgs) -> Result<i32> {
    let (scenes, lib) = match (&a.scenes, a.synthetic) {
        (Some(dir), _) => {
            let lib = BackgroundLibrary::load(a.lib.as_ref().expect("clap enforces --lib"))?;
            let mut scenes = Vec::new();
            for path in pngs_in(dir)? {
                let name = path.file_stem().expect("png has a stem").to_string_lossy().into_owned();
                if name.ends_with(".mask") {
                    continue;
                }
                let mask_path = dir.join(format!("{name}.mask.png"));
                let person_mask = mask_path.exists().then(|| MaskBuf::load_png(&mask_path)).transpose()?;
                scenes.push(EvalScene {
                    name,
                    image: ImageBuf::load_png(&path)?,
                    person_mask,
                });
            }
            (scenes, lib)
        }
        (None, Some(n)) => pipeline::synthetic_eval_set(n, a.features.params())?,
        (None, None) => unreachable!("clap requires a source"),
    };
    let rows = pipeline::eval_sweep(
        &scenes,
        &lib,
        &a.snrs,
        &a.seeds,
        a.mu,
        &knobs(&a.matching, &a.sender, &a.features),
        a.jobs,
    )?;
    pipeline::write_csv(&rows, fs::File::create(&a.out)?)?;
    Ok(0)
}
