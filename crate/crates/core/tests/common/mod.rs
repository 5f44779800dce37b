//! Golden fixtures shared by the format and acceptance tests.
//!
//! Regenerate with `SEMTX_REGEN_FIXTURES=1 cargo test --test formats`.

#![allow(dead_code)]

use std::path::PathBuf;

use semtx::bglib::{build_entry, BackgroundLibrary};
use semtx::channel::ChannelConfig;
use semtx::features::FeatureParams;
use semtx::pipeline::{transmit_image, Foreground, Knobs, Mode, WireFrame};
use semtx::segmentation::ProvidedMask;
use semtx::synth;

pub const FIXTURES: [&str; 3] = ["direct.sjsc", "keyinfo.sjsc", "library.bgl"];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn golden_library() -> BackgroundLibrary {
    let mut lib = BackgroundLibrary::new();
    for id in 0..2u32 {
        lib.push(
            build_entry(
                id,
                synth::texture(96, 72, 70 + id as u64),
                None,
                FeatureParams::default(),
            )
            .unwrap(),
        )
        .unwrap();
    }
    lib
}

/// A direct frame of a small texture and a key-info frame of a sprite over
/// library entry 1, both at 12 dB with seed 42.
pub fn golden_frames() -> (WireFrame, WireFrame) {
    let lib = golden_library();
    let cfg = ChannelConfig::new(12.0, 42);
    let none = ProvidedMask::default();
    let direct = transmit_image(
        &synth::texture(24, 16, 3),
        &BackgroundLibrary::new(),
        &cfg,
        &Knobs::default(),
        Foreground::new(&none),
    )
    .unwrap();
    let (sprite, sprite_mask) = synth::sprite(12, 20, 1);
    let scene = synth::compose(&lib.get(1).unwrap().image, &sprite, &sprite_mask, 40, 24);
    let provided = ProvidedMask::new(Some(scene.person_mask.clone()));
    let keyinfo = transmit_image(&scene.image, &lib, &cfg, &Knobs::default(), Foreground::new(&provided)).unwrap();
    assert_eq!(keyinfo.mode, Mode::KeyInfo);
    (direct.frame, keyinfo.frame)
}

fn regenerate() {
    if std::env::var_os("SEMTX_REGEN_FIXTURES").is_none() {
        return;
    }
    std::fs::create_dir_all(fixture("")).unwrap();
    let (d, k) = golden_frames();
    d.save(fixture("direct.sjsc")).unwrap();
    k.save(fixture("keyinfo.sjsc")).unwrap();
    golden_library().save(fixture("library.bgl")).unwrap();
}

pub fn read_fixture(name: &str) -> Vec<u8> {
    regenerate();
    std::fs::read(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Decodes fixture bytes with the decoder matching the file extension.
pub fn decode(name: &str, bytes: &[u8]) -> semtx::Result<()> {
    if name.ends_with(".bgl") {
        BackgroundLibrary::from_bytes(bytes).map(|_| ())
    } else {
        WireFrame::from_bytes(bytes).map(|_| ())
    }
}
