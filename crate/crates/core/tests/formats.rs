//! Golden `.sjsc` wire frames and `.bgl` libraries.

mod common;

use common::{decode, fixture, golden_frames, golden_library, read_fixture as read, FIXTURES};
use semtx::bglib::BackgroundLibrary;
use semtx::channel::ChannelConfig;
use semtx::pipeline::{reconstruct, Mode, WireFrame, NO_BACKGROUND};
use semtx::{BoundingRect, Error, FormatError};

#[test]
fn direct_frame_fixture() {
    let bytes = read("direct.sjsc");
    let f = WireFrame::from_bytes(&bytes).unwrap();
    assert_eq!(f.mode, Mode::Direct);
    assert_eq!(f.background_id, NO_BACKGROUND);
    assert_eq!(f.rect, BoundingRect::new(0, 0, 24, 16).unwrap());
    assert_eq!((f.original_width, f.original_height), (24, 16));
    assert_eq!(f.scale, 1.0);
    assert_eq!(f.snr_db, 12.0);
    assert_eq!(f.symbols.len(), 24 * 16);
    assert_eq!(f.to_bytes(), bytes);
    f.check_budget(semtx::channel::DEFAULT_MU).unwrap();
}

#[test]
fn keyinfo_frame_fixture() {
    let bytes = read("keyinfo.sjsc");
    let f = WireFrame::from_bytes(&bytes).unwrap();
    assert_eq!(f.mode, Mode::KeyInfo);
    assert_eq!(f.background_id, 1);
    assert_eq!((f.original_width, f.original_height), (96, 72));
    assert!(f.rect.x1 <= 40 && f.rect.y1 <= 24 && f.rect.x2 >= 52 && f.rect.y2 >= 44);
    assert_eq!(f.to_bytes(), bytes);
    let out = reconstruct(
        &f,
        &BackgroundLibrary::load(fixture("library.bgl")).unwrap(),
        &ChannelConfig::new(0.0, 0),
        None,
    )
    .unwrap();
    let bg = golden_library().get(1).unwrap().image.clone();
    for y in 0..72 {
        for x in 0..96 {
            if !f.rect.contains(x, y) {
                assert_eq!(out.pixel(x, y), bg.pixel(x, y));
            }
        }
    }
}

#[test]
fn library_fixture() {
    let bytes = read("library.bgl");
    let lib = BackgroundLibrary::from_bytes(&bytes).unwrap();
    assert_eq!(lib, golden_library());
    assert_eq!(lib.to_bytes().unwrap(), bytes);
}

#[test]
fn frames_regenerate_identically() {
    let (d, k) = golden_frames();
    assert_eq!(d.to_bytes(), read("direct.sjsc"));
    assert_eq!(k.to_bytes(), read("keyinfo.sjsc"));
}

#[test]
fn every_single_byte_corruption_is_a_checksum_error() {
    for name in FIXTURES {
        let bytes = read(name);
        for i in 0..bytes.len() {
            for pattern in [0x01u8, 0x80, 0xff] {
                let mut b = bytes.clone();
                b[i] ^= pattern;
                let err = decode(name, &b).unwrap_err();
                assert!(
                    matches!(err, Error::Format(FormatError::Checksum { .. })),
                    "{name} byte {i} ^ {pattern:#x}: {err}"
                );
            }
        }
    }
}

#[test]
fn truncation_is_rejected() {
    for name in FIXTURES {
        let bytes = read(name);
        for cut in [0, 3, 20, bytes.len() - 1] {
            assert!(decode(name, &bytes[..cut]).is_err(), "{name} cut at {cut}");
        }
    }
}
