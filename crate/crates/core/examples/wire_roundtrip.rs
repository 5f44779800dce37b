//! Serialises a key-information wire frame, reads it back on the receiver
//! side and shows that a flipped byte is caught by the checksum.

use semtx::bglib::{build_entry, BackgroundLibrary};
use semtx::channel::ChannelConfig;
use semtx::features::FeatureParams;
use semtx::pipeline::{reconstruct, transmit_image, Foreground, Knobs, WireFrame};
use semtx::segmentation::ProvidedMask;
use semtx::synth;

fn main() -> semtx::Result<()> {
    let bg = synth::texture(128, 96, 5);
    let lib = BackgroundLibrary::from_entries(vec![build_entry(0, bg.clone(), None, FeatureParams::default())?])?;
    let scene = synth::random_scene(&bg, 24, 40, 3);
    let person = ProvidedMask::new(Some(scene.person_mask));
    let cfg = ChannelConfig::new(8.0, 99);
    let sent = transmit_image(&scene.image, &lib, &cfg, &Knobs::default(), Foreground::new(&person))?;

    let bytes = sent.frame.to_bytes();
    println!(
        "{} frame, {} symbols, {} bytes on the wire",
        sent.mode.as_str(),
        sent.frame.symbols.len(),
        bytes.len()
    );

    let frame = WireFrame::from_bytes(&bytes)?;
    let received = reconstruct(&frame, &lib, &ChannelConfig::new(frame.snr_db as f64, 0), None)?;
    println!(
        "receiver image identical to sender's: {}",
        received == sent.reconstructed
    );

    let mut damaged = bytes.clone();
    damaged[bytes.len() / 2] ^= 0x10;
    match WireFrame::from_bytes(&damaged) {
        Ok(_) => println!("corruption went unnoticed"),
        Err(e) => println!("corrupted copy rejected: {e}"),
    }
    Ok(())
}
