//! Sends a scene twice over a noisy channel: once as a whole frame and once
//! as a crop around the person pasted onto the receiver's copy of the
//! background.

use semtx::bglib::{build_entry, BackgroundLibrary};
use semtx::channel::ChannelConfig;
use semtx::features::FeatureParams;
use semtx::pipeline::{transmit_image, Foreground, Knobs};
use semtx::segmentation::ProvidedMask;
use semtx::synth;

fn main() -> semtx::Result<()> {
    let out_dir = std::env::temp_dir().join("semtx-keyinfo");
    std::fs::create_dir_all(&out_dir)?;

    let bg = synth::texture(192, 144, 11);
    let lib = BackgroundLibrary::from_entries(vec![build_entry(0, bg.clone(), None, FeatureParams::default())?])?;
    let scene = synth::random_scene(&bg, 32, 56, 2);
    let person = ProvidedMask::new(Some(scene.person_mask.clone()));
    let knobs = Knobs::default();

    for snr_db in [0.0, 5.0, 10.0, 20.0] {
        let cfg = ChannelConfig::new(snr_db, 1);
        let semantic = transmit_image(&scene.image, &lib, &cfg, &knobs, Foreground::new(&person))?;
        let direct = transmit_image(
            &scene.image,
            &BackgroundLibrary::new(),
            &cfg,
            &knobs,
            Foreground::new(&person),
        )?;
        println!(
            "{snr_db:5.1} dB  key-info {:>8} dB with {:5} symbols (x{:.1})   direct {:>8} dB with {:5} symbols",
            semantic.psnr.to_string(),
            semantic.symbols_sent,
            semantic.compression_factor,
            direct.psnr.to_string(),
            direct.symbols_sent
        );
        semantic
            .reconstructed
            .save_png(out_dir.join(format!("keyinfo-{snr_db:02}.png")))?;
        direct
            .reconstructed
            .save_png(out_dir.join(format!("direct-{snr_db:02}.png")))?;
    }
    println!("images written to {}", out_dir.display());
    Ok(())
}
