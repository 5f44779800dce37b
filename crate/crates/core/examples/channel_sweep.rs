//! PSNR of the analog block-DCT channel code over a range of SNRs, averaged
//! over noise seeds.

use semtx::channel::{self, ChannelConfig, DEFAULT_MU};
use semtx::{imaging, synth};

fn main() -> semtx::Result<()> {
    let img = synth::texture(128, 96, 3);
    let seeds = 0..8u64;
    println!("snr_db  mean_psnr_db  symbols");
    for snr_db in (-4..=24).step_by(4) {
        let mut total = 0.0;
        let mut symbols = 0;
        for seed in seeds.clone() {
            let cfg = ChannelConfig::new(snr_db as f64, seed).with_mu(DEFAULT_MU);
            let (out, n) = channel::transmit(&img, &cfg)?;
            total += imaging::psnr(&img, &out)?.as_f64();
            symbols = n;
        }
        println!("{snr_db:6}  {:12.2}  {symbols}", total / seeds.end as f64);
    }
    Ok(())
}
