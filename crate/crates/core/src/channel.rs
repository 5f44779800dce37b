//! Analog transmission path: an orthonormal block-DCT coder that keeps a
//! fixed fraction `mu` of the coefficients as real-valued channel symbols,
//! an AWGN channel, and a receiver with a linear (LMMSE) gain.
//!
//! Symbol budget: an image with `W*H*C` samples is sent as exactly
//! `ceil(mu * W*H*C)` symbols. The budget is spread over the per-channel
//! blocks as evenly as possible, low zig-zag frequencies first, and no block
//! contributes more than `ceil(block^2 * mu)` coefficients.
//!
//! Noise comes from ChaCha8 seeded with `seed_from_u64(seed)`; symbol `i`
//! receives the `i`-th standard normal draw (ziggurat, `rand_distr`) scaled
//! by the noise standard deviation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{shape, Error, FormatError, Result};
use crate::imaging::{ImageBuf, CHANNELS};

pub const DEFAULT_MU: f64 = 1.0 / 3.0;
pub const DEFAULT_BLOCK: usize = 8;

/// Slack for float representations of `mu` such as `1/3`.
const BUDGET_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub snr_db: f64,
    /// Channel symbols per source sample, in `(0, 1]`.
    pub mu: f64,
    pub block: usize,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        ChannelConfig {
            snr_db,
            mu: DEFAULT_MU,
            block: DEFAULT_BLOCK,
            seed,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(Error::Parameter(format!("mu must lie in (0, 1], got {}", self.mu)));
        }
        if self.block < 2 {
            return Err(Error::Parameter(format!(
                "block size must be at least 2, got {}",
                self.block
            )));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Parameter(format!("snr_db must be finite, got {}", self.snr_db)));
        }
        Ok(())
    }

    /// Noise variance relative to unit signal power.
    pub fn noise_variance(&self) -> f64 {
        noise_variance(self.snr_db)
    }
}

pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Exact symbol count for `samples` source samples at ratio `mu`.
pub fn symbol_budget(samples: usize, mu: f64) -> usize {
    (mu * samples as f64 - BUDGET_EPS).ceil().max(0.0) as usize
}

#[cfg(test)]
fn per_block_cap(block: usize, mu: f64) -> usize {
    symbol_budget(block * block, mu).max(1)
}

/// Real-valued channel symbols plus the header the receiver needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPayload {
    pub symbols: Vec<f64>,
    pub width: u32,
    pub height: u32,
    pub channels: u32,
    /// RMS of the coefficients before normalisation; zero for an all-flat image.
    pub gain: f64,
}

impl SymbolPayload {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        if self.symbols.is_empty() {
            return 0.0;
        }
        self.symbols.iter().map(|s| s * s).sum::<f64>() / self.symbols.len() as f64
    }
}

/// Orthonormal DCT-II basis, `basis[k][n]`.
fn dct_basis(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for k in 0..n {
        let alpha = if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        for i in 0..n {
            m[k * n + i] = alpha * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    m
}

struct BlockTransform {
    n: usize,
    basis: Vec<f64>,
    zigzag: Vec<usize>,
}

impl BlockTransform {
    fn new(n: usize) -> Self {
        BlockTransform {
            n,
            basis: dct_basis(n),
            zigzag: zigzag(n),
        }
    }

    /// `out = B * x * B^T`
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut tmp = vec![0.0; n * n];
        for k in 0..n {
            for j in 0..n {
                tmp[k * n + j] = (0..n).map(|i| self.basis[k * n + i] * x[i * n + j]).sum();
            }
        }
        for k in 0..n {
            for l in 0..n {
                out[k * n + l] = (0..n).map(|j| tmp[k * n + j] * self.basis[l * n + j]).sum();
            }
        }
    }

    /// `out = B^T * c * B`
    fn inverse(&self, c: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut tmp = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                tmp[i * n + l] = (0..n).map(|k| self.basis[k * n + i] * c[k * n + l]).sum();
            }
        }
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|l| tmp[i * n + l] * self.basis[l * n + j]).sum();
            }
        }
    }
}

/// Row-major indices of an `n x n` block in JPEG zig-zag order.
pub fn zigzag(n: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(n * n);
    for s in 0..2 * n - 1 {
        let rows: Vec<usize> = (s.saturating_sub(n - 1)..=s.min(n - 1)).collect();
        if s % 2 == 0 {
            order.extend(rows.iter().rev().map(|&r| r * n + (s - r)));
        } else {
            order.extend(rows.iter().map(|&r| r * n + (s - r)));
        }
    }
    order
}

/// Coefficients kept per block, in channel-major, block-raster order.
fn allocation(width: u32, height: u32, channels: u32, block: usize, budget: usize) -> Vec<usize> {
    let bx = (width as usize).div_ceil(block);
    let by = (height as usize).div_ceil(block);
    let blocks = bx * by * channels as usize;
    let (q, r) = (budget / blocks, budget % blocks);
    (0..blocks).map(|i| q + usize::from(i < r)).collect()
}

/// Transforms, truncates and power-normalises an image into channel symbols.
pub fn encode(img: &ImageBuf, cfg: &ChannelConfig) -> Result<SymbolPayload> {
    cfg.validate()?;
    let n = cfg.block;
    if (img.width() as usize) < n || (img.height() as usize) < n {
        return Err(shape(format!(
            "image {}x{} is smaller than one {n}x{n} block",
            img.width(),
            img.height()
        )));
    }
    let budget = symbol_budget(img.sample_count(), cfg.mu);
    let alloc = allocation(img.width(), img.height(), CHANNELS as u32, n, budget);
    let t = BlockTransform::new(n);
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (bx, by) = (w.div_ceil(n), h.div_ceil(n));
    let data = img.data();

    let mut coeffs = Vec::with_capacity(budget);
    let mut block = vec![0.0; n * n];
    let mut freq = vec![0.0; n * n];
    let mut b = 0;
    for c in 0..CHANNELS {
        for byi in 0..by {
            for bxi in 0..bx {
                for i in 0..n {
                    // Edge replication past the right and bottom borders.
                    let y = (byi * n + i).min(h - 1);
                    for j in 0..n {
                        let x = (bxi * n + j).min(w - 1);
                        block[i * n + j] = data[(y * w + x) * CHANNELS + c] as f64 - 128.0;
                    }
                }
                t.forward(&block, &mut freq);
                coeffs.extend(t.zigzag[..alloc[b]].iter().map(|&z| freq[z]));
                b += 1;
            }
        }
    }
    debug_assert_eq!(coeffs.len(), budget);

    let power = coeffs.iter().map(|v| v * v).sum::<f64>() / coeffs.len().max(1) as f64;
    let gain = power.sqrt();
    if gain > 0.0 {
        coeffs.iter_mut().for_each(|v| *v /= gain);
    }
    Ok(SymbolPayload {
        symbols: coeffs,
        width: img.width(),
        height: img.height(),
        channels: CHANNELS as u32,
        gain,
    })
}

/// Adds white Gaussian noise of variance `10^(-snr_db/10)` to every symbol.
pub fn awgn(payload: &SymbolPayload, snr_db: f64, seed: u64) -> SymbolPayload {
    let sigma = noise_variance(snr_db).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = payload.clone();
    for s in &mut out.symbols {
        let z: f64 = StandardNormal.sample(&mut rng);
        *s += sigma * z;
    }
    out
}

/// Receiver: LMMSE scaling, de-normalisation, zero-filled inverse DCT.
pub fn decode(payload: &SymbolPayload, cfg: &ChannelConfig) -> Result<ImageBuf> {
    cfg.validate()?;
    let n = cfg.block;
    let invalid = |field, reason: String| Error::Format(FormatError::InvalidField { field, reason });
    if payload.channels != CHANNELS as u32 {
        return Err(invalid("channels", format!("expected 3, got {}", payload.channels)));
    }
    if (payload.width as usize) < n || (payload.height as usize) < n {
        return Err(invalid(
            "dims",
            format!("{}x{} is smaller than one block", payload.width, payload.height),
        ));
    }
    let (w, h) = (payload.width as usize, payload.height as usize);
    let budget = symbol_budget(w * h * CHANNELS, cfg.mu);
    if payload.symbols.len() != budget {
        return Err(invalid(
            "symbol count",
            format!(
                "{} symbols for {w}x{h}x3 at mu={}, expected {budget}",
                payload.symbols.len(),
                cfg.mu
            ),
        ));
    }
    let alloc = allocation(payload.width, payload.height, CHANNELS as u32, n, budget);
    let scale = payload.gain / (1.0 + cfg.noise_variance());
    let t = BlockTransform::new(n);
    let (bx, by) = (w.div_ceil(n), h.div_ceil(n));

    let mut out = vec![0u8; w * h * CHANNELS];
    let mut freq = vec![0.0; n * n];
    let mut block = vec![0.0; n * n];
    let mut cursor = 0;
    let mut b = 0;
    for c in 0..CHANNELS {
        for byi in 0..by {
            for bxi in 0..bx {
                freq.fill(0.0);
                for &z in &t.zigzag[..alloc[b]] {
                    freq[z] = payload.symbols[cursor] * scale;
                    cursor += 1;
                }
                b += 1;
                t.inverse(&freq, &mut block);
                for i in 0..n {
                    let y = byi * n + i;
                    if y >= h {
                        break;
                    }
                    for j in 0..n {
                        let x = bxi * n + j;
                        if x >= w {
                            break;
                        }
                        out[(y * w + x) * CHANNELS + c] = (block[i * n + j] + 128.0).round().clamp(0.0, 255.0) as u8;
                    }
                }
            }
        }
    }
    ImageBuf::new(payload.width, payload.height, out)
}

/// `decode(awgn(encode(img)))`; also returns the number of symbols sent.
pub fn transmit(img: &ImageBuf, cfg: &ChannelConfig) -> Result<(ImageBuf, usize)> {
    let sent = encode(img, cfg)?;
    let received = awgn(&sent, cfg.snr_db, cfg.seed);
    Ok((decode(&received, cfg)?, sent.len()))
}
