//! Seeded synthetic corpus: textured backgrounds, foreground sprites, scenes
//! composed from both, and short videos with known ground truth.
//!
//! Everything here is deterministic in its seed (ChaCha8).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imaging::{BoundingRect, ImageBuf, MaskBuf, BACKGROUND, FOREGROUND};

/// Sprite colour; textures never use a colour within 40 of it on every channel.
pub const SPRITE_BASE: [u8; 3] = [235, 20, 225];

fn near_sprite(c: [u8; 3]) -> bool {
    c.iter()
        .zip(SPRITE_BASE)
        .all(|(&a, b)| (a as i32 - b as i32).abs() <= 40)
}

fn random_color(rng: &mut ChaCha8Rng) -> [u8; 3] {
    loop {
        let c = [rng.gen(), rng.gen(), rng.gen()];
        if !near_sprite(c) {
            return c;
        }
    }
}

/// Cluttered background: a colour gradient overlaid with random rectangles,
/// discs and triangles, plus a layer of smooth value noise that gives every
/// seed its own fine structure.
pub fn texture(width: u32, height: u32, seed: u64) -> ImageBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e47_75e0);
    let c0 = random_color(&mut rng);
    let c1 = random_color(&mut rng);
    let mut img = ImageBuf::from_fn(width, height, |x, y| {
        let t = (x + y) as f32 / (width + height) as f32;
        std::array::from_fn(|i| (c0[i] as f32 * (1.0 - t) + c1[i] as f32 * t) as u8)
    })
    .expect("non-empty texture");

    let area = width as f32 * height as f32;
    let shapes = ((area / 250.0) as usize).clamp(12, 400);
    let max_side = (width.min(height) / 4).max(4);
    for _ in 0..shapes {
        let color = random_color(&mut rng);
        let cx = rng.gen_range(0..width) as i32;
        let cy = rng.gen_range(0..height) as i32;
        match rng.gen_range(0..3) {
            0 => {
                let w = rng.gen_range(3..=max_side) as i32;
                let h = rng.gen_range(3..=max_side) as i32;
                fill(&mut img, color, |x, y| x >= cx && x < cx + w && y >= cy && y < cy + h);
            }
            1 => {
                let r = rng.gen_range(2..=max_side / 2 + 2) as i32;
                fill(&mut img, color, |x, y| (x - cx).pow(2) + (y - cy).pow(2) <= r * r);
            }
            _ => {
                let s = max_side as i32;
                let pts: [(i32, i32); 3] =
                    std::array::from_fn(|_| (cx + rng.gen_range(-s..=s), cy + rng.gen_range(-s..=s)));
                fill(&mut img, color, |x, y| in_triangle(pts, x, y));
            }
        }
    }
    add_value_noise(&mut img, &mut rng);
    img
}

const NOISE_CELL: u32 = 3;
const NOISE_AMPLITUDE: f32 = 70.0;

fn add_value_noise(img: &mut ImageBuf, rng: &mut ChaCha8Rng) {
    let gw = img.width() / NOISE_CELL + 2;
    let gh = img.height() / NOISE_CELL + 2;
    let grid: Vec<f32> = (0..gw * gh).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let at = |gx: u32, gy: u32| grid[(gy * gw + gx) as usize];
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (fx, fy) = (x as f32 / NOISE_CELL as f32, y as f32 / NOISE_CELL as f32);
            let (gx, gy) = (fx as u32, fy as u32);
            let (tx, ty) = (fx - gx as f32, fy - gy as f32);
            let top = at(gx, gy) * (1.0 - tx) + at(gx + 1, gy) * tx;
            let bottom = at(gx, gy + 1) * (1.0 - tx) + at(gx + 1, gy + 1) * tx;
            let n = (top * (1.0 - ty) + bottom * ty) * NOISE_AMPLITUDE;
            let mut c = img.pixel(x, y).map(|v| (v as f32 + n).round().clamp(0.0, 255.0) as u8);
            if near_sprite(c) {
                c[1] = 90;
            }
            img.put_pixel(x, y, c);
        }
    }
}

fn fill(img: &mut ImageBuf, color: [u8; 3], inside: impl Fn(i32, i32) -> bool) {
    for y in 0..img.height() {
        for x in 0..img.width() {
            if inside(x as i32, y as i32) {
                img.put_pixel(x, y, color);
            }
        }
    }
}

fn in_triangle(p: [(i32, i32); 3], x: i32, y: i32) -> bool {
    let side = |a: (i32, i32), b: (i32, i32)| (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
    let (d0, d1, d2) = (side(p[0], p[1]), side(p[1], p[2]), side(p[2], p[0]));
    (d0 >= 0 && d1 >= 0 && d2 >= 0) || (d0 <= 0 && d1 <= 0 && d2 <= 0)
}

/// A smooth person-like sprite (head disc over an elliptical body) and its
/// mask, where `0` marks the sprite's pixels.
pub fn sprite(width: u32, height: u32, seed: u64) -> (ImageBuf, MaskBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5b1e_0000);
    let tint: [i32; 3] = std::array::from_fn(|_| rng.gen_range(-15..=15));
    let (w, h) = (width as f32, height as f32);
    let head_r = 0.22 * w.min(h * 0.6);
    let head = (w / 2.0, head_r + 0.5);
    let body_c = (w / 2.0, h * 0.62);
    let (body_rx, body_ry) = (w * 0.5, h * 0.38);
    let inside = |x: f32, y: f32| {
        let dh = (x - head.0).powi(2) + (y - head.1).powi(2) <= head_r * head_r;
        let db = ((x - body_c.0) / body_rx).powi(2) + ((y - body_c.1) / body_ry).powi(2) <= 1.0;
        dh || db
    };
    let mask = MaskBuf::from_fn(width, height, |x, y| {
        if inside(x as f32 + 0.5, y as f32 + 0.5) {
            FOREGROUND
        } else {
            BACKGROUND
        }
    })
    .expect("non-empty sprite");
    let img = ImageBuf::from_fn(width, height, |x, y| {
        let shade = (y as f32 / h * 20.0 + x as f32 / w * 10.0) as i32;
        std::array::from_fn(|i| (SPRITE_BASE[i] as i32 + tint[i] - shade).clamp(0, 255) as u8)
    })
    .expect("non-empty sprite");
    (img, mask)
}

/// A frame made of `background` with a sprite pasted at `(x, y)`.
#[derive(Debug, Clone)]
pub struct Scene {
    pub image: ImageBuf,
    /// Full-frame mask, `0` on sprite pixels.
    pub person_mask: MaskBuf,
    /// Tight box around the sprite's foreground pixels.
    pub sprite_rect: BoundingRect,
}

pub fn compose(background: &ImageBuf, sprite: &ImageBuf, sprite_mask: &MaskBuf, x: u32, y: u32) -> Scene {
    BoundingRect::new(x, y, x + sprite.width(), y + sprite.height())
        .and_then(|r| r.check_within(background.width(), background.height()))
        .expect("sprite must fit inside the background");
    let local = sprite_mask.bbox_of(FOREGROUND).expect("sprite has foreground pixels");
    let rect = BoundingRect {
        x1: x + local.x1,
        y1: y + local.y1,
        x2: x + local.x2,
        y2: y + local.y2,
    };
    let mut image = background.clone();
    let mut person_mask =
        MaskBuf::filled(background.width(), background.height(), BACKGROUND).expect("valid background");
    for sy in 0..sprite.height() {
        for sx in 0..sprite.width() {
            if sprite_mask.get(sx, sy) == FOREGROUND {
                image.put_pixel(x + sx, y + sy, sprite.pixel(sx, sy));
                person_mask.set(x + sx, y + sy, FOREGROUND);
            }
        }
    }
    Scene {
        image,
        person_mask,
        sprite_rect: rect,
    }
}

/// Sprite of the given size placed at a seeded random position.
pub fn random_scene(background: &ImageBuf, sprite_w: u32, sprite_h: u32, seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ce0_e000);
    let (s, m) = sprite(sprite_w, sprite_h, seed);
    let x = rng.gen_range(0..=background.width() - sprite_w);
    let y = rng.gen_range(0..=background.height() - sprite_h);
    compose(background, &s, &m, x, y)
}

/// Static checkerboard of `cell`-pixel squares with two colours.
pub fn checkerboard(width: u32, height: u32, cell: u32) -> ImageBuf {
    ImageBuf::from_fn(width, height, |x, y| {
        if ((x / cell) + (y / cell)).is_multiple_of(2) {
            [30, 60, 200]
        } else {
            [240, 220, 40]
        }
    })
    .expect("non-empty board")
}

/// Frames and masks for background-stitching experiments.
#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    pub frames: Vec<ImageBuf>,
    pub masks: Vec<MaskBuf>,
    /// The true static background of each frame.
    pub backgrounds: Vec<ImageBuf>,
}

pub const OCCLUDER_SIDE: u32 = 16;
pub const HIDDEN_CORNER: u32 = 8;

/// 20-frame 64x64 video: a static checkerboard, a 16x16 occluder that moves
/// over the whole frame, and an 8x8 foreground patch parked in the top-left
/// corner that never moves. Every pixel outside that corner is background in
/// at least one frame.
pub fn moving_occluder_video() -> SyntheticVideo {
    const SIZE: u32 = 64;
    const FRAMES: u32 = 20;
    let board = checkerboard(SIZE, SIZE, 4);
    let mut frames = Vec::new();
    let mut masks = Vec::new();
    for k in 0..FRAMES {
        // Lissajous-like walk so consecutive frames do not overlap much.
        let ox = (k * 13) % (SIZE - OCCLUDER_SIDE + 1);
        let oy = (k * 29 + 7) % (SIZE - OCCLUDER_SIDE + 1);
        let mut img = board.clone();
        let mut mask = MaskBuf::filled(SIZE, SIZE, BACKGROUND).expect("mask");
        for y in 0..SIZE {
            for x in 0..SIZE {
                let occluded = (ox..ox + OCCLUDER_SIDE).contains(&x) && (oy..oy + OCCLUDER_SIDE).contains(&y);
                let hidden = x < HIDDEN_CORNER && y < HIDDEN_CORNER;
                if occluded {
                    img.put_pixel(x, y, [200 - (k * 5) as u8, 40, 180]);
                    mask.set(x, y, FOREGROUND);
                } else if hidden {
                    img.put_pixel(x, y, [10, 200, 10]);
                    mask.set(x, y, FOREGROUND);
                }
            }
        }
        frames.push(img);
        masks.push(mask);
    }
    SyntheticVideo {
        backgrounds: vec![board; FRAMES as usize],
        frames,
        masks,
    }
}

/// `len` frames over textured backgrounds: frames before `cut` use texture
/// `seed`, the rest texture `seed + 1`. A sprite walks across the frame.
pub fn two_scene_video(width: u32, height: u32, len: usize, cut: usize, seed: u64) -> SyntheticVideo {
    let bg_a = texture(width, height, seed);
    let bg_b = texture(width, height, seed + 1);
    static_scene_video_with(&[(&bg_a, cut), (&bg_b, len - cut)], seed)
}

/// `len` frames over one textured background with a walking sprite.
pub fn static_scene_video(width: u32, height: u32, len: usize, seed: u64) -> SyntheticVideo {
    let bg = texture(width, height, seed);
    static_scene_video_with(&[(&bg, len)], seed)
}

fn static_scene_video_with(parts: &[(&ImageBuf, usize)], seed: u64) -> SyntheticVideo {
    let mut out = SyntheticVideo {
        frames: vec![],
        masks: vec![],
        backgrounds: vec![],
    };
    let total: usize = parts.iter().map(|p| p.1).sum();
    let mut k = 0usize;
    for &(bg, n) in parts {
        let sw = (bg.width() / 5).max(4);
        let sh = (bg.height() * 2 / 5).max(4);
        let (s, m) = sprite(sw, sh, seed);
        for _ in 0..n {
            let span = bg.width() - sw;
            let x = if total > 1 {
                (span as usize * k / (total - 1)) as u32
            } else {
                0
            };
            let y = (bg.height() - sh) / 2;
            let scene = compose(bg, &s, &m, x, y);
            out.frames.push(scene.image);
            out.masks.push(scene.person_mask);
            out.backgrounds.push(bg.clone());
            k += 1;
        }
    }
    out
}
