//! Deterministic synthetic test images.
//!
//! Used by the examples and the tests when no photographs are at hand.
//! Content is defined on normalized coordinates, so the same scene can be
//! rendered at any resolution.

use crate::image::GrayImage;

/// Integer hash mapped to `[-1, 1)`.
fn hash_noise(x: usize, y: usize, salt: u64) -> f64 {
    let mut z = (x as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
        .wrapping_add(salt);
    z ^= z >> 33;
    z = z.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z ^= z >> 29;
    (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

/// Noise-free scene: shaded background, a bright disk, a dark bar and a
/// band of soft stripes. Values are on the `[0, 1]` scale.
fn scene(u: f64, v: f64) -> f64 {
    use std::f64::consts::PI;
    let mut s = 0.25 + 0.35 * u + 0.1 * (2.0 * PI * v).sin();
    let (dx, dy) = (u - 0.62, v - 0.38);
    let r = (dx * dx + dy * dy).sqrt();
    s += 0.4 * (1.0 / (1.0 + ((r - 0.18) * 60.0).exp()));
    if (0.15..0.35).contains(&u) && (0.55..0.9).contains(&v) {
        s -= 0.3;
    }
    if v > 0.7 {
        s += 0.12 * (2.0 * PI * 6.0 * u).sin();
    }
    s.clamp(0.0, 1.0)
}

fn render(width: usize, height: usize, levels: usize, texture: f64) -> GrayImage {
    let top = (levels - 1) as f64;
    GrayImage::from_fn(width, height, levels, |x, y| {
        let u = (x as f64 + 0.5) / width as f64;
        let v = (y as f64 + 0.5) / height as f64;
        let value = scene(u, v) + texture * hash_noise(x, y, 17);
        (value.clamp(0.0, 1.0) * top).round() as u16
    })
    .expect("dimensions are positive and values are clamped")
}

/// Scene with a little per-pixel texture, which gives the histogram many
/// populated levels and equal-intensity pixels in different surroundings.
pub fn test_pattern(width: usize, height: usize, levels: usize) -> GrayImage {
    render(width, height, levels, 0.03)
}

/// The same scene without texture; resolution changes only sampling.
pub fn smooth_pattern(width: usize, height: usize, levels: usize) -> GrayImage {
    render(width, height, levels, 0.0)
}
