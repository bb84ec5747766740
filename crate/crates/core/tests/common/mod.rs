//! Deterministic synthetic images shared by the integration tests.

#![allow(dead_code)]

use polygray::GrayImage;

/// Integer hash of a pixel position, uniform enough for test textures.
fn mix(x: usize, y: usize, salt: u64) -> u64 {
    let mut h = (x as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (y as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f)
        ^ salt.wrapping_mul(0x1656_67b1_9e37_79f9);
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h
}

fn unit(x: usize, y: usize, salt: u64) -> f64 {
    (mix(x, y, salt) >> 11) as f64 / (1u64 << 53) as f64
}

/// Mostly dark pixels in 15..=134, density falling off toward the bright end.
pub fn dark_skewed(w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, 255, |x, y| {
        let t = unit(x, y, 1);
        (15.0 + 119.0 * t * t).round() as u16
    })
    .unwrap()
}

/// Mostly bright pixels in 197..=254.
pub fn bright_skewed(w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, 255, |x, y| {
        let t = unit(x, y, 2);
        (254.0 - 57.0 * t * t * t).round() as u16
    })
    .unwrap()
}

/// Two humps around 60 and 190.
pub fn bimodal(w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, 255, |x, y| {
        let spread = (unit(x, y, 3) + unit(x, y, 4) + unit(x, y, 5) - 1.5) * 40.0;
        let centre = if mix(x, y, 6).is_multiple_of(3) {
            190.0
        } else {
            60.0
        };
        (centre + spread).round().clamp(0.0, 255.0) as u16
    })
    .unwrap()
}

/// Every level `0..=255` appears the same number of times (`w * h` must be a multiple of 256).
pub fn exact_uniform(w: usize, h: usize) -> GrayImage {
    assert_eq!((w * h) % 256, 0);
    GrayImage::from_fn(w, h, 255, |x, y| ((y * w + x) % 256) as u16).unwrap()
}

/// 90 % of pixels at 0, the rest at 255.
pub fn two_level(w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(
        w,
        h,
        255,
        |x, y| if (y * w + x) % 10 == 9 { 255 } else { 0 },
    )
    .unwrap()
}

pub fn corpus(w: usize, h: usize) -> Vec<(&'static str, GrayImage)> {
    vec![
        ("dark-skewed", dark_skewed(w, h)),
        ("bright-skewed", bright_skewed(w, h)),
        ("bimodal", bimodal(w, h)),
        ("uniform", exact_uniform(w, h)),
        ("two-level", two_level(w, h)),
    ]
}

/// Count and level sum of pixels with `lower <= level <= upper`, by direct scan.
pub fn naive_bin(image: &GrayImage, lower: f64, upper: f64) -> (u64, u64) {
    let mut count = 0;
    let mut sum = 0;
    for &level in image.levels() {
        let l = f64::from(level);
        if lower <= l && l <= upper {
            count += 1;
            sum += u64::from(level);
        }
    }
    (count, sum)
}
