//! In-memory gray-level raster and its level histogram.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("expected {expected} samples for the declared dimensions, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("max level must be at least 1")]
    ZeroMaxLevel,
    #[error("pixel {index} has level {level}, above max level {max_level}")]
    LevelOutOfRange {
        index: usize,
        level: u16,
        max_level: u16,
    },
}

/// A rectangular raster of discrete gray levels in `0..=max_level`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    max_level: u16,
    levels: Vec<u16>,
}

impl GrayImage {
    pub fn new(
        width: usize,
        height: usize,
        max_level: u16,
        levels: Vec<u16>,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroDimension { width, height });
        }
        if max_level == 0 {
            return Err(ImageError::ZeroMaxLevel);
        }
        let expected = width.checked_mul(height).ok_or(ImageError::SizeMismatch {
            expected: usize::MAX,
            actual: levels.len(),
        })?;
        if levels.len() != expected {
            return Err(ImageError::SizeMismatch {
                expected,
                actual: levels.len(),
            });
        }
        if let Some((index, &level)) = levels.iter().enumerate().find(|(_, &l)| l > max_level) {
            return Err(ImageError::LevelOutOfRange {
                index,
                level,
                max_level,
            });
        }
        Ok(Self {
            width,
            height,
            max_level,
            levels,
        })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn<F>(
        width: usize,
        height: usize,
        max_level: u16,
        mut f: F,
    ) -> Result<Self, ImageError>
    where
        F: FnMut(usize, usize) -> u16,
    {
        let mut levels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                levels.push(f(x, y));
            }
        }
        Self::new(width, height, max_level, levels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn max_level(&self) -> u16 {
        self.max_level
    }

    pub fn levels(&self) -> &[u16] {
        &self.levels
    }

    pub fn pixel_count(&self) -> usize {
        self.levels.len()
    }

    pub fn get(&self, x: usize, y: usize) -> Option<u16> {
        if x < self.width && y < self.height {
            Some(self.levels[y * self.width + x])
        } else {
            None
        }
    }

    pub fn histogram(&self) -> Histogram {
        Histogram::from_image(self)
    }

    /// Returns a new image of the same shape with every level replaced by
    /// `table[level]`. The table must cover `0..=self.max_level()`.
    pub(crate) fn map_levels(&self, table: &[u16], new_max: u16) -> Self {
        debug_assert!(table.len() > usize::from(self.max_level));
        Self {
            width: self.width,
            height: self.height,
            max_level: new_max,
            levels: self.levels.iter().map(|&l| table[usize::from(l)]).collect(),
        }
    }
}

/// Per-level pixel counts over `0..=max_level`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn from_image(image: &GrayImage) -> Self {
        let mut counts = vec![0u64; usize::from(image.max_level) + 1];
        for &level in &image.levels {
            counts[usize::from(level)] += 1;
        }
        Self {
            counts,
            total: image.levels.len() as u64,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_level(&self) -> u16 {
        (self.counts.len() - 1) as u16
    }

    /// Smallest and largest occupied level, or `None` for an empty histogram.
    pub fn occupied_range(&self) -> Option<(u16, u16)> {
        let lo = self.counts.iter().position(|&c| c > 0)?;
        let hi = self.counts.iter().rposition(|&c| c > 0)?;
        Some((lo as u16, hi as u16))
    }

    pub fn distinct_levels(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}
