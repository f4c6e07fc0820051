use std::path::Path;

use image::{GrayImage, Luma};

use super::IsarImage;
use crate::error::Result;

/// Display floor relative to the image peak.
pub const DEFAULT_FLOOR_DB: f64 = -40.0;

/// 8-bit grayscale rendering of `20 log10(|I| / max|I|)` clipped at `floor_db`.
pub fn heatmap(image: &IsarImage, floor_db: f64) -> GrayImage {
    let (rows, cols) = image.shape();
    let peak = image.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    GrayImage::from_fn(cols as u32, rows as u32, |x, y| {
        let m = image.values()[(y as usize, x as usize)].norm();
        let db = if peak > 0.0 && m > 0.0 {
            20.0 * (m / peak).log10()
        } else {
            floor_db
        };
        let t = ((db - floor_db) / -floor_db).clamp(0.0, 1.0);
        Luma([(t * 255.0).round() as u8])
    })
}

pub fn write_heatmap(image: &IsarImage, floor_db: f64, path: &Path) -> Result<()> {
    heatmap(image, floor_db).save(path)?;
    Ok(())
}
