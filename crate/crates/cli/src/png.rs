//! 8-bit PNG in and out of the real-valued [`Image`].

use std::path::Path;

use foveate_core::Image;
use image::{GrayImage, RgbImage};

use crate::error::{CliError, Result};

/// Reads any PNG as RGB with values scaled to `[0, 1]`.
pub fn read_png(path: &Path) -> Result<Image> {
    let img = image::open(path)
        .map_err(|source| match source {
            image::ImageError::IoError(e) => CliError::io(path, e),
            source => CliError::Image {
                path: path.to_path_buf(),
                source,
            },
        })?
        .to_rgb8();
    let (w, h) = img.dimensions();
    let data = img.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
    Ok(Image::from_vec(h as usize, w as usize, 3, data)?)
}

#[inline]
pub fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a 1- or 3-channel image, clamping to `[0, 1]` before scaling.
pub fn write_png(path: &Path, image: &Image) -> Result<()> {
    ensure_parent(path)?;
    let (w, h) = (image.cols() as u32, image.rows() as u32);
    let bytes: Vec<u8> = image.data().iter().map(|&v| to_u8(v)).collect();
    let result = match image.channels() {
        1 => GrayImage::from_raw(w, h, bytes).map(|i| i.save(path)),
        3 => RgbImage::from_raw(w, h, bytes).map(|i| i.save(path)),
        c => return Err(CliError::Validation(format!("cannot write a {c}-channel image as PNG"))),
    };
    result
        .expect("buffer length matches dimensions")
        .map_err(|source| CliError::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        _ => Ok(()),
    }
}
