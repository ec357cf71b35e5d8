//! Retina placement and fixation-crop extraction.

use super::kmeans::FixationCluster;
use crate::error::{invalid, Result};
use crate::image::Image;

/// Side of a fixation crop; the default retina (radius 463 px) is inscribed.
pub const DEFAULT_CROP_SIZE: usize = 926;

/// A window in image pixels. The origin may be negative when padding is
/// allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRect {
    pub row0: i64,
    pub col0: i64,
    pub rows: usize,
    pub cols: usize,
}

impl CropRect {
    pub fn row_end(&self) -> i64 {
        self.row0 + self.rows as i64
    }

    pub fn col_end(&self) -> i64 {
        self.col0 + self.cols as i64
    }

    pub fn within(&self, (rows, cols): (usize, usize)) -> bool {
        self.row0 >= 0 && self.col0 >= 0 && self.row_end() <= rows as i64 && self.col_end() <= cols as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetinaPlacement {
    pub rect: CropRect,
    /// Fixation in image coordinates: the crop's center pixel.
    pub center_px: [f64; 2],
    /// Some hull vertex lies outside the retina's inscribed circle.
    pub hull_outside_retina: bool,
}

fn place_axis(center: f64, crop: usize, extent: usize) -> i64 {
    let start = libm::floor(center + 0.5) as i64 - (crop / 2) as i64;
    if crop <= extent {
        start.clamp(0, (extent - crop) as i64)
    } else {
        start
    }
}

/// Centers a `crop_size` square on the cluster centroid, sliding it back
/// inside the image where possible.
pub fn place_retina(
    cluster: &FixationCluster,
    image_dims: (usize, usize),
    crop_size: usize,
    allow_padding: bool,
) -> Result<RetinaPlacement> {
    if crop_size == 0 {
        return Err(invalid!("crop size must be positive"));
    }
    let (rows, cols) = image_dims;
    if !allow_padding && (crop_size > rows || crop_size > cols) {
        return Err(invalid!(
            "a {crop_size}px crop does not fit a {rows}x{cols} image without padding"
        ));
    }
    let [cr, cc] = cluster.centroid_px;
    if !(cr.is_finite() && cc.is_finite()) {
        return Err(invalid!("cluster centroid is not finite"));
    }
    let rect = CropRect {
        row0: place_axis(cr, crop_size, rows),
        col0: place_axis(cc, crop_size, cols),
        rows: crop_size,
        cols: crop_size,
    };
    let half = (crop_size / 2) as f64;
    let center_px = [rect.row0 as f64 + half, rect.col0 as f64 + half];
    let hull_outside_retina = cluster
        .hull_px
        .iter()
        .any(|v| libm::hypot(v[0] - center_px[0], v[1] - center_px[1]) > half);
    Ok(RetinaPlacement {
        rect,
        center_px,
        hull_outside_retina,
    })
}

/// Copies `rect` out of `image`; with padding, outside pixels replicate the
/// nearest edge pixel.
pub fn extract_crop(image: &Image, rect: &CropRect, allow_padding: bool) -> Result<Image> {
    if rect.rows == 0 || rect.cols == 0 {
        return Err(invalid!("crop rectangle is empty"));
    }
    if !rect.within(image.dims()) && !allow_padding {
        return Err(invalid!("crop {rect:?} extends outside a {:?} image", image.dims()));
    }
    if image.rows() == 0 || image.cols() == 0 {
        return Err(invalid!("cannot crop an empty image"));
    }
    let max_r = image.rows() as i64 - 1;
    let max_c = image.cols() as i64 - 1;
    let ch = image.channels();
    let mut out = Image::new(rect.rows, rect.cols, ch);
    for r in 0..rect.rows {
        let sr = (rect.row0 + r as i64).clamp(0, max_r) as usize;
        for c in 0..rect.cols {
            let sc = (rect.col0 + c as i64).clamp(0, max_c) as usize;
            out.pixel_mut(r, c).copy_from_slice(image.pixel(sr, sc));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cluster_at(c: [f64; 2]) -> FixationCluster {
        FixationCluster {
            member_indices: vec![0],
            centroid_px: c,
            hull_px: vec![c],
        }
    }

    #[test]
    fn centered_and_clamped_placement() {
        let p = place_retina(&cluster_at([500.0, 500.0]), (2000, 2000), 926, false).unwrap();
        assert_eq!((p.rect.row0, p.rect.row_end()), (37, 963));
        assert_eq!((p.rect.col0, p.rect.col_end()), (37, 963));
        assert_eq!(p.center_px, [500.0, 500.0]);
        assert!(!p.hull_outside_retina);

        let p = place_retina(&cluster_at([100.0, 100.0]), (2000, 2000), 926, false).unwrap();
        assert_eq!((p.rect.row0, p.rect.col0, p.rect.rows, p.rect.cols), (0, 0, 926, 926));

        let p = place_retina(&cluster_at([1990.0, 5.0]), (2000, 2000), 926, false).unwrap();
        assert_eq!((p.rect.row0, p.rect.row_end(), p.rect.col0), (1074, 2000, 0));
    }

    #[test]
    fn hull_warning() {
        let c = FixationCluster {
            member_indices: vec![0, 1],
            centroid_px: [500.0, 500.0],
            hull_px: vec![[500.0, 0.0], [500.0, 1000.0]],
        };
        assert!(place_retina(&c, (2000, 2000), 926, false).unwrap().hull_outside_retina);
    }

    #[test]
    fn oversize_crop_needs_padding() {
        assert!(place_retina(&cluster_at([50.0, 50.0]), (100, 100), 926, false).is_err());
        let p = place_retina(&cluster_at([50.0, 50.0]), (100, 100), 926, true).unwrap();
        assert_eq!(p.rect.row0, 50 - 463);
    }

    #[test]
    fn crop_copy_and_padding() {
        let img = Image::from_fn(20, 30, 2, |r, c, ch| (r * 100 + c * 2 + ch) as f64);
        let full = CropRect { row0: 0, col0: 0, rows: 20, cols: 30 };
        assert_eq!(extract_crop(&img, &full, false).unwrap(), img);

        let hang = CropRect { row0: 5, col0: 3, rows: 25, cols: 10 };
        assert!(extract_crop(&img, &hang, false).is_err());
        let out = extract_crop(&img, &hang, true).unwrap();
        assert_eq!(out.dims(), (25, 10));
        for r in 15..25 {
            for c in 0..10 {
                assert_eq!(out.pixel(r, c), img.pixel(19, c + 3));
            }
        }
        assert_eq!(out.pixel(0, 0), img.pixel(5, 3));
    }
}
