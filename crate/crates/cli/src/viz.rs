//! Rendered panels: tessellation dots, backprojections, cortical images.

use foveate_core::cortex::{splat_cortical_image, CorticalMap};
use foveate_core::retina::{backproject, ImageVector, ReceptiveFields, Tessellation};
use foveate_core::Image;

use crate::error::Result;

/// Dark dots on white, one per node, radius proportional to the node's
/// receptive-field sigma. The retina fills a `size`-square canvas.
pub fn render_tessellation(tess: &Tessellation, size: usize) -> Image {
    let mut img = Image::filled(size, size, 1, 1.0);
    let radius = size as f64 / 2.0;
    let center = (size as f64 - 1.0) / 2.0;
    for (node, nn) in tess.nodes().iter().zip(tess.nearest_neighbor_dist()) {
        let (r0, c0) = (center + radius * node[1], center + radius * node[0]);
        let sigma = 0.75 * nn.min(2.0) * radius;
        let dot = (0.35 * sigma).clamp(0.5, 0.02 * size as f64 + 0.5);
        let (lo_r, hi_r) = ((r0 - dot).floor().max(0.0) as usize, (r0 + dot).ceil().min(size as f64 - 1.0) as usize);
        let (lo_c, hi_c) = ((c0 - dot).floor().max(0.0) as usize, (c0 + dot).ceil().min(size as f64 - 1.0) as usize);
        for r in lo_r..=hi_r {
            for c in lo_c..=hi_c {
                if (r as f64 - r0).hypot(c as f64 - c0) <= dot {
                    img.set(r, c, 0, 0.0);
                }
            }
        }
        let (nr, nc) = (r0.round(), c0.round());
        if (0.0..size as f64).contains(&nr) && (0.0..size as f64).contains(&nc) {
            img.set(nr as usize, nc as usize, 0, 0.0);
        }
    }
    img
}

pub fn render_backprojection(iv: &ImageVector, fields: &ReceptiveFields) -> Result<Image> {
    Ok(backproject(iv, fields, fields.image_dims)?.image)
}

pub fn render_cortical(iv: &ImageVector, map: &CorticalMap, sigma_grid: f64) -> Result<Image> {
    Ok(splat_cortical_image(iv, map, sigma_grid)?.pixels)
}
