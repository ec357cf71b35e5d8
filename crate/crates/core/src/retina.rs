//! Space-variant retina: tessellation, receptive fields, sampling and
//! backprojection.
//!
//! Retina coordinates are normalized so the field of view is the unit disc
//! centred on the fixation. A node at `(x, y)` lands on image pixel
//! `(fixation_row + R * y, fixation_col + R * x)` for a retina radius of `R`
//! pixels.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::image::Image;
use crate::spatial::nearest_neighbor_distances;

/// Fovea radius used when none is given, as a fraction of the field of view.
pub const DEFAULT_FOVEA_RADIUS: f64 = 0.1;
/// Retina radius that inscribes the field of view in a 926 x 926 crop.
pub const DEFAULT_RETINA_RADIUS_PX: f64 = 463.0;
/// Receptive field sigma as a multiple of the node's nearest-neighbor spacing.
pub const DEFAULT_SIGMA_SCALE: f64 = 0.75;
/// Kernel support radius in sigmas.
pub const DEFAULT_TRUNCATION: f64 = 3.0;
/// Smallest kernel width, in pixels. At this width the truncated support of
/// any in-image center still reaches its nearest pixel center.
pub const MIN_SIGMA_PX: f64 = 0.25;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653; // pi * (3 - sqrt 5)

/// Node layout of a retina, ordered by eccentricity.
#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    nodes: Vec<[f64; 2]>,
    fovea_radius: f64,
    nearest_neighbor_dist: Vec<f64>,
}

impl Tessellation {
    /// Lays out `node_count` nodes on a golden-angle spiral.
    ///
    /// The first `round(node_count * fovea_radius)` nodes fill the foveal
    /// disc uniformly (`r = f * sqrt(i / n_f)`); the rest grow exponentially
    /// from `f` to exactly 1, so peripheral spacing is proportional to
    /// eccentricity.
    pub fn generate(node_count: usize, fovea_radius: f64) -> Result<Self> {
        if node_count == 0 {
            return Err(invalid!("node_count must be at least 1"));
        }
        if !(fovea_radius > 0.0 && fovea_radius < 1.0) {
            return Err(invalid!("fovea_radius must lie in (0, 1), got {fovea_radius}"));
        }
        let foveal = (libm::round(node_count as f64 * fovea_radius) as usize).min(node_count);
        let peripheral = node_count - foveal;
        let growth = if peripheral >= 2 {
            libm::log(1.0 / fovea_radius) / (peripheral - 1) as f64
        } else {
            0.0
        };

        let nodes = (0..node_count)
            .map(|i| {
                let r = if node_count == 1 {
                    0.0
                } else if i < foveal {
                    fovea_radius * libm::sqrt(i as f64 / foveal as f64)
                } else if peripheral == 1 {
                    1.0
                } else {
                    let j = i - foveal;
                    if j == peripheral - 1 {
                        1.0
                    } else {
                        fovea_radius * libm::exp(growth * j as f64)
                    }
                };
                let theta = i as f64 * GOLDEN_ANGLE;
                [r * libm::cos(theta), r * libm::sin(theta)]
            })
            .collect();
        Self::from_nodes(nodes, fovea_radius)
    }

    /// Wraps an explicit node list, e.g. one read back from disk.
    ///
    /// Nodes must lie in the unit disc. A single node gets a spacing of 1
    /// (the field-of-view radius).
    pub fn from_nodes(nodes: Vec<[f64; 2]>, fovea_radius: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(invalid!("a tessellation needs at least one node"));
        }
        if !(fovea_radius > 0.0 && fovea_radius < 1.0) {
            return Err(invalid!("fovea_radius must lie in (0, 1), got {fovea_radius}"));
        }
        for (i, p) in nodes.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) || p[0] * p[0] + p[1] * p[1] > 1.0 + 1e-12 {
                return Err(invalid!("node {i} lies outside the unit disc"));
            }
        }
        let nearest_neighbor_dist = if nodes.len() == 1 {
            vec![1.0]
        } else {
            nearest_neighbor_distances(&nodes)
        };
        if nearest_neighbor_dist.iter().any(|&d| d <= 0.0) {
            return Err(invalid!("tessellation contains coincident nodes"));
        }
        Ok(Self {
            nodes,
            fovea_radius,
            nearest_neighbor_dist,
        })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn fovea_radius(&self) -> f64 {
        self.fovea_radius
    }

    pub fn nearest_neighbor_dist(&self) -> &[f64] {
        &self.nearest_neighbor_dist
    }

    /// Radius of node `i` in normalized units.
    pub fn eccentricity(&self, i: usize) -> f64 {
        let [x, y] = self.nodes[i];
        libm::sqrt(x * x + y * y)
    }
}

/// One pixel of a receptive field's support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub row: u32,
    pub col: u32,
    pub weight: f64,
}

/// Gaussian sampling kernel of one node, clipped to the image.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceptiveField {
    pub node_index: usize,
    pub center_px: [f64; 2],
    pub sigma_px: f64,
    /// Absolute pixel positions and normalized weights; empty when the
    /// kernel lies wholly outside the image.
    pub support: Vec<Tap>,
}

impl ReceptiveField {
    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Kernel-shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    pub sigma_scale: f64,
    pub truncation: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            sigma_scale: DEFAULT_SIGMA_SCALE,
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

/// Receptive fields of every node for one image geometry and fixation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceptiveFields {
    pub image_dims: (usize, usize),
    pub fixation_px: [f64; 2],
    pub retina_radius_px: f64,
    pub fields: Vec<ReceptiveField>,
}

impl ReceptiveFields {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn empty_count(&self) -> usize {
        self.fields.iter().filter(|f| f.is_empty()).count()
    }
}

/// Builds Gaussian receptive fields with the default kernel shape.
pub fn compute_receptive_fields(
    tess: &Tessellation,
    retina_radius_px: f64,
    image_dims: (usize, usize),
    fixation_px: [f64; 2],
) -> Result<ReceptiveFields> {
    compute_receptive_fields_with(tess, retina_radius_px, image_dims, fixation_px, FieldParams::default())
}

pub fn compute_receptive_fields_with(
    tess: &Tessellation,
    retina_radius_px: f64,
    image_dims: (usize, usize),
    fixation_px: [f64; 2],
    params: FieldParams,
) -> Result<ReceptiveFields> {
    if !(retina_radius_px > 0.0 && retina_radius_px.is_finite()) {
        return Err(invalid!("retina_radius_px must be positive, got {retina_radius_px}"));
    }
    let (rows, cols) = image_dims;
    if rows == 0 || cols == 0 {
        return Err(invalid!("image dimensions must be nonzero"));
    }
    let [fr, fc] = fixation_px;
    if !(fr >= 0.0 && fr <= (rows - 1) as f64 && fc >= 0.0 && fc <= (cols - 1) as f64) {
        return Err(invalid!(
            "fixation ({fr}, {fc}) lies outside a {rows}x{cols} image"
        ));
    }
    if !(params.sigma_scale > 0.0 && params.truncation > 0.0) {
        return Err(invalid!("kernel parameters must be positive"));
    }

    let fields = tess
        .nodes()
        .iter()
        .zip(tess.nearest_neighbor_dist())
        .enumerate()
        .map(|(node_index, (&[x, y], &nn))| {
            let center_px = [fr + retina_radius_px * y, fc + retina_radius_px * x];
            let sigma_px = (params.sigma_scale * nn * retina_radius_px).max(MIN_SIGMA_PX);
            let support = gaussian_support(center_px, sigma_px, params.truncation, rows, cols);
            ReceptiveField {
                node_index,
                center_px,
                sigma_px,
                support,
            }
        })
        .collect();

    Ok(ReceptiveFields {
        image_dims,
        fixation_px,
        retina_radius_px,
        fields,
    })
}

fn gaussian_support(center: [f64; 2], sigma: f64, truncation: f64, rows: usize, cols: usize) -> Vec<Tap> {
    let reach = truncation * sigma;
    let reach2 = reach * reach;
    let r0 = libm::ceil(center[0] - reach).max(0.0);
    let r1 = libm::floor(center[0] + reach).min((rows - 1) as f64);
    let c0 = libm::ceil(center[1] - reach).max(0.0);
    let c1 = libm::floor(center[1] + reach).min((cols - 1) as f64);
    if r0 > r1 || c0 > c1 {
        return Vec::new();
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut taps = Vec::new();
    let mut total = 0.0;
    for row in r0 as u32..=r1 as u32 {
        let dr = row as f64 - center[0];
        for col in c0 as u32..=c1 as u32 {
            let dc = col as f64 - center[1];
            let d2 = dr * dr + dc * dc;
            if d2 <= reach2 {
                let weight = libm::exp(-d2 * inv);
                total += weight;
                taps.push(Tap { row, col, weight });
            }
        }
    }
    if total > 0.0 {
        for t in &mut taps {
            t.weight /= total;
        }
    }
    taps
}

/// Per-node, per-channel retinal responses.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageVector {
    node_count: usize,
    channels: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
    pub fixation_px: [f64; 2],
    pub retina_radius_px: f64,
}

impl ImageVector {
    pub fn new(node_count: usize, channels: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if node_count == 0 || channels == 0 {
            return Err(invalid!("imagevector dimensions must be positive"));
        }
        if values.len() != node_count * channels {
            return Err(invalid!(
                "imagevector has {} values, expected {node_count}x{channels}",
                values.len()
            ));
        }
        if valid.len() != node_count {
            return Err(invalid!(
                "validity mask has {} entries, expected {node_count}",
                valid.len()
            ));
        }
        Ok(Self {
            node_count,
            channels,
            values,
            valid,
            fixation_px: [0.0; 2],
            retina_radius_px: DEFAULT_RETINA_RADIUS_PX,
        })
    }

    /// Every node valid and every channel equal to `value`.
    pub fn constant(node_count: usize, channels: usize, value: f64) -> Self {
        Self {
            node_count,
            channels,
            values: vec![value; node_count * channels],
            valid: vec![true; node_count],
            fixation_px: [0.0; 2],
            retina_radius_px: DEFAULT_RETINA_RADIUS_PX,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Node-major, channel-minor.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.channels..(i + 1) * self.channels]
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.valid[i]
    }
}

/// Integrates each receptive field over `image`.
pub fn sample(image: &Image, fields: &ReceptiveFields) -> Result<ImageVector> {
    if image.dims() != fields.image_dims {
        return Err(invalid!(
            "fields were built for {:?} but the image is {:?}",
            fields.image_dims,
            image.dims()
        ));
    }
    if fields.is_empty() || image.channels() == 0 {
        return Err(invalid!("nothing to sample"));
    }
    let channels = image.channels();
    let mut values = vec![0.0; fields.len() * channels];
    let mut valid = vec![false; fields.len()];
    for (i, field) in fields.fields.iter().enumerate() {
        if field.is_empty() {
            continue;
        }
        valid[i] = true;
        let out = &mut values[i * channels..(i + 1) * channels];
        for tap in &field.support {
            let px = image.pixel(tap.row as usize, tap.col as usize);
            for (o, &p) in out.iter_mut().zip(px) {
                *o += tap.weight * p;
            }
        }
    }
    Ok(ImageVector {
        node_count: fields.len(),
        channels,
        values,
        valid,
        fixation_px: fields.fixation_px,
        retina_radius_px: fields.retina_radius_px,
    })
}

/// Splatted reconstruction of an imagevector on a pixel canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct Backprojection {
    pub image: Image,
    /// `true` where some kernel reached the pixel.
    pub covered: Vec<bool>,
}

/// Normalized kernel splatting of node values back onto pixels. Pixels no
/// kernel reaches are 0 and marked uncovered.
pub fn backproject(iv: &ImageVector, fields: &ReceptiveFields, canvas_dims: (usize, usize)) -> Result<Backprojection> {
    if iv.node_count() != fields.len() {
        return Err(invalid!(
            "imagevector has {} nodes but there are {} fields",
            iv.node_count(),
            fields.len()
        ));
    }
    let (rows, cols) = canvas_dims;
    let channels = iv.channels();
    let mut image = Image::new(rows, cols, channels);
    let mut weight = vec![0.0; rows * cols];
    for (i, field) in fields.fields.iter().enumerate() {
        if !iv.is_valid(i) {
            continue;
        }
        let value = iv.node(i);
        for tap in &field.support {
            let (r, c) = (tap.row as usize, tap.col as usize);
            if r >= rows || c >= cols {
                continue;
            }
            weight[r * cols + c] += tap.weight;
            for (o, &v) in image.pixel_mut(r, c).iter_mut().zip(value) {
                *o += tap.weight * v;
            }
        }
    }
    let mut covered = vec![false; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let w = weight[r * cols + c];
            if w > 0.0 {
                covered[r * cols + c] = true;
                for o in image.pixel_mut(r, c) {
                    *o /= w;
                }
            }
        }
    }
    Ok(Backprojection { image, covered })
}

/// Ratio of crop samples to retina samples.
pub fn reduction_ratio(crop_dims: (usize, usize, usize), node_count: usize, channels: usize) -> Result<f64> {
    let (rows, cols, crop_channels) = crop_dims;
    if node_count == 0 || channels == 0 || rows == 0 || cols == 0 || crop_channels == 0 {
        return Err(invalid!("reduction ratio needs positive sizes"));
    }
    Ok((rows * cols * crop_channels) as f64 / (node_count * channels) as f64)
}

/// Ratio of the pixels inside the retina's inscribed circle (by area) to
/// its node count.
pub fn field_of_view_ratio(retina_radius_px: f64, node_count: usize) -> Result<f64> {
    if node_count == 0 || !(retina_radius_px > 0.0) {
        return Err(invalid!("field-of-view ratio needs positive sizes"));
    }
    Ok(PI * retina_radius_px * retina_radius_px / node_count as f64)
}
