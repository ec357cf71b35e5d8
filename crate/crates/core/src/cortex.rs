//! Retino-cortical (complex-log) mapping and cortical image rendering.
//!
//! A retinal point at polar `(r, theta)` maps to `u = ln((r + alpha) / alpha)`
//! and an angular coordinate `v`. The right hemifield keeps `v = theta`; the
//! left hemifield uses `v = wrap(pi - theta)`, so each spans `(-pi/2, pi/2]`.
//! Hemifields are packed side by side along the column axis with the fovea at
//! the seam: `v` runs down the rows and `u` runs outward from the middle
//! column.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::{invalid, Result};
use crate::image::Image;
use crate::retina::{ImageVector, Tessellation};
use crate::spatial::PointGrid;

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_GRID_DIMS: (usize, usize) = (399, 752);
pub const DEFAULT_SIGMA_GRID: f64 = 1.0;
const TRUNCATION: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hemifield {
    Left,
    Right,
}

/// Polar angle of `(x, y)` in `(-pi, pi]`.
fn polar(x: f64, y: f64) -> (f64, f64) {
    (libm::sqrt(x * x + y * y), libm::atan2(y, x))
}

/// Complex-log coordinates `(hemifield, [u, v])` of a retinal point.
pub fn log_polar(point: [f64; 2], alpha: f64) -> (Hemifield, [f64; 2]) {
    let (r, theta) = polar(point[0], point[1]);
    let u = libm::log((r + alpha) / alpha);
    if libm::fabs(theta) <= FRAC_PI_2 {
        (Hemifield::Right, [u, theta])
    } else {
        let mut v = PI - theta;
        if v > PI {
            v -= 2.0 * PI;
        }
        (Hemifield::Left, [u, v])
    }
}

/// Affine fit of one hemifield's `(u, v)` box onto its half of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridTransform {
    pub u_min: f64,
    pub v_min: f64,
    /// Columns per unit of `u`; negative for the mirrored left half.
    pub col_scale: f64,
    pub col_origin: f64,
    /// Rows per radian of `v`.
    pub row_scale: f64,
    pub row_origin: f64,
}

impl GridTransform {
    #[inline]
    pub fn apply(&self, uv: [f64; 2]) -> [f64; 2] {
        [
            self.row_origin + (uv[1] - self.v_min) * self.row_scale,
            self.col_origin + (uv[0] - self.u_min) * self.col_scale,
        ]
    }
}

/// Cortical coordinates of every node plus the grid fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CorticalMap {
    node_cortical: Vec<[f64; 2]>,
    hemifield: Vec<Hemifield>,
    alpha: f64,
    left: GridTransform,
    right: GridTransform,
    grid_dims: (usize, usize),
}

/// Maps a tessellation onto the default 399 x 752 grid.
pub fn cortical_coordinates(tess: &Tessellation, alpha: f64) -> Result<CorticalMap> {
    CorticalMap::new(tess, alpha, DEFAULT_GRID_DIMS)
}

impl CorticalMap {
    pub fn new(tess: &Tessellation, alpha: f64, grid_dims: (usize, usize)) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid!("alpha must be positive, got {alpha}"));
        }
        let (node_cortical, hemifield): (Vec<_>, Vec<_>) = tess
            .nodes()
            .iter()
            .map(|&p| {
                let (h, uv) = log_polar(p, alpha);
                (uv, h)
            })
            .unzip();
        let placeholder = GridTransform {
            u_min: 0.0,
            v_min: 0.0,
            col_scale: 0.0,
            col_origin: 0.0,
            row_scale: 0.0,
            row_origin: 0.0,
        };
        let mut map = Self {
            node_cortical,
            hemifield,
            alpha,
            left: placeholder,
            right: placeholder,
            grid_dims,
        };
        map.fit(grid_dims)?;
        Ok(map)
    }

    /// Same node coordinates refitted to a different grid size.
    pub fn with_grid_dims(&self, grid_dims: (usize, usize)) -> Result<Self> {
        let mut map = self.clone();
        map.fit(grid_dims)?;
        Ok(map)
    }

    fn fit(&mut self, (rows, cols): (usize, usize)) -> Result<()> {
        // Each half needs at least one interior column after the margins.
        if rows < 3 || cols < 6 {
            return Err(invalid!("cortical grid {rows}x{cols} is too small"));
        }
        let half = cols / 2;
        let u_nominal = libm::log((1.0 + self.alpha) / self.alpha);
        let fit_half = |side: Hemifield| {
            let (mut u0, mut u1, mut v0, mut v1) =
                (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for (uv, &h) in self.node_cortical.iter().zip(&self.hemifield) {
                if h == side {
                    u0 = u0.min(uv[0]);
                    u1 = u1.max(uv[0]);
                    v0 = v0.min(uv[1]);
                    v1 = v1.max(uv[1]);
                }
            }
            if !(u1 > u0) {
                (u0, u1) = (0.0, u_nominal);
            }
            if !(v1 > v0) {
                (v0, v1) = (-FRAC_PI_2, FRAC_PI_2);
            }
            let row_scale = (rows - 3) as f64 / (v1 - v0);
            match side {
                Hemifield::Right => {
                    // columns [half + 1, cols - 2]
                    let span = (cols - 2 - (half + 1)) as f64;
                    GridTransform {
                        u_min: u0,
                        v_min: v0,
                        col_scale: span / (u1 - u0),
                        col_origin: (half + 1) as f64,
                        row_scale,
                        row_origin: 1.0,
                    }
                }
                Hemifield::Left => {
                    // columns [1, half - 2], mirrored
                    let span = (half - 2 - 1) as f64;
                    GridTransform {
                        u_min: u0,
                        v_min: v0,
                        col_scale: -span / (u1 - u0),
                        col_origin: (half - 2) as f64,
                        row_scale,
                        row_origin: 1.0,
                    }
                }
            }
        };
        self.right = fit_half(Hemifield::Right);
        self.left = fit_half(Hemifield::Left);
        self.grid_dims = (rows, cols);
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid_dims(&self) -> (usize, usize) {
        self.grid_dims
    }

    pub fn node_count(&self) -> usize {
        self.node_cortical.len()
    }

    /// Per-node `[u, v]`.
    pub fn node_cortical(&self) -> &[[f64; 2]] {
        &self.node_cortical
    }

    pub fn hemifield(&self) -> &[Hemifield] {
        &self.hemifield
    }

    pub fn transform(&self, side: Hemifield) -> &GridTransform {
        match side {
            Hemifield::Left => &self.left,
            Hemifield::Right => &self.right,
        }
    }

    /// Grid `[row, col]` of an arbitrary retinal point under this map's fit.
    pub fn project(&self, point: [f64; 2]) -> (Hemifield, [f64; 2]) {
        let (h, uv) = log_polar(point, self.alpha);
        (h, self.transform(h).apply(uv))
    }

    /// Grid `[row, col]` of every node.
    pub fn node_grid_positions(&self) -> Vec<[f64; 2]> {
        self.node_cortical
            .iter()
            .zip(&self.hemifield)
            .map(|(&uv, &h)| self.transform(h).apply(uv))
            .collect()
    }
}

/// Regular-grid rendering of an imagevector with its coverage weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CorticalImage {
    pub pixels: Image,
    /// Accumulated kernel weight per cell, row-major.
    pub weights: Vec<f64>,
}

impl CorticalImage {
    pub fn dims(&self) -> (usize, usize) {
        self.pixels.dims()
    }

    pub fn channels(&self) -> usize {
        self.pixels.channels()
    }

    pub fn is_covered(&self, row: usize, col: usize) -> bool {
        self.weights[row * self.pixels.cols() + col] > 0.0
    }

    pub fn covered_cells(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// Mean of one channel over covered cells, or `None` if nothing is covered.
    pub fn covered_mean(&self, channel: usize) -> Option<f64> {
        let (rows, cols) = self.dims();
        let (mut sum, mut n) = (0.0, 0usize);
        for r in 0..rows {
            for c in 0..cols {
                if self.is_covered(r, c) {
                    sum += self.pixels.get(r, c, channel);
                    n += 1;
                }
            }
        }
        (n > 0).then(|| sum / n as f64)
    }

    fn finalize(mut pixels: Image, weights: Vec<f64>) -> Self {
        let cols = pixels.cols();
        for (i, &w) in weights.iter().enumerate() {
            let (r, c) = (i / cols, i % cols);
            let px = pixels.pixel_mut(r, c);
            if w > 0.0 {
                px.iter_mut().for_each(|v| *v /= w);
            } else {
                px.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        Self { pixels, weights }
    }
}

fn check_inputs(iv: &ImageVector, map: &CorticalMap, sigma_grid: f64) -> Result<()> {
    if iv.node_count() != map.node_count() {
        return Err(invalid!(
            "imagevector has {} nodes but the cortical map has {}",
            iv.node_count(),
            map.node_count()
        ));
    }
    if !(sigma_grid > 0.0 && sigma_grid.is_finite()) {
        return Err(invalid!("sigma_grid must be positive, got {sigma_grid}"));
    }
    Ok(())
}

/// Node-centric rendering: each node deposits a truncated Gaussian.
pub fn splat_cortical_image(iv: &ImageVector, map: &CorticalMap, sigma_grid: f64) -> Result<CorticalImage> {
    check_inputs(iv, map, sigma_grid)?;
    let (rows, cols) = map.grid_dims();
    let channels = iv.channels();
    let mut pixels = Image::new(rows, cols, channels);
    let mut weights = vec![0.0; rows * cols];
    let reach = TRUNCATION * sigma_grid;
    let inv = 1.0 / (2.0 * sigma_grid * sigma_grid);

    for (i, pos) in map.node_grid_positions().into_iter().enumerate() {
        if !iv.is_valid(i) {
            continue;
        }
        let value = iv.node(i);
        let r0 = libm::ceil(pos[0] - reach).max(0.0) as usize;
        let c0 = libm::ceil(pos[1] - reach).max(0.0) as usize;
        let r1 = libm::floor(pos[0] + reach);
        let c1 = libm::floor(pos[1] + reach);
        if r1 < 0.0 || c1 < 0.0 {
            continue;
        }
        let r1 = (r1 as usize).min(rows - 1);
        let c1 = (c1 as usize).min(cols - 1);
        for r in r0..=r1 {
            let dr = r as f64 - pos[0];
            for c in c0..=c1 {
                let dc = c as f64 - pos[1];
                let d2 = dr * dr + dc * dc;
                if d2 > reach * reach {
                    continue;
                }
                let w = libm::exp(-d2 * inv);
                weights[r * cols + c] += w;
                for (o, &v) in pixels.pixel_mut(r, c).iter_mut().zip(value) {
                    *o += w * v;
                }
            }
        }
    }
    Ok(CorticalImage::finalize(pixels, weights))
}

/// Cell-centric convolutional gridding onto `target_dims`.
///
/// Produces the same normalized Gaussian estimate as
/// [`splat_cortical_image`], but each cell only visits the binned nodes
/// within its kernel reach.
pub fn grid_cortical_image(
    iv: &ImageVector,
    map: &CorticalMap,
    sigma_grid: f64,
    target_dims: (usize, usize),
) -> Result<CorticalImage> {
    check_inputs(iv, map, sigma_grid)?;
    if target_dims.0 == 0 || target_dims.1 == 0 {
        return Err(invalid!("target grid dimensions must be nonzero"));
    }
    let fitted = if target_dims == map.grid_dims() {
        None
    } else {
        Some(map.with_grid_dims(target_dims)?)
    };
    let map = fitted.as_ref().unwrap_or(map);
    let (rows, cols) = target_dims;
    let channels = iv.channels();
    let reach = TRUNCATION * sigma_grid;
    let inv = 1.0 / (2.0 * sigma_grid * sigma_grid);

    let all = map.node_grid_positions();
    let valid: Vec<usize> = (0..all.len()).filter(|&i| iv.is_valid(i)).collect();
    let points: Vec<[f64; 2]> = valid.iter().map(|&i| all[i]).collect();
    let bins = PointGrid::new(&points, reach);

    let mut pixels = Image::new(rows, cols, channels);
    let mut weights = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let mut w_sum = 0.0;
            let out = pixels.pixel_mut(r, c);
            bins.for_each_within(&points, [r as f64, c as f64], reach, |k, d2| {
                let w = libm::exp(-d2 * inv);
                w_sum += w;
                for (o, &v) in out.iter_mut().zip(iv.node(valid[k])) {
                    *o += w * v;
                }
            });
            weights[r * cols + c] = w_sum;
        }
    }
    Ok(CorticalImage::finalize(pixels, weights))
}

/// Non-overlapping `factor x factor` mean pooling over covered cells.
///
/// Trailing rows and columns that do not fill a window are dropped. Output
/// weights are the window's mean weight.
pub fn subsample_cortical(img: &CorticalImage, factor: usize) -> Result<CorticalImage> {
    if factor == 0 {
        return Err(invalid!("subsample factor must be at least 1"));
    }
    let (rows, cols) = img.dims();
    let (out_rows, out_cols) = (rows / factor, cols / factor);
    let channels = img.channels();
    let mut pixels = Image::new(out_rows, out_cols, channels);
    let mut weights = vec![0.0; out_rows * out_cols];
    let mut acc = vec![0.0; channels];
    for orow in 0..out_rows {
        for ocol in 0..out_cols {
            acc.iter_mut().for_each(|a| *a = 0.0);
            let (mut n, mut w_sum) = (0usize, 0.0);
            for r in orow * factor..(orow + 1) * factor {
                for c in ocol * factor..(ocol + 1) * factor {
                    let w = img.weights[r * cols + c];
                    if w > 0.0 {
                        n += 1;
                        w_sum += w;
                        for (a, &v) in acc.iter_mut().zip(img.pixels.pixel(r, c)) {
                            *a += v;
                        }
                    }
                }
            }
            if n > 0 {
                for (o, &a) in pixels.pixel_mut(orow, ocol).iter_mut().zip(&acc) {
                    *o = a / n as f64;
                }
                weights[orow * out_cols + ocol] = w_sum / (factor * factor) as f64;
            }
        }
    }
    Ok(CorticalImage { pixels, weights })
}

/// Number of samples in a cortical image of the given size.
pub fn cortical_size(dims: (usize, usize), channels: usize) -> usize {
    dims.0 * dims.1 * channels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retina::Tessellation;
    use proptest::prelude::*;

    #[test]
    fn log_polar_examples() {
        let (h, uv) = log_polar([0.05, 0.0], 0.05);
        assert_eq!(h, Hemifield::Right);
        assert!((uv[0] - core::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(uv[1], 0.0);

        let (_, origin) = log_polar([0.0, 0.0], 0.05);
        assert_eq!(origin[0], 0.0);

        let (_, a) = log_polar([0.5, 0.0], 0.05);
        let (h, b) = log_polar([0.5 * 0.3f64.cos(), 0.5 * 0.3f64.sin()], 0.05);
        assert_eq!(h, Hemifield::Right);
        assert!((a[0] - b[0]).abs() < 1e-15);
        assert!((b[1] - a[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn left_hemifield_angles_fold_into_half_plane() {
        for theta in [1.6, 2.5, PI, -PI + 1e-9, -2.0, -1.58] {
            let (h, uv) = log_polar([theta.cos(), theta.sin()], 0.05);
            assert_eq!(h, Hemifield::Left, "theta {theta}");
            assert!(uv[1] > -FRAC_PI_2 && uv[1] <= FRAC_PI_2, "theta {theta} v {}", uv[1]);
        }
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        let t = Tessellation::generate(10, 0.1).unwrap();
        assert!(cortical_coordinates(&t, 0.0).is_err());
        assert!(cortical_coordinates(&t, -1.0).is_err());
    }

    #[test]
    fn nodes_land_in_their_half_of_the_grid() {
        let t = Tessellation::generate(5_000, 0.1).unwrap();
        let map = cortical_coordinates(&t, 0.05).unwrap();
        let (rows, cols) = map.grid_dims();
        assert_eq!((rows, cols), (399, 752));
        for (pos, &h) in map.node_grid_positions().iter().zip(map.hemifield()) {
            assert!(pos[0] >= 1.0 - 1e-9 && pos[0] <= (rows - 2) as f64 + 1e-9);
            match h {
                Hemifield::Right => assert!(pos[1] >= (cols / 2) as f64 && pos[1] < cols as f64),
                Hemifield::Left => assert!(pos[1] >= 0.0 && pos[1] < (cols / 2) as f64),
            }
        }
    }

    #[test]
    fn u_is_monotone_in_eccentricity() {
        let t = Tessellation::generate(2_000, 0.1).unwrap();
        let map = cortical_coordinates(&t, 0.05).unwrap();
        let u = map.node_cortical();
        for i in 1..t.node_count() {
            assert!(u[i][0] >= u[i - 1][0] - 1e-15);
        }
    }

    fn tiny_map() -> (Tessellation, CorticalMap) {
        let t = Tessellation::generate(1_500, 0.1).unwrap();
        let map = CorticalMap::new(&t, 0.05, (60, 110)).unwrap();
        (t, map)
    }

    fn varied_iv(n: usize) -> ImageVector {
        let mut values: Vec<f64> = (0..n * 3).map(|k| ((k * 37) % 101) as f64 / 100.0).collect();
        let mut valid = vec![true; n];
        for i in (0..n).step_by(17) {
            valid[i] = false;
            values[i * 3..i * 3 + 3].iter_mut().for_each(|v| *v = 0.0);
        }
        ImageVector::new(n, 3, values, valid).unwrap()
    }

    #[test]
    fn splat_of_constant_is_constant() {
        let (t, map) = tiny_map();
        let img = splat_cortical_image(&ImageVector::constant(t.node_count(), 3, 0.42), &map, 1.0).unwrap();
        assert_eq!(img.dims(), (60, 110));
        for r in 0..60 {
            for c in 0..110 {
                for ch in 0..3 {
                    let v = img.pixels.get(r, c, ch);
                    if img.is_covered(r, c) {
                        assert!((v - 0.42).abs() < 1e-6);
                    } else {
                        assert_eq!(v, 0.0);
                    }
                }
            }
        }
        assert!((img.covered_mean(0).unwrap() - 0.42).abs() < 1e-12);
    }

    #[test]
    fn single_node_gives_blob_at_its_position() {
        let t = Tessellation::from_nodes(vec![[0.3, 0.2], [-0.4, -0.1]], 0.1).unwrap();
        let map = CorticalMap::new(&t, 0.05, (40, 80)).unwrap();
        let iv = ImageVector::new(2, 1, vec![1.0, 0.0], vec![true, false]).unwrap();
        let img = splat_cortical_image(&iv, &map, 1.5).unwrap();
        let pos = map.node_grid_positions()[0];
        let argmax = (0..img.weights.len())
            .max_by(|&a, &b| img.weights[a].partial_cmp(&img.weights[b]).unwrap())
            .unwrap();
        assert_eq!((argmax / 80, argmax % 80), (pos[0].round() as usize, pos[1].round() as usize));
    }

    #[test]
    fn gridding_matches_splatting() {
        let (t, map) = tiny_map();
        let iv = varied_iv(t.node_count());
        for sigma in [0.7, 1.0, 2.3] {
            let a = splat_cortical_image(&iv, &map, sigma).unwrap();
            let b = grid_cortical_image(&iv, &map, sigma, map.grid_dims()).unwrap();
            for (x, y) in a.pixels.data().iter().zip(b.pixels.data()) {
                assert!((x - y).abs() < 1e-6);
            }
            for (x, y) in a.weights.iter().zip(&b.weights) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gridding_to_other_dims_refits() {
        let (t, map) = tiny_map();
        let img = grid_cortical_image(&ImageVector::constant(t.node_count(), 1, 0.8), &map, 1.0, (23, 34)).unwrap();
        assert_eq!(img.dims(), (23, 34));
        assert!(img.covered_cells() > 0);
        for r in 0..23 {
            for c in 0..34 {
                if img.is_covered(r, c) {
                    assert!((img.pixels.get(r, c, 0) - 0.8).abs() < 1e-12);
                }
            }
        }
        assert!(grid_cortical_image(&ImageVector::constant(t.node_count(), 1, 0.8), &map, 1.0, (0, 34)).is_err());
    }

    #[test]
    fn node_count_mismatch_is_rejected() {
        let (_, map) = tiny_map();
        let iv = ImageVector::constant(7, 3, 0.1);
        assert!(splat_cortical_image(&iv, &map, 1.0).is_err());
        assert!(grid_cortical_image(&iv, &map, 1.0, (10, 10)).is_err());
    }

    #[test]
    fn subsample_geometry_and_identity() {
        let (t, map) = tiny_map();
        let img = splat_cortical_image(&varied_iv(t.node_count()), &map, 1.0).unwrap();
        assert_eq!(subsample_cortical(&img, 1).unwrap(), img);
        let half = subsample_cortical(&img, 2).unwrap();
        assert_eq!(half.dims(), (30, 55));
        let third = subsample_cortical(&img, 7).unwrap();
        assert_eq!(third.dims(), (8, 15));
        assert!(subsample_cortical(&img, 0).is_err());
    }

    #[test]
    fn default_subsample_size() {
        let img = CorticalImage {
            pixels: Image::filled(399, 752, 3, 0.25),
            weights: vec![1.0; 399 * 752],
        };
        let out = subsample_cortical(&img, 2).unwrap();
        assert_eq!(out.dims(), (199, 376));
        assert_eq!(cortical_size(out.dims(), 1), 74_824);
        assert!(out.pixels.data().iter().all(|&v| v == 0.25));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rotation_becomes_row_translation(
            r in 0.15f64..1.0,
            theta in -1.2f64..1.2,
            dtheta in -0.3f64..0.3,
        ) {
            let (_, map) = tiny_map();
            let p = [r * theta.cos(), r * theta.sin()];
            let q = [r * (theta + dtheta).cos(), r * (theta + dtheta).sin()];
            let (hp, gp) = map.project(p);
            let (hq, gq) = map.project(q);
            prop_assert_eq!(hp, Hemifield::Right);
            prop_assert_eq!(hq, Hemifield::Right);
            let scale = map.transform(Hemifield::Right).row_scale;
            prop_assert!((gq[0] - gp[0] - dtheta * scale).abs() < 1e-9);
            prop_assert!((gq[1] - gp[1]).abs() < 1e-9);
        }

        #[test]
        fn scaling_shifts_u_by_log_scale(r in 0.01f64..0.5, s in 1.0f64..2.0, theta in -3.0f64..3.0) {
            let alpha = 0.05;
            let (_, a) = log_polar([r * theta.cos(), r * theta.sin()], alpha);
            let (_, b) = log_polar([s * r * theta.cos(), s * r * theta.sin()], alpha);
            let exact = ((r * s + alpha) / (r + alpha)).ln();
            prop_assert!((b[0] - a[0] - exact).abs() < 1e-12);
            // departure from a pure ln(s) shift shrinks as r grows past alpha
            prop_assert!((exact - s.ln()).abs() <= s.ln() * alpha / (r + alpha) + 1e-12);
        }

        #[test]
        fn subsample_preserves_constants(c in 0.0f64..1.0, factor in 1usize..6) {
            let (t, map) = tiny_map();
            let img = splat_cortical_image(&ImageVector::constant(t.node_count(), 2, c), &map, 1.0).unwrap();
            let out = subsample_cortical(&img, factor).unwrap();
            let (rows, cols) = out.dims();
            for r in 0..rows {
                for col in 0..cols {
                    if out.is_covered(r, col) {
                        prop_assert!((out.pixels.get(r, col, 1) - c).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
