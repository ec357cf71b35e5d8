//! Planar homographies: normalized DLT estimation and seeded RANSAC.
//!
//! Points are `(row, col)`; matrices act on homogeneous `(col, row, 1)`,
//! i.e. `x` is the column and `y` the row.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix3};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// 3 x 3 projective transform normalized so `h[2][2] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    h: [[f64; 3]; 3],
}

impl Homography {
    pub fn identity() -> Self {
        Self {
            h: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Pure translation by `d_row` rows and `d_col` columns.
    pub fn translation(d_row: f64, d_col: f64) -> Self {
        Self {
            h: [[1.0, 0.0, d_col], [0.0, 1.0, d_row], [0.0, 0.0, 1.0]],
        }
    }

    /// Normalizes `m` by its bottom-right entry.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid!("homography has non-finite entries"));
        }
        let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(libm::fabs(*v)));
        if libm::fabs(m[2][2]) <= 1e-14 * scale || scale == 0.0 {
            return Err(Error::DegenerateInput("homography cannot be normalized: h[2][2] is zero".into()));
        }
        let mut h = m;
        for row in &mut h {
            for v in row.iter_mut() {
                *v /= m[2][2];
            }
        }
        let det = to_na(&h).determinant();
        if libm::fabs(det) <= 1e-14 {
            return Err(Error::DegenerateInput("homography is singular".into()));
        }
        Ok(Self { h })
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.h
    }

    /// Maps `(row, col)` through the projective transform.
    pub fn apply(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let (x, y) = (p[1], p[0]);
        let h = &self.h;
        let w = h[2][0] * x + h[2][1] * y + h[2][2];
        if w == 0.0 || !w.is_finite() {
            return Err(Error::PointAtInfinity);
        }
        let xo = (h[0][0] * x + h[0][1] * y + h[0][2]) / w;
        let yo = (h[1][0] * x + h[1][1] * y + h[1][2]) / w;
        Ok([yo, xo])
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = to_na(&self.h)
            .try_inverse()
            .ok_or_else(|| Error::DegenerateInput("homography is singular".into()))?;
        Self::from_matrix(from_na(&inv))
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Homography) -> Result<Self> {
        Self::from_matrix(from_na(&(to_na(&self.h) * to_na(&first.h))))
    }
}

/// Free-function form of [`Homography::apply`].
pub fn apply_homography(h: &Homography, p: [f64; 2]) -> Result<[f64; 2]> {
    h.apply(p)
}

fn to_na(h: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::new(
        h[0][0], h[0][1], h[0][2], h[1][0], h[1][1], h[1][2], h[2][0], h[2][1], h[2][2],
    )
}

fn from_na(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

/// A correspondence `from -> to`, both `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointPair {
    pub from: [f64; 2],
    pub to: [f64; 2],
}

impl PointPair {
    pub fn new(from: [f64; 2], to: [f64; 2]) -> Self {
        Self { from, to }
    }
}

/// Forward reprojection error in pixels, infinite if `from` maps to infinity.
pub fn reprojection_error(h: &Homography, pair: &PointPair) -> f64 {
    match h.apply(pair.from) {
        Ok(p) => {
            let (dr, dc) = (p[0] - pair.to[0], p[1] - pair.to[1]);
            libm::sqrt(dr * dr + dc * dc)
        }
        Err(_) => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub threshold_px: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            threshold_px: 3.0,
            iterations: 1_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacFit {
    pub homography: Homography,
    pub inliers: Vec<bool>,
}

impl RansacFit {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

/// Estimates the homography taking every `from` onto its `to`.
///
/// Without a RANSAC config all pairs are used in one normalized DLT solve;
/// with one, the best-consensus model is refit on its inliers.
pub fn estimate_homography(pairs: &[PointPair], ransac: Option<&RansacConfig>) -> Result<Homography> {
    match ransac {
        None => normalized_dlt(pairs),
        Some(cfg) => ransac_homography(pairs, cfg).map(|fit| fit.homography),
    }
}

/// Isotropic normalization taking the centroid to the origin and the mean
/// distance to sqrt(2). Returns the transform and the mapped `(x, y)` points.
fn normalize(points: impl Iterator<Item = [f64; 2]> + Clone) -> Result<(Matrix3<f64>, Vec<[f64; 2]>)> {
    // input is (row, col); work in (x, y) = (col, row)
    let xy: Vec<[f64; 2]> = points.map(|p| [p[1], p[0]]).collect();
    let n = xy.len() as f64;
    let cx = xy.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = xy.iter().map(|p| p[1]).sum::<f64>() / n;
    let mean_dist = xy
        .iter()
        .map(|p| libm::hypot(p[0] - cx, p[1] - cy))
        .sum::<f64>()
        / n;
    if !(mean_dist > 0.0 && mean_dist.is_finite()) {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let s = core::f64::consts::SQRT_2 / mean_dist;
    let t = Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    let mapped: Vec<[f64; 2]> = xy.iter().map(|p| [s * (p[0] - cx), s * (p[1] - cy)]).collect();

    // Collinear sets have a rank-1 scatter matrix.
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &mapped {
        sxx += p[0] * p[0];
        sxy += p[0] * p[1];
        syy += p[1] * p[1];
    }
    let det = sxx * syy - sxy * sxy;
    let tr = sxx + syy;
    if det <= 1e-10 * tr * tr {
        return Err(Error::DegenerateInput("points are collinear".into()));
    }
    Ok((t, mapped))
}

fn normalized_dlt(pairs: &[PointPair]) -> Result<Homography> {
    if pairs.len() < 4 {
        return Err(invalid!("need at least 4 correspondences, got {}", pairs.len()));
    }
    let (t_from, src) = normalize(pairs.iter().map(|p| p.from))?;
    let (t_to, dst) = normalize(pairs.iter().map(|p| p.to))?;

    // Zero-padded to at least 9 rows so the SVD yields the full right basis.
    let rows = (2 * pairs.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (s, d)) in src.iter().zip(&dst).enumerate() {
        let ([x, y], [xp, yp]) = (*s, *d);
        let r0 = [-x, -y, -1.0, 0.0, 0.0, 0.0, xp * x, xp * y, xp];
        let r1 = [0.0, 0.0, 0.0, -x, -y, -1.0, yp * x, yp * y, yp];
        for j in 0..9 {
            a[(2 * i, j)] = r0[j];
            a[(2 * i + 1, j)] = r1[j];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::DegenerateInput("SVD did not converge".into()))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].partial_cmp(&sv[j]).unwrap_or(core::cmp::Ordering::Equal));
    let (smallest, second) = (order[0], order[1]);
    let largest = sv[order[sv.len() - 1]];
    if sv[second] <= 1e-10 * largest {
        return Err(Error::DegenerateInput("correspondences do not determine a unique homography".into()));
    }
    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t_to_inv = t_to
        .try_inverse()
        .ok_or_else(|| Error::DegenerateInput("normalization is singular".into()))?;
    Homography::from_matrix(from_na(&(t_to_inv * hn * t_from)))
}

/// RANSAC over minimal 4-point samples; ties keep the earliest model.
pub fn ransac_homography(pairs: &[PointPair], cfg: &RansacConfig) -> Result<RansacFit> {
    if pairs.len() < 4 {
        return Err(invalid!("need at least 4 correspondences, got {}", pairs.len()));
    }
    if !(cfg.threshold_px > 0.0) || cfg.iterations == 0 {
        return Err(invalid!("RANSAC needs a positive threshold and iteration count"));
    }
    let inliers_of = |h: &Homography| -> Vec<bool> {
        pairs
            .iter()
            .map(|p| reprojection_error(h, p) <= cfg.threshold_px)
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(usize, Vec<bool>)> = None;
    let mut sample = vec![PointPair::new([0.0; 2], [0.0; 2]); 4];
    for _ in 0..cfg.iterations {
        for (slot, i) in sample.iter_mut().zip(index::sample(&mut rng, pairs.len(), 4)) {
            *slot = pairs[i];
        }
        let Ok(h) = normalized_dlt(&sample) else { continue };
        let mask = inliers_of(&h);
        let count = mask.iter().filter(|&&b| b).count();
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            let done = count == pairs.len();
            best = Some((count, mask));
            if done {
                break;
            }
        }
    }
    let (count, mask) = best.ok_or_else(|| Error::DegenerateInput("no non-degenerate sample found".into()))?;
    if count < 4 {
        return Err(Error::DegenerateInput("consensus set has fewer than 4 points".into()));
    }
    let consensus: Vec<PointPair> = pairs.iter().zip(&mask).filter(|(_, &m)| m).map(|(p, _)| *p).collect();
    let homography = normalized_dlt(&consensus)?;
    let inliers = inliers_of(&homography);
    Ok(RansacFit { homography, inliers })
}
