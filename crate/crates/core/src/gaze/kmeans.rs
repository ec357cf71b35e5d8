//! Seeded k-means over 2-D fixation points.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hull::convex_hull;
use crate::error::{invalid, Result};

/// Clusters per fixation.
pub const DEFAULT_K_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub max_iterations: usize,
    /// Stop once no centroid moves farther than this (pixels).
    pub tolerance: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Vec<[f64; 2]>,
    /// Final argmin assignment against `centroids`.
    pub assignment: Vec<usize>,
    /// Sum of squared distances after every assignment step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

/// `max(1, round(k_fraction * m))`, never more than `m`.
pub fn cluster_count(m: usize, k_fraction: f64) -> usize {
    let k = libm::round(k_fraction * m as f64) as usize;
    k.max(1).min(m.max(1))
}

#[inline]
fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

/// Index of the nearest centroid, ties to the lowest index.
#[inline]
fn nearest(p: [f64; 2], centroids: &[[f64; 2]]) -> (usize, f64) {
    let mut best = (0, dist2(p, centroids[0]));
    for (j, &c) in centroids.iter().enumerate().skip(1) {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus_init(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = points.iter().map(|&p| dist2(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc >= target && d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick];
        centroids.push(c);
        for (d, &p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, c));
        }
    }
    centroids
}

/// Lloyd's algorithm from a k-means++ start.
///
/// Clusters left empty by an update are re-seeded at the point farthest from
/// its own centroid.
pub fn kmeans(points: &[[f64; 2]], k: usize, seed: u64, cfg: &KMeansConfig) -> Result<KMeans> {
    if points.is_empty() {
        return Err(invalid!("cannot cluster an empty point set"));
    }
    if k == 0 || k > points.len() {
        return Err(invalid!("k = {k} is invalid for {} points", points.len()));
    }
    if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(invalid!("points must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut assignment = vec![0usize; points.len()];
    let mut history = Vec::new();
    let mut iterations = 0;

    let assign = |centroids: &[[f64; 2]], assignment: &mut [usize]| -> f64 {
        let mut objective = 0.0;
        for (a, &p) in assignment.iter_mut().zip(points) {
            let (j, d) = nearest(p, centroids);
            *a = j;
            objective += d;
        }
        objective
    };

    while iterations < cfg.max_iterations {
        history.push(assign(&centroids, &mut assignment));
        iterations += 1;

        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (&a, &p) in assignment.iter().zip(points) {
            sums[a][0] += p[0];
            sums[a][1] += p[1];
            counts[a] += 1;
        }
        let mut next: Vec<[f64; 2]> = (0..k)
            .map(|j| {
                if counts[j] > 0 {
                    [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64]
                } else {
                    centroids[j]
                }
            })
            .collect();
        let mut taken: Vec<usize> = Vec::new();
        for j in (0..k).filter(|&j| counts[j] == 0) {
            let far = (0..points.len())
                .filter(|i| !taken.contains(i))
                .fold(None, |best: Option<(usize, f64)>, i| {
                    let d = dist2(points[i], next[assignment[i]]);
                    match best {
                        Some((_, bd)) if bd >= d => best,
                        _ => Some((i, d)),
                    }
                });
            if let Some((i, _)) = far {
                next[j] = points[i];
                taken.push(i);
            }
        }
        let movement = centroids
            .iter()
            .zip(&next)
            .map(|(&a, &b)| libm::sqrt(dist2(a, b)))
            .fold(0.0, f64::max);
        centroids = next;
        if movement < cfg.tolerance {
            break;
        }
    }
    history.push(assign(&centroids, &mut assignment));

    Ok(KMeans {
        centroids,
        assignment,
        objective_history: history,
        iterations,
    })
}

/// A group of co-referenced fixations.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationCluster {
    pub member_indices: Vec<usize>,
    /// Mean of the members, `(row, col)`.
    pub centroid_px: [f64; 2],
    pub hull_px: Vec<[f64; 2]>,
}

/// Clusters fixations with `K = max(1, round(k_fraction * M))`.
///
/// Clusters that end up without members are omitted.
pub fn cluster_fixations(points: &[[f64; 2]], k_fraction: f64, seed: u64) -> Result<Vec<FixationCluster>> {
    if points.is_empty() {
        return Err(invalid!("cannot cluster an empty fixation set"));
    }
    if !(k_fraction > 0.0 && k_fraction <= 1.0) {
        return Err(invalid!("k_fraction must lie in (0, 1], got {k_fraction}"));
    }
    let k = cluster_count(points.len(), k_fraction);
    let result = kmeans(points, k, seed, &KMeansConfig::default())?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in result.assignment.iter().enumerate() {
        members[a].push(i);
    }
    Ok(members
        .into_iter()
        .filter(|m| !m.is_empty())
        .map(|member_indices| {
            let pts: Vec<[f64; 2]> = member_indices.iter().map(|&i| points[i]).collect();
            let n = pts.len() as f64;
            let centroid_px = [
                pts.iter().map(|p| p[0]).sum::<f64>() / n,
                pts.iter().map(|p| p[1]).sum::<f64>() / n,
            ];
            FixationCluster {
                hull_px: convex_hull(&pts),
                member_indices,
                centroid_px,
            }
        })
        .collect())
}
