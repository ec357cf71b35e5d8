//! Uniform-grid bucketing of 2-D points for radius and nearest-neighbor
//! queries.

use alloc::vec;
use alloc::vec::Vec;

/// Points bucketed into square cells, stored CSR-style.
#[derive(Debug, Clone)]
pub struct PointGrid {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    starts: Vec<usize>,
    members: Vec<usize>,
}

impl PointGrid {
    /// Buckets `points` into cells of side `cell`. Points keep their index
    /// order inside each bucket, so iteration order is deterministic.
    pub fn new(points: &[[f64; 2]], cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "cell size must be positive");
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 2];
            hi = [0.0; 2];
        }
        let nx = ((hi[0] - lo[0]) / cell) as usize + 1;
        let ny = ((hi[1] - lo[1]) / cell) as usize + 1;
        let mut grid = Self {
            origin: lo,
            cell,
            nx,
            ny,
            starts: vec![0; nx * ny + 1],
            members: vec![0; points.len()],
        };
        let cells: Vec<usize> = points
            .iter()
            .map(|p| {
                let (ix, iy) = grid.cell_of(p);
                iy * nx + ix
            })
            .collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for i in 0..nx * ny {
            grid.starts[i + 1] += grid.starts[i];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.members[fill[c]] = i;
            fill[c] += 1;
        }
        grid
    }

    #[inline]
    fn cell_of(&self, p: &[f64; 2]) -> (usize, usize) {
        let ix = ((p[0] - self.origin[0]) / self.cell) as usize;
        let iy = ((p[1] - self.origin[1]) / self.cell) as usize;
        (ix.min(self.nx - 1), iy.min(self.ny - 1))
    }

    #[inline]
    fn bucket(&self, ix: usize, iy: usize) -> &[usize] {
        let c = iy * self.nx + ix;
        &self.members[self.starts[c]..self.starts[c + 1]]
    }

    /// Calls `f(index, squared_distance)` for every point within `radius`
    /// of `q` (inclusive), visiting buckets in row-major order.
    pub fn for_each_within(
        &self,
        points: &[[f64; 2]],
        q: [f64; 2],
        radius: f64,
        mut f: impl FnMut(usize, f64),
    ) {
        let r2 = radius * radius;
        let lo_x = libm::floor((q[0] - radius - self.origin[0]) / self.cell);
        let hi_x = libm::floor((q[0] + radius - self.origin[0]) / self.cell);
        let lo_y = libm::floor((q[1] - radius - self.origin[1]) / self.cell);
        let hi_y = libm::floor((q[1] + radius - self.origin[1]) / self.cell);
        if hi_x < 0.0 || hi_y < 0.0 || lo_x >= self.nx as f64 || lo_y >= self.ny as f64 {
            return;
        }
        let x0 = lo_x.max(0.0) as usize;
        let y0 = lo_y.max(0.0) as usize;
        let x1 = (hi_x as usize).min(self.nx - 1);
        let y1 = (hi_y as usize).min(self.ny - 1);
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                for &i in self.bucket(ix, iy) {
                    let dx = points[i][0] - q[0];
                    let dy = points[i][1] - q[1];
                    let d2 = dx * dx + dy * dy;
                    if d2 <= r2 {
                        f(i, d2);
                    }
                }
            }
        }
    }
}

/// Distance from every point to its nearest distinct-index neighbor.
///
/// Returns `f64::INFINITY` for a lone point.
pub fn nearest_neighbor_distances(points: &[[f64; 2]]) -> Vec<f64> {
    let n = points.len();
    if n < 2 {
        return vec![f64::INFINITY; n];
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let area = ((hi[0] - lo[0]) * (hi[1] - lo[1])).max(extent * extent / n as f64);
    let cell = libm::sqrt(area / n as f64).max(extent * 1e-9);
    let grid = PointGrid::new(points, cell);
    let max_ring = grid.nx.max(grid.ny);

    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (cx, cy) = grid.cell_of(p);
            let mut best2 = f64::INFINITY;
            for ring in 0..=max_ring {
                visit_ring(&grid, cx, cy, ring, |j| {
                    if j != i {
                        let dx = points[j][0] - p[0];
                        let dy = points[j][1] - p[1];
                        best2 = best2.min(dx * dx + dy * dy);
                    }
                });
                // Anything in ring + 1 is at least `ring` cells away.
                let bound = ring as f64 * cell;
                if best2 <= bound * bound {
                    break;
                }
            }
            libm::sqrt(best2)
        })
        .collect()
}

fn visit_ring(grid: &PointGrid, cx: usize, cy: usize, ring: usize, mut f: impl FnMut(usize)) {
    let (cx, cy, r) = (cx as isize, cy as isize, ring as isize);
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    for iy in (cy - r)..=(cy + r) {
        if iy < 0 || iy >= ny {
            continue;
        }
        let on_edge_row = iy == cy - r || iy == cy + r;
        let mut ix = cx - r;
        while ix <= cx + r {
            if ix >= 0 && ix < nx {
                for &j in grid.bucket(ix as usize, iy as usize) {
                    f(j);
                }
            }
            ix += if on_edge_row || r == 0 { 1 } else { 2 * r };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_nn(points: &[[f64; 2]]) -> Vec<f64> {
        (0..points.len())
            .map(|i| {
                let mut best = f64::INFINITY;
                for j in 0..points.len() {
                    if i != j {
                        let dx = points[i][0] - points[j][0];
                        let dy = points[i][1] - points[j][1];
                        best = best.min((dx * dx + dy * dy).sqrt());
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn nearest_neighbor_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 17, 400] {
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| {
                    // clustered + sparse mix
                    let s = if rng.random_bool(0.5) { 0.01 } else { 1.0 };
                    [rng.random_range(-s..s), rng.random_range(-s..s)]
                })
                .collect();
            assert_eq!(nearest_neighbor_distances(&pts), brute_nn(&pts));
        }
    }

    #[test]
    fn radius_query_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f64; 2]> = (0..300)
            .map(|_| [rng.random_range(0.0..50.0), rng.random_range(0.0..20.0)])
            .collect();
        let grid = PointGrid::new(&pts, 2.5);
        for _ in 0..50 {
            let q = [rng.random_range(-5.0..55.0), rng.random_range(-5.0..25.0)];
            let mut got = Vec::new();
            grid.for_each_within(&pts, q, 3.0, |i, _| got.push(i));
            got.sort_unstable();
            let want: Vec<usize> = (0..pts.len())
                .filter(|&i| {
                    let dx = pts[i][0] - q[0];
                    let dy = pts[i][1] - q[1];
                    dx * dx + dy * dy <= 9.0
                })
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn lone_point_has_infinite_distance() {
        assert_eq!(nearest_neighbor_distances(&[[0.0, 0.0]]), vec![f64::INFINITY]);
    }
}
