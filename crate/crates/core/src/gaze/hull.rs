//! Andrew's monotone-chain convex hull.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[inline]
fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Hull vertices in counter-clockwise order of the `(row, col)` plane, with
/// collinear boundary points dropped. Duplicates collapse; a collinear set
/// yields its two extreme points.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap_or(Ordering::Equal)
            .then(a[1].partial_cmp(&b[1]).unwrap_or(Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }

    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Smallest signed distance from `p` to the hull's edges; non-negative
/// inside. Degenerate hulls (fewer than 3 vertices) report the distance to
/// the point or segment, negated.
pub fn hull_signed_distance(hull: &[[f64; 2]], p: [f64; 2]) -> f64 {
    match hull.len() {
        0 => f64::NEG_INFINITY,
        1 => -libm::hypot(p[0] - hull[0][0], p[1] - hull[0][1]),
        2 => -segment_distance(hull[0], hull[1], p),
        n => (0..n)
            .map(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                cross(a, b, p) / libm::hypot(b[0] - a[0], b[1] - a[1])
            })
            .fold(f64::INFINITY, f64::min),
    }
}

fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    libm::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_with_center() {
        let h = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]);
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        for w in 0..4 {
            assert!(cross(h[w], h[(w + 1) % 4], h[(w + 2) % 4]) > 0.0);
        }
    }

    #[test]
    fn triangle() {
        let h = convex_hull(&[[2.0, 1.0], [0.0, 0.0], [0.0, 3.0]]);
        assert_eq!(h.len(), 3);
        assert!(h.contains(&[2.0, 1.0]) && h.contains(&[0.0, 0.0]) && h.contains(&[0.0, 3.0]));
    }

    #[test]
    fn collinear_gives_extremes() {
        let h = convex_hull(&[[1.0, 1.0], [3.0, 3.0], [0.0, 0.0], [2.0, 2.0]]);
        assert_eq!(h, vec![[0.0, 0.0], [3.0, 3.0]]);
        assert_eq!(convex_hull(&[[4.0, 4.0], [4.0, 4.0]]), vec![[4.0, 4.0]]);
    }

    #[test]
    fn collinear_edge_points_are_dropped() {
        let h = convex_hull(&[[0.0, 0.0], [0.0, 1.0], [0.0, 2.0], [2.0, 2.0], [2.0, 0.0], [1.0, 0.0]]);
        assert_eq!(h.len(), 4);
    }

    proptest! {
        #[test]
        fn hull_contains_every_point(pts in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..80)) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
            let h = convex_hull(&pts);
            for v in &h {
                prop_assert!(pts.contains(v));
            }
            if h.len() >= 3 {
                for i in 0..h.len() {
                    let n = h.len();
                    prop_assert!(cross(h[i], h[(i + 1) % n], h[(i + 2) % n]) > 0.0);
                }
                for &p in &pts {
                    prop_assert!(hull_signed_distance(&h, p) >= -1e-9);
                }
            }
        }
    }
}
