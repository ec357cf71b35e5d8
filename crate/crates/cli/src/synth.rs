//! Procedural test data: class scenes, textured shapes and fixation logs.

use foveate_core::gaze::FixationRecord;
use foveate_core::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A textured scene whose pattern depends on `class_index`.
pub fn class_scene(class_index: usize, rows: usize, cols: usize, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (class_index as u64).wrapping_mul(0x9E37_79B9));
    let period = 6.0 + 3.0 * (class_index % 5) as f64;
    let angle = class_index as f64 * 0.61;
    let (s, c) = angle.sin_cos();
    let tint: [f64; 3] = [rng.random_range(0.2..0.9), rng.random_range(0.2..0.9), rng.random_range(0.2..0.9)];
    Image::from_fn(rows, cols, 3, |r, col, ch| {
        let (y, x) = (r as f64, col as f64);
        let u = (x * c + y * s) / period;
        let v = (y * c - x * s) / (period * 1.7);
        let wave = 0.5 + 0.25 * (u * std::f64::consts::TAU).sin() + 0.2 * (v * std::f64::consts::TAU).cos();
        (wave * tint[ch] + 0.05 * ch as f64).clamp(0.0, 1.0)
    })
}

/// `frame(p) = reference(p - offset)`, edges replicated.
pub fn shift_image(reference: &Image, offset: [f64; 2]) -> Image {
    let (rows, cols) = reference.dims();
    let (dr, dc) = (offset[0].round() as i64, offset[1].round() as i64);
    Image::from_fn(rows, cols, reference.channels(), |r, c, ch| {
        let sr = (r as i64 - dr).clamp(0, rows as i64 - 1) as usize;
        let sc = (c as i64 - dc).clamp(0, cols as i64 - 1) as usize;
        reference.get(sr, sc, ch)
    })
}

pub const SHAPE_CLASSES: usize = 9;

fn shape_mask(class: usize, x: f64, y: f64) -> f64 {
    // x, y in shape units, roughly [-1, 1].
    let r = (x * x + y * y).sqrt();
    let inside = |b: bool| if b { 1.0 } else { 0.0 };
    match class {
        0 => inside(r < 0.8),
        1 => inside(x.abs() < 0.7 && y.abs() < 0.7),
        2 => inside(y < 0.6 && y > -0.8 + 2.0 * x.abs() * 0.9 - 0.2 && y > -0.9),
        3 => inside(r < 0.85 && r > 0.5),
        4 => inside((x.abs() < 0.25 && y.abs() < 0.85) || (y.abs() < 0.25 && x.abs() < 0.85)),
        5 => inside(r < 0.9 && ((y + 1.0) * 3.0).floor() as i64 % 2 == 0),
        6 => inside(r < 0.9 && ((x + 1.0) * 3.0).floor() as i64 % 2 == 0),
        7 => inside(x.abs() < 0.8 && y.abs() < 0.8 && (((x + 1.0) * 2.5).floor() as i64 + ((y + 1.0) * 2.5).floor() as i64) % 2 == 0),
        _ => inside(x.abs() < 0.85 && y.abs() < 0.85 && ((x - y).abs() < 0.22 || (x + y).abs() < 0.22)),
    }
}

/// A `size`-square image of one of nine textured shapes near the center,
/// with random scale, offset, small rotation, colours and pixel noise.
pub fn textured_shape(class: usize, size: usize, rng: &mut impl Rng) -> Image {
    let half = size as f64 / 2.0;
    let scale = half * rng.random_range(0.55..0.75);
    let (dr, dc) = (rng.random_range(-0.06..0.06) * size as f64, rng.random_range(-0.06..0.06) * size as f64);
    let (s, c) = rng.random_range(-0.15f64..0.15).sin_cos();
    let bg: [f64; 3] = [rng.random_range(0.0..0.35), rng.random_range(0.0..0.35), rng.random_range(0.0..0.35)];
    let fg: [f64; 3] = [rng.random_range(0.6..1.0), rng.random_range(0.6..1.0), rng.random_range(0.6..1.0)];
    let noise: Vec<f64> = (0..size * size).map(|_| rng.random_range(-0.08..0.08)).collect();
    Image::from_fn(size, size, 3, |r, col, ch| {
        let (y0, x0) = ((r as f64 - half - dr) / scale, (col as f64 - half - dc) / scale);
        let (x, y) = (x0 * c - y0 * s, x0 * s + y0 * c);
        let m = shape_mask(class % SHAPE_CLASSES, x, y);
        (bg[ch] + m * (fg[ch] - bg[ch]) + noise[r * size + col]).clamp(0.0, 1.0)
    })
}

/// One viewing session of a scene; its frames are the reference shifted by
/// `offset` (frame = reference + offset).
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticObservation {
    pub id: String,
    pub offset: [f64; 2],
    pub image_path: String,
}

/// Gaussian-ish fixation blobs around `centers` (reference coordinates),
/// spread evenly across the observations and expressed in each
/// observation's own frame.
pub fn synthetic_fixations(
    class_label: &str,
    centers: &[[f64; 2]],
    per_center: usize,
    spread: f64,
    observations: &[SyntheticObservation],
    seed: u64,
) -> Vec<FixationRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(centers.len() * per_center);
    let mut frame = vec![0u64; observations.len()];
    for (k, center) in centers.iter().enumerate() {
        for i in 0..per_center {
            let o = (k * per_center + i) % observations.len();
            let obs = &observations[o];
            let jitter = |rng: &mut ChaCha8Rng| (rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0)) * spread / 2.0;
            let gaze = [center[0] + jitter(&mut rng) + obs.offset[0], center[1] + jitter(&mut rng) + obs.offset[1]];
            out.push(FixationRecord {
                observation_id: obs.id.clone(),
                frame_index: frame[o],
                timestamp_ms: (frame[o] * 40) as i64,
                gaze_px: gaze,
                class_label: class_label.to_string(),
                image_path: obs.image_path.clone(),
            });
            frame[o] += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_are_deterministic_and_in_range() {
        let a = textured_shape(3, 40, &mut ChaCha8Rng::seed_from_u64(1));
        let b = textured_shape(3, 40, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert!(a.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn classes_differ() {
        let imgs: Vec<Image> = (0..SHAPE_CLASSES)
            .map(|c| textured_shape(c, 48, &mut ChaCha8Rng::seed_from_u64(7)))
            .collect();
        for i in 0..SHAPE_CLASSES {
            for j in i + 1..SHAPE_CLASSES {
                assert_ne!(imgs[i], imgs[j], "{i} vs {j}");
            }
        }
    }

    #[test]
    fn shift_moves_content() {
        let img = class_scene(2, 30, 40, 0);
        let s = shift_image(&img, [3.0, 5.0]);
        assert_eq!(s.pixel(10, 10), img.pixel(7, 5));
    }

    #[test]
    fn fixations_are_offset_per_observation() {
        let obs = [
            SyntheticObservation {
                id: "a".into(),
                offset: [0.0, 0.0],
                image_path: "a.png".into(),
            },
            SyntheticObservation {
                id: "b".into(),
                offset: [10.0, -4.0],
                image_path: "b.png".into(),
            },
        ];
        let recs = synthetic_fixations("Milk", &[[50.0, 60.0]], 200, 0.0, &obs, 1);
        assert_eq!(recs.len(), 200);
        assert_eq!(recs[0].gaze_px, [50.0, 60.0]);
        assert_eq!(recs[1].gaze_px, [60.0, 56.0]);
        assert_eq!(recs[1].observation_id, "b");
    }
}
