use std::collections::BTreeMap;

use foveate_core::cortex::{grid_cortical_image, splat_cortical_image, subsample_cortical, CorticalMap};
use foveate_core::dcnn::{build_network, NetworkSpec, Tensor};
use foveate_core::gaze::{
    cluster_fixations, composite_fixations, extract_crop, place_retina, CompositeMode, FixationRecord, Homography,
};
use foveate_core::retina::{compute_receptive_fields, sample, Tessellation};
use foveate_core::Image;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // A flat crop stays flat through retina, cortex and pooling.
    #[test]
    fn constant_crop_stays_constant(nodes in 50usize..1500, level in 0.0f64..1.0, sigma in 0.5f64..2.0) {
        let tess = Tessellation::generate(nodes, 0.1).unwrap();
        let fields = compute_receptive_fields(&tess, 30.0, (61, 61), [30.0, 30.0]).unwrap();
        let iv = sample(&Image::filled(61, 61, 3, level), &fields).unwrap();
        let map = CorticalMap::new(&tess, 0.05, (40, 76)).unwrap();
        let splat = splat_cortical_image(&iv, &map, sigma).unwrap();
        let grid = grid_cortical_image(&iv, &map, sigma, (31, 57)).unwrap();
        let pooled = subsample_cortical(&splat, 2).unwrap();
        for img in [&splat, &grid, &pooled] {
            let (rows, cols) = img.dims();
            for r in 0..rows {
                for c in 0..cols {
                    if img.is_covered(r, c) {
                        for &v in img.pixels.pixel(r, c) {
                            prop_assert!((v - level).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }
}

fn record(obs: &str, p: [f64; 2]) -> FixationRecord {
    FixationRecord {
        observation_id: obs.to_string(),
        frame_index: 0,
        timestamp_ms: 0,
        gaze_px: p,
        class_label: "Milk".to_string(),
        image_path: format!("{obs}.png"),
    }
}

#[test]
fn registered_fixations_land_on_one_crop() {
    // The second observation's frame is the reference shifted by (15, -20).
    let mut records = Vec::new();
    for i in 0..60 {
        let jitter = [(i % 7) as f64 - 3.0, (i % 5) as f64 - 2.0];
        records.push(record("ref", [100.0 + jitter[0], 140.0 + jitter[1]]));
        records.push(record("moved", [115.0 + jitter[0], 120.0 + jitter[1]]));
    }
    let mut hs = BTreeMap::new();
    hs.insert("moved".to_string(), Homography::translation(-15.0, 20.0));
    let points = composite_fixations(&records, &hs, CompositeMode::HeadStabilized).unwrap();
    let clusters = cluster_fixations(&points, 0.01, 1).unwrap();
    assert_eq!(clusters.len(), 1);
    let c = &clusters[0];
    assert_eq!(c.member_indices.len(), 120);
    let reference: Vec<[f64; 2]> = records.iter().step_by(2).map(|r| r.gaze_px).collect();
    let mean = |k: usize| reference.iter().map(|p| p[k]).sum::<f64>() / reference.len() as f64;
    assert!((c.centroid_px[0] - mean(0)).abs() < 1e-9 && (c.centroid_px[1] - mean(1)).abs() < 1e-9);

    let scene = Image::from_fn(240, 300, 1, |r, col, _| (r * 1000 + col) as f64);
    let placement = place_retina(c, scene.dims(), 64, false).unwrap();
    assert!(!placement.hull_outside_retina);
    let crop = extract_crop(&scene, &placement.rect, false).unwrap();
    let (r, col) = (c.centroid_px[0].round() as usize, c.centroid_px[1].round() as usize);
    assert_eq!(crop.get(32, 32, 0), scene.get(r, col, 0));
}

#[test]
fn cortical_image_feeds_the_classifier() {
    let tess = Tessellation::generate(800, 0.1).unwrap();
    let fields = compute_receptive_fields(&tess, 24.0, (48, 48), [24.0, 24.0]).unwrap();
    let img = Image::from_fn(48, 48, 3, |r, c, ch| ((r + c + ch) % 5) as f64 / 4.0);
    let cortical = splat_cortical_image(&sample(&img, &fields).unwrap(), &CorticalMap::new(&tess, 0.05, (32, 60)).unwrap(), 1.0).unwrap();
    let spec = NetworkSpec {
        conv_filters: vec![4, 4],
        fc_widths: vec![8],
        num_classes: 9,
        ..NetworkSpec::default()
    };
    let net = build_network::<f64>(&spec, (32, 60, 3), 0).unwrap();
    let x = Tensor::from_vec(&[1, 32, 60, 3], cortical.pixels.data().to_vec()).unwrap();
    let probs = net.predict(&x).unwrap();
    assert_eq!(probs.shape(), &[1, 9]);
    assert!((probs.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}
