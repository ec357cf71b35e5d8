//! Fixation processing: co-registration of observations, fixation
//! clustering, retina placement, crop extraction and dataset splits.

mod crop;
mod homography;
mod hull;
mod kmeans;
mod split;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use crop::{extract_crop, place_retina, CropRect, RetinaPlacement, DEFAULT_CROP_SIZE};
pub use homography::{
    apply_homography, estimate_homography, ransac_homography, reprojection_error, Homography, PointPair,
    RansacConfig, RansacFit,
};
pub use hull::{convex_hull, hull_signed_distance};
pub use kmeans::{cluster_count, cluster_fixations, kmeans, FixationCluster, KMeans, KMeansConfig, DEFAULT_K_FRACTION};
pub use split::{
    split_counts, split_dataset, DatasetManifest, LabeledItem, ManifestEntry, Split, DEFAULT_CLASSES,
    DEFAULT_SPLIT_FRACTIONS,
};

/// One fixation as reported by the eye tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct FixationRecord {
    pub observation_id: String,
    pub frame_index: u64,
    pub timestamp_ms: i64,
    /// `(row, col)` in the frame's pixel coordinates.
    pub gaze_px: [f64; 2],
    pub class_label: String,
    pub image_path: String,
}

/// How observations without a homography are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompositeMode {
    /// Missing homographies mean the head was held still: use the identity.
    #[default]
    HeadStabilized,
    /// Every observation must have an explicit homography.
    Strict,
}

/// Maps every gaze point into the reference frame, preserving order.
pub fn composite_fixations(
    records: &[FixationRecord],
    homographies: &BTreeMap<String, Homography>,
    mode: CompositeMode,
) -> Result<Vec<[f64; 2]>> {
    records
        .iter()
        .map(|rec| match homographies.get(&rec.observation_id) {
            Some(h) => h.apply(rec.gaze_px),
            None if mode == CompositeMode::HeadStabilized => Ok(rec.gaze_px),
            None => Err(Error::Validation(alloc::format!(
                "no homography for observation {}",
                rec.observation_id
            ))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn rec(obs: &str, p: [f64; 2]) -> FixationRecord {
        FixationRecord {
            observation_id: obs.to_string(),
            frame_index: 0,
            timestamp_ms: 0,
            gaze_px: p,
            class_label: "Milk".to_string(),
            image_path: "x.png".to_string(),
        }
    }

    #[test]
    fn composite_identity_and_translation() {
        let records = [rec("a", [1.0, 2.0]), rec("b", [3.0, 4.0]), rec("a", [5.0, 6.0])];
        let none = BTreeMap::new();
        let out = composite_fixations(&records, &none, CompositeMode::HeadStabilized).unwrap();
        assert_eq!(out, vec![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);

        let mut hs = BTreeMap::new();
        hs.insert("b".to_string(), Homography::translation(5.0, 10.0));
        let out = composite_fixations(&records, &hs, CompositeMode::HeadStabilized).unwrap();
        assert_eq!(out, vec![[1.0, 2.0], [8.0, 14.0], [5.0, 6.0]]);

        let err = composite_fixations(&records, &hs, CompositeMode::Strict).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
