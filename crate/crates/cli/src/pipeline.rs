//! The four-stage pipeline: fixations to clusters to crops to cortical
//! images, plus the dataset manifest.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use foveate_core::cortex::{grid_cortical_image, splat_cortical_image, subsample_cortical, CorticalImage, CorticalMap};
use foveate_core::gaze::{
    cluster_fixations, composite_fixations, extract_crop, place_retina, split_dataset, CompositeMode, CropRect,
    DatasetManifest, FixationCluster, FixationRecord, Homography, LabeledItem,
};
use foveate_core::retina::{compute_receptive_fields, sample, ImageVector, ReceptiveFields, Tessellation};
use foveate_core::Image;
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::formats::{
    parse_fixation_log, parse_homographies, write_bytes, write_cortical_weights, write_image_vector, write_manifest,
};
use crate::png::{read_png, write_png};

pub const THREADS_ENV: &str = "FOVEATE_THREADS";

/// Retina, receptive fields and cortical map for a fixed crop geometry,
/// built once and shared by every crop.
#[derive(Debug, Clone)]
pub struct RetinaStage {
    pub tessellation: Tessellation,
    pub fields: ReceptiveFields,
    pub map: CorticalMap,
    pub sigma_grid: f64,
    pub grid_dims: Option<(usize, usize)>,
    pub subsample_factor: Option<usize>,
}

impl RetinaStage {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        let tess = Tessellation::generate(cfg.node_count, cfg.fovea_radius)?;
        Self::with_tessellation(cfg, tess)
    }

    pub fn with_tessellation(cfg: &PipelineConfig, tessellation: Tessellation) -> Result<Self> {
        let center = crop_center(cfg.crop_size);
        let fields = compute_receptive_fields(
            &tessellation,
            cfg.retina_radius_px,
            (cfg.crop_size, cfg.crop_size),
            [center, center],
        )?;
        let map = CorticalMap::new(&tessellation, cfg.alpha, cfg.cortical_dims)?;
        Ok(Self {
            tessellation,
            fields,
            map,
            sigma_grid: cfg.sigma_grid,
            grid_dims: cfg.grid_dims,
            subsample_factor: cfg.subsample_factor,
        })
    }

    pub fn sample(&self, crop: &Image) -> Result<ImageVector> {
        Ok(sample(crop, &self.fields)?)
    }

    /// Splat (or grid) onto the cortical grid, then subsample if configured.
    pub fn cortical(&self, iv: &ImageVector) -> Result<CorticalImage> {
        let img = match self.grid_dims {
            Some(dims) => grid_cortical_image(iv, &self.map, self.sigma_grid, dims)?,
            None => splat_cortical_image(iv, &self.map, self.sigma_grid)?,
        };
        Ok(match self.subsample_factor {
            Some(f) if f > 1 => subsample_cortical(&img, f)?,
            _ => img,
        })
    }
}

/// Fixation pixel inside a square crop of side `crop_size`.
pub fn crop_center(crop_size: usize) -> f64 {
    (crop_size / 2) as f64
}

/// One processed cluster and the files written for it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterArtifact {
    pub class: String,
    pub index: usize,
    pub members: usize,
    /// Centroid in the reference frame.
    pub centroid_px: [f64; 2],
    pub source_image: String,
    pub rect: CropRect,
    pub hull_outside_retina: bool,
    /// Paths relative to the output directory.
    pub cortical_path: String,
    pub vector_path: String,
    pub weights_path: String,
    pub crop_path: Option<String>,
}

#[derive(Debug)]
pub struct PipelineReport {
    pub manifest: DatasetManifest,
    pub clusters: Vec<ClusterArtifact>,
    /// Clusters found per class, including ones whose later stages failed.
    pub cluster_counts: BTreeMap<String, usize>,
    pub failures: Vec<CliError>,
}

impl PipelineReport {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

pub struct PipelineInputs<'a> {
    pub fixation_logs: &'a [PathBuf],
    pub homographies: Option<&'a Path>,
    pub image_dir: &'a Path,
    pub out_dir: &'a Path,
}

/// Thread count from `FOVEATE_THREADS`; 0 or unset lets rayon decide.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))),
        _ => Ok(0),
    }
}

pub fn run_pipeline(cfg: &PipelineConfig, inputs: &PipelineInputs<'_>) -> Result<PipelineReport> {
    cfg.validate()?;
    let mut records = Vec::new();
    for log in inputs.fixation_logs {
        records.extend(parse_fixation_log(log, Some(&cfg.classes))?);
    }
    let homographies = match inputs.homographies {
        Some(p) => parse_homographies(p)?,
        None => BTreeMap::new(),
    };
    let stage = RetinaStage::new(cfg)?;

    let by_class: Vec<(String, Vec<FixationRecord>)> = cfg
        .classes
        .iter()
        .map(|c| (c.clone(), records.iter().filter(|r| r.class_label == *c).cloned().collect::<Vec<_>>()))
        .filter(|(_, recs)| !recs.is_empty())
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))?;
    let outcomes: Vec<ClassOutcome> = pool.install(|| {
        by_class
            .par_iter()
            .enumerate()
            .map(|(i, (class, recs))| run_class(cfg, &stage, &homographies, inputs, class, recs, i))
            .collect()
    });

    let mut clusters = Vec::new();
    let mut failures = Vec::new();
    let mut cluster_counts = BTreeMap::new();
    for o in outcomes {
        cluster_counts.insert(o.class.clone(), o.cluster_count);
        clusters.extend(o.artifacts);
        failures.extend(o.failures);
    }
    let items: Vec<LabeledItem> = clusters
        .iter()
        .map(|a| LabeledItem::new(a.cortical_path.clone(), a.class.clone()))
        .collect();
    let manifest = if items.is_empty() {
        DatasetManifest {
            classes: Vec::new(),
            entries: Vec::new(),
            fractions: cfg.split_fractions,
            seed: cfg.seed,
        }
    } else {
        split_dataset(&items, cfg.split_fractions, cfg.seed)?
    };
    write_manifest(&inputs.out_dir.join("manifest.csv"), &manifest)?;
    write_bytes(&inputs.out_dir.join("clusters.csv"), clusters_csv(&clusters).as_bytes())?;
    Ok(PipelineReport {
        manifest,
        clusters,
        cluster_counts,
        failures,
    })
}

pub fn clusters_csv(clusters: &[ClusterArtifact]) -> String {
    let mut s = String::from(
        "class,cluster,members,centroid_row,centroid_col,source_image,crop_row0,crop_col0,hull_outside_retina,path\n",
    );
    for a in clusters {
        writeln!(
            s,
            "{},{},{},{:.3},{:.3},{},{},{},{},{}",
            a.class,
            a.index,
            a.members,
            a.centroid_px[0],
            a.centroid_px[1],
            a.source_image,
            a.rect.row0,
            a.rect.col0,
            a.hull_outside_retina,
            a.cortical_path
        )
        .unwrap();
    }
    s
}

struct ClassOutcome {
    class: String,
    cluster_count: usize,
    artifacts: Vec<ClusterArtifact>,
    failures: Vec<CliError>,
}

fn run_class(
    cfg: &PipelineConfig,
    stage: &RetinaStage,
    homographies: &BTreeMap<String, Homography>,
    inputs: &PipelineInputs<'_>,
    class: &str,
    records: &[FixationRecord],
    class_index: usize,
) -> ClassOutcome {
    let mut outcome = ClassOutcome {
        class: class.to_string(),
        cluster_count: 0,
        artifacts: Vec::new(),
        failures: Vec::new(),
    };
    let mode = if cfg.strict_homographies {
        CompositeMode::Strict
    } else {
        CompositeMode::HeadStabilized
    };
    let points = match composite_fixations(records, homographies, mode) {
        Ok(p) => p,
        Err(e) => {
            outcome.failures.push(CliError::from(e).at_stage("composite", class, None));
            return outcome;
        }
    };
    let seed = cfg.seed.wrapping_add(class_index as u64);
    let clusters = match cluster_fixations(&points, cfg.k_fraction, seed) {
        Ok(c) => c,
        Err(e) => {
            outcome.failures.push(CliError::from(e).at_stage("cluster", class, None));
            return outcome;
        }
    };
    outcome.cluster_count = clusters.len();
    let mut images: HashMap<String, Arc<Image>> = HashMap::new();
    for (j, cluster) in clusters.iter().enumerate() {
        match process_cluster(cfg, stage, homographies, inputs, class, records, &points, cluster, j, &mut images) {
            Ok(a) => outcome.artifacts.push(a),
            Err(e) => outcome.failures.push(e),
        }
    }
    outcome
}

#[allow(clippy::too_many_arguments)]
fn process_cluster(
    cfg: &PipelineConfig,
    stage: &RetinaStage,
    homographies: &BTreeMap<String, Homography>,
    inputs: &PipelineInputs<'_>,
    class: &str,
    records: &[FixationRecord],
    points: &[[f64; 2]],
    cluster: &FixationCluster,
    j: usize,
    images: &mut HashMap<String, Arc<Image>>,
) -> Result<ClusterArtifact> {
    let fail = |stage: &'static str| move |e: CliError| e.at_stage(stage, class, Some(j));

    // The crop comes from the frame of the member nearest the centroid, with
    // the cluster mapped back from the reference frame into that frame.
    let dist = |i: usize| {
        let p = points[i];
        (p[0] - cluster.centroid_px[0]).hypot(p[1] - cluster.centroid_px[1])
    };
    let nearest = cluster
        .member_indices
        .iter()
        .copied()
        .fold(None, |best: Option<usize>, i| match best {
            Some(b) if dist(b) <= dist(i) => Some(b),
            _ => Some(i),
        })
        .expect("clusters are nonempty");
    let source = &records[nearest];
    let to_frame = match homographies.get(&source.observation_id) {
        Some(h) => h.inverse().map_err(|e| fail("crop")(e.into()))?,
        None => Homography::identity(),
    };
    let map_point = |p: [f64; 2]| to_frame.apply(p).map_err(|e| fail("crop")(e.into()));
    let local = FixationCluster {
        member_indices: cluster.member_indices.clone(),
        centroid_px: map_point(cluster.centroid_px)?,
        hull_px: cluster.hull_px.iter().map(|&p| map_point(p)).collect::<Result<_>>()?,
    };

    let image = match images.get(&source.image_path) {
        Some(img) => img.clone(),
        None => {
            let img = Arc::new(read_png(&inputs.image_dir.join(&source.image_path)).map_err(fail("load"))?);
            images.insert(source.image_path.clone(), img.clone());
            img
        }
    };
    let placement = place_retina(&local, image.dims(), cfg.crop_size, cfg.allow_padding).map_err(|e| fail("crop")(e.into()))?;
    let crop = extract_crop(&image, &placement.rect, cfg.allow_padding).map_err(|e| fail("crop")(e.into()))?;
    let iv = stage.sample(&crop).map_err(fail("sample"))?;
    let cortical = stage.cortical(&iv).map_err(fail("cortical"))?;

    let stem = format!("{class}/cluster_{j:03}");
    let rel = |ext: &str| format!("{stem}{ext}");
    let out = |p: &str| inputs.out_dir.join(p);
    let crop_path = if cfg.write_crops {
        let p = rel(".crop.png");
        write_png(&out(&p), &crop).map_err(fail("write"))?;
        Some(p)
    } else {
        None
    };
    let (cortical_path, vector_path, weights_path) = (rel(".png"), rel(".iv"), rel(".w"));
    write_png(&out(&cortical_path), &cortical.pixels).map_err(fail("write"))?;
    write_image_vector(&out(&vector_path), &iv).map_err(fail("write"))?;
    write_cortical_weights(&out(&weights_path), &cortical).map_err(fail("write"))?;

    Ok(ClusterArtifact {
        class: class.to_string(),
        index: j,
        members: cluster.member_indices.len(),
        centroid_px: cluster.centroid_px,
        source_image: source.image_path.clone(),
        rect: placement.rect,
        hull_outside_retina: placement.hull_outside_retina,
        cortical_path,
        vector_path,
        weights_path,
        crop_path,
    })
}
