//! Manifest-driven training and evaluation.

use std::fmt::Write as _;
use std::path::Path;

use foveate_core::dcnn::{
    build_network, evaluate, train_epoch_with, Dataset, EpochMetrics, Evaluation, Network, Tensor, TrainConfig,
};
use foveate_core::gaze::{ManifestEntry, Split};
use foveate_core::Image;

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::formats::TRAINING_LOG_HEADER;
use crate::png::read_png;

/// Stacks equally sized images into an `f32` batch tensor.
pub fn images_to_tensor(images: &[Image]) -> Result<Tensor<f32>> {
    let first = images
        .first()
        .ok_or_else(|| CliError::Validation("no images to stack".into()))?;
    let (rows, cols, ch) = (first.rows(), first.cols(), first.channels());
    let mut data = Vec::with_capacity(images.len() * rows * cols * ch);
    for img in images {
        if (img.rows(), img.cols(), img.channels()) != (rows, cols, ch) {
            return Err(CliError::Validation(format!(
                "image is {}x{}x{}, expected {rows}x{cols}x{ch}",
                img.rows(),
                img.cols(),
                img.channels()
            )));
        }
        data.extend(img.data().iter().map(|&v| v as f32));
    }
    Ok(Tensor::from_vec(&[images.len(), rows, cols, ch], data)?)
}

/// Loads the entries of one split; paths are relative to `base`.
pub fn load_split(base: &Path, entries: &[ManifestEntry], split: Split, classes: &[String]) -> Result<Option<Dataset<f32>>> {
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for e in entries.iter().filter(|e| e.split == split) {
        let label = classes
            .iter()
            .position(|c| *c == e.label)
            .ok_or_else(|| CliError::Validation(format!("manifest label {:?} is not a configured class", e.label)))?;
        images.push(read_png(&base.join(&e.path))?);
        labels.push(label);
    }
    if images.is_empty() {
        return Ok(None);
    }
    Ok(Some(Dataset::new(images_to_tensor(&images)?, labels, classes.len())?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub train: EpochMetrics,
    pub validation: Option<Evaluation>,
}

pub struct TrainOutcome {
    pub network: Network<f32>,
    pub epochs: Vec<EpochReport>,
    /// `epoch,step,loss,accuracy` rows.
    pub log: String,
}

/// Trains a fresh network for `cfg.epochs` epochs, stopping early once
/// `stop` returns true for an epoch report.
pub fn train_model(
    cfg: &PipelineConfig,
    train: &Dataset<f32>,
    validation: Option<&Dataset<f32>>,
    mut stop: impl FnMut(&EpochReport) -> bool,
) -> Result<TrainOutcome> {
    if cfg.network.num_classes != train.num_classes() {
        return Err(CliError::Config(format!(
            "num_classes is {} but {} classes are configured",
            cfg.network.num_classes,
            train.num_classes()
        )));
    }
    let s = train.images().shape();
    let mut network = build_network::<f32>(&cfg.network, (s[1], s[2], s[3]), cfg.seed).map_err(|e| CliError::Config(e.to_string()))?;
    let tc = TrainConfig {
        batch_size: cfg.batch_size,
        learning_rate: cfg.learning_rate,
        seed: cfg.seed,
    };
    let mut log = format!("{TRAINING_LOG_HEADER}\n");
    let mut epochs = Vec::new();
    for epoch in 0..cfg.epochs {
        let metrics = train_epoch_with(&mut network, train, &tc, epoch, |m| {
            writeln!(log, "{},{},{},{}", m.epoch, m.step, m.loss, m.accuracy).unwrap();
        })?;
        let validation = match validation {
            Some(v) => Some(evaluate(&network, v, cfg.batch_size)?),
            None => None,
        };
        let report = EpochReport {
            train: metrics,
            validation,
        };
        let done = stop(&report);
        epochs.push(report);
        if done {
            break;
        }
    }
    Ok(TrainOutcome { network, epochs, log })
}

pub fn format_evaluation(e: &Evaluation, classes: &[String]) -> String {
    let mut s = format!("accuracy {:.4}\nmacro_f1 {:.4}\n", e.accuracy, e.macro_f1);
    for (c, f1) in classes.iter().zip(&e.per_class_f1) {
        writeln!(s, "f1 {c} {f1:.4}").unwrap();
    }
    s.push_str("confusion (rows = truth)\n");
    for row in &e.confusion {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(s, "{}", cells.join(" ")).unwrap();
    }
    s
}
