use alloc::vec;
use alloc::vec::Vec;

use super::train::argmax;
use super::{Dataset, Network, Real};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Unweighted mean of the per-class F1 scores.
    pub macro_f1: f64,
    pub per_class_f1: Vec<f64>,
    /// `confusion[truth][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

/// Accuracy, confusion matrix and F1 scores.
///
/// A class with no true and no predicted members scores F1 = 0 and still
/// counts toward the macro average.
pub fn metrics_from_predictions(truth: &[usize], predicted: &[usize], num_classes: usize) -> Result<Evaluation> {
    if truth.len() != predicted.len() {
        return Err(invalid!("{} labels but {} predictions", truth.len(), predicted.len()));
    }
    if truth.is_empty() || num_classes == 0 {
        return Err(invalid!("nothing to evaluate"));
    }
    let mut confusion = vec![vec![0usize; num_classes]; num_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= num_classes || p >= num_classes {
            return Err(invalid!("label out of range for {num_classes} classes"));
        }
        confusion[t][p] += 1;
    }
    let correct: usize = (0..num_classes).map(|c| confusion[c][c]).sum();
    let per_class_f1: Vec<f64> = (0..num_classes)
        .map(|c| {
            let tp = confusion[c][c] as f64;
            let actual: usize = confusion[c].iter().sum();
            let pred: usize = confusion.iter().map(|row| row[c]).sum();
            let denom = (actual + pred) as f64;
            if denom == 0.0 {
                0.0
            } else {
                2.0 * tp / denom
            }
        })
        .collect();
    Ok(Evaluation {
        accuracy: correct as f64 / truth.len() as f64,
        macro_f1: per_class_f1.iter().sum::<f64>() / num_classes as f64,
        per_class_f1,
        confusion,
    })
}

/// Inference-mode predictions over a dataset, `batch_size` at a time.
pub fn predict_labels<T: Real>(net: &Network<T>, data: &Dataset<T>, batch_size: usize) -> Result<Vec<usize>> {
    if batch_size == 0 {
        return Err(invalid!("batch size must be positive"));
    }
    let mut predicted = Vec::with_capacity(data.len());
    let all: Vec<usize> = (0..data.len()).collect();
    for chunk in all.chunks(batch_size) {
        let (x, _) = data.gather(chunk);
        let probs = net.predict(&x)?;
        predicted.extend((0..chunk.len()).map(|b| argmax(probs.item(b))));
    }
    Ok(predicted)
}

pub fn evaluate<T: Real>(net: &Network<T>, data: &Dataset<T>, batch_size: usize) -> Result<Evaluation> {
    let predicted = predict_labels(net, data, batch_size)?;
    metrics_from_predictions(data.labels(), &predicted, data.num_classes())
}
