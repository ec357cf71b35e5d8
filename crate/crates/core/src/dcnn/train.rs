use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Gradients, Network, Real, Tensor};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 16,
            learning_rate: 0.01,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Full mini-batches per epoch; a trailing partial batch is dropped.
    pub fn steps_per_epoch(&self, examples: usize) -> usize {
        if self.batch_size == 0 {
            0
        } else {
            examples / self.batch_size
        }
    }
}

/// Labelled images `[N, H, W, C]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    images: Tensor<T>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl<T: Real> Dataset<T> {
    pub fn new(images: Tensor<T>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if images.shape().len() != 4 {
            return Err(invalid!("images must be [N, H, W, C], got {:?}", images.shape()));
        }
        if images.batch() != labels.len() {
            return Err(invalid!("{} images but {} labels", images.batch(), labels.len()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(invalid!("label {bad} out of range for {num_classes} classes"));
        }
        Ok(Self {
            images,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn images(&self) -> &Tensor<T> {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Images and one-hot labels for the given example indices.
    pub fn gather(&self, indices: &[usize]) -> (Tensor<T>, Tensor<T>) {
        let s = self.images.shape();
        let mut data = Vec::with_capacity(indices.len() * self.images.item(0).len());
        let mut onehot = Tensor::zeros(&[indices.len(), self.num_classes]);
        for (b, &i) in indices.iter().enumerate() {
            data.extend_from_slice(self.images.item(i));
            onehot.data_mut()[b * self.num_classes + self.labels[i]] = T::one();
        }
        let images = Tensor::from_vec(&[indices.len(), s[1], s[2], s[3]], data).expect("gathered shape");
        (images, onehot)
    }
}

/// Plain gradient descent: `p -= lr * g`.
pub fn sgd_step<T: Real>(net: &mut Network<T>, grads: &Gradients<T>, learning_rate: f64) -> Result<()> {
    let lr = T::from_f64(learning_rate);
    let g = grads.tensors();
    let mut params = net.parameters_mut();
    if g.len() != params.len() || params.iter().zip(&g).any(|(p, g)| p.len() != g.len()) {
        return Err(invalid!("gradients do not match the network parameters"));
    }
    for (p, g) in params.iter_mut().zip(g) {
        for (p, &g) in p.iter_mut().zip(g) {
            *p = *p - lr * g;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMetrics {
    pub epoch: usize,
    pub step: usize,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub steps: usize,
    /// Mean mini-batch loss.
    pub loss: f64,
    /// Training accuracy over the examples seen this epoch.
    pub accuracy: f64,
}

/// One shuffled pass over `data`.
pub fn train_epoch<T: Real>(net: &mut Network<T>, data: &Dataset<T>, cfg: &TrainConfig, epoch: usize) -> Result<EpochMetrics> {
    train_epoch_with(net, data, cfg, epoch, |_| {})
}

/// Like [`train_epoch`], calling `on_step` after every update.
pub fn train_epoch_with<T: Real>(
    net: &mut Network<T>,
    data: &Dataset<T>,
    cfg: &TrainConfig,
    epoch: usize,
    mut on_step: impl FnMut(&StepMetrics),
) -> Result<EpochMetrics> {
    if cfg.batch_size == 0 || cfg.batch_size > data.len() {
        return Err(invalid!("batch size {} does not fit {} examples", cfg.batch_size, data.len()));
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0) {
        return Err(invalid!("learning rate must be positive"));
    }
    if data.num_classes() != net.spec().num_classes {
        return Err(invalid!(
            "dataset has {} classes, network {}",
            data.num_classes(),
            net.spec().num_classes
        ));
    }
    let epoch_seed = cfg.seed.wrapping_add((epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(epoch_seed));
    net.reseed_dropout(epoch_seed ^ 0x5851_F42D_4C95_7F2D);

    let steps = cfg.steps_per_epoch(data.len());
    let (mut loss_sum, mut correct) = (0.0, 0usize);
    for step in 0..steps {
        let idx = &order[step * cfg.batch_size..(step + 1) * cfg.batch_size];
        let (x, y) = data.gather(idx);
        let (probs, cache) = net.forward(&x, true)?;
        let (loss, grads) = net.backward(&cache, &y)?;
        let loss = loss.to_f64();
        if !loss.is_finite() {
            return Err(crate::Error::Validation(alloc::format!("loss diverged at epoch {epoch} step {step}")));
        }
        sgd_step(net, &grads, cfg.learning_rate)?;
        let hits = idx
            .iter()
            .enumerate()
            .filter(|&(b, &i)| argmax(probs.item(b)) == data.labels()[i])
            .count();
        correct += hits;
        loss_sum += loss;
        on_step(&StepMetrics {
            epoch,
            step,
            loss,
            accuracy: hits as f64 / idx.len() as f64,
        });
    }
    Ok(EpochMetrics {
        epoch,
        steps,
        loss: loss_sum / steps as f64,
        accuracy: correct as f64 / (steps * cfg.batch_size) as f64,
    })
}

/// Index of the largest value, ties to the lowest index.
pub(super) fn argmax<T: Real>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcnn::{build_network, NetworkSpec};
    use alloc::vec;

    #[test]
    fn steps_per_epoch_examples() {
        let cfg = |b| TrainConfig {
            batch_size: b,
            ..TrainConfig::default()
        };
        assert_eq!(cfg(16).steps_per_epoch(19_485), 1_217);
        assert_eq!(cfg(64).steps_per_epoch(21_310), 332);
        assert_eq!(cfg(64).steps_per_epoch(64), 1);
    }

    fn small() -> (Network<f64>, Dataset<f64>) {
        let spec = NetworkSpec {
            conv_filters: vec![2],
            fc_widths: vec![4],
            num_classes: 2,
            dropout_rate: 0.0,
            ..NetworkSpec::default()
        };
        let net = build_network(&spec, (4, 4, 1), 2).unwrap();
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for i in 0..8 {
            let l = i % 2;
            labels.push(l);
            data.extend((0..16).map(|p| if (p % 4 < 2) == (l == 0) { 1.0 } else { 0.0 }));
        }
        let ds = Dataset::new(Tensor::from_vec(&[8, 4, 4, 1], data).unwrap(), labels, 2).unwrap();
        (net, ds)
    }

    #[test]
    fn sgd_step_subtracts_scaled_gradient() {
        let (mut net, ds) = small();
        let before: Vec<Vec<f64>> = net.parameters().iter().map(|p| p.to_vec()).collect();
        let (x, y) = ds.gather(&[0, 1, 2]);
        let (_, grads) = net.loss_and_backward(&x, &y, false).unwrap();
        sgd_step(&mut net, &grads, 0.01).unwrap();
        for ((after, before), g) in net.parameters().iter().zip(&before).zip(grads.tensors()) {
            for i in 0..after.len() {
                assert!((after[i] - (before[i] - 0.01 * g[i])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn scalar_sgd_example() {
        // w = 1, g = 0.5, lr = 0.1 -> 0.95
        let (mut net, _) = small();
        let mut grads = Gradients {
            layers: net
                .parameters()
                .chunks(2)
                .map(|c| crate::dcnn::ParamGrad {
                    weights: vec![0.0; c[0].len()],
                    bias: vec![0.0; c[1].len()],
                })
                .collect(),
        };
        net.parameters_mut()[0][0] = 1.0;
        grads.layers[0].weights[0] = 0.5;
        sgd_step(&mut net, &grads, 0.1).unwrap();
        assert!((net.parameters()[0][0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let (mut net, ds) = small();
        let before: Vec<Vec<f64>> = net.parameters().iter().map(|p| p.to_vec()).collect();
        let (x, y) = ds.gather(&[0, 1]);
        let (_, grads) = net.loss_and_backward(&x, &y, false).unwrap();
        sgd_step(&mut net, &grads, 0.0).unwrap();
        let after: Vec<Vec<f64>> = net.parameters().iter().map(|p| p.to_vec()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn training_is_deterministic_and_reduces_loss() {
        let cfg = TrainConfig {
            batch_size: 4,
            learning_rate: 0.1,
            seed: 5,
        };
        let run = || {
            let (mut net, ds) = small();
            let first = train_epoch(&mut net, &ds, &cfg, 0).unwrap();
            let mut last = first;
            for e in 1..60 {
                last = train_epoch(&mut net, &ds, &cfg, e).unwrap();
            }
            (first, last, net.parameters().iter().map(|p| p.to_vec()).collect::<Vec<_>>())
        };
        let (a_first, a_last, a_params) = run();
        let (_, _, b_params) = run();
        assert_eq!(a_params, b_params);
        assert_eq!(a_first.steps, 2);
        assert!(a_last.loss < a_first.loss, "{a_first:?} -> {a_last:?}");
    }

    #[test]
    fn oversized_batch_is_rejected() {
        let (mut net, ds) = small();
        let cfg = TrainConfig {
            batch_size: 9,
            ..TrainConfig::default()
        };
        assert!(train_epoch(&mut net, &ds, &cfg, 0).is_err());
    }
}
