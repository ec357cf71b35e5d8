use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{
    dims4, dropout_mask, max_pool_backward, max_pool_forward, relu_backward, relu_forward, softmax_rows, Conv2d,
    Dense,
};
use super::{Real, Tensor};
use crate::error::{invalid, Result};

/// Added inside the logarithm of the cross-entropy.
pub const CROSS_ENTROPY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Zero padding that keeps the spatial size.
    Same,
    /// No padding; each conv trims `kernel - 1`.
    Valid,
}

/// Architecture of a conv/pool stack followed by fully connected layers.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub conv_filters: Vec<usize>,
    /// Square kernel side.
    pub kernel: usize,
    /// Square pooling window and stride.
    pub pool: usize,
    pub fc_widths: Vec<usize>,
    pub num_classes: usize,
    /// Applied after the first fully connected layer only.
    pub dropout_rate: f64,
    pub padding: Padding,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self {
            conv_filters: vec![32, 32, 64, 64, 128, 256, 256],
            kernel: 3,
            pool: 2,
            fc_widths: vec![132, 132, 132],
            num_classes: 9,
            dropout_rate: 0.5,
            padding: Padding::Same,
        }
    }
}

impl NetworkSpec {
    /// Input shape of the full-size cortical classifier.
    pub const CORTICAL_INPUT: (usize, usize, usize) = (399, 752, 3);

    fn validate(&self) -> Result<()> {
        if self.kernel == 0 || (self.padding == Padding::Same && self.kernel % 2 == 0) {
            return Err(invalid!("kernel size {} is not usable with {:?} padding", self.kernel, self.padding));
        }
        if self.pool == 0 {
            return Err(invalid!("pool size must be positive"));
        }
        if self.num_classes < 2 {
            return Err(invalid!("need at least two classes"));
        }
        if self.conv_filters.contains(&0) || self.fc_widths.contains(&0) {
            return Err(invalid!("layer widths must be positive"));
        }
        if !(self.dropout_rate >= 0.0 && self.dropout_rate < 1.0) {
            return Err(invalid!("dropout rate must lie in [0, 1), got {}", self.dropout_rate));
        }
        Ok(())
    }

    fn pad(&self) -> usize {
        match self.padding {
            Padding::Same => self.kernel / 2,
            Padding::Valid => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv,
    Pool,
    Flatten,
    Dense,
    Dropout,
    Output,
}

/// One line of a network's shape trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerShape {
    pub name: String,
    pub kind: LayerKind,
    pub output: Vec<usize>,
    pub params: usize,
}

/// Per-layer output shapes and parameter counts, without allocating weights.
pub fn shape_trace(spec: &NetworkSpec, input_shape: (usize, usize, usize)) -> Result<Vec<LayerShape>> {
    spec.validate()?;
    let (mut h, mut w, mut c) = input_shape;
    if h == 0 || w == 0 || c == 0 {
        return Err(invalid!("input shape {input_shape:?} has a zero dimension"));
    }
    let k = spec.kernel;
    let pad = spec.pad();
    let mut trace = Vec::new();
    for (i, &filters) in spec.conv_filters.iter().enumerate() {
        let name = format!("conv{}", i + 1);
        if h + 2 * pad < k || w + 2 * pad < k {
            return Err(invalid!("{name}: input {h}x{w} is smaller than the {k}x{k} kernel"));
        }
        (h, w) = (h + 2 * pad + 1 - k, w + 2 * pad + 1 - k);
        trace.push(LayerShape {
            name,
            kind: LayerKind::Conv,
            output: vec![h, w, filters],
            params: k * k * c * filters + filters,
        });
        c = filters;
        let name = format!("pool{}", i + 1);
        (h, w) = (h / spec.pool, w / spec.pool);
        if h == 0 || w == 0 {
            return Err(invalid!("{name}: feature map collapses to {h}x{w}"));
        }
        trace.push(LayerShape {
            name,
            kind: LayerKind::Pool,
            output: vec![h, w, c],
            params: 0,
        });
    }
    let mut width = h * w * c;
    trace.push(LayerShape {
        name: "flatten".into(),
        kind: LayerKind::Flatten,
        output: vec![width],
        params: 0,
    });
    for (i, &units) in spec.fc_widths.iter().enumerate() {
        trace.push(LayerShape {
            name: format!("fc{}", i + 1),
            kind: LayerKind::Dense,
            output: vec![units],
            params: width * units + units,
        });
        width = units;
        if i == 0 && spec.dropout_rate > 0.0 {
            trace.push(LayerShape {
                name: "dropout".into(),
                kind: LayerKind::Dropout,
                output: vec![units],
                params: 0,
            });
        }
    }
    trace.push(LayerShape {
        name: "output".into(),
        kind: LayerKind::Output,
        output: vec![spec.num_classes],
        params: width * spec.num_classes + spec.num_classes,
    });
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
enum Layer<T> {
    Conv(Conv2d<T>),
    Relu,
    MaxPool(usize),
    Flatten,
    Dense(Dense<T>),
    Dropout(f64),
}

#[derive(Debug, Clone)]
enum Aux<T> {
    None,
    Argmax(Vec<u32>),
    Mask(Vec<T>),
}

/// Activations saved by a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct Cache<T> {
    inputs: Vec<Tensor<T>>,
    aux: Vec<Aux<T>>,
    probs: Tensor<T>,
}

impl<T: Real> Cache<T> {
    pub fn probabilities(&self) -> &Tensor<T> {
        &self.probs
    }
}

/// Gradient of one parameterized layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad<T> {
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

/// Gradients in the same order as [`Network::parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<ParamGrad<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn tensors(&self) -> Vec<&[T]> {
        self.layers
            .iter()
            .flat_map(|g| [g.weights.as_slice(), g.bias.as_slice()])
            .collect()
    }
}

/// A built classifier with its weights.
#[derive(Debug, Clone)]
pub struct Network<T> {
    spec: NetworkSpec,
    input_shape: (usize, usize, usize),
    trace: Vec<LayerShape>,
    layers: Vec<Layer<T>>,
    dropout_rng: ChaCha8Rng,
}

/// Allocates the network for `spec` with He-uniform weights drawn from
/// `seed` and zero biases.
pub fn build_network<T: Real>(spec: &NetworkSpec, input_shape: (usize, usize, usize), seed: u64) -> Result<Network<T>> {
    let trace = shape_trace(spec, input_shape)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::new();
    let mut channels = input_shape.2;
    for &filters in &spec.conv_filters {
        layers.push(Layer::Conv(Conv2d::new(spec.kernel, spec.pad(), channels, filters, &mut rng)));
        layers.push(Layer::Relu);
        layers.push(Layer::MaxPool(spec.pool));
        channels = filters;
    }
    layers.push(Layer::Flatten);
    let flat = trace
        .iter()
        .find(|l| l.kind == LayerKind::Flatten)
        .map(|l| l.output[0])
        .unwrap_or(0);
    let mut width = flat;
    for (i, &units) in spec.fc_widths.iter().enumerate() {
        layers.push(Layer::Dense(Dense::new(width, units, &mut rng)));
        layers.push(Layer::Relu);
        if i == 0 && spec.dropout_rate > 0.0 {
            layers.push(Layer::Dropout(spec.dropout_rate));
        }
        width = units;
    }
    layers.push(Layer::Dense(Dense::new(width, spec.num_classes, &mut rng)));
    Ok(Network {
        spec: spec.clone(),
        input_shape,
        trace,
        layers,
        dropout_rng: ChaCha8Rng::seed_from_u64(seed ^ 0xD809_0C7A_5EED_0001),
    })
}

impl<T: Real> Network<T> {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn input_shape(&self) -> (usize, usize, usize) {
        self.input_shape
    }

    pub fn shape_trace(&self) -> &[LayerShape] {
        &self.trace
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.len()).sum()
    }

    /// Weight and bias slices of every parameterized layer, in layer order.
    pub fn parameters(&self) -> Vec<&[T]> {
        self.layers
            .iter()
            .flat_map(|l| match l {
                Layer::Conv(c) => vec![c.weights.as_slice(), c.bias.as_slice()],
                Layer::Dense(d) => vec![d.weights.as_slice(), d.bias.as_slice()],
                _ => vec![],
            })
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| match l {
                Layer::Conv(c) => vec![c.weights.as_mut_slice(), c.bias.as_mut_slice()],
                Layer::Dense(d) => vec![d.weights.as_mut_slice(), d.bias.as_mut_slice()],
                _ => vec![],
            })
            .collect()
    }

    /// Reseeds the dropout mask generator.
    pub fn reseed_dropout(&mut self, seed: u64) {
        self.dropout_rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn check_batch(&self, batch: &Tensor<T>) -> Result<()> {
        let (h, w, c) = self.input_shape;
        match batch.shape() {
            [n, bh, bw, bc] if *n > 0 && (*bh, *bw, *bc) == (h, w, c) => Ok(()),
            other => Err(invalid!("batch shape {other:?} does not match input [N, {h}, {w}, {c}]")),
        }
    }

    /// Softmax probabilities `[N, num_classes]` plus the activation cache.
    /// Dropout is only active when `training` is set.
    pub fn forward(&mut self, batch: &Tensor<T>, training: bool) -> Result<(Tensor<T>, Cache<T>)> {
        self.check_batch(batch)?;
        let rng = if training { Some(&mut self.dropout_rng) } else { None };
        let cache = run_forward(&self.layers, batch, rng);
        Ok((cache.probs.clone(), cache))
    }

    /// Inference-mode probabilities.
    pub fn predict(&self, batch: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_batch(batch)?;
        Ok(run_forward(&self.layers, batch, None).probs)
    }

    /// Gradients of the mean loss for a finished forward pass.
    pub fn backward(&self, cache: &Cache<T>, labels: &Tensor<T>) -> Result<(T, Gradients<T>)> {
        let (loss, d_logits) = softmax_cross_entropy(&cache.probs, labels)?;
        let mut grads: Vec<ParamGrad<T>> = Vec::new();
        let mut d = d_logits;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[i];
            d = match layer {
                Layer::Conv(conv) => {
                    let mut g = ParamGrad {
                        weights: vec![T::zero(); conv.weights.len()],
                        bias: vec![T::zero(); conv.bias.len()],
                    };
                    let d_in = conv.backward(input, &d, &mut g.weights, &mut g.bias);
                    grads.push(g);
                    d_in
                }
                Layer::Dense(dense) => {
                    let mut g = ParamGrad {
                        weights: vec![T::zero(); dense.weights.len()],
                        bias: vec![T::zero(); dense.bias.len()],
                    };
                    let d_in = dense.backward(input, &d, &mut g.weights, &mut g.bias);
                    grads.push(g);
                    d_in
                }
                Layer::Relu => relu_backward(input, &d),
                Layer::MaxPool(_) => match &cache.aux[i] {
                    Aux::Argmax(idx) => max_pool_backward(input.shape(), idx, &d),
                    _ => unreachable!("pool layer without argmax cache"),
                },
                Layer::Flatten => d.reshape(input.shape())?,
                Layer::Dropout(_) => match &cache.aux[i] {
                    Aux::Mask(mask) => {
                        let mut d = d;
                        for (g, &m) in d.data_mut().iter_mut().zip(mask) {
                            *g = *g * m;
                        }
                        d
                    }
                    _ => d,
                },
            };
        }
        grads.reverse();
        Ok((loss, Gradients { layers: grads }))
    }

    /// Forward pass, mean categorical cross-entropy and full gradients.
    pub fn loss_and_backward(&mut self, batch: &Tensor<T>, labels: &Tensor<T>, training: bool) -> Result<(T, Gradients<T>)> {
        let (_, cache) = self.forward(batch, training)?;
        self.backward(&cache, labels)
    }
}

fn run_forward<T: Real>(layers: &[Layer<T>], batch: &Tensor<T>, mut rng: Option<&mut ChaCha8Rng>) -> Cache<T> {
    let mut inputs = Vec::with_capacity(layers.len());
    let mut aux = Vec::with_capacity(layers.len());
    let mut x = batch.clone();
    for layer in layers {
        let (next, a) = match layer {
            Layer::Conv(conv) => (conv.forward(&x), Aux::None),
            Layer::Dense(dense) => (dense.forward(&x), Aux::None),
            Layer::Relu => (relu_forward(&x), Aux::None),
            Layer::MaxPool(size) => {
                let (out, idx) = max_pool_forward(&x, *size);
                (out, Aux::Argmax(idx))
            }
            Layer::Flatten => {
                let [n, h, w, c] = dims4(&x);
                (x.clone().reshape(&[n, h * w * c]).expect("flatten keeps length"), Aux::None)
            }
            Layer::Dropout(rate) => match rng.as_deref_mut() {
                Some(rng) => {
                    let mask: Vec<T> = dropout_mask(x.len(), *rate, rng);
                    let mut out = x.clone();
                    for (v, &m) in out.data_mut().iter_mut().zip(&mask) {
                        *v = *v * m;
                    }
                    (out, Aux::Mask(mask))
                }
                None => (x.clone(), Aux::None),
            },
        };
        inputs.push(x);
        aux.push(a);
        x = next;
    }
    let probs = softmax_rows(&x);
    Cache { inputs, aux, probs }
}

/// Mean of `-sum(y * ln(p + eps))` over the batch and its gradient with
/// respect to the logits.
pub fn softmax_cross_entropy<T: Real>(probs: &Tensor<T>, labels: &Tensor<T>) -> Result<(T, Tensor<T>)> {
    if probs.shape() != labels.shape() || probs.shape().len() != 2 {
        return Err(invalid!(
            "labels {:?} do not match predictions {:?}",
            labels.shape(),
            probs.shape()
        ));
    }
    let (n, k) = (probs.shape()[0], probs.shape()[1]);
    let eps = T::from_f64(CROSS_ENTROPY_EPS);
    let inv_n = T::one() / T::from_f64(n as f64);
    let mut loss = T::zero();
    let mut d = Tensor::zeros(&[n, k]);
    let mut dp = vec![T::zero(); k];
    for b in 0..n {
        let p = probs.item(b);
        let y = labels.item(b);
        let mut dot = T::zero();
        for j in 0..k {
            if y[j] != T::zero() {
                loss = loss - y[j] * (p[j] + eps).ln();
            }
            dp[j] = -y[j] / (p[j] + eps) * inv_n;
            dot = dot + p[j] * dp[j];
        }
        let row = &mut d.data_mut()[b * k..(b + 1) * k];
        for j in 0..k {
            row[j] = p[j] * (dp[j] - dot);
        }
    }
    Ok((loss * inv_n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent shape/count oracle: plain arithmetic over the spec.
    fn default_counts() -> (Vec<(usize, usize)>, usize) {
        let (mut h, mut w) = (399usize, 752usize);
        let mut dims = Vec::new();
        for _ in 0..7 {
            h /= 2;
            w /= 2;
            dims.push((h, w));
        }
        let convs = [(3, 32), (32, 32), (32, 64), (64, 64), (64, 128), (128, 256), (256, 256)];
        let conv_params: usize = convs.iter().map(|(i, o)| 9 * i * o + o).sum();
        let flat = h * w * 256;
        let fc = (flat * 132 + 132) + 2 * (132 * 132 + 132) + (132 * 9 + 9);
        (dims, conv_params + fc)
    }

    #[test]
    fn default_shapes_and_parameters() {
        let trace = shape_trace(&NetworkSpec::default(), NetworkSpec::CORTICAL_INPUT).unwrap();
        let (dims, total) = default_counts();
        let pools: Vec<(usize, usize)> = trace
            .iter()
            .filter(|l| l.kind == LayerKind::Pool)
            .map(|l| (l.output[0], l.output[1]))
            .collect();
        assert_eq!(pools, dims);
        assert_eq!(trace.iter().find(|l| l.name == "pool7").unwrap().output, vec![3, 5, 256]);
        assert_eq!(trace.iter().find(|l| l.name == "flatten").unwrap().output, vec![3_840]);
        assert_eq!(trace.iter().find(|l| l.name == "conv1").unwrap().params, 896);
        assert_eq!(trace.iter().map(|l| l.params).sum::<usize>(), total);
        assert_eq!(total, 1_567_993);
        assert_eq!(trace.last().unwrap().output, vec![9]);
    }

    #[test]
    fn valid_padding_trace() {
        let trace = shape_trace(
            &NetworkSpec {
                padding: Padding::Valid,
                ..NetworkSpec::default()
            },
            NetworkSpec::CORTICAL_INPUT,
        )
        .unwrap();
        // 399 -> 397 -> 198 -> 196 -> 98 -> 96 -> 48 -> 46 -> 23 -> 21 -> 10 -> 8 -> 4 -> 2 -> 1
        // 752 -> 750 -> 375 -> 373 -> 186 -> 184 -> 92 -> 90 -> 45 -> 43 -> 21 -> 19 -> 9 -> 7 -> 3
        assert_eq!(trace.iter().find(|l| l.name == "pool7").unwrap().output, vec![1, 3, 256]);
    }

    #[test]
    fn collapse_names_the_layer() {
        let err = shape_trace(&NetworkSpec::default(), (100, 188, 3)).unwrap_err();
        assert!(format!("{err}").contains("pool7"), "{err}");
    }

    fn tiny() -> Network<f64> {
        let spec = NetworkSpec {
            conv_filters: vec![2, 3],
            fc_widths: vec![5, 4],
            num_classes: 3,
            ..NetworkSpec::default()
        };
        build_network(&spec, (8, 8, 2), 3).unwrap()
    }

    fn batch(n: usize) -> Tensor<f64> {
        let data = (0..n * 8 * 8 * 2).map(|i| ((i * 7919) % 97) as f64 / 97.0 - 0.3).collect();
        Tensor::from_vec(&[n, 8, 8, 2], data).unwrap()
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut net = tiny();
        for training in [false, true] {
            let (p, _) = net.forward(&batch(4), training).unwrap();
            for b in 0..4 {
                assert!((p.item(b).iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn inference_is_repeatable() {
        let mut net = tiny();
        let (a, _) = net.forward(&batch(3), false).unwrap();
        let (b, _) = net.forward(&batch(3), false).unwrap();
        assert_eq!(a, b);
        assert_eq!(net.predict(&batch(3)).unwrap(), a);
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        let spec = NetworkSpec {
            conv_filters: vec![2],
            fc_widths: vec![4],
            ..NetworkSpec::default()
        };
        let mut net = build_network::<f64>(&spec, (6, 6, 3), 1).unwrap();
        for p in net.parameters_mut() {
            p.iter_mut().for_each(|v| *v = 0.0);
        }
        let x = Tensor::from_vec(&[1, 6, 6, 3], (0..108).map(|i| i as f64).collect()).unwrap();
        let p = net.predict(&x).unwrap();
        for &v in p.data() {
            assert!((v - 1.0 / 9.0).abs() < 1e-15);
        }
        let mut y = Tensor::zeros(&[1, 9]);
        y.data_mut()[4] = 1.0;
        let (loss, _) = softmax_cross_entropy(&p, &y).unwrap();
        assert!((loss - 9f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn confident_correct_prediction_has_zero_loss() {
        let p = Tensor::<f64>::from_vec(&[1, 3], vec![0.0, 1.0, 0.0]).unwrap();
        let y = Tensor::from_vec(&[1, 3], vec![0.0, 1.0, 0.0]).unwrap();
        let (loss, _) = softmax_cross_entropy(&p, &y).unwrap();
        assert!(loss.abs() <= 1e-9);
        let bad = Tensor::from_vec(&[1, 2], vec![0.0, 1.0]).unwrap();
        assert!(softmax_cross_entropy(&p, &bad).is_err());
    }

    #[test]
    fn batch_shape_is_checked() {
        let mut net = tiny();
        assert!(net.forward(&Tensor::zeros(&[1, 8, 7, 2]), false).is_err());
        assert!(net.forward(&Tensor::zeros(&[0, 8, 8, 2]), false).is_err());
    }

    #[test]
    fn parameter_count_matches_trace() {
        let net = tiny();
        assert_eq!(net.parameter_count(), net.shape_trace().iter().map(|l| l.params).sum::<usize>());
    }

    fn loss_at(net: &mut Network<f64>, x: &Tensor<f64>, y: &Tensor<f64>, seed: u64) -> f64 {
        net.reseed_dropout(seed);
        net.loss_and_backward(x, y, true).unwrap().0
    }

    /// Central differences on every parameter, dropout mask held fixed.
    fn gradient_check(spec: NetworkSpec, input: (usize, usize, usize), n: usize) -> f64 {
        let mut net = build_network::<f64>(&spec, input, 11).unwrap();
        for p in net.parameters_mut() {
            for (i, v) in p.iter_mut().enumerate() {
                if *v == 0.0 {
                    *v = 0.05 * (((i * 37) % 11) as f64 / 11.0 - 0.4);
                }
            }
        }
        let len = n * input.0 * input.1 * input.2;
        let x = Tensor::from_vec(
            &[n, input.0, input.1, input.2],
            (0..len).map(|i| libm::sin(i as f64 * 1.37) + 0.1).collect(),
        )
        .unwrap();
        let mut y = Tensor::zeros(&[n, spec.num_classes]);
        for b in 0..n {
            y.data_mut()[b * spec.num_classes + b % spec.num_classes] = 1.0;
        }
        net.reseed_dropout(99);
        let (_, grads) = net.loss_and_backward(&x, &y, true).unwrap();
        let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|g| g.to_vec()).collect();
        let h = 1e-5;
        let mut worst = 0.0f64;
        for t in 0..analytic.len() {
            for i in 0..analytic[t].len() {
                let orig = net.parameters()[t][i];
                net.parameters_mut()[t][i] = orig + h;
                let up = loss_at(&mut net, &x, &y, 99);
                net.parameters_mut()[t][i] = orig - h;
                let down = loss_at(&mut net, &x, &y, 99);
                net.parameters_mut()[t][i] = orig;
                let numeric = (up - down) / (2.0 * h);
                let a = analytic[t][i];
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
            }
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        let spec = NetworkSpec {
            conv_filters: vec![3, 4],
            fc_widths: vec![6, 5],
            num_classes: 4,
            dropout_rate: 0.5,
            ..NetworkSpec::default()
        };
        let worst = gradient_check(spec, (8, 10, 2), 3);
        assert!(worst < 1e-4, "worst relative error {worst}");
    }

    #[test]
    fn valid_padding_gradients_match() {
        let spec = NetworkSpec {
            conv_filters: vec![3],
            fc_widths: vec![4],
            num_classes: 3,
            dropout_rate: 0.0,
            padding: Padding::Valid,
            ..NetworkSpec::default()
        };
        let worst = gradient_check(spec, (7, 9, 2), 2);
        assert!(worst < 1e-4, "worst relative error {worst}");
    }

    #[test]
    fn dropout_preserves_expected_activation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let dense = Dense::<f64>::new(6, 3, &mut rng);
        let x = Tensor::from_vec(&[1, 6], vec![0.3, 1.2, 0.7, 0.9, 0.4, 1.1]).unwrap();
        let reference = dense.forward(&x);
        let passes = 20_000;
        let mut mean = [0.0; 3];
        for _ in 0..passes {
            let mask: Vec<f64> = dropout_mask(6, 0.5, &mut rng);
            let mut dropped = x.clone();
            dropped.data_mut().iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
            for (m, v) in mean.iter_mut().zip(dense.forward(&dropped).data()) {
                *m += v / passes as f64;
            }
        }
        for (m, r) in mean.iter().zip(reference.data()) {
            assert!((m - r).abs() <= 0.02 * r.abs(), "{m} vs {r}");
        }
    }

    #[test]
    fn training_mode_uses_dropout() {
        let mut net = tiny();
        let x = batch(2);
        let inference = net.predict(&x).unwrap();
        let (trained, _) = net.forward(&x, true).unwrap();
        assert_ne!(inference, trained);
    }
}
