use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{Real, Tensor};

/// Square-kernel stride-1 convolution over `[N, H, W, C]`.
///
/// Weights are laid out `[ky, kx, c_in, c_out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d<T> {
    pub kernel: usize,
    pub pad: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> Conv2d<T> {
    /// He-uniform weights, zero bias.
    pub fn new(kernel: usize, pad: usize, in_channels: usize, out_channels: usize, rng: &mut impl Rng) -> Self {
        let fan_in = kernel * kernel * in_channels;
        let limit = libm::sqrt(6.0 / fan_in as f64);
        let weights = (0..fan_in * out_channels)
            .map(|_| T::from_f64(rng.random_range(-limit..limit)))
            .collect();
        Self {
            kernel,
            pad,
            in_channels,
            out_channels,
            weights,
            bias: vec![T::zero(); out_channels],
        }
    }

    pub fn output_dims(&self, h: usize, w: usize) -> (usize, usize) {
        (
            (h + 2 * self.pad + 1).saturating_sub(self.kernel),
            (w + 2 * self.pad + 1).saturating_sub(self.kernel),
        )
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn forward(&self, input: &Tensor<T>) -> Tensor<T> {
        let [n, h, w, cin] = dims4(input);
        debug_assert_eq!(cin, self.in_channels);
        let (oh, ow) = self.output_dims(h, w);
        let cout = self.out_channels;
        let k = self.kernel;
        let mut out = Tensor::zeros(&[n, oh, ow, cout]);
        let x = input.data();
        let y = out.data_mut();
        for b in 0..n {
            for oy in 0..oh {
                for ox in 0..ow {
                    let o = ((b * oh + oy) * ow + ox) * cout;
                    let acc = &mut y[o..o + cout];
                    acc.copy_from_slice(&self.bias);
                    for ky in 0..k {
                        let Some(iy) = (oy + ky).checked_sub(self.pad).filter(|&v| v < h) else {
                            continue;
                        };
                        for kx in 0..k {
                            let Some(ix) = (ox + kx).checked_sub(self.pad).filter(|&v| v < w) else {
                                continue;
                            };
                            let px = &x[((b * h + iy) * w + ix) * cin..][..cin];
                            let wk = &self.weights[(ky * k + kx) * cin * cout..][..cin * cout];
                            for (ci, &v) in px.iter().enumerate() {
                                if v == T::zero() {
                                    continue;
                                }
                                let row = &wk[ci * cout..(ci + 1) * cout];
                                for (a, &wv) in acc.iter_mut().zip(row) {
                                    *a = *a + v * wv;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Accumulates into `d_weights`/`d_bias` and returns the input gradient.
    pub fn backward(&self, input: &Tensor<T>, d_out: &Tensor<T>, d_weights: &mut [T], d_bias: &mut [T]) -> Tensor<T> {
        let [n, h, w, cin] = dims4(input);
        let [_, oh, ow, cout] = dims4(d_out);
        let k = self.kernel;
        let mut d_in = Tensor::zeros(input.shape());
        let x = input.data();
        let dy = d_out.data();
        let dx = d_in.data_mut();
        for b in 0..n {
            for oy in 0..oh {
                for ox in 0..ow {
                    let g = &dy[((b * oh + oy) * ow + ox) * cout..][..cout];
                    for (db, &gv) in d_bias.iter_mut().zip(g) {
                        *db = *db + gv;
                    }
                    for ky in 0..k {
                        let Some(iy) = (oy + ky).checked_sub(self.pad).filter(|&v| v < h) else {
                            continue;
                        };
                        for kx in 0..k {
                            let Some(ix) = (ox + kx).checked_sub(self.pad).filter(|&v| v < w) else {
                                continue;
                            };
                            let base = ((b * h + iy) * w + ix) * cin;
                            let wk_off = (ky * k + kx) * cin * cout;
                            for ci in 0..cin {
                                let v = x[base + ci];
                                let wrow = &self.weights[wk_off + ci * cout..][..cout];
                                let dwrow = &mut d_weights[wk_off + ci * cout..][..cout];
                                let mut s = T::zero();
                                for co in 0..cout {
                                    dwrow[co] = dwrow[co] + v * g[co];
                                    s = s + wrow[co] * g[co];
                                }
                                dx[base + ci] = dx[base + ci] + s;
                            }
                        }
                    }
                }
            }
        }
        d_in
    }
}

/// Fully connected layer, weights `[in, out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> Dense<T> {
    pub fn new(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let limit = libm::sqrt(6.0 / inputs as f64);
        let weights = (0..inputs * outputs)
            .map(|_| T::from_f64(rng.random_range(-limit..limit)))
            .collect();
        Self {
            inputs,
            outputs,
            weights,
            bias: vec![T::zero(); outputs],
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn forward(&self, input: &Tensor<T>) -> Tensor<T> {
        let n = input.batch();
        let mut out = Tensor::zeros(&[n, self.outputs]);
        for b in 0..n {
            let x = input.item(b);
            let y = &mut out.data_mut()[b * self.outputs..(b + 1) * self.outputs];
            y.copy_from_slice(&self.bias);
            for (i, &v) in x.iter().enumerate() {
                if v == T::zero() {
                    continue;
                }
                let row = &self.weights[i * self.outputs..(i + 1) * self.outputs];
                for (a, &wv) in y.iter_mut().zip(row) {
                    *a = *a + v * wv;
                }
            }
        }
        out
    }

    pub fn backward(&self, input: &Tensor<T>, d_out: &Tensor<T>, d_weights: &mut [T], d_bias: &mut [T]) -> Tensor<T> {
        let n = input.batch();
        let mut d_in = Tensor::zeros(input.shape());
        for b in 0..n {
            let x = input.item(b);
            let g = d_out.item(b);
            for (db, &gv) in d_bias.iter_mut().zip(g) {
                *db = *db + gv;
            }
            let dx = &mut d_in.data_mut()[b * self.inputs..(b + 1) * self.inputs];
            for i in 0..self.inputs {
                let row = &self.weights[i * self.outputs..(i + 1) * self.outputs];
                let drow = &mut d_weights[i * self.outputs..(i + 1) * self.outputs];
                let mut s = T::zero();
                for o in 0..self.outputs {
                    drow[o] = drow[o] + x[i] * g[o];
                    s = s + row[o] * g[o];
                }
                dx[i] = s;
            }
        }
        d_in
    }
}

pub(super) fn dims4<T: Real>(t: &Tensor<T>) -> [usize; 4] {
    let s = t.shape();
    assert_eq!(s.len(), 4, "expected a [N, H, W, C] tensor, got {s:?}");
    [s[0], s[1], s[2], s[3]]
}

pub(super) fn relu_forward<T: Real>(input: &Tensor<T>) -> Tensor<T> {
    let mut out = input.clone();
    for v in out.data_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    out
}

pub(super) fn relu_backward<T: Real>(input: &Tensor<T>, d_out: &Tensor<T>) -> Tensor<T> {
    let mut d = d_out.clone();
    for (g, &x) in d.data_mut().iter_mut().zip(input.data()) {
        if x <= T::zero() {
            *g = T::zero();
        }
    }
    d
}

/// Non-overlapping max pooling with floor division; returns the output and
/// the flat input index of each maximum (first wins on ties).
pub(super) fn max_pool_forward<T: Real>(input: &Tensor<T>, size: usize) -> (Tensor<T>, Vec<u32>) {
    let [n, h, w, c] = dims4(input);
    let (oh, ow) = (h / size, w / size);
    let mut out = Tensor::zeros(&[n, oh, ow, c]);
    let mut argmax = vec![0u32; n * oh * ow * c];
    let x = input.data();
    for b in 0..n {
        for oy in 0..oh {
            for ox in 0..ow {
                let o = ((b * oh + oy) * ow + ox) * c;
                for ch in 0..c {
                    let mut best = T::neg_infinity();
                    let mut best_i = 0usize;
                    for dy in 0..size {
                        for dx in 0..size {
                            let i = ((b * h + oy * size + dy) * w + ox * size + dx) * c + ch;
                            if x[i] > best {
                                best = x[i];
                                best_i = i;
                            }
                        }
                    }
                    out.data_mut()[o + ch] = best;
                    argmax[o + ch] = best_i as u32;
                }
            }
        }
    }
    (out, argmax)
}

pub(super) fn max_pool_backward<T: Real>(input_shape: &[usize], argmax: &[u32], d_out: &Tensor<T>) -> Tensor<T> {
    let mut d = Tensor::zeros(input_shape);
    for (&i, &g) in argmax.iter().zip(d_out.data()) {
        let slot = &mut d.data_mut()[i as usize];
        *slot = *slot + g;
    }
    d
}

/// Inverted dropout: kept units are scaled by `1 / (1 - rate)`.
pub(super) fn dropout_mask<T: Real>(len: usize, rate: f64, rng: &mut impl Rng) -> Vec<T> {
    let keep = T::from_f64(1.0 / (1.0 - rate));
    (0..len)
        .map(|_| if rng.random::<f64>() < rate { T::zero() } else { keep })
        .collect()
}

pub(super) fn softmax_rows<T: Real>(logits: &Tensor<T>) -> Tensor<T> {
    let mut out = logits.clone();
    let k = logits.shape()[1];
    for row in out.data_mut().chunks_mut(k) {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut s = T::zero();
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            s = s + *v;
        }
        for v in row.iter_mut() {
            *v = *v / s;
        }
    }
    out
}
