use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::layers::*;
use crate::error::{Error, Result};
use crate::features::{NormalizationStats, N_FEATURES};

/// Samples per gradient chunk. Chunks are reduced in a fixed order, so
/// results do not depend on how many threads run them.
const GRAD_CHUNK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub input_len: usize,
    pub channels: usize,
    pub n_residual_blocks: usize,
    pub n_classes: usize,
    pub kernel: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input_len: N_FEATURES,
            channels: 16,
            n_residual_blocks: 9,
            n_classes: 5,
            kernel: 3,
            seed: 0,
        }
    }
}

impl ModelConfig {
    /// Weight layers: stem convolution, two per residual block, final dense.
    pub fn layer_count(&self) -> usize {
        2 + 2 * self.n_residual_blocks
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_len == 0 || self.channels == 0 || self.n_classes < 2 {
            return Err(Error::ShapeMismatch(format!(
                "input {} / channels {} / classes {} must be positive (at least 2 classes)",
                self.input_len, self.channels, self.n_classes
            )));
        }
        if self.kernel % 2 == 0 {
            return Err(Error::ShapeMismatch(format!("kernel {} must be odd", self.kernel)));
        }
        Ok(())
    }
}

/// Offsets of every tensor in the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub stem_w: Range<usize>,
    pub stem_b: Range<usize>,
    /// Per block: (conv1 w, conv1 b, conv2 w, conv2 b).
    pub blocks: Vec<[Range<usize>; 4]>,
    pub dense_w: Range<usize>,
    pub dense_b: Range<usize>,
    pub total: usize,
}

impl Layout {
    pub fn new(c: &ModelConfig) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let ch = c.channels;
        let stem_w = take(ch * c.kernel);
        let stem_b = take(ch);
        let blocks = (0..c.n_residual_blocks)
            .map(|_| {
                [
                    take(ch * ch * c.kernel),
                    take(ch),
                    take(ch * ch * c.kernel),
                    take(ch),
                ]
            })
            .collect();
        let dense_w = take(c.n_classes * ch);
        let dense_b = take(c.n_classes);
        Self {
            stem_w,
            stem_b,
            blocks,
            dense_w,
            dense_b,
            total: at,
        }
    }

    /// `(name, shape, range)` for every tensor, in storage order.
    ///
    /// Convolution kernels are `[k][c_in][c_out]`, the dense matrix `[classes][channels]`.
    pub fn tensors(&self, c: &ModelConfig) -> Vec<(String, Vec<usize>, Range<usize>)> {
        let (ch, k) = (c.channels, c.kernel);
        let mut out = vec![
            ("stem.weight".into(), vec![k, 1, ch], self.stem_w.clone()),
            ("stem.bias".into(), vec![ch], self.stem_b.clone()),
        ];
        for (i, b) in self.blocks.iter().enumerate() {
            out.push((format!("block{i}.conv1.weight"), vec![k, ch, ch], b[0].clone()));
            out.push((format!("block{i}.conv1.bias"), vec![ch], b[1].clone()));
            out.push((format!("block{i}.conv2.weight"), vec![k, ch, ch], b[2].clone()));
            out.push((format!("block{i}.conv2.bias"), vec![ch], b[3].clone()));
        }
        out.push(("dense.weight".into(), vec![c.n_classes, ch], self.dense_w.clone()));
        out.push(("dense.bias".into(), vec![c.n_classes], self.dense_b.clone()));
        out
    }
}

/// 1D residual network over a single-channel input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: Vec<f64>,
    pub norm_stats: NormalizationStats,
    layout: Layout,
}

/// Activations of one forward pass, kept for backpropagation.
struct Trace {
    input: Vec<f64>,
    /// Post-ReLU block inputs; `acts[0]` is the stem output, the last is the final block output.
    acts: Vec<Vec<f64>>,
    /// Post-ReLU output of each block's first convolution.
    hidden: Vec<Vec<f64>>,
    pooled: Vec<f64>,
    logits: Vec<f64>,
}

impl Model {
    /// Fan-in-scaled uniform initialization from `config.seed`; biases start at zero.
    ///
    /// The second convolution of every residual branch is further scaled by
    /// `1/√blocks` so activations stay bounded through the identity skips
    /// without any normalization layer.
    pub fn new(config: ModelConfig, norm_stats: NormalizationStats) -> Result<Self> {
        let mut m = Self::zeroed(config, norm_stats)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (ch, k) = (config.channels, config.kernel);
        let mut fill = |p: &mut [f64], fan_in: usize, scale: f64| {
            let limit = scale * (6.0 / fan_in as f64).sqrt();
            p.iter_mut().for_each(|v| *v = rng.gen_range(-limit..limit));
        };
        let l = m.layout.clone();
        let branch_scale = 1.0 / (config.n_residual_blocks.max(1) as f64).sqrt();
        fill(&mut m.params[l.stem_w.clone()], k, 1.0);
        for b in &l.blocks {
            fill(&mut m.params[b[0].clone()], ch * k, 1.0);
            fill(&mut m.params[b[2].clone()], ch * k, branch_scale);
        }
        fill(&mut m.params[l.dense_w.clone()], ch, 1.0);
        Ok(m)
    }

    pub fn zeroed(config: ModelConfig, norm_stats: NormalizationStats) -> Result<Self> {
        config.validate()?;
        if norm_stats.dim() != config.input_len || norm_stats.std.len() != config.input_len {
            return Err(Error::ShapeMismatch(format!(
                "normalization has {} columns, model input is {}",
                norm_stats.dim(),
                config.input_len
            )));
        }
        let layout = Layout::new(&config);
        Ok(Self {
            params: vec![0.0; layout.total],
            config,
            norm_stats,
            layout,
        })
    }

    /// Identity normalization for inputs that are already standardized.
    pub fn identity_stats(dim: usize) -> NormalizationStats {
        NormalizationStats {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n_params(&self) -> usize {
        self.layout.total
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.config.input_len {
            return Err(Error::ShapeMismatch(format!(
                "input of length {}, model expects {}",
                x.len(),
                self.config.input_len
            )));
        }
        Ok(())
    }

    fn check_batch(&self, xs: &[&[f64]], labels: &[usize]) -> Result<()> {
        if xs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if xs.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} inputs with {} labels",
                xs.len(),
                labels.len()
            )));
        }
        for (x, &y) in xs.iter().zip(labels) {
            self.check_input(x)?;
            if y >= self.config.n_classes {
                return Err(Error::ShapeMismatch(format!("label {y} out of range")));
            }
        }
        Ok(())
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let c = &self.config;
        let (ch, len, k) = (c.channels, c.input_len, c.kernel);
        let p = &self.params;
        let l = &self.layout;
        let mut a0 = vec![0.0; ch * len];
        conv1d_forward(x, 1, len, &p[l.stem_w.clone()], &p[l.stem_b.clone()], ch, k, &mut a0);
        relu_in_place(&mut a0);
        let mut acts = Vec::with_capacity(l.blocks.len() + 1);
        let mut hidden = Vec::with_capacity(l.blocks.len());
        acts.push(a0);
        for b in &l.blocks {
            let a = acts.last().unwrap();
            let mut h = vec![0.0; ch * len];
            conv1d_forward(a, ch, len, &p[b[0].clone()], &p[b[1].clone()], ch, k, &mut h);
            relu_in_place(&mut h);
            let mut z = vec![0.0; ch * len];
            conv1d_forward(&h, ch, len, &p[b[2].clone()], &p[b[3].clone()], ch, k, &mut z);
            for (zi, ai) in z.iter_mut().zip(a) {
                *zi += ai;
            }
            relu_in_place(&mut z);
            hidden.push(h);
            acts.push(z);
        }
        let mut pooled = vec![0.0; ch];
        global_avg_pool(acts.last().unwrap(), ch, len, &mut pooled);
        let mut logits = vec![0.0; c.n_classes];
        dense_forward(&pooled, &p[l.dense_w.clone()], &p[l.dense_b.clone()], &mut logits);
        Trace {
            input: x.to_vec(),
            acts,
            hidden,
            pooled,
            logits,
        }
    }

    /// Class logits for an already normalized input.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.trace(x).logits)
    }

    /// Class probabilities for an already normalized input.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let l = self.logits(x)?;
        let mut p = vec![0.0; l.len()];
        softmax(&l, &mut p);
        Ok(p)
    }

    /// Normalizes a raw feature row with the frozen statistics, then runs [`Model::forward`].
    pub fn predict_proba(&self, raw: &[f64]) -> Result<Vec<f64>> {
        self.forward(&self.norm_stats.apply(raw)?)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.logits(x)?))
    }

    /// Predicted classes for a batch of normalized inputs, in input order.
    pub fn predict_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<usize>> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }

    /// Accumulates one sample's gradient into `grad`; returns its loss and whether it was classified correctly.
    fn backprop(&self, x: &[f64], label: usize, grad: &mut [f64]) -> (f64, bool) {
        let c = &self.config;
        let (ch, len, k) = (c.channels, c.input_len, c.kernel);
        let p = &self.params;
        let l = &self.layout;
        let t = self.trace(x);
        let mut probs = vec![0.0; c.n_classes];
        let mut d_logits = vec![0.0; c.n_classes];
        let loss = softmax_cross_entropy(&t.logits, label, &mut probs, &mut d_logits);
        let correct = argmax(&t.logits) == label;

        let mut d_pooled = vec![0.0; ch];
        {
            let (dw, rest) = split_pair(grad, &l.dense_w, &l.dense_b);
            dense_backward(&t.pooled, &p[l.dense_w.clone()], &d_logits, dw, rest, &mut d_pooled);
        }
        let mut d_a = vec![0.0; ch * len];
        global_avg_pool_backward(&d_pooled, ch, len, &mut d_a);

        for (i, b) in l.blocks.iter().enumerate().rev() {
            // d_a holds the gradient w.r.t. this block's post-ReLU output
            relu_backward_in_place(&t.acts[i + 1], &mut d_a);
            let mut d_h = vec![0.0; ch * len];
            {
                let (dw, db) = split_pair(grad, &b[2], &b[3]);
                conv1d_backward(&t.hidden[i], ch, len, &p[b[2].clone()], ch, k, &d_a, dw, db, Some(&mut d_h));
            }
            relu_backward_in_place(&t.hidden[i], &mut d_h);
            // skip path carries d_a through unchanged
            let (dw, db) = split_pair(grad, &b[0], &b[1]);
            conv1d_backward(&t.acts[i], ch, len, &p[b[0].clone()], ch, k, &d_h, dw, db, Some(&mut d_a));
        }
        relu_backward_in_place(&t.acts[0], &mut d_a);
        let (dw, db) = split_pair(grad, &l.stem_w, &l.stem_b);
        conv1d_backward(&t.input, 1, len, &p[l.stem_w.clone()], ch, k, &d_a, dw, db, None);
        (loss, correct)
    }

    /// Mean cross-entropy over the batch and its gradient with respect to every parameter.
    pub fn loss_and_grads(&self, xs: &[&[f64]], labels: &[usize]) -> Result<(f64, Vec<f64>)> {
        let (loss, grad, _) = self.batch_step(xs, labels)?;
        Ok((loss, grad))
    }

    /// Mean cross-entropy over the batch, forward pass only. Bit-identical to the loss of [`Model::loss_and_grads`].
    pub fn loss(&self, xs: &[&[f64]], labels: &[usize]) -> Result<f64> {
        self.check_batch(xs, labels)?;
        let mut probs = vec![0.0; self.config.n_classes];
        let mut d_logits = vec![0.0; self.config.n_classes];
        let parts: Vec<f64> = xs
            .chunks(GRAD_CHUNK)
            .zip(labels.chunks(GRAD_CHUNK))
            .map(|(cx, cy)| {
                let mut loss = 0.0;
                for (x, &y) in cx.iter().zip(cy) {
                    let t = self.trace(x);
                    loss += softmax_cross_entropy(&t.logits, y, &mut probs, &mut d_logits);
                }
                loss
            })
            .collect();
        Ok(parts.iter().fold(0.0, |acc, l| acc + l) / xs.len() as f64)
    }

    /// Like [`Model::loss_and_grads`], plus the number of correctly classified samples.
    pub(crate) fn batch_step(&self, xs: &[&[f64]], labels: &[usize]) -> Result<(f64, Vec<f64>, usize)> {
        self.check_batch(xs, labels)?;
        let parts: Vec<(f64, Vec<f64>, usize)> = xs
            .par_chunks(GRAD_CHUNK)
            .zip(labels.par_chunks(GRAD_CHUNK))
            .map(|(cx, cy)| {
                let mut g = vec![0.0; self.layout.total];
                let mut loss = 0.0;
                let mut correct = 0;
                for (x, &y) in cx.iter().zip(cy) {
                    let (l, ok) = self.backprop(x, y, &mut g);
                    loss += l;
                    correct += ok as usize;
                }
                (loss, g, correct)
            })
            .collect();
        let n = xs.len() as f64;
        let mut grad = vec![0.0; self.layout.total];
        let mut loss = 0.0;
        let mut correct = 0;
        for (l, g, c) in parts {
            loss += l;
            correct += c;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
        }
        grad.iter_mut().for_each(|v| *v /= n);
        Ok((loss / n, grad, correct))
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Disjoint mutable views of two adjacent parameter ranges (`a` directly before `b`).
fn split_pair<'a>(g: &'a mut [f64], a: &Range<usize>, b: &Range<usize>) -> (&'a mut [f64], &'a mut [f64]) {
    debug_assert_eq!(a.end, b.start);
    let (left, right) = g[a.start..b.end].split_at_mut(a.len());
    (left, right)
}
