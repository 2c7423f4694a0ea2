use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::evaluate;
use super::model::{Model, ModelConfig};
use crate::error::{Error, Result};
use crate::features::NormalizationStats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr_start: f64,
    /// Rate used from the epoch midpoint on.
    pub lr_end: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            lr_start: 1e-3,
            lr_end: 1e-4,
            epochs: 60,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::BadSpec("batch size and epoch count must be positive".into()));
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end && self.lr_start.is_finite()) {
            return Err(Error::BadSpec(format!(
                "learning rates must satisfy start >= end > 0, got {} and {}",
                self.lr_start, self.lr_end
            )));
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        if epoch < self.epochs.div_ceil(2) {
            self.lr_start
        } else {
            self.lr_end
        }
    }
}

/// Normalized inputs with class indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledSet {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledSet {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if inputs.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} inputs with {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= lr * mh / (vh.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub train_acc: f64,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    pub epochs: Vec<EpochStats>,
}

impl History {
    /// `epoch,loss,train_acc,val_acc`; `val_acc` is empty without a validation set.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,loss,train_acc,val_acc\n");
        for e in &self.epochs {
            let val = e.val_acc.map(|v| v.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", e.epoch, e.loss, e.train_acc, val));
        }
        s
    }
}

/// Mini-batch Adam training on standardized inputs.
///
/// Loss and training accuracy in the history are running values over each
/// epoch's mini-batches. Results are bit-reproducible for a given seed.
pub fn train(
    data: &LabeledSet,
    validation: Option<&LabeledSet>,
    norm_stats: NormalizationStats,
    mc: &ModelConfig,
    tc: &TrainConfig,
) -> Result<(Model, History)> {
    tc.validate()?;
    if data.is_empty() {
        return Err(Error::DegenerateDataset("no training examples".into()));
    }
    let mut seen = data.labels.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() < 2 {
        return Err(Error::DegenerateDataset(format!(
            "training set holds {} class(es), need at least 2",
            seen.len()
        )));
    }
    let mut model = Model::new(*mc, norm_stats)?;
    let mut adam = Adam::new(model.n_params());
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = History::default();
    for epoch in 0..tc.epochs {
        order.shuffle(&mut rng);
        let lr = tc.lr_at(epoch);
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for batch in order.chunks(tc.batch_size) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| data.inputs[i].as_slice()).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| data.labels[i]).collect();
            let (loss, grad, ok) = model.batch_step(&xs, &ys)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numeric(format!("non-finite loss or gradient in epoch {epoch}")));
            }
            loss_sum += loss * batch.len() as f64;
            correct += ok;
            adam.step(&mut model.params, &grad, lr);
        }
        let val_acc = match validation {
            Some(v) if !v.is_empty() => Some(evaluate(&model, v)?.accuracy),
            _ => None,
        };
        history.epochs.push(EpochStats {
            epoch,
            loss: loss_sum / data.len() as f64,
            train_acc: correct as f64 / data.len() as f64,
            val_acc,
        });
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_set(n: usize, len: usize, classes: usize, seed: u64) -> LabeledSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs = (0..n)
            .map(|_| (0..len).map(|_| rng.gen_range(-1.5..1.5)).collect())
            .collect();
        let labels = (0..n).map(|_| rng.gen_range(0..classes)).collect();
        LabeledSet::new(inputs, labels).unwrap()
    }

    #[test]
    fn schedule_steps_at_midpoint() {
        let tc = TrainConfig { epochs: 10, ..Default::default() };
        assert_eq!(tc.lr_at(4), 1e-3);
        assert_eq!(tc.lr_at(5), 1e-4);
        let odd = TrainConfig { epochs: 5, ..Default::default() };
        assert_eq!(odd.lr_at(2), 1e-3);
        assert_eq!(odd.lr_at(3), 1e-4);
        assert!(TrainConfig { lr_end: 1e-2, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn single_class_is_degenerate() {
        let mut d = random_set(10, 14, 5, 1);
        d.labels.iter_mut().for_each(|l| *l = 2);
        let r = train(&d, None, Model::identity_stats(14), &ModelConfig::default(), &TrainConfig::default());
        assert!(matches!(r, Err(Error::DegenerateDataset(_))));
    }

    #[test]
    fn identical_runs_are_bitwise_equal() {
        let d = random_set(40, 14, 5, 2);
        let tc = TrainConfig { epochs: 3, seed: 5, ..Default::default() };
        let mc = ModelConfig { seed: 8, ..Default::default() };
        let (m1, h1) = train(&d, Some(&d), Model::identity_stats(14), &mc, &tc).unwrap();
        let (m2, h2) = train(&d, Some(&d), Model::identity_stats(14), &mc, &tc).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(h1.to_csv(), h2.to_csv());
        assert_eq!(m1, m2);
    }
}
