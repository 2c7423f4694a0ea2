use super::model::Model;
use super::train::LabeledSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

impl Evaluation {
    pub fn from_predictions(predicted: &[usize], truth: &[usize], n_classes: usize) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if predicted.len() != truth.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} predictions for {} labels",
                predicted.len(),
                truth.len()
            )));
        }
        let mut confusion = vec![vec![0; n_classes]; n_classes];
        for (&p, &t) in predicted.iter().zip(truth) {
            if p >= n_classes || t >= n_classes {
                return Err(Error::ShapeMismatch(format!("class index {} out of range", p.max(t))));
            }
            confusion[t][p] += 1;
        }
        let hits: usize = (0..n_classes).map(|i| confusion[i][i]).sum();
        Ok(Self {
            accuracy: hits as f64 / truth.len() as f64,
            confusion,
        })
    }
}

/// Accuracy and confusion matrix of `model` on standardized inputs.
pub fn evaluate(model: &Model, data: &LabeledSet) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predicted = model.predict_batch(&data.inputs)?;
    Evaluation::from_predictions(&predicted, &data.labels, model.config.n_classes)
}
