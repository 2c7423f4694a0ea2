use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{RawDecimation, WindowRecord};
use crate::classifier::{evaluate, train, Evaluation, History, LabeledSet, Model, ModelConfig, TrainConfig};
use crate::error::{Error, Result};
use crate::features::{Condition, NormalizationStats, N_FEATURES};

/// Network and optimizer settings for the four ablation runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationConfig {
    pub channels: usize,
    pub n_residual_blocks: usize,
    pub kernel: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub feature_epochs: usize,
    pub raw_epochs: usize,
    pub seed: u64,
}

impl Default for AblationConfig {
    fn default() -> Self {
        let m = ModelConfig::default();
        let t = TrainConfig::default();
        Self {
            channels: m.channels,
            n_residual_blocks: m.n_residual_blocks,
            kernel: m.kernel,
            batch_size: t.batch_size,
            lr_start: t.lr_start,
            lr_end: t.lr_end,
            feature_epochs: t.epochs,
            raw_epochs: 12,
            seed: 0,
        }
    }
}

impl AblationConfig {
    pub fn model_config(&self, input_len: usize) -> ModelConfig {
        ModelConfig {
            input_len,
            channels: self.channels,
            n_residual_blocks: self.n_residual_blocks,
            n_classes: Condition::ALL.len(),
            kernel: self.kernel,
            seed: self.seed,
        }
    }

    pub fn train_config(&self, features: bool) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            lr_start: self.lr_start,
            lr_end: self.lr_end,
            epochs: if features { self.feature_epochs } else { self.raw_epochs },
            seed: self.seed,
        }
    }
}

/// One of the four input/denoising combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    pub features: bool,
    pub denoised: bool,
}

impl Variant {
    /// Report order: raw without/with denoising, then features without/with.
    pub const ALL: [Variant; 4] = [
        Variant { features: false, denoised: false },
        Variant { features: false, denoised: true },
        Variant { features: true, denoised: false },
        Variant { features: true, denoised: true },
    ];

    pub fn input_name(&self) -> &'static str {
        if self.features {
            "features"
        } else {
            "raw"
        }
    }

    pub fn denoising_name(&self) -> &'static str {
        if self.denoised {
            "on"
        } else {
            "off"
        }
    }

    /// Short identifier used in file names.
    pub fn slug(&self) -> String {
        format!("{}-{}", self.input_name(), if self.denoised { "denoised" } else { "plain" })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub variant: Variant,
    pub evaluation: Evaluation,
    pub history: History,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
    pub n_train: usize,
    pub n_test: usize,
    pub raw_len: usize,
    pub raw_decimation: RawDecimation,
}

/// Standardized network inputs for one variant; statistics come from `train` only.
pub fn labeled_sets(
    train: &[WindowRecord],
    test: &[WindowRecord],
    variant: Variant,
) -> Result<(LabeledSet, LabeledSet, NormalizationStats)> {
    let collect = |rows: &[WindowRecord]| -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
        let mut xs = Vec::with_capacity(rows.len());
        let mut ys = Vec::with_capacity(rows.len());
        for r in rows {
            let label = r
                .label
                .ok_or_else(|| Error::DegenerateDataset(format!("window {} has no label", r.window_index)))?;
            xs.push(r.network_input(variant.features, variant.denoised).to_vec());
            ys.push(label.index());
        }
        Ok((xs, ys))
    };
    let (train_x, train_y) = collect(train)?;
    let (test_x, test_y) = collect(test)?;
    let stats = NormalizationStats::fit(&train_x)?;
    let norm = |xs: Vec<Vec<f64>>| xs.iter().map(|x| stats.apply(x)).collect::<Result<Vec<_>>>();
    let train_set = LabeledSet::new(norm(train_x)?, train_y)?;
    let test_set = LabeledSet::new(norm(test_x)?, test_y)?;
    Ok((train_set, test_set, stats))
}

/// Trains and evaluates one network per input/denoising combination.
pub fn run_ablation(
    train_rows: &[WindowRecord],
    test_rows: &[WindowRecord],
    cfg: &AblationConfig,
) -> Result<AblationReport> {
    run_variants(train_rows, test_rows, cfg, &Variant::ALL)
}

/// Like [`run_ablation`] but limited to `variants`, in the order given.
pub fn run_variants(
    train_rows: &[WindowRecord],
    test_rows: &[WindowRecord],
    cfg: &AblationConfig,
    variants: &[Variant],
) -> Result<AblationReport> {
    if test_rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let raw_len = train_rows.first().map(|r| r.raw_input.len()).unwrap_or(0);
    let mut rows = Vec::with_capacity(variants.len());
    for &variant in variants {
        let (tr, te, stats) = labeled_sets(train_rows, test_rows, variant)?;
        let input_len = if variant.features { N_FEATURES } else { raw_len };
        let mc = cfg.model_config(input_len);
        let (model, history) = train(&tr, Some(&te), stats, &mc, &cfg.train_config(variant.features))?;
        let evaluation = evaluate(&model, &te)?;
        rows.push(AblationRow {
            variant,
            evaluation,
            history,
            model,
        });
    }
    Ok(AblationReport {
        rows,
        n_train: train_rows.len(),
        n_test: test_rows.len(),
        raw_len,
        raw_decimation: RawDecimation::default(),
    })
}

impl AblationReport {
    pub fn accuracy(&self, features: bool, denoised: bool) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.variant == Variant { features, denoised })
            .map(|r| r.evaluation.accuracy)
    }

    /// Whether the features+denoising row is at least as accurate as every other row.
    pub fn denoised_features_lead(&self) -> bool {
        let best = self.accuracy(true, true).unwrap_or(f64::NEG_INFINITY);
        self.rows.iter().all(|r| r.evaluation.accuracy <= best)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("input,denoising,accuracy,train_windows,test_windows\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.variant.input_name(),
                r.variant.denoising_name(),
                r.evaluation.accuracy,
                self.n_train,
                self.n_test
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Fault diagnosis accuracy by input type");
        let _ = writeln!(s, "train windows: {}, test windows: {}", self.n_train, self.n_test);
        let _ = writeln!(
            s,
            "raw inputs are decimated to {} samples per window ({})",
            self.raw_len,
            match self.raw_decimation {
                RawDecimation::BlockMean => "block means",
                RawDecimation::Stride => "strided samples",
            }
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<10} {:<10} {:>9}", "input", "denoising", "accuracy");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<10} {:<10} {:>8.2}%",
                r.variant.input_name(),
                r.variant.denoising_name(),
                100.0 * r.evaluation.accuracy
            );
        }
        for r in &self.rows {
            let _ = writeln!(s);
            let _ = writeln!(
                s,
                "confusion matrix, {} input, denoising {} (rows = true class)",
                r.variant.input_name(),
                r.variant.denoising_name()
            );
            let _ = write!(s, "{:<8}", "");
            for c in Condition::ALL {
                let _ = write!(s, "{:>8}", c.label());
            }
            let _ = writeln!(s);
            for (c, row) in Condition::ALL.iter().zip(&r.evaluation.confusion) {
                let _ = write!(s, "{:<8}", c.label());
                for v in row {
                    let _ = write!(s, "{v:>8}");
                }
                let _ = writeln!(s);
            }
        }
        s
    }
}
