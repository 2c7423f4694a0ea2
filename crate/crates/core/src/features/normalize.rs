use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::error::{Error, Result};

/// Per-column location and scale, frozen from the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormalizationStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Column statistics (population std) of a row-major matrix.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::TooFewRows {
                needed: 2,
                got: rows.len(),
            });
        }
        let dim = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch(format!(
                "row of {} columns in a {dim}-column matrix",
                bad.len()
            )));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        let mut std = vec![0.0; dim];
        for j in 0..dim {
            let first = rows[0][j];
            if rows.iter().all(|r| r[j] == first) {
                return Err(Error::ConstantFeature(j));
            }
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n;
            let s = var.sqrt();
            if !(s > 0.0 && s.is_finite() && m.is_finite()) {
                return Err(Error::ConstantFeature(j));
            }
            mean[j] = m;
            std[j] = s;
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check(row)?;
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }

    pub fn invert(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check(row)?;
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(z, (m, s))| z * s + m)
            .collect())
    }

    fn check(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "row has {} values, statistics have {}",
                row.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

fn with_values(fv: &FeatureVector, v: Vec<f64>) -> FeatureVector {
    let mut out = fv.clone();
    out.values.copy_from_slice(&v);
    out
}

/// Standardizes every feature column to zero mean and unit population std.
pub fn normalize(rows: &[FeatureVector]) -> Result<(Vec<FeatureVector>, NormalizationStats)> {
    let matrix: Vec<Vec<f64>> = rows.iter().map(|r| r.values.to_vec()).collect();
    let stats = NormalizationStats::fit(&matrix)?;
    let out = rows
        .iter()
        .zip(&matrix)
        .map(|(r, m)| stats.apply(m).map(|v| with_values(r, v)))
        .collect::<Result<_>>()?;
    Ok((out, stats))
}

/// Inference-side counterpart of [`normalize`].
pub fn apply_normalization(row: &FeatureVector, stats: &NormalizationStats) -> Result<FeatureVector> {
    Ok(with_values(row, stats.apply(&row.values)?))
}

pub fn denormalize(row: &FeatureVector, stats: &NormalizationStats) -> Result<FeatureVector> {
    Ok(with_values(row, stats.invert(&row.values)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(base: f64) -> FeatureVector {
        let mut v = [0.0; 14];
        for (i, x) in v.iter_mut().enumerate() {
            *x = base * (i as f64 + 1.0) + (base * 3.1).sin() * 100.0;
        }
        FeatureVector::new(v, None, 0)
    }

    #[test]
    fn columns_are_standardized() {
        let rows: Vec<_> = (0..37).map(|i| fv(i as f64 * 0.37 - 2.0)).collect();
        let (out, stats) = normalize(&rows).unwrap();
        for j in 0..14 {
            let m = out.iter().map(|r| r.values[j]).sum::<f64>() / 37.0;
            let s = (out.iter().map(|r| (r.values[j] - m).powi(2)).sum::<f64>() / 37.0).sqrt();
            assert!(m.abs() < 1e-9 && (s - 1.0).abs() < 1e-9, "col {j}: {m} {s}");
        }
        for (r, n) in rows.iter().zip(&out) {
            let back = denormalize(n, &stats).unwrap();
            for (a, b) in back.values.iter().zip(&r.values) {
                assert!((a - b).abs() < 1e-9);
            }
            assert_eq!(&apply_normalization(r, &stats).unwrap(), n);
        }
    }

    #[test]
    fn constant_column_is_an_error() {
        let mut rows: Vec<_> = (0..5).map(|i| fv(i as f64)).collect();
        for r in rows.iter_mut() {
            r.values[6] = 0.1;
        }
        assert_eq!(normalize(&rows).unwrap_err(), Error::ConstantFeature(6));
    }

    #[test]
    fn needs_two_rows() {
        assert!(matches!(normalize(&[fv(1.0)]), Err(Error::TooFewRows { .. })));
    }
}
