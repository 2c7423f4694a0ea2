use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Model, ModelConfig};
use crate::error::{Error, Result};
use crate::features::NormalizationStats;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Tensor {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    config: ModelConfig,
    norm_stats: NormalizationStats,
    tensors: Vec<Tensor>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

/// JSON document with config, normalization statistics and row-major weight tensors.
pub fn model_to_json(m: &Model) -> Result<String> {
    let tensors = m
        .layout()
        .tensors(&m.config)
        .into_iter()
        .map(|(name, shape, range)| Tensor {
            name,
            shape,
            data: m.params[range].to_vec(),
        })
        .collect();
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        config: m.config,
        norm_stats: m.norm_stats.clone(),
        tensors,
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn model_from_json(text: &str) -> Result<Model> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if probe.version != MODEL_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(probe.version));
    }
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let mut m = Model::zeroed(file.config, file.norm_stats)?;
    let expected = m.layout().tensors(&file.config);
    if expected.len() != file.tensors.len() {
        return Err(Error::Format(format!(
            "model file has {} tensors, configuration implies {}",
            file.tensors.len(),
            expected.len()
        )));
    }
    for ((name, shape, range), t) in expected.into_iter().zip(file.tensors) {
        if t.name != name || t.shape != shape || t.data.len() != range.len() {
            return Err(Error::Format(format!("tensor '{}' does not match '{name}' {shape:?}", t.name)));
        }
        if t.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(format!("tensor '{name}' holds non-finite values")));
        }
        m.params[range].copy_from_slice(&t.data);
    }
    Ok(m)
}

pub fn save_model(m: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(m)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> Model {
        let stats = NormalizationStats {
            mean: (0..14).map(|i| i as f64 * 0.1).collect(),
            std: (0..14).map(|i| 1.0 + i as f64 / 7.0).collect(),
        };
        Model::new(ModelConfig { seed: 77, ..Default::default() }, stats).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = model();
        let text = model_to_json(&m).unwrap();
        let back = model_from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_json(&back).unwrap(), text);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x: Vec<f64> = (0..14).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let a = m.forward(&x).unwrap();
            let b = back.forward(&x).unwrap();
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = model();
        save_model(&m, &p).unwrap();
        assert_eq!(load_model(&p).unwrap(), m);
    }

    #[test]
    fn unknown_version_rejected() {
        let text = model_to_json(&model()).unwrap().replacen("\"version\": 1", "\"version\": 7", 1);
        assert_eq!(model_from_json(&text).unwrap_err(), Error::UnsupportedVersion(7));
    }
}
