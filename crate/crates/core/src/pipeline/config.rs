use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AblationConfig, ProcessingConfig};
use crate::error::{Error, Result};
use crate::features::{BearingGeometry, Condition, DEFAULT_OVERLAP_FRAC, DEFAULT_SHAFT_HZ, DEFAULT_WINDOW_S};
use crate::synth::DatasetSpec;

pub const CONFIG_VERSION: u32 = 1;
pub const MANIFEST_VERSION: u32 = 1;

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    #[derive(Deserialize)]
    struct Probe {
        version: Option<u32>,
    }
    let probe: Probe = toml::from_str(text).map_err(|e| Error::Format(format!("{what}: {e}")))?;
    match probe.version {
        Some(1) => {}
        Some(v) => return Err(Error::UnsupportedVersion(v)),
        None => return Err(Error::Format(format!("{what}: missing 'version'"))),
    }
    toml::from_str(text).map_err(|e| Error::Format(format!("{what}: {e}")))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Settings of a full run: windowing, per-window processing, networks, and the
/// synthetic benchmark used when no manifest is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub version: u32,
    pub window_s: f64,
    pub overlap_frac: f64,
    /// Fraction of each class's manifest recordings held out for testing when
    /// entries carry no explicit split.
    pub test_fraction: f64,
    pub output_dir: Option<PathBuf>,
    pub processing: ProcessingConfig,
    pub model: AblationConfig,
    pub synth: DatasetSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            window_s: DEFAULT_WINDOW_S,
            overlap_frac: DEFAULT_OVERLAP_FRAC,
            test_fraction: 0.2,
            output_dir: None,
            processing: ProcessingConfig::default(),
            model: AblationConfig::default(),
            synth: DatasetSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: Self = parse_toml(text, "config")?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read_text(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::UnsupportedVersion(self.version));
        }
        crate::features::window_geometry(self.synth.sample_rate_hz, self.window_s, self.overlap_frac)?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::BadSpec(format!("test_fraction {} outside (0, 1)", self.test_fraction)));
        }
        let m = &self.model;
        if m.channels == 0 || m.kernel % 2 == 0 || m.batch_size == 0 || m.feature_epochs == 0 || m.raw_epochs == 0 {
            return Err(Error::BadSpec("model settings out of range".into()));
        }
        if !(m.lr_end > 0.0 && m.lr_start >= m.lr_end) {
            return Err(Error::BadSpec("learning rates must satisfy start >= end > 0".into()));
        }
        self.processing.validate()?;
        self.synth.validate()
    }

    /// Applies one seed to data synthesis, initialization and shuffling.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.synth.seed = seed;
        self.model.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Test,
}

/// One labeled recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Audio path, relative to the manifest file unless absolute.
    pub path: PathBuf,
    pub label: Condition,
    #[serde(default = "default_shaft_hz")]
    pub shaft_hz: f64,
    /// Key into the manifest's geometry table; the built-in default when absent.
    #[serde(default)]
    pub geometry: Option<String>,
    #[serde(default)]
    pub split: Option<SplitTag>,
}

fn default_shaft_hz() -> f64 {
    DEFAULT_SHAFT_HZ
}

/// List of labeled recordings for a run over real audio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    #[serde(default)]
    pub geometries: BTreeMap<String, BearingGeometry>,
    #[serde(rename = "entry", default)]
    pub entries: Vec<ManifestEntry>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut m: Self = parse_toml(text, "manifest")?;
        m.base_dir = base_dir.to_path_buf();
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&read_text(path)?, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::UnsupportedVersion(self.version));
        }
        if self.entries.is_empty() {
            return Err(Error::BadSpec("manifest lists no recordings".into()));
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(&e.path) {
                return Err(Error::BadSpec(format!("duplicate manifest path {}", e.path.display())));
            }
            if let Some(g) = &e.geometry {
                self.geometries
                    .get(g)
                    .ok_or_else(|| Error::BadSpec(format!("unknown geometry '{g}'")))?
                    .validate()?;
            }
        }
        Ok(())
    }

    pub fn resolve(&self, e: &ManifestEntry) -> PathBuf {
        if e.path.is_absolute() {
            e.path.clone()
        } else {
            self.base_dir.join(&e.path)
        }
    }

    pub fn geometry_of(&self, e: &ManifestEntry) -> BearingGeometry {
        e.geometry
            .as_ref()
            .and_then(|g| self.geometries.get(g).copied())
            .unwrap_or_default()
    }

    /// Paths listed in the manifest that do not exist on disk.
    pub fn missing_files(&self) -> Vec<PathBuf> {
        self.entries
            .iter()
            .map(|e| self.resolve(e))
            .filter(|p| !p.is_file())
            .collect()
    }

    /// Train/test assignment per entry. Explicit tags win; untagged recordings
    /// of each class are split in manifest order, the last `test_fraction` held out.
    pub fn assign_splits(&self, test_fraction: f64) -> Vec<SplitTag> {
        let mut out: Vec<Option<SplitTag>> = self.entries.iter().map(|e| e.split).collect();
        for c in Condition::ALL {
            let idx: Vec<usize> = self
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| e.label == c && e.split.is_none())
                .map(|(i, _)| i)
                .collect();
            let n_test = if idx.len() >= 2 {
                ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len() - 1)
            } else {
                0
            };
            for (k, &i) in idx.iter().enumerate() {
                out[i] = Some(if k >= idx.len() - n_test {
                    SplitTag::Test
                } else {
                    SplitTag::Train
                });
            }
        }
        out.into_iter().map(|s| s.unwrap_or(SplitTag::Train)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let c = PipelineConfig::default();
        let text = c.to_toml_string().unwrap();
        assert_eq!(PipelineConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn partial_config_uses_defaults() {
        let c = PipelineConfig::from_toml_str("version = 1\n[processing]\nenvelope = true\n").unwrap();
        assert!(c.processing.envelope);
        assert_eq!(c.processing.dwt_level, 5);
        assert_eq!(c.synth.n_train, 3840);
    }

    #[test]
    fn version_and_field_errors() {
        assert_eq!(
            PipelineConfig::from_toml_str("version = 2\n").unwrap_err(),
            Error::UnsupportedVersion(2)
        );
        assert!(matches!(PipelineConfig::from_toml_str("window_s = 1.0\n"), Err(Error::Format(_))));
        assert!(matches!(
            PipelineConfig::from_toml_str("version = 1\nwindow_len = 3\n"),
            Err(Error::Format(_))
        ));
        assert!(PipelineConfig::from_toml_str("version = 1\noverlap_frac = 1.5\n").is_err());
    }

    #[test]
    fn manifest_parsing_and_splits() {
        let text = r#"
version = 1
[geometries.small]
n_balls = 8
ball_diameter_mm = 6.0
pitch_diameter_mm = 30.0

[[entry]]
path = "a.wav"
label = "normal"
[[entry]]
path = "b.wav"
label = "normal"
geometry = "small"
[[entry]]
path = "c.wav"
label = "normal"
[[entry]]
path = "d.wav"
label = "OR-1.0"
split = "test"
[[entry]]
path = "e.wav"
label = "OR-1.0"
"#;
        let m = Manifest::from_toml_str(text, Path::new("/data")).unwrap();
        assert_eq!(m.resolve(&m.entries[0]), PathBuf::from("/data/a.wav"));
        assert_eq!(m.geometry_of(&m.entries[1]).n_balls, 8);
        assert_eq!(m.geometry_of(&m.entries[0]), BearingGeometry::default());
        use SplitTag::*;
        assert_eq!(m.assign_splits(0.2), vec![Train, Train, Test, Test, Train]);
        assert_eq!(m.missing_files().len(), 5);
    }

    #[test]
    fn manifest_rejects_bad_entries() {
        let dup = "version = 1\n[[entry]]\npath = \"a.wav\"\nlabel = \"normal\"\n[[entry]]\npath = \"a.wav\"\nlabel = \"IR-0.3\"\n";
        assert!(matches!(Manifest::from_toml_str(dup, Path::new(".")), Err(Error::BadSpec(_))));
        let label = "version = 1\n[[entry]]\npath = \"a.wav\"\nlabel = \"cage\"\n";
        assert!(Manifest::from_toml_str(label, Path::new(".")).is_err());
        let geo = "version = 1\n[[entry]]\npath = \"a.wav\"\nlabel = \"normal\"\ngeometry = \"x\"\n";
        assert!(matches!(Manifest::from_toml_str(geo, Path::new(".")), Err(Error::BadSpec(_))));
    }
}
