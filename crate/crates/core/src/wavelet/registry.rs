use once_cell::sync::Lazy;
use serde::Deserialize;

use crate::error::{Error, Result};

const BUILTIN_REGISTRY: &str = include_str!("../../assets/wavelets.toml");
const REGISTRY_VERSION: u32 = 1;

/// Analysis/synthesis filter quadruple for one discrete wavelet.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FilterBank {
    pub name: String,
    pub family: String,
    pub orthogonal: bool,
    pub dec_lo: Vec<f64>,
    pub dec_hi: Vec<f64>,
    pub rec_lo: Vec<f64>,
    pub rec_hi: Vec<f64>,
}

impl FilterBank {
    pub fn filter_len(&self) -> usize {
        self.dec_lo.len()
    }

    /// Numeric order parsed from the name, e.g. `bior3.1` → `[3, 1]`.
    pub fn order(&self) -> Vec<u32> {
        parse_order(&self.name, &self.family)
    }

    fn validate(&self) -> Result<()> {
        let f = self.dec_lo.len();
        let bad = |why: &str| Err(Error::BadRegistry(format!("{}: {why}", self.name)));
        if f < 2 {
            return bad("filters need at least two taps");
        }
        if [&self.dec_hi, &self.rec_lo, &self.rec_hi]
            .iter()
            .any(|v| v.len() != f)
        {
            return bad("filters differ in length");
        }
        let all = [&self.dec_lo, &self.dec_hi, &self.rec_lo, &self.rec_hi];
        if all.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return bad("non-finite coefficient");
        }
        if !self.name.starts_with(&self.family) {
            return bad("name does not start with its family");
        }
        Ok(())
    }
}

fn parse_order(name: &str, family: &str) -> Vec<u32> {
    name[family.len().min(name.len())..]
        .split('.')
        .map(|p| p.parse().unwrap_or(u32::MAX))
        .collect()
}

#[derive(Deserialize)]
struct RegistryFile {
    version: u32,
    #[serde(default)]
    wavelet: Vec<FilterBank>,
}

/// Named collection of filter banks, ordered by `(family, order)`.
#[derive(Debug, Clone)]
pub struct Registry {
    banks: Vec<FilterBank>,
}

static BUILTIN: Lazy<Registry> = Lazy::new(|| {
    Registry::from_toml_str(BUILTIN_REGISTRY).expect("embedded wavelet registry is valid")
});

impl Registry {
    /// The embedded default registry (92 wavelets).
    pub fn builtin() -> &'static Registry {
        &BUILTIN
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: RegistryFile =
            toml::from_str(text).map_err(|e| Error::BadRegistry(e.to_string()))?;
        if file.version != REGISTRY_VERSION {
            return Err(Error::BadRegistry(format!(
                "unsupported registry version {}",
                file.version
            )));
        }
        Self::from_banks(file.wavelet)
    }

    pub fn from_banks(mut banks: Vec<FilterBank>) -> Result<Self> {
        for b in &banks {
            b.validate()?;
        }
        banks.sort_by(|a, b| (&a.family, a.order()).cmp(&(&b.family, b.order())));
        if let Some(w) = banks.windows(2).find(|w| w[0].name == w[1].name) {
            return Err(Error::BadRegistry(format!("duplicate wavelet {}", w[0].name)));
        }
        Ok(Self { banks })
    }

    /// Adds the banks of another registry file, replacing entries with equal names.
    pub fn extended_with(&self, text: &str) -> Result<Self> {
        let extra = Self::from_toml_str(text)?;
        let mut banks: Vec<FilterBank> = self
            .banks
            .iter()
            .filter(|b| extra.get(&b.name).is_err())
            .cloned()
            .collect();
        banks.extend(extra.banks);
        Self::from_banks(banks)
    }

    pub fn banks(&self) -> &[FilterBank] {
        &self.banks
    }

    pub fn len(&self) -> usize {
        self.banks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.banks.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.banks.iter().map(|b| b.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&FilterBank> {
        self.banks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::UnknownWavelet(name.to_string()))
    }

    /// Banks whose names match any of the comma-separated glob patterns
    /// (`*` and `?` wildcards), in registry order.
    pub fn select(&self, patterns: &str) -> Result<Vec<FilterBank>> {
        let pats: Vec<&str> = patterns
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .collect();
        let picked: Vec<FilterBank> = self
            .banks
            .iter()
            .filter(|b| pats.iter().any(|p| glob_match(p, &b.name)))
            .cloned()
            .collect();
        if picked.is_empty() {
            return Err(Error::EmptyBank);
        }
        Ok(picked)
    }
}

/// Look up a wavelet in the built-in registry.
pub fn load_filter_bank(name: &str) -> Result<FilterBank> {
    Registry::builtin().get(name).cloned()
}

/// Names of the built-in registry in `(family, order)` order.
pub fn list_bank() -> Vec<String> {
    Registry::builtin().names()
}

fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}
