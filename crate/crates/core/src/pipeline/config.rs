use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gaf::EncodeOptions;
use crate::ingest::SyntheticConfig;
use crate::nn::{SplitMode, TrainConfig};
use crate::stats::MethodChoice;
use crate::windowing::WindowSpec;

/// Window specs as `[p, j]` pairs.
pub type SpecList = Vec<[usize; 2]>;

pub fn raw_sweep_default() -> SpecList {
    vec![[512, 128], [512, 200], [256, 128]]
}

pub fn gaf_sweep_default() -> SpecList {
    vec![[200, 50], [150, 30], [512, 128]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub split: [f64; 3],
    pub split_mode: SplitMode,
    pub patience: Option<usize>,
    /// Subtract each raw window's mean before the 1D model sees it.
    pub center_windows: bool,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSettings {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            split: t.split,
            split_mode: t.split_mode,
            patience: t.patience,
            center_windows: true,
        }
    }
}

impl TrainSettings {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            split: self.split,
            split_mode: self.split_mode,
            patience: self.patience,
            seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub raw: SpecList,
    pub gaf: SpecList,
    /// Train on previously written archives instead of the specs above.
    pub archives: Vec<PathBuf>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            raw: raw_sweep_default(),
            gaf: gaf_sweep_default(),
            archives: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaritySettings {
    pub alpha: f64,
}

impl Default for StationaritySettings {
    fn default() -> Self {
        StationaritySettings { alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnovaSettings {
    /// Score table CSV; the bundled demo table when absent.
    pub scores: Option<PathBuf>,
    pub alpha: f64,
    pub method: MethodChoice,
}

impl Default for AnovaSettings {
    fn default() -> Self {
        AnovaSettings {
            scores: None,
            alpha: 0.05,
            method: MethodChoice::Auto,
        }
    }
}

/// Everything a command needs. Loaded from TOML; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Session manifest CSV; the synthetic corpus when absent.
    pub manifest: Option<PathBuf>,
    pub synthetic: SyntheticConfig,
    /// Specs used by `segment` and `encode`.
    pub windows: SpecList,
    pub encode: EncodeOptions,
    pub train: TrainSettings,
    pub sweep: SweepSettings,
    pub stationarity: StationaritySettings,
    pub anova: AnovaSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: SyntheticConfig::default().seed,
            manifest: None,
            synthetic: SyntheticConfig::default(),
            windows: vec![[512, 128]],
            encode: EncodeOptions::default(),
            train: TrainSettings::default(),
            sweep: SweepSettings::default(),
            stationarity: StationaritySettings::default(),
            anova: AnovaSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parse a TOML file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| e.in_file(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.manifest.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.anova.scores.as_mut() {
            resolve(p);
        }
        cfg.sweep.archives.iter_mut().for_each(resolve);
        Ok(cfg)
    }

    /// The synthetic generator settings under the run seed.
    pub fn synthetic_config(&self) -> SyntheticConfig {
        SyntheticConfig {
            seed: self.seed,
            ..self.synthetic.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in self
            .manifest
            .iter()
            .chain(self.anova.scores.iter())
            .chain(self.sweep.archives.iter())
        {
            if !p.exists() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        if self.sweep.raw.is_empty() && self.sweep.gaf.is_empty() && self.sweep.archives.is_empty()
        {
            return Err(Error::Config("sweep list is empty".into()));
        }
        for [p, j] in self
            .windows
            .iter()
            .chain(&self.sweep.raw)
            .chain(&self.sweep.gaf)
        {
            WindowSpec::new(*p, *j)?;
        }
        if self.manifest.is_none() {
            self.synthetic_config().validate()?;
        }
        self.train.train_config(self.seed).validate()
    }

    /// SHA-256 of the canonical JSON form of this config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_toml_keeps_defaults() {
        let cfg = RunConfig::from_toml_str(
            "seed = 3\n[train]\nepochs = 2\n[encode]\nkind = \"gasf\"\npaa_size = 16\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.train.epochs, 2);
        assert_eq!(cfg.train.batch_size, 32);
        assert_eq!(cfg.encode.paa_size, Some(16));
        assert_eq!(cfg.sweep.raw, raw_sweep_default());
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(RunConfig::from_toml_str("seeds = 3\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn missing_path_fails_validation() {
        let cfg = RunConfig {
            manifest: Some("/definitely/not/here.csv".into()),
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
