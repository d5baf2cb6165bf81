//! Training run configuration. Every tunable constant of the network,
//! optimizer and scheduler has an explicit key so a run file documents the
//! whole recipe.

use std::path::Path;

use anyhow::{bail, Context as _};
use hfclass_nn::{AdamConfig, Arch, ArchConfig, PlateauConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    pub fn from_bytes(n: usize) -> Self {
        if n == 8 {
            Precision::F64
        } else {
            Precision::F32
        }
    }
}

/// Unset rates take the architecture's defaults; see `TrainFile::resolve`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conv_dropout: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head_dropout: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamSection {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlateauSection {
    pub factor: f64,
    pub patience: usize,
    pub min_delta: f64,
    pub min_lr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainFile {
    pub arch: String,
    pub precision: Precision,
    pub model: ModelSection,
    pub train: TrainSection,
    pub adam: AdamSection,
    pub plateau: PlateauSection,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            batch_size: t.batch_size,
            epochs: t.epochs,
            seed: t.seed,
        }
    }
}

impl Default for AdamSection {
    fn default() -> Self {
        let a = AdamConfig::default();
        AdamSection {
            lr: a.lr,
            beta1: a.beta1,
            beta2: a.beta2,
            eps: a.eps,
        }
    }
}

impl Default for PlateauSection {
    fn default() -> Self {
        let p = PlateauConfig::default();
        PlateauSection {
            factor: p.factor,
            patience: p.patience,
            min_delta: p.min_delta,
            min_lr: p.min_lr,
        }
    }
}

impl Default for TrainFile {
    fn default() -> Self {
        TrainFile {
            arch: Arch::ClassicalCnn.name().into(),
            precision: Precision::F32,
            model: ModelSection::default(),
            train: TrainSection::default(),
            adam: AdamSection::default(),
            plateau: PlateauSection::default(),
        }
    }
}

impl TrainFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid training config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn arch(&self) -> anyhow::Result<Arch> {
        Ok(self.arch.parse::<Arch>()?)
    }

    /// Fills unset dropout rates from the architecture defaults.
    pub fn resolve(&mut self) -> anyhow::Result<()> {
        let a = ArchConfig::for_arch(self.arch()?);
        self.model.conv_dropout.get_or_insert(a.conv_dropout);
        self.model.head_dropout.get_or_insert(a.head_dropout);
        Ok(())
    }

    pub fn arch_config(&self) -> anyhow::Result<ArchConfig> {
        let a = ArchConfig::for_arch(self.arch()?);
        Ok(ArchConfig {
            conv_dropout: self.model.conv_dropout.unwrap_or(a.conv_dropout),
            head_dropout: self.model.head_dropout.unwrap_or(a.head_dropout),
            ..a
        })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.train.batch_size,
            epochs: self.train.epochs,
            seed: self.train.seed,
            adam: AdamConfig {
                lr: self.adam.lr,
                beta1: self.adam.beta1,
                beta2: self.adam.beta2,
                eps: self.adam.eps,
            },
            plateau: PlateauConfig {
                factor: self.plateau.factor,
                patience: self.plateau.patience,
                min_delta: self.plateau.min_delta,
                min_lr: self.plateau.min_lr,
            },
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.arch()?;
        for (name, v) in [
            ("conv_dropout", self.model.conv_dropout),
            ("head_dropout", self.model.head_dropout),
        ]
        .into_iter()
        .filter_map(|(n, v)| Some((n, v?)))
        {
            if !(0.0..1.0).contains(&v) {
                bail!("model.{name} = {v} is not in [0, 1)");
            }
        }
        self.train_config().validate()?;
        Ok(())
    }
}

/// Hex SHA-256 of arbitrary bytes, used to tie reports to checkpoints.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
