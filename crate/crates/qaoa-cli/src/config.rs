//! Experiment configuration: a sectioned key-value file (TOML grammar) with
//! unknown keys rejected, plus `--override section.key=value` patches.
//!
//! Every run stamps the effective config and its SHA-256 into the metadata
//! sidecar, so any result row is reconstructible from the sidecar alone.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub corpus: CorpusConfig,
    pub qaoa: QaoaConfig,
    pub init: InitConfig,
    pub optimiser: OptimiserConfig,
    pub gnn: GnnTrainConfig,
    pub neural: NeuralConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            corpus: CorpusConfig::default(),
            qaoa: QaoaConfig::default(),
            init: InitConfig::default(),
            optimiser: OptimiserConfig::default(),
            gnn: GnnTrainConfig::default(),
            neural: NeuralConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusConfig {
    pub n: usize,
    pub k: usize,
    pub count: usize,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self { n: 12, k: 3, count: 20, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct QaoaConfig {
    /// Fixed depth; ignored when `depth_rule` is set.
    pub p: usize,
    /// Depth as a function of size: "3n/4" or "n/2".
    pub depth_rule: Option<String>,
    pub epochs: usize,
    pub repetitions: usize,
    /// Angle initialisation: "xavier", "tqa" or "zero".
    pub angles: String,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        Self { p: 1, depth_rule: None, epochs: 100, repetitions: 1, angles: "xavier".into() }
    }
}

impl QaoaConfig {
    pub fn depth_for(&self, n: usize) -> Result<usize, CliError> {
        match self.depth_rule.as_deref() {
            None => Ok(self.p),
            Some("3n/4") => Ok((3 * n / 4).max(1)),
            Some("n/2") => Ok((n / 2).max(1)),
            Some(other) => Err(CliError::Config(format!("unknown depth rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct InitConfig {
    /// "cold", "tqa", "gw", "gnn" or "file".
    pub method: String,
    pub epsilon: f64,
    pub dt: f64,
    pub gw_rounds: usize,
    /// GNN checkpoint path for method = "gnn".
    pub checkpoint: Option<String>,
    /// Warm-start file for method = "file".
    pub warmstart_file: Option<String>,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            method: "cold".into(),
            epsilon: qaoa_core::init::DEFAULT_EPSILON,
            dt: qaoa_core::init::DEFAULT_TQA_DT,
            gw_rounds: 50,
            checkpoint: None,
            warmstart_file: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OptimiserConfig {
    /// "sgd", "adam", "rmsprop", "nelder-mead", "qng", "mgd", "1-spsa",
    /// "2-spsa" or "qn-spsa".
    pub name: String,
    pub lr: f64,
    pub lambda: f64,
    pub radius: f64,
    pub samples: Option<usize>,
    pub spsa_eps: f64,
    pub smoothing: f64,
    pub eig_floor: f64,
    pub drop_half_prefactor: bool,
    pub nm_step: f64,
}

impl Default for OptimiserConfig {
    fn default() -> Self {
        Self {
            name: "adam".into(),
            lr: 0.05,
            lambda: 1e-3,
            radius: 0.1,
            samples: None,
            spsa_eps: 0.1,
            smoothing: 0.9,
            eig_floor: 1e-3,
            drop_half_prefactor: false,
            nm_step: 0.25,
        }
    }
}

impl OptimiserConfig {
    pub fn build(&self) -> Result<qaoa_core::optim::Optimiser, CliError> {
        use qaoa_core::optim::{MgdConfig, Optimiser, SpsaConfig, SpsaVariant};
        let spsa = |variant: SpsaVariant| {
            Optimiser::Spsa(SpsaConfig {
                variant,
                eps: self.spsa_eps,
                lr: self.lr,
                smoothing: self.smoothing,
                eig_floor: self.eig_floor,
                drop_half_prefactor: self.drop_half_prefactor,
            })
        };
        Ok(match self.name.as_str() {
            "sgd" => Optimiser::Sgd { lr: self.lr },
            "adam" => Optimiser::Adam { lr: self.lr },
            "rmsprop" => Optimiser::RmsProp { lr: self.lr },
            "nelder-mead" => Optimiser::NelderMead { init_step: self.nm_step },
            "qng" => Optimiser::Qng { lr: self.lr, lambda: self.lambda },
            "mgd" => Optimiser::Mgd(MgdConfig { radius: self.radius, samples: self.samples, lr: self.lr }),
            "1-spsa" => spsa(SpsaVariant::One),
            "2-spsa" => spsa(SpsaVariant::Two),
            "qn-spsa" => spsa(SpsaVariant::Qn),
            other => return Err(CliError::Config(format!("unknown optimiser {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GnnTrainConfig {
    pub arch: String,
    pub width: usize,
    pub hops: usize,
    pub layers: usize,
    pub train_count: usize,
    pub train_epochs: usize,
    pub train_lr: f64,
    /// Mixed-size training: sizes drawn uniformly from multiples
    /// 1x..=size_multiples of the corpus size.
    pub size_multiples: usize,
}

impl Default for GnnTrainConfig {
    fn default() -> Self {
        Self {
            arch: "lgnn".into(),
            width: 16,
            hops: 3,
            layers: 8,
            train_count: 300,
            train_epochs: 60,
            train_lr: 1e-3,
            size_multiples: 1,
        }
    }
}

impl GnnTrainConfig {
    pub fn model_config(&self) -> Result<qaoa_core::gnn::GnnConfig, CliError> {
        let arch = qaoa_core::gnn::Arch::parse(&self.arch)
            .ok_or_else(|| CliError::Config(format!("unknown gnn arch {:?}", self.arch)))?;
        Ok(qaoa_core::gnn::GnnConfig { arch, width: self.width, hops: self.hops, layers: self.layers })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NeuralConfig {
    pub rl_iterations: usize,
    pub rl_episodes: usize,
    pub rl_horizon: usize,
    pub rl_lr: f64,
    pub rl_lr_decay: bool,
    pub rl_max_steps: usize,
    pub meta_epochs: usize,
    pub meta_unroll: usize,
    pub meta_lr: f64,
    pub meta_steps: usize,
    pub handoff_lr: f64,
}

impl Default for NeuralConfig {
    fn default() -> Self {
        Self {
            rl_iterations: 400,
            rl_episodes: 16,
            rl_horizon: 32,
            rl_lr: 1e-3,
            rl_lr_decay: true,
            rl_max_steps: 16,
            meta_epochs: 400,
            meta_unroll: 15,
            meta_lr: 1e-2,
            meta_steps: 30,
            handoff_lr: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

impl ExperimentConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse: {e}")))
    }

    /// Apply `section.key=value` patches, then re-validate the whole config.
    pub fn apply_overrides(&self, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table = toml::Table::try_from(self).map_err(|e| CliError::Config(e.to_string()))?;
        for item in overrides {
            let (path, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override {item:?} is not key=value")))?;
            let (section, key) = path
                .split_once('.')
                .ok_or_else(|| CliError::Config(format!("override key {path:?} is not section.key")))?;
            let parsed: toml::Value = match value.parse::<i64>() {
                Ok(v) => toml::Value::Integer(v),
                Err(_) => match value.parse::<f64>() {
                    Ok(v) => toml::Value::Float(v),
                    Err(_) => match value {
                        "true" => toml::Value::Boolean(true),
                        "false" => toml::Value::Boolean(false),
                        other => toml::Value::String(other.to_string()),
                    },
                },
            };
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let section_table = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Config(format!("section {section:?} is not a table")))?;
            section_table.insert(key.to_string(), parsed);
        }
        let text = toml::to_string(&table).map_err(|e| CliError::Config(e.to_string()))?;
        Self::from_toml(&text)
    }

    /// Canonical serialisation used for hashing and the metadata sidecar.
    pub fn canonical_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn sha256(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_toml().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let text = cfg.canonical_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml("[corpus]\nn = 8\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn overrides_patch_and_revalidate() {
        let cfg = ExperimentConfig::default();
        let patched = cfg.apply_overrides(&["corpus.n=8".into(), "optimiser.name=sgd".into()]).unwrap();
        assert_eq!(patched.corpus.n, 8);
        assert_eq!(patched.optimiser.name, "sgd");
        assert!(cfg.apply_overrides(&["corpus.bogus=1".into()]).is_err());
        assert!(cfg.apply_overrides(&["nonsense".into()]).is_err());
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = ExperimentConfig::default();
        let b = a.apply_overrides(&["corpus.seed=99".into()]).unwrap();
        assert_ne!(a.sha256(), b.sha256());
        assert_eq!(a.sha256(), ExperimentConfig::default().sha256());
    }

    #[test]
    fn depth_rules() {
        let mut q = QaoaConfig::default();
        q.depth_rule = Some("3n/4".into());
        assert_eq!(q.depth_for(12).unwrap(), 9);
        q.depth_rule = Some("n/2".into());
        assert_eq!(q.depth_for(12).unwrap(), 6);
        q.depth_rule = Some("n^2".into());
        assert!(q.depth_for(12).is_err());
    }
}
