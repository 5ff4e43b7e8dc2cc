use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusId, StoreConfig};
use crate::dataset::PriorTransfers;
use crate::eval::{ExperimentConfig, ImportanceAggregate};
use crate::features::FeatureConfig;
use crate::graph::SnapshotMode;
use crate::io_util::sha256_hex;
use crate::models::ModelKind;
use crate::phrase::MinerConfig;
use crate::registry::RegistryConfig;
use crate::synth::ScenarioConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpora_dir: PathBuf,
    pub output_dir: PathBuf,
    pub positive_lexicon: Option<PathBuf>,
    pub negative_lexicon: Option<PathBuf>,
    pub easy_words: Option<PathBuf>,
    /// `code<TAB>field` lines.
    pub taxonomy: Option<PathBuf>,
    /// Extra stoplists on top of the bundled ones.
    pub stoplists: Vec<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            corpora_dir: PathBuf::from("corpora"),
            output_dir: PathBuf::from("out"),
            positive_lexicon: None,
            negative_lexicon: None,
            easy_words: None,
            taxonomy: None,
            stoplists: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    /// Skip the burn-in search and use this cutoff year.
    pub burn_in_cutoff: Option<i32>,
    /// Engineering field name for a custom `paths.taxonomy`.
    pub engineering_field: String,
}

impl Default for StudySection {
    fn default() -> Self {
        StudySection {
            burn_in_cutoff: None,
            engineering_field: "engineering".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    pub mode: SnapshotMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub test_cutoff: i32,
    pub window: i32,
    pub history: usize,
    pub n_train: usize,
    pub prior: PriorTransfers,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            test_cutoff: 2014,
            window: 3,
            history: 5,
            n_train: 3,
            prior: PriorTransfers::Keep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub models: Vec<ModelKind>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            models: vec![ModelKind::Lr, ModelKind::Gru],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivitySection {
    pub model: ModelKind,
    pub history: Vec<i32>,
    pub window: Vec<i32>,
    pub cutoff: Vec<i32>,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        SensitivitySection {
            model: ModelKind::Lr,
            history: vec![1, 2, 3, 5, 7],
            window: vec![1, 2, 3],
            cutoff: vec![2011, 2012, 2013, 2014, 2015],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldsSection {
    pub model: ModelKind,
    pub importance: ImportanceAggregate,
}

impl Default for FieldsSection {
    fn default() -> Self {
        FieldsSection {
            model: ModelKind::Lr,
            importance: ImportanceAggregate::MeanAbs,
        }
    }
}

/// One config file for every stage. `seed` drives the generator and the
/// models; the `[synth]` and `[experiment.train]` seeds are overwritten by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Independent training repeats reported by `evaluate`.
    pub repeat: usize,
    /// Worker cap; all cores when absent.
    pub threads: Option<usize>,
    pub target: CorpusId,
    pub paths: Paths,
    pub store: StoreConfig,
    pub synth: ScenarioConfig,
    pub miner: MinerConfig,
    pub registry: RegistryConfig,
    pub study: StudySection,
    pub graph: GraphSection,
    pub features: FeatureConfig,
    pub split: SplitSection,
    pub model: ModelSection,
    pub experiment: ExperimentConfig,
    pub sensitivity: SensitivitySection,
    pub fields: FieldsSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            repeat: 1,
            threads: None,
            target: CorpusId::Patents,
            paths: Paths::default(),
            store: StoreConfig::default(),
            synth: ScenarioConfig::demo(),
            miner: MinerConfig::default(),
            registry: RegistryConfig::default(),
            study: StudySection::default(),
            graph: GraphSection::default(),
            features: FeatureConfig::default(),
            split: SplitSection::default(),
            model: ModelSection::default(),
            experiment: ExperimentConfig::default(),
            sensitivity: SensitivitySection::default(),
            fields: FieldsSection::default(),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Sets `a.b.c = value` in a TOML table. The value is parsed as TOML and
/// falls back to a plain string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{assignment}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(config_err(format!("bad override key `{key}`")));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("override `{key}`: `{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl PipelineConfig {
    pub fn from_toml(contents: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = contents.parse().map_err(config_err)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut config: PipelineConfig = table.try_into().map_err(config_err)?;
        config.synth.seed = config.seed;
        config.experiment.train.seed = config.seed;
        config.validate()?;
        Ok(config)
    }

    /// Reads a config file; relative paths are resolved against its directory.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let contents = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let mut config = PipelineConfig::from_toml(&contents, overrides)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.paths.resolve(base);
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeat == 0 {
            return Err(config_err("repeat must be >= 1"));
        }
        if self.threads == Some(0) {
            return Err(config_err("threads must be >= 1"));
        }
        if self.target == CorpusId::Papers {
            return Err(config_err("target must be patents or trials"));
        }
        if self.model.models.is_empty() {
            return Err(config_err("model.models is empty"));
        }
        if self.split.window < 1 || self.split.history < 1 || self.split.n_train < 1 {
            return Err(config_err("split window, history and n_train must be >= 1"));
        }
        self.experiment.train.validate().map_err(config_err)?;
        self.synth.validate().map_err(config_err)?;
        Ok(())
    }

    /// Digest of everything that affects results: paths and the thread cap
    /// are left out.
    pub fn digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("serializes");
        let obj = value.as_object_mut().expect("object");
        obj.remove("paths");
        obj.remove("threads");
        sha256_hex(value.to_string().as_bytes())
    }

    pub fn run_dir(&self) -> PathBuf {
        self.paths.output_dir.join(format!("run-{}", &self.digest()[..12]))
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpora_dir);
        fix(&mut self.output_dir);
        for p in [&mut self.positive_lexicon, &mut self.negative_lexicon, &mut self.easy_words, &mut self.taxonomy]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        self.stoplists.iter_mut().for_each(fix);
    }
}
