//! Run configuration (TOML) and ensemble specification files.

use std::path::{Path, PathBuf};

use ensnlg_core::aligner::{build_gazetteer, RuleSet, SynonymLexicon};
use ensnlg_core::augment::{PermutationConfig, SplitConfig};
use ensnlg_core::corpus::{Dataset, Domain};
use ensnlg_core::delex::DelexPolicy;
use ensnlg_core::ensemble::{Ensemble, Member};
use ensnlg_core::neural::{EncoderKind, Hyperparams};
use ensnlg_core::styleselect::SelectionPolicy;
use ensnlg_core::Gazetteer;
use serde::{Deserialize, Serialize};

use crate::checkpoint::load_checkpoint;
use crate::error::{NlgError, Result};
use crate::io::read_text;

pub const CONFIG_VERSION: u32 = 1;
pub const DATA_ROOT_ENV: &str = "ENSNLG_DATA_ROOT";
pub const CHECKPOINT_ROOT_ENV: &str = "ENSNLG_CHECKPOINT_ROOT";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub data: Option<PathBuf>,
    pub checkpoints: Option<PathBuf>,
    /// Synonym lexicon (`slot<TAB>value<TAB>phrase | phrase`).
    pub lexicons: Option<PathBuf>,
    /// Alignment rule file.
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelexConfig {
    pub domain: Domain,
    /// Slots delexicalized on top of the domain defaults.
    pub extra_slots: Vec<String>,
}

impl Default for DelexConfig {
    fn default() -> Self {
        Self { domain: Domain::E2e, extra_slots: Vec::new() }
    }
}

impl DelexConfig {
    pub fn policy(&self) -> DelexPolicy {
        self.extra_slots.iter().fold(DelexPolicy::default_for(self.domain), |p, s| p.delexicalizing(s))
    }
}

fn default_pool_k() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmodelSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub checkpoint: PathBuf,
    pub encoder: EncoderKind,
    pub epochs: usize,
    /// Length-penalty exponent; the checkpoint's own setting when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default = "default_pool_k")]
    pub pool_k: usize,
    #[serde(default)]
    pub max_len: Option<usize>,
    pub submodels: Vec<SubmodelSpec>,
}

impl EnsembleSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let spec: EnsembleSpec =
            toml::from_str(&read_text(path)?).map_err(|e| NlgError::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(spec.resolved(base))
    }

    fn resolved(mut self, base: &Path) -> Self {
        for s in &mut self.submodels {
            s.checkpoint = resolve(base, &s.checkpoint);
        }
        self
    }

    /// Loads every checkpoint, checking each against its declared encoder.
    pub fn load(&self) -> Result<Ensemble> {
        if self.submodels.is_empty() {
            return Err(NlgError::Config("ensemble needs at least one submodel".into()));
        }
        let mut members = Vec::new();
        let mut max_len = 0;
        for (i, s) in self.submodels.iter().enumerate() {
            let (model, _) = load_checkpoint(&s.checkpoint)?;
            let hyper = model.net.hyper().clone();
            if hyper.encoder != s.encoder {
                return Err(NlgError::Config(format!(
                    "submodel {i} declares encoder {} but {} holds {}",
                    s.encoder,
                    s.checkpoint.display(),
                    hyper.encoder
                )));
            }
            max_len = max_len.max(hyper.max_decode_len);
            let name = s.name.clone().unwrap_or_else(|| format!("{}-{}", s.encoder, i));
            members.push(Member { name, model, alpha: s.alpha.unwrap_or(hyper.length_penalty) });
        }
        Ok(Ensemble { members, pool_k: self.pool_k, max_len: self.max_len.unwrap_or(max_len) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub hyperparams: Hyperparams,
    #[serde(default)]
    pub delex: DelexConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub permutation: PermutationConfig,
    #[serde(default)]
    pub selection: SelectionPolicy,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: 1,
            paths: PathsConfig::default(),
            hyperparams: Hyperparams::default(),
            delex: DelexConfig::default(),
            split: SplitConfig::default(),
            permutation: PermutationConfig::default(),
            selection: SelectionPolicy::default(),
            ensemble: None,
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Parses without touching the file system.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| NlgError::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(NlgError::Config(format!("config version {} is not supported (expected {CONFIG_VERSION})", cfg.version)));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| NlgError::Config(e.to_string()))
    }

    /// Reads a config file, resolves relative paths against its directory,
    /// applies the path-root environment overrides and checks that every
    /// referenced input exists.
    pub fn load(path: &Path) -> Result<Self> {
        let cfg = Self::parse(&read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_with(base, |k| std::env::var_os(k).map(PathBuf::from))
    }

    pub fn resolve_with(mut self, base: &Path, env: impl Fn(&str) -> Option<PathBuf>) -> Result<Self> {
        let paths = &mut self.paths;
        if let Some(root) = env(DATA_ROOT_ENV) {
            paths.data = Some(root);
        }
        if let Some(root) = env(CHECKPOINT_ROOT_ENV) {
            paths.checkpoints = Some(root);
        }
        for p in [&mut paths.data, &mut paths.checkpoints, &mut paths.lexicons, &mut paths.rules].into_iter().flatten() {
            *p = resolve(base, p);
        }
        for p in [&paths.data, &paths.lexicons, &paths.rules].into_iter().flatten() {
            if !p.exists() {
                return Err(NlgError::Config(format!("{} does not exist", p.display())));
            }
        }
        if let Some(spec) = self.ensemble.take() {
            let ckpt_base = paths.checkpoints.clone().unwrap_or_else(|| base.to_path_buf());
            let spec = spec.resolved(&ckpt_base);
            for s in &spec.submodels {
                if !s.checkpoint.exists() {
                    return Err(NlgError::Config(format!("checkpoint {} does not exist", s.checkpoint.display())));
                }
            }
            self.ensemble = Some(spec);
        }
        self.hyperparams.validate()?;
        self.split.validate()?;
        self.selection.validate()?;
        Ok(self)
    }

    /// Input path relative to the data root, when one is configured.
    pub fn data_path(&self, p: &Path) -> PathBuf {
        match &self.paths.data {
            Some(root) if !p.is_absolute() && !p.exists() => root.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn rules(&self) -> Result<RuleSet> {
        match &self.paths.rules {
            Some(p) => Ok(RuleSet::parse(&read_text(p)?)?),
            None => Ok(RuleSet::bundled()),
        }
    }

    pub fn synonyms(&self) -> Result<SynonymLexicon> {
        match &self.paths.lexicons {
            Some(p) => Ok(SynonymLexicon::parse(&read_text(p)?)?),
            None => Ok(SynonymLexicon::bundled()),
        }
    }

    pub fn gazetteer(&self, train: Option<&Dataset>) -> Result<Gazetteer> {
        Ok(build_gazetteer(train, &self.synonyms()?, &self.rules()?))
    }
}
