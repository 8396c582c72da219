//! Experiment configuration files.
//!
//! Flat `key = value` text with `[section]` headers and `#` comments:
//!
//! ```text
//! seed = 42
//! corruption = discrete_flip
//! eps = 0.5
//!
//! [data]
//! source = discrete
//! n = 5000
//! k = 10
//!
//! [model]
//! family = multinomial
//! alpha = 0.1
//!
//! [train]
//! epochs = 20
//!
//! [walkback]
//! enabled = true
//!
//! [chain]
//! steps = 5500
//! burn_in = 500
//! ```
//!
//! Unknown sections or keys are rejected with a diagnostic naming them, and
//! every file referenced by the config must exist at parse time.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::corruption::CorruptionProcess;
use crate::error::{Error, Result};
use crate::training::{TrainConfig, WalkbackConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    Discrete,
    Mixture,
    Idx,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub source: DataSource,
    /// Input file for `idx` / `csv` sources.
    pub path: Option<PathBuf>,
    /// Sample count for the generator sources.
    pub n: usize,
    /// State count for the discrete source.
    pub k: usize,
    /// Optional target distribution CSV overriding the built-in one.
    pub dist: Option<PathBuf>,
    /// Optional variant hint for CSV data.
    pub variant: Option<String>,
    /// Optional mixture component CSV overriding the built-in mixture.
    pub components: Option<PathBuf>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Discrete,
            path: None,
            n: 5000,
            k: 10,
            dist: None,
            variant: None,
            components: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionKind {
    DiscreteFlip,
    SaltPepper,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionConfig {
    pub kind: CorruptionKind,
    pub eps: f64,
    pub corrupt_prob: f64,
    pub sigma: f64,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        Self {
            kind: CorruptionKind::DiscreteFlip,
            eps: 0.5,
            corrupt_prob: 0.5,
            sigma: 0.3,
        }
    }
}

impl CorruptionConfig {
    /// Instantiate for a state count (discrete) or dimension (vector data).
    pub fn build(&self, dim: usize) -> Result<CorruptionProcess> {
        match self.kind {
            CorruptionKind::DiscreteFlip => CorruptionProcess::discrete_flip(dim, self.eps),
            CorruptionKind::SaltPepper => CorruptionProcess::salt_pepper(dim, self.corrupt_prob),
            CorruptionKind::Gaussian => CorruptionProcess::isotropic_gaussian(dim, self.sigma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    Multinomial,
    Parzen,
    Mlp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub family: ModelFamily,
    pub alpha: f64,
    pub hidden: usize,
    pub sigma_x: Option<f64>,
    pub sigma_c: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            family: ModelFamily::Multinomial,
            alpha: 0.1,
            hidden: 256,
            sigma_x: None,
            sigma_c: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSettings {
    pub steps: usize,
    /// Default when unset: 10% of `steps`.
    pub burn_in: Option<usize>,
    pub thin: usize,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self {
            steps: 5500,
            burn_in: None,
            thin: 1,
        }
    }
}

impl ChainSettings {
    pub fn effective_burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.steps / 10)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub metric: Option<String>,
    pub bins: usize,
    pub test: Option<PathBuf>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            metric: None,
            bins: 20,
            test: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub corruption: CorruptionConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub walkback: WalkbackConfig,
    pub chain: ChainSettings,
    pub eval: EvalConfig,
}

fn bad_key(section: &str, key: &str) -> Error {
    if section.is_empty() {
        Error::Config(format!("unknown key `{key}`"))
    } else {
        Error::Config(format!("unknown key `{key}` in section [{section}]"))
    }
}

fn parse_value<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        let loc = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        Error::Config(format!("key `{loc}`: cannot parse value `{value}`"))
    })
}

fn parse_bool(section: &str, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "key `{section}.{key}`: expected true/false, got `{value}`"
        ))),
    }
}

fn resolve_path(base: &Path, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn require_file(key: &str, path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Config(format!(
            "key `{key}`: referenced file {} does not exist",
            path.display()
        )));
    }
    Ok(())
}

/// Parse config text. Relative paths resolve against `base_dir` and must
/// exist.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut section = String::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {}: malformed section header `{line}`", lineno + 1)))?
                .trim();
            match name {
                "data" | "model" | "train" | "walkback" | "chain" | "eval" => {
                    section = name.to_string();
                }
                other => return Err(Error::Config(format!("unknown section [{other}]"))),
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert((section.clone(), key.to_string())) {
            return Err(Error::Config(format!(
                "duplicate key `{key}` in section [{section}]"
            )));
        }

        match (section.as_str(), key) {
            ("", "seed") => cfg.seed = parse_value(&section, key, value)?,
            ("", "corruption") => {
                cfg.corruption.kind = match value {
                    "discrete_flip" => CorruptionKind::DiscreteFlip,
                    "salt_pepper" => CorruptionKind::SaltPepper,
                    "gaussian" => CorruptionKind::Gaussian,
                    other => {
                        return Err(Error::Config(format!(
                            "key `corruption`: unknown kind `{other}` (expected discrete_flip, salt_pepper, or gaussian)"
                        )))
                    }
                }
            }
            ("", "eps") => cfg.corruption.eps = parse_value(&section, key, value)?,
            ("", "corrupt_prob") => cfg.corruption.corrupt_prob = parse_value(&section, key, value)?,
            ("", "sigma") => cfg.corruption.sigma = parse_value(&section, key, value)?,

            ("data", "source") => {
                cfg.data.source = match value {
                    "discrete" => DataSource::Discrete,
                    "mixture" => DataSource::Mixture,
                    "idx" => DataSource::Idx,
                    "csv" => DataSource::Csv,
                    other => {
                        return Err(Error::Config(format!(
                            "key `data.source`: unknown source `{other}`"
                        )))
                    }
                }
            }
            ("data", "path") => {
                let p = resolve_path(base_dir, value);
                require_file("data.path", &p)?;
                cfg.data.path = Some(p);
            }
            ("data", "n") => cfg.data.n = parse_value(&section, key, value)?,
            ("data", "k") => cfg.data.k = parse_value(&section, key, value)?,
            ("data", "dist") => {
                let p = resolve_path(base_dir, value);
                require_file("data.dist", &p)?;
                cfg.data.dist = Some(p);
            }
            ("data", "variant") => cfg.data.variant = Some(value.to_string()),
            ("data", "components") => {
                let p = resolve_path(base_dir, value);
                require_file("data.components", &p)?;
                cfg.data.components = Some(p);
            }

            ("model", "family") => {
                cfg.model.family = match value {
                    "multinomial" => ModelFamily::Multinomial,
                    "parzen" => ModelFamily::Parzen,
                    "mlp" => ModelFamily::Mlp,
                    other => {
                        return Err(Error::Config(format!(
                            "key `model.family`: unknown family `{other}`"
                        )))
                    }
                }
            }
            ("model", "alpha") => cfg.model.alpha = parse_value(&section, key, value)?,
            ("model", "hidden") => cfg.model.hidden = parse_value(&section, key, value)?,
            ("model", "sigma_x") => cfg.model.sigma_x = Some(parse_value(&section, key, value)?),
            ("model", "sigma_c") => cfg.model.sigma_c = Some(parse_value(&section, key, value)?),

            ("train", "epochs") => cfg.train.epochs = parse_value(&section, key, value)?,
            ("train", "minibatch") => cfg.train.minibatch = parse_value(&section, key, value)?,
            ("train", "learning_rate") => cfg.train.learning_rate = parse_value(&section, key, value)?,
            ("train", "momentum") => cfg.train.momentum = parse_value(&section, key, value)?,
            ("train", "lr_decay") => cfg.train.lr_decay = parse_value(&section, key, value)?,
            ("train", "weight_decay") => cfg.train.weight_decay = parse_value(&section, key, value)?,

            ("walkback", "enabled") => cfg.walkback.enabled = parse_bool(&section, key, value)?,
            ("walkback", "p") => cfg.walkback.p = parse_value(&section, key, value)?,
            ("walkback", "max_steps") => cfg.walkback.max_steps = parse_value(&section, key, value)?,
            ("walkback", "fixed_steps") => {
                cfg.walkback.fixed_steps = Some(parse_value(&section, key, value)?)
            }

            ("chain", "steps") => cfg.chain.steps = parse_value(&section, key, value)?,
            ("chain", "burn_in") => cfg.chain.burn_in = Some(parse_value(&section, key, value)?),
            ("chain", "thin") => cfg.chain.thin = parse_value(&section, key, value)?,

            ("eval", "metric") => cfg.eval.metric = Some(value.to_string()),
            ("eval", "bins") => cfg.eval.bins = parse_value(&section, key, value)?,
            ("eval", "test") => {
                let p = resolve_path(base_dir, value);
                require_file("eval.test", &p)?;
                cfg.eval.test = Some(p);
            }

            (_, key) => return Err(bad_key(&section, key)),
        }
    }

    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.data.n == 0 {
        return Err(Error::Config("key `data.n`: must be positive".to_string()));
    }
    if cfg.data.k < 2 {
        return Err(Error::Config("key `data.k`: must be at least 2".to_string()));
    }
    match cfg.data.source {
        DataSource::Idx | DataSource::Csv if cfg.data.path.is_none() => {
            return Err(Error::Config(
                "key `data.path`: required for idx/csv sources".to_string(),
            ))
        }
        _ => {}
    }
    if cfg.chain.steps == 0 {
        return Err(Error::Config("key `chain.steps`: must be positive".to_string()));
    }
    if let Some(b) = cfg.chain.burn_in {
        if b >= cfg.chain.steps {
            return Err(Error::Config(
                "key `chain.burn_in`: must be below chain.steps".to_string(),
            ));
        }
    }
    if cfg.chain.thin == 0 {
        return Err(Error::Config("key `chain.thin`: must be positive".to_string()));
    }
    if cfg.eval.bins < 2 {
        return Err(Error::Config("key `eval.bins`: must be at least 2".to_string()));
    }
    cfg.train
        .validate()
        .map_err(|e| Error::Config(format!("[train]: {e}")))?;
    cfg.walkback
        .validate()
        .map_err(|e| Error::Config(format!("[walkback]: {e}")))?;
    if !(0.0..=1.0).contains(&cfg.corruption.eps) {
        return Err(Error::Config("key `eps`: must lie in [0, 1]".to_string()));
    }
    if !(0.0..=1.0).contains(&cfg.corruption.corrupt_prob) {
        return Err(Error::Config(
            "key `corrupt_prob`: must lie in [0, 1]".to_string(),
        ));
    }
    if !(cfg.corruption.sigma > 0.0) {
        return Err(Error::Config("key `sigma`: must be positive".to_string()));
    }
    Ok(())
}

/// Load and parse a config file; relative paths inside it resolve against
/// its own directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}
