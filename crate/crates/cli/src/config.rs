//! Flat `key = value` run configuration.
//!
//! Every key has a flag of the same name with dashes (`hidden_size` is
//! `--hidden-size`). Precedence, lowest first: built-in defaults, `CSLM_SEED`
//! for the seed, the `--config` file, then flags.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use cslm::lm::OovMode;
use cslm::ngram::Smoothing;
use cslm::rnnlm::{FactorSet, RnnConfig};

use crate::UsageError;

pub const SEED_ENV: &str = "CSLM_SEED";

/// Which model family `crossval` fits per fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecipeKind {
    Ngram,
    Rnn,
}

impl std::str::FromStr for RecipeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ngram" => Ok(RecipeKind::Ngram),
            "rnn" => Ok(RecipeKind::Rnn),
            other => Err(format!("unknown recipe {other:?} (ngram|rnn)")),
        }
    }
}

impl std::fmt::Display for RecipeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RecipeKind::Ngram => "ngram",
            RecipeKind::Rnn => "rnn",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rnn: RnnConfig,
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub native: Option<PathBuf>,
    pub mixed: Option<PathBuf>,
    /// Extra vocabulary words, whitespace separated.
    pub augment: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub order: usize,
    pub smoothing: Smoothing,
    pub oov_mode: OovMode,
    pub recipe: RecipeKind,
    pub folds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rnn: RnnConfig::default(),
            train: None,
            valid: None,
            test: None,
            native: None,
            mixed: None,
            augment: None,
            output: None,
            order: 5,
            smoothing: Smoothing::KneserNey,
            oov_mode: OovMode::Exclude,
            recipe: RecipeKind::Rnn,
            folds: 3,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| UsageError(format!("bad value {value:?} for {key}: {e}")).into())
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if self.rnn.set(key, value)? {
            return Ok(());
        }
        let path = || Some(PathBuf::from(value));
        match key {
            "train" => self.train = path(),
            "valid" => self.valid = path(),
            "test" => self.test = path(),
            "native" => self.native = path(),
            "mixed" => self.mixed = path(),
            "augment" => self.augment = path(),
            "output" => self.output = path(),
            "order" => self.order = parse(key, value)?,
            "smoothing" => self.smoothing = parse(key, value)?,
            "oov_mode" => self.oov_mode = parse(key, value)?,
            "recipe" => self.recipe = parse(key, value)?,
            "folds" => self.folds = parse(key, value)?,
            _ => return Err(UsageError(format!("unknown configuration key {key:?}")).into()),
        }
        Ok(())
    }

    /// Every setting in file form; reading it back gives the same config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.rnn.to_pairs() {
            writeln!(out, "{k} = {v}").unwrap();
        }
        for (k, v) in [
            ("order", self.order.to_string()),
            ("smoothing", self.smoothing.to_string()),
            ("oov_mode", self.oov_mode.to_string()),
            ("recipe", self.recipe.to_string()),
            ("folds", self.folds.to_string()),
        ] {
            writeln!(out, "{k} = {v}").unwrap();
        }
        for (k, p) in self.paths() {
            writeln!(out, "{k} = {}", p.display()).unwrap();
        }
        out
    }

    pub fn paths(&self) -> Vec<(&'static str, &PathBuf)> {
        [
            ("train", &self.train),
            ("valid", &self.valid),
            ("test", &self.test),
            ("native", &self.native),
            ("mixed", &self.mixed),
            ("augment", &self.augment),
            ("output", &self.output),
        ]
        .into_iter()
        .filter_map(|(k, p)| p.as_ref().map(|p| (k, p)))
        .collect()
    }

    /// The path set for `key`, or a usage error naming the flag.
    pub fn require<'a>(&self, key: &str, value: &'a Option<PathBuf>) -> Result<&'a PathBuf> {
        value
            .as_ref()
            .ok_or_else(|| UsageError(format!("missing {key} (pass --{key} or set it in the config file)")).into())
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(UsageError(format!("config line {}: empty key", i + 1)).into());
        }
        pairs.push((k.to_owned(), v.to_owned()));
    }
    Ok(pairs)
}

/// Flags shared by the commands that read a run configuration.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Flat `key = value` file; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub hidden_size: Option<usize>,
    #[arg(long)]
    pub n_classes: Option<usize>,
    #[arg(long)]
    pub bptt_steps: Option<usize>,
    /// `none`, `pos`, `cs` or `pos+cs`.
    #[arg(long)]
    pub factors: Option<FactorSet>,
    #[arg(long)]
    pub use_word: Option<bool>,
    #[arg(long)]
    pub carry_state: Option<bool>,
    #[arg(long)]
    pub lr0: Option<f64>,
    #[arg(long)]
    pub lr_halve_threshold: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Defaults to $CSLM_SEED, then 1.
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub valid: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub test: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub native: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub mixed: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub augment: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// n-gram order.
    #[arg(long)]
    pub order: Option<usize>,
    /// `kn`, `wb`, `mle` or `mle:<floor>`.
    #[arg(long)]
    pub smoothing: Option<Smoothing>,
    /// `exclude` or `map_unk`.
    #[arg(long)]
    pub oov_mode: Option<OovMode>,
    /// `ngram` or `rnn` (crossval).
    #[arg(long)]
    pub recipe: Option<RecipeKind>,
    /// Number of cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
}

impl Settings {
    fn flag_pairs(&self) -> Vec<(&'static str, String)> {
        fn put<T: ToString>(out: &mut Vec<(&'static str, String)>, key: &'static str, v: &Option<T>) {
            if let Some(v) = v {
                out.push((key, v.to_string()));
            }
        }
        fn put_path(out: &mut Vec<(&'static str, String)>, key: &'static str, v: &Option<PathBuf>) {
            if let Some(v) = v {
                out.push((key, v.display().to_string()));
            }
        }
        let mut out = Vec::new();
        put(&mut out, "hidden_size", &self.hidden_size);
        put(&mut out, "n_classes", &self.n_classes);
        put(&mut out, "bptt_steps", &self.bptt_steps);
        put(&mut out, "factors", &self.factors);
        put(&mut out, "use_word", &self.use_word);
        put(&mut out, "carry_state", &self.carry_state);
        put(&mut out, "lr0", &self.lr0);
        put(&mut out, "lr_halve_threshold", &self.lr_halve_threshold);
        put(&mut out, "max_epochs", &self.max_epochs);
        put(&mut out, "seed", &self.seed);
        put_path(&mut out, "train", &self.train);
        put_path(&mut out, "valid", &self.valid);
        put_path(&mut out, "test", &self.test);
        put_path(&mut out, "native", &self.native);
        put_path(&mut out, "mixed", &self.mixed);
        put_path(&mut out, "augment", &self.augment);
        put_path(&mut out, "output", &self.output);
        put(&mut out, "order", &self.order);
        put(&mut out, "smoothing", &self.smoothing);
        put(&mut out, "oov_mode", &self.oov_mode);
        put(&mut out, "recipe", &self.recipe);
        put(&mut out, "folds", &self.folds);
        out
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        cfg.rnn.seed = env_seed()?.unwrap_or(cfg.rnn.seed);
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            for (k, v) in parse_config_text(&text)? {
                cfg.set(&k, &v).with_context(|| format!("config {}", path.display()))?;
            }
        }
        for (k, v) in self.flag_pairs() {
            cfg.set(k, &v)?;
        }
        Ok(cfg)
    }
}

/// The seed from `CSLM_SEED`, if set.
pub fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(parse(SEED_ENV, v.trim())?)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(UsageError(format!("{SEED_ENV}: {e}")).into()),
    }
}
