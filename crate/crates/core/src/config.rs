//! Run configuration: a flat `key = value` file, overridable key by key.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Curvature;
use crate::model::Geometry;
use crate::persist::Format;
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    /// Pre-extracted triples; exclusive with `definitions`.
    pub triples: Option<PathBuf>,
    /// Annotated definitions, extracted before training.
    pub definitions: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub model_format: Format,
    /// Write a checkpoint every N epochs; 0 disables.
    pub checkpoint_every: usize,
    pub eval_benchmarks: Vec<PathBuf>,
    /// Benchmark scored after every epoch and logged with the loss.
    pub dev_benchmark: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            train: TrainConfig::default(),
            triples: None,
            definitions: None,
            stopwords: None,
            output_dir: PathBuf::from("run"),
            model_format: Format::Binary,
            checkpoint_every: 0,
            eval_benchmarks: Vec::new(),
            dev_benchmark: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "triples",
    "definitions",
    "stopwords",
    "output_dir",
    "model_format",
    "epochs",
    "batch_size",
    "learning_rate",
    "euclidean_learning_rate",
    "negatives",
    "seed",
    "geometry",
    "dim",
    "curvature",
    "checkpoint_every",
    "eval_benchmarks",
    "dev_benchmark",
    "deterministic",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean {value:?} for {key}"))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let t = &mut self.train;
        match key {
            "triples" => self.triples = opt_path(value),
            "definitions" => self.definitions = opt_path(value),
            "stopwords" => self.stopwords = opt_path(value),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "model_format" => self.model_format = value.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "epochs" => t.epochs = parse(key, value)?,
            "batch_size" => t.batch_size = parse(key, value)?,
            "learning_rate" => t.learning_rate = parse(key, value)?,
            "euclidean_learning_rate" => {
                t.euclidean_learning_rate = if value.is_empty() { None } else { Some(parse(key, value)?) }
            }
            "negatives" => t.negatives = parse(key, value)?,
            "seed" => t.seed = parse(key, value)?,
            "geometry" => t.geometry = value.parse::<Geometry>().map_err(|e| Error::Config(e.to_string()))?,
            "dim" => t.dim = parse(key, value)?,
            "curvature" => {
                t.curvature = Curvature::new(parse(key, value)?).map_err(|e| Error::Config(e.to_string()))?
            }
            "checkpoint_every" => self.checkpoint_every = parse(key, value)?,
            "eval_benchmarks" => {
                self.eval_benchmarks =
                    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from).collect()
            }
            "dev_benchmark" => self.dev_benchmark = opt_path(value),
            "deterministic" => t.deterministic = parse_bool(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.triples, &self.definitions) {
            (None, None) => return Err(Error::Config("one of triples or definitions is required".into())),
            (Some(_), Some(_)) => return Err(Error::Config("triples and definitions are mutually exclusive".into())),
            _ => {}
        }
        self.train.validate()
    }

    /// Every key with its resolved value; parsing the result reproduces `self`.
    pub fn to_text(&self) -> String {
        let p = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let t = &self.train;
        let mut out = String::new();
        for key in KEYS {
            let value = match *key {
                "triples" => p(&self.triples),
                "definitions" => p(&self.definitions),
                "stopwords" => p(&self.stopwords),
                "output_dir" => self.output_dir.display().to_string(),
                "model_format" => match self.model_format {
                    Format::Binary => "binary".into(),
                    Format::Text => "text".into(),
                },
                "epochs" => t.epochs.to_string(),
                "batch_size" => t.batch_size.to_string(),
                "learning_rate" => format!("{:?}", t.learning_rate),
                "euclidean_learning_rate" => t.euclidean_learning_rate.map(|v| format!("{v:?}")).unwrap_or_default(),
                "negatives" => t.negatives.to_string(),
                "seed" => t.seed.to_string(),
                "geometry" => t.geometry.to_string(),
                "dim" => t.dim.to_string(),
                "curvature" => format!("{:?}", t.curvature.value()),
                "checkpoint_every" => self.checkpoint_every.to_string(),
                "eval_benchmarks" => self
                    .eval_benchmarks
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                "dev_benchmark" => p(&self.dev_benchmark),
                "deterministic" => t.deterministic.to_string(),
                _ => unreachable!(),
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}
