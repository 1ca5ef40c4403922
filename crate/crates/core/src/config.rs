//! Experiment files (`.cfg`): the same `key = value` format as constraint
//! specs.
//!
//! ```text
//! env = corridor1d(length=15, max_steps=200)
//! constraints = [dithering-1d.flc]
//! enforcement = shaping(lambda=0.01)
//! augmentation = product
//! seeds = 0..10
//! episodes = 300
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::actionshape::HardMode;
use crate::constraint::{load_spec, ConstraintError, ConstraintSpec};
use crate::envs::{EnvError, EnvSpec};
use crate::kv;
use crate::shaping::DEFAULT_ETA;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("constraint {path}: {source}")]
    Constraint {
        path: String,
        #[source]
        source: ConstraintError,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enforcement {
    None,
    /// Fixed penalty: the agent optimizes r − λc.
    Shaping { lambda: f64 },
    /// λ adapted once per episode by dual ascent towards an episode cost of `d`.
    Lagrangian { d: f64, eta: f64 },
    /// Action shaping.
    Hard(HardMode),
}

impl fmt::Display for Enforcement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Enforcement::None => write!(f, "none"),
            Enforcement::Shaping { lambda } => write!(f, "shaping(lambda={lambda})"),
            Enforcement::Lagrangian { d, eta } => write!(f, "lagrangian(d={d}, eta={eta})"),
            Enforcement::Hard(mode) => write!(f, "hard(mode={mode})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Augmentation {
    None,
    Product,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub constraints: Vec<Arc<ConstraintSpec>>,
    /// As written in the file, for reporting.
    pub constraint_paths: Vec<String>,
    pub enforcement: Enforcement,
    pub augmentation: Augmentation,
    /// Optimize against G′ instead of the sparse cost.
    pub dense: bool,
    pub beta: f64,
    /// t_v baseline; derived from the episode cap and cost limit when unset.
    pub baseline: Option<f64>,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    pub eval_episodes: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of training episodes over which ε decays linearly.
    pub epsilon_decay: f64,
    /// Output prefix: `<prefix>.csv`, `<prefix>_eval.csv`, `<prefix>.json`.
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for everything but the environment and constraints.
    pub fn new(env: EnvSpec, constraints: Vec<Arc<ConstraintSpec>>) -> Self {
        let constraint_paths = constraints.iter().map(|c| c.name().to_string()).collect();
        Self {
            env,
            constraints,
            constraint_paths,
            enforcement: Enforcement::None,
            augmentation: Augmentation::None,
            dense: false,
            beta: 1.0,
            baseline: None,
            seeds: vec![0],
            episodes: 500,
            eval_episodes: 100,
            alpha: 0.1,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: 0.5,
            output: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, path.parent())
    }

    /// Parses experiment text. Relative constraint paths are resolved
    /// against `base_dir`, falling back to the built-in constraint of the
    /// same file name.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let entries = kv::parse(text).map_err(|e| ConfigError::Parse {
            line: e.line,
            message: e.message,
        })?;
        let err = |line: usize, message: String| ConfigError::Parse { line, message };

        let env_entry = entries
            .iter()
            .find(|e| e.key == "env")
            .ok_or_else(|| ConfigError::Invalid("missing `env`".into()))?;
        let env = EnvSpec::parse(&env_entry.value).map_err(|m| err(env_entry.line, m))?;
        let c_entry = entries
            .iter()
            .find(|e| e.key == "constraints")
            .ok_or_else(|| ConfigError::Invalid("missing `constraints`".into()))?;
        let paths = kv::parse_list(&c_entry.value).map_err(|m| err(c_entry.line, m))?;
        if paths.is_empty() {
            return Err(err(c_entry.line, "at least one constraint is required".into()));
        }
        let mut constraints = Vec::new();
        for p in &paths {
            let resolved = match base_dir {
                Some(dir) if Path::new(p).is_relative() => dir.join(p),
                _ => PathBuf::from(p),
            };
            let spec = load_spec(&resolved).map_err(|source| ConfigError::Constraint {
                path: p.clone(),
                source,
            })?;
            constraints.push(Arc::new(spec));
        }

        let mut cfg = Self::new(env, constraints);
        cfg.constraint_paths = paths;
        let mut dense_line = 0;
        for e in &entries {
            let line = e.line;
            let num = |v: &str| -> Result<f64, ConfigError> {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(line, format!("{} must be a number, got {v:?}", e.key)))
            };
            let count = |v: &str| -> Result<usize, ConfigError> {
                v.parse::<usize>()
                    .map_err(|_| err(line, format!("{} must be a non-negative integer, got {v:?}", e.key)))
            };
            match e.key.as_str() {
                "env" | "constraints" => {}
                "enforcement" => {
                    cfg.enforcement = parse_enforcement(&e.value).map_err(|m| err(line, m))?
                }
                "augmentation" => {
                    cfg.augmentation = match e.value.as_str() {
                        "none" => Augmentation::None,
                        "product" => Augmentation::Product,
                        other => {
                            return Err(err(line, format!("augmentation must be none or product, got {other:?}")))
                        }
                    }
                }
                "dense" => {
                    cfg.dense = parse_bool(&e.value).map_err(|m| err(line, m))?;
                    dense_line = line;
                }
                "beta" => cfg.beta = num(&e.value)?,
                "baseline" => {
                    cfg.baseline = match e.value.as_str() {
                        "auto" => None,
                        v => Some(num(v)?),
                    }
                }
                "seeds" => cfg.seeds = parse_seeds(&e.value).map_err(|m| err(line, m))?,
                "episodes" => cfg.episodes = count(&e.value)?,
                "eval_episodes" => cfg.eval_episodes = count(&e.value)?,
                "alpha" => cfg.alpha = num(&e.value)?,
                "gamma" => cfg.gamma = num(&e.value)?,
                "epsilon_start" => cfg.epsilon_start = num(&e.value)?,
                "epsilon_end" => cfg.epsilon_end = num(&e.value)?,
                "epsilon_decay" => cfg.epsilon_decay = num(&e.value)?,
                "output" => {
                    let p = PathBuf::from(&e.value);
                    cfg.output = Some(match base_dir {
                        Some(dir) if p.is_relative() => dir.join(p),
                        _ => p,
                    });
                }
                other => return Err(err(line, format!("unknown key {other:?}"))),
            }
        }
        cfg.validate().map_err(|e| match e {
            ConfigError::Invalid(m) if m.contains("dense") && dense_line > 0 => err(dense_line, m),
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.dense && !matches!(self.enforcement, Enforcement::Shaping { .. } | Enforcement::Lagrangian { .. }) {
            return bad("dense = true requires shaping or lagrangian enforcement".into());
        }
        if self.seeds.is_empty() {
            return bad("no seeds".into());
        }
        if self.episodes == 0 {
            return bad("episodes must be positive".into());
        }
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.gamma >= 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        for (name, v) in [
            ("epsilon_start", self.epsilon_start),
            ("epsilon_end", self.epsilon_end),
            ("epsilon_decay", self.epsilon_decay),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.beta < 0.0 {
            return bad(format!("beta must be >= 0, got {}", self.beta));
        }
        if let Some(b) = self.baseline {
            if b <= 0.0 {
                return bad(format!("baseline must be > 0, got {b}"));
            }
        }
        match self.enforcement {
            Enforcement::Shaping { lambda } if lambda < 0.0 => {
                bad(format!("lambda is a magnitude and must be >= 0, got {lambda}"))
            }
            Enforcement::Lagrangian { d, eta } if d < 0.0 || eta <= 0.0 => {
                bad(format!("lagrangian needs d >= 0 and eta > 0, got d={d}, eta={eta}"))
            }
            _ => Ok(()),
        }
    }

    /// ε for a training episode: linear from `epsilon_start` to
    /// `epsilon_end` over the first `epsilon_decay` fraction of episodes.
    pub fn epsilon(&self, episode: usize) -> f64 {
        let horizon = self.epsilon_decay * self.episodes as f64;
        if horizon <= 0.0 {
            return self.epsilon_end;
        }
        let frac = episode as f64 / horizon;
        if frac >= 1.0 {
            return self.epsilon_end;
        }
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }

    /// Copy with the enforcement replaced, as used by λ sweeps.
    pub fn with_enforcement(&self, enforcement: Enforcement) -> Self {
        Self {
            enforcement,
            ..self.clone()
        }
    }
}

fn parse_enforcement(text: &str) -> Result<Enforcement, String> {
    let (name, mut p) = kv::parse_call(text)?;
    let mut num = |key: &str, default: Option<f64>| -> Result<f64, String> {
        match p.remove(key) {
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("{key} must be a number, got {v:?}")),
            None => default.ok_or_else(|| format!("{name} needs {key}=...")),
        }
    };
    let e = match name.as_str() {
        "none" => Enforcement::None,
        "shaping" => Enforcement::Shaping {
            lambda: num("lambda", None)?,
        },
        "lagrangian" => Enforcement::Lagrangian {
            d: num("d", None)?,
            eta: num("eta", Some(DEFAULT_ETA))?,
        },
        "hard" => Enforcement::Hard(match p.remove("mode") {
            Some(m) => m.parse()?,
            None => HardMode::TrainAndEval,
        }),
        other => {
            return Err(format!(
                "unknown enforcement {other:?} (expected none, shaping, lagrangian or hard)"
            ))
        }
    };
    if let Some(extra) = p.keys().next() {
        return Err(format!("unknown parameter {extra:?} for {name}"));
    }
    Ok(e)
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

/// `[0 1 2]` or a half-open range `0..10`.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = v.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range {v:?}"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range {v:?}"))?;
        if b <= a {
            return Err(format!("empty seed range {v:?}"));
        }
        return Ok((a..b).collect());
    }
    kv::parse_list(v)?
        .iter()
        .map(|s| s.parse().map_err(|_| format!("seed must be an integer, got {s:?}")))
        .collect()
}
