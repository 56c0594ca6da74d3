//! Resolved run configurations and the optional config file behind them.
//!
//! A config file is either a JSON object or flat `key=value` lines (`#`
//! starts a comment). A JSON object holding a `config` object, as every
//! `run.json`/`sweep.json` does, is read through that inner object, so any
//! artifact directory can be replayed with `--config`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use qgan::engine::TargetState;
use qgan::harness::{self, TargetFamily};
use qgan::{AdamConfig, TrainingRatio};
use serde::{Deserialize, Serialize};

use crate::args::{FitArgs, OptimizerArgs, SweepArgs, TrainArgs};
use crate::error::{usage, Classify, CliResult};

/// Environment variable naming the directory under which default output
/// directories are created.
pub const OUT_ROOT_ENV: &str = "QGAN_OUT_ROOT";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))
            .usage()?;
        Self::parse(&text)
            .with_context(|| format!("invalid config file {}", path.display()))
            .usage()
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_flat(text)
        }
    }

    fn parse_json(text: &str) -> anyhow::Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let mut object = match value {
            serde_json::Value::Object(o) => o,
            _ => bail!("top level must be an object"),
        };
        if let Some(serde_json::Value::Object(inner)) = object.remove("config") {
            object = inner;
        }
        let mut values = BTreeMap::new();
        for (key, value) in object {
            values.insert(normalize_key(&key), scalar_text(&key, &value)?);
        }
        Ok(Self { values })
    }

    fn parse_flat(text: &str) -> anyhow::Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", i + 1))?;
            let value = value.trim().trim_matches('"');
            values.insert(normalize_key(key), value.to_string());
        }
        Ok(Self { values })
    }

    /// The flag value if given, else the config file value, else `None`.
    /// The key is consumed either way.
    fn take<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        let from_file = self.values.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        from_file
            .map(|text| text.parse::<T>().map_err(|e| usage(format!("config key '{key}': {e}"))))
            .transpose()
    }

    fn finish(self) -> CliResult<()> {
        match self.values.keys().next() {
            Some(key) => Err(usage(format!("unknown config key '{key}'"))),
            None => Ok(()),
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

fn scalar_text(key: &str, value: &serde_json::Value) -> anyhow::Result<String> {
    use serde_json::Value;
    Ok(match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Array(items) => items
            .iter()
            .map(|v| match v {
                Value::Array(_) | Value::Object(_) => Err(anyhow!("key '{key}': nested values are not supported")),
                other => scalar_text(key, other),
            })
            .collect::<anyhow::Result<Vec<_>>>()?
            .join(","),
        Value::Null | Value::Object(_) => bail!("key '{key}' must be a scalar or a list"),
    })
}

/// Where the training target comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetSource {
    Bell,
    /// Drawn from the run seed.
    Random,
    /// A JSON statevector, `{"amplitudes": [[re, im], ...]}`.
    File(PathBuf),
}

impl fmt::Display for TargetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSource::Bell => f.write_str("bell"),
            TargetSource::Random => f.write_str("random"),
            TargetSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for TargetSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "bell" => TargetSource::Bell,
            "random" => TargetSource::Random,
            path => TargetSource::File(PathBuf::from(path)),
        })
    }
}

impl Serialize for TargetSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TargetSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().unwrap_or_else(|e: std::convert::Infallible| match e {}))
    }
}

/// Everything that determines a `train` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    pub qubits: usize,
    pub target: TargetSource,
    pub targets: TargetFamily,
    pub ratio: TrainingRatio,
    pub epochs: u64,
    pub seed: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

/// Everything that determines a `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub qubits: usize,
    pub trials: u64,
    pub ratios: Vec<TrainingRatio>,
    pub epochs: u64,
    pub seed: u64,
    pub targets: TargetFamily,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRun {
    pub inputs: Vec<PathBuf>,
    pub holdout: Option<PathBuf>,
}

impl TrainRun {
    pub fn optimizer(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }

    /// Resolves the target. A file target must match `qubits`.
    pub fn load_target(&self) -> CliResult<TargetState> {
        let target = match &self.target {
            TargetSource::Bell => TargetState::bell(),
            TargetSource::Random => {
                harness::TrialSpec::derive(self.qubits, self.targets, self.seed, 0)
                    .usage()?
                    .target
            }
            TargetSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read target file {}", path.display()))
                    .usage()?;
                serde_json::from_str::<TargetState>(&text)
                    .with_context(|| format!("invalid target statevector in {}", path.display()))
                    .usage()?
            }
        };
        if target.n_qubits() != self.qubits {
            return Err(usage(format!(
                "target '{}' has {} qubits but --qubits is {}",
                self.target,
                target.n_qubits(),
                self.qubits
            )));
        }
        Ok(target)
    }
}

impl SweepRun {
    pub fn sweep_config(&self) -> harness::SweepConfig {
        harness::SweepConfig {
            n_qubits: self.qubits,
            trials: self.trials,
            ratios: self.ratios.clone(),
            epochs: self.epochs,
            master_seed: self.seed,
            targets: self.targets,
            optimizer: AdamConfig {
                lr: self.lr,
                beta1: self.beta1,
                beta2: self.beta2,
                epsilon: self.epsilon,
            },
        }
    }
}

/// Comma-separated ratios.
pub struct RatioList(pub Vec<TrainingRatio>);

impl FromStr for RatioList {
    type Err = qgan::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .filter(|part| !part.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(RatioList)
    }
}

struct PathList(Vec<PathBuf>);

impl FromStr for PathList {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(PathList(
            s.split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(PathBuf::from)
                .collect(),
        ))
    }
}

fn required<T>(value: Option<T>, key: &str) -> CliResult<T> {
    value.ok_or_else(|| {
        usage(format!(
            "missing required setting '{key}' (flag --{key} or config file)"
        ))
    })
}

fn optimizer(map: &mut ConfigMap, args: &OptimizerArgs) -> CliResult<AdamConfig> {
    let defaults = AdamConfig::default();
    let config = AdamConfig {
        lr: map.take("lr", args.lr)?.unwrap_or(defaults.lr),
        beta1: map.take("beta1", args.beta1)?.unwrap_or(defaults.beta1),
        beta2: map.take("beta2", args.beta2)?.unwrap_or(defaults.beta2),
        epsilon: map.take("epsilon", args.epsilon)?.unwrap_or(defaults.epsilon),
    };
    config.validate().usage()?;
    Ok(config)
}

/// `--out`, else the config file's `out`, else `$QGAN_OUT_ROOT/<name>` (or
/// `runs/<name>` when the variable is unset).
fn output_dir(map: &mut ConfigMap, flag: Option<PathBuf>, default_name: impl FnOnce() -> String) -> CliResult<PathBuf> {
    if let Some(dir) = map.take::<PathBuf>("out", flag)? {
        return Ok(dir);
    }
    let root = std::env::var_os(OUT_ROOT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
    Ok(root.join(default_name()))
}

pub fn resolve_train(args: &TrainArgs) -> CliResult<(TrainRun, PathBuf)> {
    let mut map = ConfigMap::load(args.config.as_deref())?;
    let qubits = required(map.take("qubits", args.qubits)?, "qubits")?;
    let target = map.take("target", args.target.clone())?.unwrap_or(TargetSource::Random);
    let targets = map.take("targets", args.targets)?.unwrap_or_default();
    let ratio = map
        .take("ratio", args.ratio)?
        .unwrap_or(TrainingRatio::new(1, 1).expect("valid"));
    let epochs = map
        .take("epochs", args.epochs)?
        .unwrap_or_else(|| harness::default_epochs(qubits));
    let seed = map.take("seed", args.seed)?.unwrap_or(0);
    let opt = optimizer(&mut map, &args.optimizer)?;
    let out = output_dir(&mut map, args.out.clone(), || format!("train-q{qubits}-s{seed}"))?;
    map.finish()?;
    let run = TrainRun {
        qubits,
        target,
        targets,
        ratio,
        epochs,
        seed,
        lr: opt.lr,
        beta1: opt.beta1,
        beta2: opt.beta2,
        epsilon: opt.epsilon,
    };
    qgan::TrainingConfig {
        n_qubits: qubits,
        epochs,
        ratio,
        optimizer: opt,
        seed,
    }
    .validate()
    .usage()?;
    Ok((run, out))
}

pub fn resolve_sweep(args: &SweepArgs) -> CliResult<(SweepRun, PathBuf, usize)> {
    let mut map = ConfigMap::load(args.config.as_deref())?;
    let qubits = required(map.take("qubits", args.qubits)?, "qubits")?;
    let trials = map.take("trials", args.trials)?.unwrap_or(25);
    let ratio_flag = args
        .ratios
        .as_deref()
        .map(str::parse::<RatioList>)
        .transpose()
        .usage()?;
    let ratios = map
        .take("ratios", ratio_flag)?
        .map_or_else(harness::default_ratios, |r| r.0);
    let epochs = map
        .take("epochs", args.epochs)?
        .unwrap_or_else(|| harness::default_epochs(qubits));
    let seed = map.take("seed", args.seed)?.unwrap_or(0);
    let targets = map.take("targets", args.targets)?.unwrap_or_default();
    let opt = optimizer(&mut map, &args.optimizer)?;
    let jobs = map
        .take("jobs", args.jobs)?
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let out = output_dir(&mut map, args.out.clone(), || format!("sweep-q{qubits}-s{seed}"))?;
    map.finish()?;
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let run = SweepRun {
        qubits,
        trials,
        ratios,
        epochs,
        seed,
        targets,
        lr: opt.lr,
        beta1: opt.beta1,
        beta2: opt.beta2,
        epsilon: opt.epsilon,
    };
    run.sweep_config().validate().usage()?;
    Ok((run, out, jobs))
}

pub fn resolve_fit(args: &FitArgs) -> CliResult<(FitRun, PathBuf)> {
    let mut map = ConfigMap::load(args.config.as_deref())?;
    let flag = (!args.inputs.is_empty()).then(|| PathList(args.inputs.clone()));
    let inputs = map.take("inputs", flag)?.map_or_else(Vec::new, |p| p.0);
    let holdout = map.take("holdout", args.holdout.clone())?;
    let out = output_dir(&mut map, args.out.clone(), || "fit".to_string())?;
    map.finish()?;
    if inputs.len() < 2 {
        return Err(usage(format!("fit needs at least 2 inputs, got {}", inputs.len())));
    }
    Ok((FitRun { inputs, holdout }, out))
}
