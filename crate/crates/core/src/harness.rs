//! Randomized-trial sweeps over training ratios.
//!
//! Every ratio in a sweep trains on the same trial set: trial `i` always gets
//! the same target and the same initial parameters, derived from
//! `(master_seed, i)` alone.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{InitSeeds, Qgan, TargetState, TrainingConfig, TrainingRatio, TrialResult};
use crate::error::{Error, Result};
use crate::optim::AdamConfig;
use crate::sim::Statevector;

/// Identifies [`derive_seed`]; stored in run metadata so archives can be replayed.
pub const SEED_MIX_VERSION: &str = "splitmix64-chain-v1";

pub const DEFAULT_RATIOS: [&str; 9] = ["1/8", "1/4", "1/2", "1", "2", "5", "10", "25", "50"];

pub fn default_ratios() -> Vec<TrainingRatio> {
    DEFAULT_RATIOS
        .iter()
        .map(|r| r.parse().expect("valid literal"))
        .collect()
}

/// Epoch budget used when a sweep does not set one.
pub fn default_epochs(n_qubits: usize) -> u64 {
    match n_qubits {
        1 | 2 => 100,
        _ => 350,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedRole {
    Target = 1,
    Generator = 2,
    Discriminator = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(splitmix64(master) ^ trial) ^ role)`.
pub fn derive_seed(master_seed: u64, trial_index: u64, role: SeedRole) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ trial_index) ^ role as u64)
}

/// Haar-random pure state: `2^n` complex standard normals, normalized.
pub fn sample_target<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<TargetState> {
    if n_qubits == 0 || n_qubits > crate::frameworks::MAX_DATA_QUBITS {
        return Err(Error::QubitCountOutOfRange(n_qubits));
    }
    let amps = (0..1usize << n_qubits)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    Ok(TargetState::new(Statevector::normalized(amps)?))
}

/// A random probability distribution loaded as non-negative real amplitudes
/// `sqrt(p)`. The probabilities follow the same law as those of
/// [`sample_target`] (uniform on the simplex); only the phases are dropped.
pub fn sample_distribution_target<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<TargetState> {
    let haar = sample_target(n_qubits, rng)?;
    let amps = haar
        .state()
        .amplitudes()
        .iter()
        .map(|a| Complex64::new(a.norm(), 0.0))
        .collect();
    Ok(TargetState::new(Statevector::normalized(amps)?))
}

/// How sweep targets are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetFamily {
    /// Random distributions with real amplitudes, see [`sample_distribution_target`].
    #[default]
    Distribution,
    /// Haar-random pure states, see [`sample_target`].
    Haar,
}

impl TargetFamily {
    pub fn sample<R: Rng + ?Sized>(self, n_qubits: usize, rng: &mut R) -> Result<TargetState> {
        match self {
            TargetFamily::Distribution => sample_distribution_target(n_qubits, rng),
            TargetFamily::Haar => sample_target(n_qubits, rng),
        }
    }
}

impl std::fmt::Display for TargetFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TargetFamily::Distribution => "distribution",
            TargetFamily::Haar => "haar",
        })
    }
}

impl std::str::FromStr for TargetFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "distribution" => Ok(TargetFamily::Distribution),
            "haar" => Ok(TargetFamily::Haar),
            other => Err(Error::InvalidConfig(format!("unknown target family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub trial_index: u64,
    pub target: TargetState,
    pub seeds: InitSeeds,
}

impl TrialSpec {
    pub fn derive(n_qubits: usize, family: TargetFamily, master_seed: u64, trial_index: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, trial_index, SeedRole::Target));
        Ok(Self {
            trial_index,
            target: family.sample(n_qubits, &mut rng)?,
            seeds: InitSeeds {
                generator: derive_seed(master_seed, trial_index, SeedRole::Generator),
                discriminator: derive_seed(master_seed, trial_index, SeedRole::Discriminator),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_qubits: usize,
    pub trials: u64,
    pub ratios: Vec<TrainingRatio>,
    pub epochs: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub targets: TargetFamily,
    #[serde(default)]
    pub optimizer: AdamConfig,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.ratios.is_empty() {
            return Err(Error::InvalidConfig("no training ratios given".into()));
        }
        self.training_config(self.ratios[0]).validate()
    }

    pub fn training_config(&self, ratio: TrainingRatio) -> TrainingConfig {
        TrainingConfig {
            n_qubits: self.n_qubits,
            epochs: self.epochs,
            ratio,
            optimizer: self.optimizer,
            seed: self.master_seed,
        }
    }

    /// Ratios ordered by value with duplicates removed.
    pub fn sorted_ratios(&self) -> Vec<TrainingRatio> {
        let mut r = self.ratios.clone();
        r.sort_by(|a, b| a.cmp_value(b));
        r.dedup();
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub ratio: TrainingRatio,
    pub trial_index: u64,
    pub result: TrialResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub ratios: Vec<TrainingRatio>,
    pub trials: Vec<TrialSpec>,
    /// Ordered by (ratio value, trial index).
    pub runs: Vec<SweepRun>,
}

impl SweepResult {
    pub fn runs_for(&self, ratio: TrainingRatio) -> impl Iterator<Item = &SweepRun> {
        self.runs.iter().filter(move |r| r.ratio == ratio)
    }
}

/// Per-trial result files keyed by a content hash of everything that
/// determines the run, so an interrupted sweep can be resumed.
#[derive(Debug, Clone)]
pub struct TrialStore {
    dir: PathBuf,
}

impl TrialStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(config: &TrainingConfig, spec: &TrialSpec) -> String {
        #[derive(Serialize)]
        struct Keyed<'a> {
            version: &'a str,
            seed_mix: &'a str,
            config: &'a TrainingConfig,
            spec: &'a TrialSpec,
        }
        let keyed = Keyed {
            version: env!("CARGO_PKG_VERSION"),
            seed_mix: SEED_MIX_VERSION,
            config,
            spec,
        };
        let bytes = serde_json::to_vec(&keyed).expect("serializable");
        hex::encode(Sha256::digest(&bytes))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored result, or `None` when missing or unreadable.
    pub fn load(&self, key: &str) -> Option<TrialResult> {
        let text = std::fs::read(self.path(key)).ok()?;
        serde_json::from_slice(&text).ok()
    }

    /// Written to a temporary name first so a killed process never leaves a
    /// truncated file under the final key.
    pub fn save(&self, key: &str, result: &TrialResult) -> Result<()> {
        let tmp = self.dir.join(format!(".{key}.tmp"));
        std::fs::write(&tmp, serde_json::to_vec(result)?)?;
        std::fs::rename(tmp, self.path(key))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ResumeStats {
    pub computed: usize,
    pub reused: usize,
}

/// Trains every (ratio, trial) pair on `jobs` worker threads.
pub fn run_sweep(config: &SweepConfig, jobs: usize) -> Result<SweepResult> {
    run_sweep_resumable(config, jobs, None).map(|(r, _)| r)
}

/// Like [`run_sweep`], reusing and persisting per-trial results in `store`.
pub fn run_sweep_resumable(
    config: &SweepConfig,
    jobs: usize,
    store: Option<&TrialStore>,
) -> Result<(SweepResult, ResumeStats)> {
    config.validate()?;
    let ratios = config.sorted_ratios();
    let trials = (0..config.trials)
        .map(|i| TrialSpec::derive(config.n_qubits, config.targets, config.master_seed, i))
        .collect::<Result<Vec<_>>>()?;
    let qgan = Qgan::new(config.n_qubits)?;
    let work: Vec<(TrainingRatio, &TrialSpec)> = ratios
        .iter()
        .flat_map(|&r| trials.iter().map(move |t| (r, t)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let outcomes: Vec<(SweepRun, bool)> = pool.install(|| {
        work.par_iter()
            .map(|&(ratio, spec)| {
                let tc = config.training_config(ratio);
                let key = TrialStore::key(&tc, spec);
                if let Some(result) = store.and_then(|s| s.load(&key)) {
                    if result.config == tc && result.seeds == spec.seeds {
                        return Ok((run(ratio, spec, result), true));
                    }
                }
                let result = qgan.train(&tc, &spec.target, spec.seeds)?;
                if let Some(s) = store {
                    s.save(&key, &result)?;
                }
                Ok((run(ratio, spec, result), false))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut stats = ResumeStats::default();
    let runs = outcomes
        .into_iter()
        .map(|(run, reused)| {
            if reused {
                stats.reused += 1;
            } else {
                stats.computed += 1;
            }
            run
        })
        .collect();
    Ok((
        SweepResult {
            config: config.clone(),
            ratios,
            trials,
            runs,
        },
        stats,
    ))
}

fn run(ratio: TrainingRatio, spec: &TrialSpec, result: TrialResult) -> SweepRun {
    SweepRun {
        ratio,
        trial_index: spec.trial_index,
        result,
    }
}

/// Mean (average case) and minimum (best case) KL across trials, per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurves {
    pub ratio: TrainingRatio,
    pub mean_kl: Vec<f64>,
    pub min_kl: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurves {
    pub n_qubits: usize,
    /// `mean_kl[e]` / `min_kl[e]` belong to epoch `e + 1`.
    pub curves: Vec<RatioCurves>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestSetting {
    pub ratio: TrainingRatio,
    pub epochs: u64,
    pub kl: f64,
}

/// Best (ratio, epoch count) for the average and the best case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSettings {
    pub n_qubits: usize,
    pub trials: u64,
    pub average: BestSetting,
    pub best: BestSetting,
}

pub fn aggregate(sweep: &SweepResult) -> Result<AggregateCurves> {
    if sweep.runs.is_empty() {
        return Err(Error::Empty("sweep has no runs"));
    }
    let mut curves = Vec::with_capacity(sweep.ratios.len());
    for &ratio in &sweep.ratios {
        let histories: Vec<&TrialResult> = sweep.runs_for(ratio).map(|r| &r.result).collect();
        if histories.is_empty() {
            return Err(Error::Empty("ratio without runs"));
        }
        let epochs = histories.iter().map(|h| h.records.len()).min().unwrap_or(0);
        if epochs == 0 {
            return Err(Error::Empty("trial without epochs"));
        }
        let mut mean_kl = Vec::with_capacity(epochs);
        let mut min_kl = Vec::with_capacity(epochs);
        for e in 0..epochs {
            let kls = histories.iter().map(|h| h.records[e].kl);
            mean_kl.push(kls.clone().sum::<f64>() / histories.len() as f64);
            min_kl.push(kls.fold(f64::INFINITY, f64::min));
        }
        curves.push(RatioCurves { ratio, mean_kl, min_kl });
    }
    Ok(AggregateCurves {
        n_qubits: sweep.config.n_qubits,
        curves,
    })
}

/// Lowest point over all (ratio, epoch) pairs; ties go to fewer epochs, then
/// the smaller ratio.
pub fn best_setting(curves: &AggregateCurves, pick: impl Fn(&RatioCurves) -> &[f64]) -> Result<BestSetting> {
    let mut sorted: Vec<&RatioCurves> = curves.curves.iter().collect();
    sorted.sort_by(|a, b| a.ratio.cmp_value(&b.ratio));
    let longest = sorted
        .iter()
        .map(|c| pick(c).len())
        .max()
        .ok_or(Error::Empty("no curves"))?;
    let mut best: Option<BestSetting> = None;
    for e in 0..longest {
        for c in &sorted {
            if let Some(&kl) = pick(c).get(e) {
                if best.is_none_or(|b| kl < b.kl) {
                    best = Some(BestSetting {
                        ratio: c.ratio,
                        epochs: e as u64 + 1,
                        kl,
                    });
                }
            }
        }
    }
    best.ok_or(Error::Empty("curves have no epochs"))
}

pub fn aggregate_and_best(sweep: &SweepResult) -> Result<(AggregateCurves, BestSettings)> {
    let curves = aggregate(sweep)?;
    let settings = BestSettings {
        n_qubits: curves.n_qubits,
        trials: sweep.config.trials,
        average: best_setting(&curves, |c| &c.mean_kl)?,
        best: best_setting(&curves, |c| &c.min_kl)?,
    };
    Ok((curves, settings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n_qubits: usize, trials: u64, ratios: &[&str], epochs: u64) -> SweepConfig {
        SweepConfig {
            n_qubits,
            trials,
            ratios: ratios.iter().map(|r| r.parse().unwrap()).collect(),
            epochs,
            master_seed: 2024,
            targets: TargetFamily::default(),
            optimizer: AdamConfig::default(),
        }
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = derive_seed(7, 0, SeedRole::Target);
        assert_eq!(a, derive_seed(7, 0, SeedRole::Target));
        assert_ne!(a, derive_seed(7, 0, SeedRole::Generator));
        assert_ne!(a, derive_seed(7, 1, SeedRole::Target));
        assert_ne!(a, derive_seed(8, 0, SeedRole::Target));
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn haar_targets_are_normalized_and_uniform_on_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples = 10_000;
        let mut mean = [0.0; 4];
        for _ in 0..samples {
            let t = sample_target(2, &mut rng).unwrap();
            assert!((t.state().norm_sqr() - 1.0).abs() < 1e-12);
            for (m, p) in mean.iter_mut().zip(t.distribution().iter()) {
                *m += p / samples as f64;
            }
        }
        for m in mean {
            assert!((m - 0.25).abs() < 0.01, "{m}");
        }
        assert!(sample_target(0, &mut rng).is_err());
        assert!(sample_target(9, &mut rng).is_err());
    }

    #[test]
    fn distribution_targets_keep_haar_probabilities() {
        let haar = sample_target(3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let real = sample_distribution_target(3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for (a, b) in haar.distribution().iter().zip(real.distribution().iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(real.state().amplitudes().iter().all(|a| a.im == 0.0 && a.re >= 0.0));
        assert_eq!("haar".parse::<TargetFamily>().unwrap(), TargetFamily::Haar);
        assert_eq!(TargetFamily::Distribution.to_string(), "distribution");
        assert!("pure".parse::<TargetFamily>().is_err());
    }

    #[test]
    fn trial_specs_are_reproducible() {
        let a = TrialSpec::derive(2, TargetFamily::Haar, 9, 4).unwrap();
        assert_eq!(a, TrialSpec::derive(2, TargetFamily::Haar, 9, 4).unwrap());
        assert_ne!(a.target, TrialSpec::derive(2, TargetFamily::Haar, 9, 5).unwrap().target);
    }

    #[test]
    fn every_ratio_sees_the_same_trials() {
        let sweep = run_sweep(&config(1, 3, &["2", "1/2", "1"], 4), 2).unwrap();
        assert_eq!(
            sweep.ratios.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            ["1/2", "1", "2"]
        );
        assert_eq!(sweep.runs.len(), 9);
        for trial in 0..3 {
            let seeds: Vec<_> = sweep
                .runs
                .iter()
                .filter(|r| r.trial_index == trial)
                .map(|r| r.result.seeds)
                .collect();
            assert!(seeds.windows(2).all(|w| w[0] == w[1]));
            let initial: Vec<_> = sweep
                .runs
                .iter()
                .filter(|r| r.trial_index == trial)
                .map(|r| r.result.initial_kl)
                .collect();
            assert!(initial.windows(2).all(|w| w[0] == w[1]));
        }
        let order: Vec<_> = sweep
            .runs
            .iter()
            .map(|r| (r.ratio.to_string(), r.trial_index))
            .collect();
        assert_eq!(order[0], ("1/2".to_string(), 0));
        assert_eq!(order[8], ("2".to_string(), 2));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let c = config(2, 4, &["1/2", "3"], 3);
        let serial = run_sweep(&c, 1).unwrap();
        let parallel = run_sweep(&c, 8).unwrap();
        assert_eq!(
            serde_json::to_string(&serial).unwrap(),
            serde_json::to_string(&parallel).unwrap()
        );
    }

    #[test]
    fn interrupted_sweeps_resume() {
        let dir = tempfile::tempdir().unwrap();
        let store = TrialStore::open(dir.path().join("trials")).unwrap();
        let c = config(1, 3, &["1", "4"], 5);
        let (first, stats) = run_sweep_resumable(&c, 2, Some(&store)).unwrap();
        assert_eq!(stats, ResumeStats { computed: 6, reused: 0 });
        let mut files: Vec<_> = std::fs::read_dir(store.dir())
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        assert_eq!(files.len(), 6);
        std::fs::remove_file(&files[0]).unwrap();
        std::fs::write(&files[1], b"{truncated").unwrap();
        let (second, stats) = run_sweep_resumable(&c, 3, Some(&store)).unwrap();
        assert_eq!(stats, ResumeStats { computed: 2, reused: 4 });
        assert_eq!(first, second);
        let (_, stats) = run_sweep_resumable(&c, 1, Some(&store)).unwrap();
        assert_eq!(stats, ResumeStats { computed: 0, reused: 6 });
        let mut longer = c.clone();
        longer.epochs = 6;
        let (_, stats) = run_sweep_resumable(&longer, 1, Some(&store)).unwrap();
        assert_eq!(stats.computed, 6);
    }

    #[test]
    fn sweep_config_validation() {
        assert!(run_sweep(&config(1, 0, &["1"], 2), 1).is_err());
        assert!(run_sweep(&config(1, 1, &[], 2), 1).is_err());
        assert!(run_sweep(&config(1, 1, &["1"], 0), 1).is_err());
        assert!(run_sweep(&config(0, 1, &["1"], 2), 1).is_err());
        let c = config(3, 2, &["5", "1/8", "5"], 2);
        assert_eq!(c.sorted_ratios().len(), 2);
        assert_eq!(default_ratios().len(), 9);
        assert_eq!(
            (default_epochs(1), default_epochs(2), default_epochs(4)),
            (100, 100, 350)
        );
    }

    #[test]
    fn aggregates_bound_mean_by_min() {
        let sweep = run_sweep(&config(1, 4, &["1/8", "1", "5"], 6), 4).unwrap();
        let (curves, best) = aggregate_and_best(&sweep).unwrap();
        assert_eq!(curves.curves.len(), 3);
        for c in &curves.curves {
            assert_eq!(c.mean_kl.len(), 6);
            for (mean, min) in c.mean_kl.iter().zip(&c.min_kl) {
                assert!(min <= mean);
            }
        }
        assert!(best.best.kl <= best.average.kl);
        let one = run_sweep(&config(1, 1, &["1"], 3), 1).unwrap();
        let curves = aggregate(&one).unwrap();
        assert_eq!(curves.curves[0].mean_kl, curves.curves[0].min_kl);
    }

    fn synthetic(curves: &[(&str, Vec<f64>)]) -> AggregateCurves {
        AggregateCurves {
            n_qubits: 1,
            curves: curves
                .iter()
                .map(|(r, kl)| RatioCurves {
                    ratio: r.parse().unwrap(),
                    mean_kl: kl.clone(),
                    min_kl: kl.clone(),
                })
                .collect(),
        }
    }

    #[test]
    fn best_setting_picks_global_minimum_with_ties_broken_early() {
        let curves = synthetic(&[
            ("5", vec![0.9, 0.1, 0.1]),
            ("1", vec![0.8, 0.4, 0.2]),
            ("2", vec![0.9, 0.1, 0.3]),
            ("1/2", vec![0.9, 0.3, 0.1]),
        ]);
        let best = best_setting(&curves, |c| &c.mean_kl).unwrap();
        assert_eq!(best.ratio.to_string(), "2");
        assert_eq!(best.epochs, 2);
        assert_eq!(best.kl, 0.1);
        let dominant = synthetic(&[("1", vec![0.5, 0.4]), ("10", vec![0.3, 0.01])]);
        let best = best_setting(&dominant, |c| &c.min_kl).unwrap();
        assert_eq!((best.ratio.to_string(), best.epochs), ("10".to_string(), 2));
        assert!(best_setting(&synthetic(&[]), |c| &c.mean_kl).is_err());
    }
}
