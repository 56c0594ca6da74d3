//! The QGAN: losses, atomic generator/discriminator updates, epochs and
//! complete training runs.
//!
//! Two circuits are simulated. The *fake* circuit runs the generator on the
//! data qubits and then the discriminator on data plus output qubit, starting
//! from |0…0⟩. The *real* circuit runs the discriminator alone on
//! `target ⊗ |0⟩`. The output qubit reading |1⟩ means "real".

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frameworks::{build_discriminator, build_generator, CircuitFramework, ParameterVector};
use crate::grad::ShiftableCircuit;
use crate::metrics::{kl_divergence, Distribution};
use crate::optim::{AdamConfig, AdamState};
use crate::sim::{basis_probabilities, Statevector};

/// Probabilities are clamped to `[ε, 1−ε]` before any logarithm.
pub const LOSS_EPSILON: f64 = 1e-12;

/// Discriminator-to-generator updates per epoch, kept as an exact `d:g` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrainingRatio {
    disc: u32,
    gen: u32,
}

impl TrainingRatio {
    pub fn new(disc: u32, gen: u32) -> Result<Self> {
        if disc == 0 || gen == 0 {
            return Err(Error::InvalidRatio(format!(
                "{disc}/{gen}: both counts must be at least 1"
            )));
        }
        Ok(Self { disc, gen })
    }

    pub fn disc(self) -> u32 {
        self.disc
    }

    pub fn gen(self) -> u32 {
        self.gen
    }

    /// Only for plotting and fitting; never stored.
    pub fn value(self) -> f64 {
        self.disc as f64 / self.gen as f64
    }

    /// Compares by value, then by the raw pair so the order is total.
    pub fn cmp_value(&self, other: &Self) -> std::cmp::Ordering {
        (self.disc as u64 * other.gen as u64)
            .cmp(&(other.disc as u64 * self.gen as u64))
            .then(self.disc.cmp(&other.disc))
    }
}

impl fmt::Display for TrainingRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gen == 1 {
            write!(f, "{}", self.disc)
        } else {
            write!(f, "{}/{}", self.disc, self.gen)
        }
    }
}

impl FromStr for TrainingRatio {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRatio(format!("{s:?} is not of the form d or d/g"));
        let (d, g) = match s.trim().split_once(['/', ':']) {
            Some((d, g)) => (d.trim(), g.trim()),
            None => (s.trim(), "1"),
        };
        let d = d.parse::<u32>().map_err(|_| bad())?;
        let g = g.parse::<u32>().map_err(|_| bad())?;
        Self::new(d, g)
    }
}

impl Serialize for TrainingRatio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TrainingRatio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The state the generator should learn to prepare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetState {
    state: Statevector,
}

impl TargetState {
    pub fn new(state: Statevector) -> Self {
        Self { state }
    }

    /// (|00⟩ + |11⟩)/√2.
    pub fn bell() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let z = num_complex::Complex64::new(0.0, 0.0);
        let amps = vec![r.into(), z, z, r.into()];
        Self::new(Statevector::from_amplitudes(amps).expect("normalized"))
    }

    pub fn n_qubits(&self) -> usize {
        self.state.n_qubits()
    }

    pub fn state(&self) -> &Statevector {
        &self.state
    }

    pub fn distribution(&self) -> Distribution {
        basis_probabilities(&self.state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Losses {
    pub gen: f64,
    pub disc: f64,
}

/// Cross-entropy GAN losses: `disc = −[ln p_real + ln(1 − p_fake)]` and the
/// non-saturating `gen = −ln p_fake`.
pub fn losses(p_real: f64, p_fake: f64) -> Losses {
    let real = p_real.clamp(LOSS_EPSILON, 1.0 - LOSS_EPSILON);
    let fake = p_fake.clamp(LOSS_EPSILON, 1.0 - LOSS_EPSILON);
    Losses {
        gen: -fake.ln(),
        disc: -(real.ln() + (1.0 - fake).ln()),
    }
}

/// Probabilities and losses seen by an update before it stepped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub p_real: f64,
    pub p_fake: f64,
    pub losses: Losses,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QganState {
    pub gen_params: ParameterVector,
    pub disc_params: ParameterVector,
    pub gen_opt: AdamState,
    pub disc_opt: AdamState,
    pub target: TargetState,
    pub epoch: u64,
}

/// Per-epoch statistics: losses of the epoch's last update and the KL of the
/// generator after the epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u64,
    pub gen_loss: f64,
    pub disc_loss: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub n_qubits: usize,
    pub epochs: u64,
    pub ratio: TrainingRatio,
    #[serde(default)]
    pub optimizer: AdamConfig,
    pub seed: u64,
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.n_qubits == 0 || self.n_qubits > crate::frameworks::MAX_DATA_QUBITS {
            return Err(Error::QubitCountOutOfRange(self.n_qubits));
        }
        self.optimizer.validate()
    }
}

/// Seeds of the two parameter-initialization streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InitSeeds {
    pub generator: u64,
    pub discriminator: u64,
}

/// Full history of one seeded training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub config: TrainingConfig,
    pub seeds: InitSeeds,
    pub initial_kl: f64,
    pub records: Vec<EpochRecord>,
    pub final_gen_params: ParameterVector,
    pub final_disc_params: ParameterVector,
}

impl TrialResult {
    pub fn final_kl(&self) -> f64 {
        self.records.last().map_or(self.initial_kl, |r| r.kl)
    }
}

/// Generator/discriminator pair for `n` data qubits, with both training
/// circuits lowered once.
#[derive(Debug, Clone)]
pub struct Qgan {
    n_qubits: usize,
    generator: CircuitFramework,
    discriminator: CircuitFramework,
    gen_circuit: ShiftableCircuit,
    fake_circuit: ShiftableCircuit,
    real_circuit: ShiftableCircuit,
}

impl Qgan {
    /// The standard frameworks for `n` data qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::with_frameworks(build_generator(n_qubits)?, build_discriminator(n_qubits)?)
    }

    /// Custom frameworks; the discriminator must span the generator's qubits
    /// plus one output qubit on top.
    pub fn with_frameworks(generator: CircuitFramework, discriminator: CircuitFramework) -> Result<Self> {
        let n_qubits = generator.n_qubits();
        if discriminator.n_qubits() != n_qubits + 1 {
            return Err(Error::DimensionMismatch {
                expected: n_qubits + 1,
                actual: discriminator.n_qubits(),
            });
        }
        let fake = CircuitFramework::compose(n_qubits + 1, &[&generator, &discriminator])?;
        Ok(Self {
            n_qubits,
            gen_circuit: ShiftableCircuit::new(&generator)?,
            fake_circuit: ShiftableCircuit::new(&fake)?,
            real_circuit: ShiftableCircuit::new(&discriminator)?,
            generator,
            discriminator,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn generator(&self) -> &CircuitFramework {
        &self.generator
    }

    pub fn discriminator(&self) -> &CircuitFramework {
        &self.discriminator
    }

    fn output_qubit(&self) -> usize {
        self.n_qubits
    }

    /// Fresh state with the given parameters and zeroed optimizers.
    pub fn init_state(
        &self,
        target: TargetState,
        gen_params: ParameterVector,
        disc_params: ParameterVector,
        optimizer: AdamConfig,
    ) -> Result<QganState> {
        if target.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: target.n_qubits(),
            });
        }
        for (params, fw) in [(&gen_params, &self.generator), (&disc_params, &self.discriminator)] {
            if params.len() != fw.param_count() {
                return Err(Error::ParameterCount {
                    expected: fw.param_count(),
                    actual: params.len(),
                });
            }
        }
        Ok(QganState {
            gen_opt: AdamState::new(gen_params.len().max(1), optimizer)?,
            disc_opt: AdamState::new(disc_params.len().max(1), optimizer)?,
            gen_params,
            disc_params,
            target,
            epoch: 0,
        })
    }

    fn fake_params(&self, state: &QganState) -> Vec<f64> {
        let mut p = Vec::with_capacity(state.gen_params.len() + state.disc_params.len());
        p.extend_from_slice(&state.gen_params);
        p.extend_from_slice(&state.disc_params);
        p
    }

    fn real_input(&self, state: &QganState) -> Result<Statevector> {
        state.target.state().with_ancillas(1)
    }

    /// `(p_real, p_fake)`: probability that the output qubit reads "real" on
    /// the target and on the generator's state.
    pub fn d_values(&self, state: &QganState) -> Result<(f64, f64)> {
        let zero = Statevector::zero(self.n_qubits + 1)?;
        let p_fake = self
            .fake_circuit
            .prob(&self.fake_params(state), &zero, self.output_qubit())?;
        let p_real = self
            .real_circuit
            .prob(&state.disc_params, &self.real_input(state)?, self.output_qubit())?;
        Ok((p_real, p_fake))
    }

    /// One Adam step on the generator against the frozen discriminator.
    pub fn generator_update(&self, state: &QganState) -> Result<(QganState, UpdateReport)> {
        let zero = Statevector::zero(self.n_qubits + 1)?;
        let wrt: Vec<usize> = (0..state.gen_params.len()).collect();
        let fake = self
            .fake_circuit
            .prob_and_gradient(&self.fake_params(state), &zero, self.output_qubit(), &wrt)?;
        let p_real = self
            .real_circuit
            .prob(&state.disc_params, &self.real_input(state)?, self.output_qubit())?;
        let report = UpdateReport {
            p_real,
            p_fake: fake.value,
            losses: losses(p_real, fake.value),
        };
        let mut next = state.clone();
        if !wrt.is_empty() {
            // d(−ln p)/dθ
            let scale = -1.0 / fake.value.clamp(LOSS_EPSILON, 1.0);
            let grad: Vec<f64> = fake.partials.iter().map(|d| scale * d).collect();
            let (opt, params) = state.gen_opt.step(&state.gen_params, &grad)?;
            next.gen_opt = opt;
            next.gen_params = params;
        }
        Ok((next, report))
    }

    /// One Adam step on the discriminator using both circuits evaluated at the
    /// current parameters; the two gradient branches are summed.
    pub fn discriminator_update(&self, state: &QganState) -> Result<(QganState, UpdateReport)> {
        let zero = Statevector::zero(self.n_qubits + 1)?;
        let n_gen = state.gen_params.len();
        let n_disc = state.disc_params.len();
        let fake_wrt: Vec<usize> = (n_gen..n_gen + n_disc).collect();
        let real_wrt: Vec<usize> = (0..n_disc).collect();
        let fake =
            self.fake_circuit
                .prob_and_gradient(&self.fake_params(state), &zero, self.output_qubit(), &fake_wrt)?;
        let real = self.real_circuit.prob_and_gradient(
            &state.disc_params,
            &self.real_input(state)?,
            self.output_qubit(),
            &real_wrt,
        )?;
        let report = UpdateReport {
            p_real: real.value,
            p_fake: fake.value,
            losses: losses(real.value, fake.value),
        };
        let mut next = state.clone();
        if n_disc > 0 {
            // d(−ln p_real)/dφ + d(−ln(1 − p_fake))/dφ
            let real_scale = -1.0 / real.value.clamp(LOSS_EPSILON, 1.0);
            let fake_scale = 1.0 / (1.0 - fake.value).clamp(LOSS_EPSILON, 1.0);
            let grad: Vec<f64> = real
                .partials
                .iter()
                .zip(&fake.partials)
                .map(|(r, f)| real_scale * r + fake_scale * f)
                .collect();
            let (opt, params) = state.disc_opt.step(&state.disc_params, &grad)?;
            next.disc_opt = opt;
            next.disc_params = params;
        }
        Ok((next, report))
    }

    /// `d` discriminator updates followed by `g` generator updates.
    pub fn run_epoch(&self, state: &QganState, ratio: TrainingRatio) -> Result<(QganState, EpochRecord)> {
        let mut current = state.clone();
        let mut last = None;
        for _ in 0..ratio.disc() {
            let (next, report) = self.discriminator_update(&current)?;
            current = next;
            last = Some(report);
        }
        for _ in 0..ratio.gen() {
            let (next, report) = self.generator_update(&current)?;
            current = next;
            last = Some(report);
        }
        current.epoch += 1;
        let report = last.expect("ratio has at least one update");
        let record = EpochRecord {
            epoch: current.epoch,
            gen_loss: report.losses.gen,
            disc_loss: report.losses.disc,
            kl: self.kl(&current)?,
        };
        Ok((current, record))
    }

    /// Distribution the generator prepares from |0…0⟩.
    pub fn generator_distribution(&self, gen_params: &[f64]) -> Result<Distribution> {
        let zero = Statevector::zero(self.n_qubits)?;
        Ok(basis_probabilities(&self.gen_circuit.final_state(gen_params, &zero)?))
    }

    /// KL(target ‖ generator) in nats.
    pub fn kl(&self, state: &QganState) -> Result<f64> {
        kl_divergence(
            &state.target.distribution(),
            &self.generator_distribution(&state.gen_params)?,
        )
    }

    /// Randomly initializes both circuits and trains for `config.epochs` epochs.
    pub fn train(&self, config: &TrainingConfig, target: &TargetState, seeds: InitSeeds) -> Result<TrialResult> {
        config.validate()?;
        if config.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: config.n_qubits,
            });
        }
        let gen_params = self
            .generator
            .random_parameters(&mut ChaCha8Rng::seed_from_u64(seeds.generator));
        let disc_params = self
            .discriminator
            .random_parameters(&mut ChaCha8Rng::seed_from_u64(seeds.discriminator));
        let mut state = self.init_state(target.clone(), gen_params, disc_params, config.optimizer)?;
        let initial_kl = self.kl(&state)?;
        let mut records = Vec::with_capacity(config.epochs as usize);
        for _ in 0..config.epochs {
            let (next, record) = self.run_epoch(&state, config.ratio)?;
            state = next;
            records.push(record);
        }
        Ok(TrialResult {
            config: config.clone(),
            seeds,
            initial_kl,
            records,
            final_gen_params: state.gen_params,
            final_disc_params: state.disc_params,
        })
    }
}

/// Trains the standard `config.n_qubits` QGAN on `target`.
pub fn train(config: &TrainingConfig, target: &TargetState, seeds: InitSeeds) -> Result<TrialResult> {
    Qgan::new(config.n_qubits)?.train(config, target, seeds)
}

/// Distribution of the standard `n`-qubit generator bound to `gen_params`.
pub fn generator_distribution(gen_params: &ParameterVector, n: usize) -> Result<Distribution> {
    Qgan::new(n)?.generator_distribution(gen_params)
}
