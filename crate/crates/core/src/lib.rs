//! Fully-quantum generative adversarial networks on a dense statevector
//! simulator.
//!
//! A parameterized generator circuit learns to prepare a target state from
//! |0…0⟩ while a parameterized discriminator circuit, reading one extra output
//! qubit, learns to tell the generator's state from the target. Progress is
//! verified with the KL divergence between the two measurement distributions.
//! The [`harness`] and [`fit`] modules run randomized training-ratio sweeps
//! and fit scaling laws to the best settings found.

pub mod engine;
pub mod error;
pub mod fit;
pub mod frameworks;
pub mod grad;
pub mod harness;
pub mod metrics;
pub mod optim;
pub mod sim;

pub use engine::{
    losses, train, EpochRecord, InitSeeds, Losses, Qgan, QganState, TargetState, TrainingConfig, TrainingRatio,
    TrialResult,
};
pub use error::{Error, Result};
pub use fit::{fit_curve, predict, select_family, Family, FitModel, Growth};
pub use frameworks::{build_discriminator, build_generator, CircuitFramework, ParameterVector};
pub use harness::{run_sweep, SweepConfig, SweepResult, TargetFamily};
pub use metrics::{kl_divergence, Distribution};
pub use optim::{AdamConfig, AdamState};
pub use sim::{Circuit, Gate, Statevector};
