use std::path::PathBuf;

use qgan::engine::{EpochRecord, InitSeeds, TargetState, TrainingConfig};
use qgan::harness::{derive_seed, SeedRole, SEED_MIX_VERSION};
use qgan::{ParameterVector, Qgan};
use serde::Serialize;

use crate::args::TrainArgs;
use crate::artifacts::{fmt_f64, write_csv, write_json, CODE_VERSION};
use crate::config::{resolve_train, TrainRun};
use crate::error::{Classify, CliResult};
use crate::report::training_chart;

pub const EPOCHS_HEADER: [&str; 4] = ["epoch", "gen_loss", "disc_loss", "kl_nats"];

#[derive(Serialize)]
struct RunFile<'a> {
    qgan_version: &'a str,
    seed_mix: &'a str,
    config: &'a TrainRun,
    seeds: InitSeeds,
    target: &'a TargetState,
    initial_kl: f64,
    final_kl: f64,
}

#[derive(Serialize)]
struct FinalParams<'a> {
    generator: &'a ParameterVector,
    discriminator: &'a ParameterVector,
}

/// Seeds for a single run; the same as trial 0 of a sweep with this master seed.
pub fn run_seeds(seed: u64) -> InitSeeds {
    InitSeeds {
        generator: derive_seed(seed, 0, SeedRole::Generator),
        discriminator: derive_seed(seed, 0, SeedRole::Discriminator),
    }
}

pub fn epoch_rows(records: &[EpochRecord]) -> impl Iterator<Item = Vec<String>> + '_ {
    records.iter().map(|r| {
        vec![
            r.epoch.to_string(),
            fmt_f64(r.gen_loss),
            fmt_f64(r.disc_loss),
            fmt_f64(r.kl),
        ]
    })
}

pub fn run(args: &TrainArgs) -> CliResult<PathBuf> {
    let (run, out) = resolve_train(args)?;
    let target = run.load_target()?;
    let seeds = run_seeds(run.seed);
    let config = TrainingConfig {
        n_qubits: run.qubits,
        epochs: run.epochs,
        ratio: run.ratio,
        optimizer: run.optimizer(),
        seed: run.seed,
    };
    let result = Qgan::new(run.qubits)
        .runtime()?
        .train(&config, &target, seeds)
        .runtime()?;

    std::fs::create_dir_all(&out).runtime()?;
    write_json(
        &out.join("run.json"),
        &RunFile {
            qgan_version: CODE_VERSION,
            seed_mix: SEED_MIX_VERSION,
            config: &run,
            seeds,
            target: &target,
            initial_kl: result.initial_kl,
            final_kl: result.final_kl(),
        },
    )
    .runtime()?;
    write_csv(
        &out.join("epochs.csv"),
        "epochs.csv",
        &EPOCHS_HEADER,
        epoch_rows(&result.records),
    )
    .runtime()?;
    write_json(
        &out.join("final_params.json"),
        &FinalParams {
            generator: &result.final_gen_params,
            discriminator: &result.final_disc_params,
        },
    )
    .runtime()?;
    if args.svg {
        std::fs::write(out.join("training.svg"), training_chart(&result.records)).runtime()?;
    }
    println!(
        "trained {} epochs at ratio {}: KL {} -> {} nats; artifacts in {}",
        run.epochs,
        run.ratio,
        fmt_f64(result.initial_kl),
        fmt_f64(result.final_kl()),
        out.display()
    );
    Ok(out)
}
