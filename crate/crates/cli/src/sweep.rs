use std::path::PathBuf;

use qgan::engine::{InitSeeds, TargetState};
use qgan::harness::{aggregate_and_best, run_sweep_resumable, BestSettings, TrialStore, SEED_MIX_VERSION};
use serde::Serialize;

use crate::args::SweepArgs;
use crate::artifacts::{fmt_f64, write_csv, write_json, CODE_VERSION};
use crate::config::{resolve_sweep, SweepRun};
use crate::error::{Classify, CliResult};

pub const SWEEP_HEADER: [&str; 7] = [
    "ratio_num",
    "ratio_den",
    "trial",
    "epoch",
    "gen_loss",
    "disc_loss",
    "kl_nats",
];
pub const TRIALS_HEADER: [&str; 6] = [
    "ratio",
    "trial",
    "generator_seed",
    "discriminator_seed",
    "initial_kl_nats",
    "final_kl_nats",
];
pub const AGGREGATES_HEADER: [&str; 4] = ["ratio", "epoch", "mean_kl_nats", "min_kl_nats"];

#[derive(Serialize)]
struct TrialEcho<'a> {
    trial: u64,
    seeds: InitSeeds,
    target: &'a TargetState,
}

#[derive(Serialize)]
struct SweepFile<'a> {
    qgan_version: &'a str,
    seed_mix: &'a str,
    config: &'a SweepRun,
    trials: Vec<TrialEcho<'a>>,
}

#[derive(Serialize)]
struct BestSettingsFile<'a> {
    qgan_version: &'a str,
    #[serde(flatten)]
    settings: &'a BestSettings,
}

pub fn run(args: &SweepArgs) -> CliResult<PathBuf> {
    let (run, out, jobs) = resolve_sweep(args)?;
    let config = run.sweep_config();
    std::fs::create_dir_all(&out).runtime()?;
    let store = TrialStore::open(out.join("trials")).runtime()?;
    let (sweep, stats) = run_sweep_resumable(&config, jobs, Some(&store)).runtime()?;
    let (curves, best) = aggregate_and_best(&sweep).runtime()?;

    write_json(
        &out.join("sweep.json"),
        &SweepFile {
            qgan_version: CODE_VERSION,
            seed_mix: SEED_MIX_VERSION,
            config: &run,
            trials: sweep
                .trials
                .iter()
                .map(|t| TrialEcho {
                    trial: t.trial_index,
                    seeds: t.seeds,
                    target: &t.target,
                })
                .collect(),
        },
    )
    .runtime()?;
    let history = sweep.runs.iter().flat_map(|r| {
        r.result.records.iter().map(move |e| {
            vec![
                r.ratio.disc().to_string(),
                r.ratio.gen().to_string(),
                r.trial_index.to_string(),
                e.epoch.to_string(),
                fmt_f64(e.gen_loss),
                fmt_f64(e.disc_loss),
                fmt_f64(e.kl),
            ]
        })
    });
    write_csv(&out.join("sweep.csv"), "sweep.csv", &SWEEP_HEADER, history).runtime()?;
    let trials = sweep.runs.iter().map(|r| {
        vec![
            r.ratio.to_string(),
            r.trial_index.to_string(),
            r.result.seeds.generator.to_string(),
            r.result.seeds.discriminator.to_string(),
            fmt_f64(r.result.initial_kl),
            fmt_f64(r.result.final_kl()),
        ]
    });
    write_csv(&out.join("trials.csv"), "trials.csv", &TRIALS_HEADER, trials).runtime()?;
    let aggregates = curves.curves.iter().flat_map(|c| {
        c.mean_kl
            .iter()
            .zip(&c.min_kl)
            .enumerate()
            .map(move |(e, (mean, min))| vec![c.ratio.to_string(), (e + 1).to_string(), fmt_f64(*mean), fmt_f64(*min)])
    });
    write_csv(
        &out.join("aggregates.csv"),
        "aggregates.csv",
        &AGGREGATES_HEADER,
        aggregates,
    )
    .runtime()?;
    write_json(
        &out.join("best_settings.json"),
        &BestSettingsFile {
            qgan_version: CODE_VERSION,
            settings: &best,
        },
    )
    .runtime()?;

    eprintln!(
        "{} runs trained, {} reused from {}",
        stats.computed,
        stats.reused,
        store.dir().display()
    );
    println!(
        "best average case: ratio {} after {} epochs (mean KL {}); best case: ratio {} after {} epochs (KL {})",
        best.average.ratio,
        best.average.epochs,
        fmt_f64(best.average.kl),
        best.best.ratio,
        best.best.epochs,
        fmt_f64(best.best.kl)
    );
    Ok(out)
}
