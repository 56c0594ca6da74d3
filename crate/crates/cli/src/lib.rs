//! The `qgan` command line: training runs, randomized sweeps, scaling fits
//! and reports, each writing a self-describing artifact directory.

pub mod args;
pub mod artifacts;
pub mod config;
pub mod error;
pub mod fit;
pub mod report;
pub mod svg;
pub mod sweep;
pub mod train;

use args::Command;
use error::CliResult;

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Train(a) => train::run(a).map(drop),
        Command::Sweep(a) => sweep::run(a).map(drop),
        Command::Fit(a) => fit::run(a).map(drop),
        Command::Report(a) => report::run(a).map(drop),
    }
}
