use std::path::{Path, PathBuf};

use anyhow::Context;
use qgan::fit::{fit_all, select_family, FitModel, Growth, Selection};
use qgan::harness::BestSettings;
use serde::{Deserialize, Serialize};

use crate::args::FitArgs;
use crate::artifacts::{fmt_f64, read_json, write_json, CODE_VERSION};
use crate::config::resolve_fit;
use crate::error::{usage, Classify, CliResult};

/// A best setting reduced to one number per qubit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Epoch count at which the trial-mean KL is lowest.
    Epochs,
    /// Training ratio at which the trial-mean KL is lowest.
    AverageRatio,
    /// Training ratio at which the per-epoch minimum KL is lowest.
    BestRatio,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::Epochs, Quantity::AverageRatio, Quantity::BestRatio];

    pub fn of(self, s: &BestSettings) -> f64 {
        match self {
            Quantity::Epochs => s.average.epochs as f64,
            Quantity::AverageRatio => s.average.ratio.value(),
            Quantity::BestRatio => s.best.ratio.value(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Epochs => "epochs",
            Quantity::AverageRatio => "average_ratio",
            Quantity::BestRatio => "best_ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityFit {
    pub quantity: Quantity,
    pub points: Vec<(f64, f64)>,
    pub models: Vec<FitModel>,
    pub selection: Option<Selection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitsFile {
    pub qgan_version: String,
    pub inputs: Vec<BestSettings>,
    pub holdout: Option<BestSettings>,
    pub fits: Vec<QuantityFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub quantity: Quantity,
    pub selected: qgan::Family,
    pub growth: Growth,
    /// In-sample squared residuals of every family.
    pub sse: Vec<(qgan::Family, f64)>,
    pub holdout: (f64, f64),
    pub holdout_errors: Vec<qgan::fit::HoldoutError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictFile {
    pub qgan_version: String,
    pub verdicts: Vec<Verdict>,
}

fn load(path: &Path) -> CliResult<BestSettings> {
    read_json(path)
        .context("expected a best_settings.json written by `qgan sweep`")
        .usage()
}

pub fn run(args: &FitArgs) -> CliResult<PathBuf> {
    let (run, out) = resolve_fit(args)?;
    let mut inputs = run.inputs.iter().map(|p| load(p)).collect::<CliResult<Vec<_>>>()?;
    inputs.sort_by_key(|s| s.n_qubits);
    if inputs.windows(2).any(|w| w[0].n_qubits == w[1].n_qubits) {
        return Err(usage("fit inputs must come from distinct qubit counts"));
    }
    let holdout = run.holdout.as_deref().map(load).transpose()?;
    if let Some(h) = &holdout {
        if inputs.iter().any(|s| s.n_qubits == h.n_qubits) {
            return Err(usage(format!(
                "holdout qubit count {} is also a fitted input",
                h.n_qubits
            )));
        }
    }

    let mut fits = Vec::new();
    for quantity in Quantity::ALL {
        let points: Vec<(f64, f64)> = inputs.iter().map(|s| (s.n_qubits as f64, quantity.of(s))).collect();
        let models = fit_all(&points)
            .with_context(|| format!("fitting {}", quantity.name()))
            .usage()?;
        let selection = holdout
            .as_ref()
            .map(|h| select_family(&models, (h.n_qubits as f64, quantity.of(h))))
            .transpose()
            .runtime()?;
        fits.push(QuantityFit {
            quantity,
            points,
            models,
            selection,
        });
    }

    std::fs::create_dir_all(&out).runtime()?;
    let file = FitsFile {
        qgan_version: CODE_VERSION.into(),
        inputs,
        holdout,
        fits,
    };
    write_json(&out.join("fits.json"), &file).runtime()?;
    for fit in &file.fits {
        let summary: Vec<String> = fit
            .models
            .iter()
            .map(|m| format!("{} a={} b={}", m.family, fmt_f64(m.a), fmt_f64(m.b)))
            .collect();
        println!("{}: {}", fit.quantity.name(), summary.join("; "));
    }
    if file.holdout.is_some() {
        let verdicts: Vec<Verdict> = file
            .fits
            .iter()
            .filter_map(|f| {
                let sel = f.selection.as_ref()?;
                Some(Verdict {
                    quantity: f.quantity,
                    selected: sel.selected,
                    growth: sel.growth,
                    sse: f.models.iter().map(|m| (m.family, m.sse)).collect(),
                    holdout: sel.holdout,
                    holdout_errors: sel.errors.clone(),
                })
            })
            .collect();
        for v in &verdicts {
            println!("verdict {}: {} ({})", v.quantity.name(), v.selected, v.growth);
        }
        write_json(
            &out.join("verdict.json"),
            &VerdictFile {
                qgan_version: CODE_VERSION.into(),
                verdicts,
            },
        )
        .runtime()?;
    }
    Ok(out)
}
