//! Charts and a markdown summary for any directory written by `train`,
//! `sweep` or `fit`.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use qgan::engine::EpochRecord;
use qgan::harness::BestSettings;
use qgan::TrainingRatio;

use crate::args::ReportArgs;
use crate::artifacts::{fmt_f64, read_csv, read_json};
use crate::error::{usage, Classify, CliResult};
use crate::fit::FitsFile;
use crate::svg::{render, Panel, Series};
use crate::sweep::AGGREGATES_HEADER;
use crate::train::EPOCHS_HEADER;

/// One ratio's mean and minimum KL per epoch.
pub type RatioCurve = (TrainingRatio, Vec<f64>, Vec<f64>);

fn field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize) -> anyhow::Result<T> {
    let text = record.get(i).ok_or_else(|| anyhow!("missing column {i}"))?;
    text.parse().map_err(|_| anyhow!("cannot parse {text:?} in column {i}"))
}

pub fn read_epochs(path: &Path) -> anyhow::Result<Vec<EpochRecord>> {
    read_csv(path, &EPOCHS_HEADER)?
        .iter()
        .map(|r| {
            Ok(EpochRecord {
                epoch: field(r, 0)?,
                gen_loss: field(r, 1)?,
                disc_loss: field(r, 2)?,
                kl: field(r, 3)?,
            })
        })
        .collect::<anyhow::Result<_>>()
        .with_context(|| format!("in {}", path.display()))
}

/// Per-ratio KL curves, ordered by ratio value.
pub fn read_aggregates(path: &Path) -> anyhow::Result<Vec<RatioCurve>> {
    let mut by_ratio: BTreeMap<String, RatioCurve> = BTreeMap::new();
    for r in read_csv(path, &AGGREGATES_HEADER)? {
        let ratio: TrainingRatio = field(&r, 0)?;
        let entry = by_ratio
            .entry(ratio.to_string())
            .or_insert((ratio, Vec::new(), Vec::new()));
        entry.1.push(field(&r, 2)?);
        entry.2.push(field(&r, 3)?);
    }
    let mut curves: Vec<_> = by_ratio.into_values().collect();
    curves.sort_by(|a, b| a.0.cmp_value(&b.0));
    Ok(curves)
}

fn epoch_series(label: &str, values: impl Iterator<Item = f64>) -> Series {
    Series {
        label: label.into(),
        points: values.enumerate().map(|(i, v)| (i as f64 + 1.0, v)).collect(),
    }
}

/// Losses on top, KL divergence (log scale) below.
pub fn training_chart(records: &[EpochRecord]) -> String {
    render(&[
        Panel {
            title: "Losses".into(),
            x_label: "epoch".into(),
            y_label: "loss".into(),
            log_y: false,
            series: vec![
                epoch_series("generator", records.iter().map(|r| r.gen_loss)),
                epoch_series("discriminator", records.iter().map(|r| r.disc_loss)),
            ],
        },
        Panel {
            title: "KL divergence".into(),
            x_label: "epoch".into(),
            y_label: "KL (nats)".into(),
            log_y: true,
            series: vec![epoch_series("KL", records.iter().map(|r| r.kl))],
        },
    ])
}

/// Mean KL across trials on top, minimum KL below, one line per ratio.
pub fn sweep_chart(curves: &[RatioCurve]) -> String {
    let panel = |title: &str, y_label: &str, pick: fn(&RatioCurve) -> &Vec<f64>| Panel {
        title: title.into(),
        x_label: "epoch".into(),
        y_label: y_label.into(),
        log_y: true,
        series: curves
            .iter()
            .map(|c| epoch_series(&format!("ratio {}", c.0), pick(c).iter().copied()))
            .collect(),
    };
    render(&[
        panel("Average case", "mean KL (nats)", |c| &c.1),
        panel("Best case", "min KL (nats)", |c| &c.2),
    ])
}

fn argmin(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            Some((_, b)) if v < b => Some((i, v)),
            Some(_) => best,
            None => Some((i, v)),
        })
}

fn training_section(dir: &Path, out: &Path, md: &mut String) -> CliResult<()> {
    let records = read_epochs(&dir.join("epochs.csv")).usage()?;
    std::fs::write(out.join("training.svg"), training_chart(&records)).runtime()?;
    let last = records.last().ok_or_else(|| usage("epochs.csv has no rows"))?;
    let kls: Vec<f64> = records.iter().map(|r| r.kl).collect();
    let (at, lowest) = argmin(&kls).expect("non-empty");
    let _ = writeln!(md, "## Training run\n\n![training](training.svg)\n");
    let _ = writeln!(
        md,
        "| epochs | final generator loss | final discriminator loss | final KL (nats) | lowest KL (nats) | at epoch |"
    );
    let _ = writeln!(md, "|---|---|---|---|---|---|");
    let _ = writeln!(
        md,
        "| {} | {:.6} | {:.6} | {:.3e} | {:.3e} | {} |\n",
        records.len(),
        last.gen_loss,
        last.disc_loss,
        last.kl,
        lowest,
        records[at].epoch
    );
    Ok(())
}

fn sweep_section(dir: &Path, out: &Path, md: &mut String) -> CliResult<()> {
    let curves = read_aggregates(&dir.join("aggregates.csv")).usage()?;
    if curves.is_empty() {
        return Err(usage("aggregates.csv has no rows"));
    }
    std::fs::write(out.join("sweep_kl.svg"), sweep_chart(&curves)).runtime()?;
    let _ = writeln!(md, "## Sweep\n\n![sweep](sweep_kl.svg)\n");
    let _ = writeln!(
        md,
        "| ratio | final mean KL | final min KL | lowest mean KL | at epoch | lowest min KL | at epoch |"
    );
    let _ = writeln!(md, "|---|---|---|---|---|---|---|");
    for (ratio, mean, min) in &curves {
        let (em, vm) = argmin(mean).ok_or_else(|| usage("empty curve"))?;
        let (en, vn) = argmin(min).ok_or_else(|| usage("empty curve"))?;
        let _ = writeln!(
            md,
            "| {ratio} | {:.3e} | {:.3e} | {vm:.3e} | {} | {vn:.3e} | {} |",
            mean.last().copied().unwrap_or(f64::NAN),
            min.last().copied().unwrap_or(f64::NAN),
            em + 1,
            en + 1
        );
    }
    md.push('\n');
    let best_path = dir.join("best_settings.json");
    if best_path.exists() {
        let best: BestSettings = read_json(&best_path).usage()?;
        let _ = writeln!(
            md,
            "Best average case: ratio {} after {} epochs (mean KL {:.3e}).\n\nBest case: ratio {} after {} epochs (KL {:.3e}).\n",
            best.average.ratio, best.average.epochs, best.average.kl, best.best.ratio, best.best.epochs, best.best.kl
        );
    }
    Ok(())
}

fn fit_section(dir: &Path, md: &mut String) -> CliResult<()> {
    let fits: FitsFile = read_json(&dir.join("fits.json")).usage()?;
    let _ = writeln!(md, "## Scaling fits\n");
    let _ = writeln!(md, "| quantity | family | a | b | SSE | holdout error |");
    let _ = writeln!(md, "|---|---|---|---|---|---|");
    for fit in &fits.fits {
        for m in &fit.models {
            let err = fit
                .selection
                .as_ref()
                .and_then(|s| s.errors.iter().find(|e| e.family == m.family))
                .map_or_else(|| "-".to_string(), |e| format!("{:.4}", e.abs_error));
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {:.4e} | {err} |",
                fit.quantity.name(),
                m.family,
                fmt_f64(m.a),
                fmt_f64(m.b),
                m.sse
            );
        }
    }
    md.push('\n');
    for fit in &fits.fits {
        if let Some(s) = &fit.selection {
            let _ = writeln!(
                md,
                "- {}: {} fits the held-out point best ({}).",
                fit.quantity.name(),
                s.selected,
                s.growth
            );
        }
    }
    Ok(())
}

/// Writes `report.md` plus whichever charts apply; returns the report path.
pub fn run(args: &ReportArgs) -> CliResult<PathBuf> {
    let dir = &args.dir;
    if !dir.is_dir() {
        return Err(usage(format!("{} is not a directory", dir.display())));
    }
    let out = args.out.clone().unwrap_or_else(|| dir.clone());
    std::fs::create_dir_all(&out).runtime()?;
    let mut md = format!("# QGAN report: {}\n\n", dir.display());
    let mut found = false;
    if dir.join("epochs.csv").exists() {
        training_section(dir, &out, &mut md)?;
        found = true;
    }
    if dir.join("aggregates.csv").exists() {
        sweep_section(dir, &out, &mut md)?;
        found = true;
    }
    if dir.join("fits.json").exists() {
        fit_section(dir, &mut md)?;
        found = true;
    }
    if !found {
        return Err(usage(format!(
            "{} holds no epochs.csv, aggregates.csv or fits.json",
            dir.display()
        )));
    }
    let path = out.join("report.md");
    std::fs::write(&path, md).runtime()?;
    println!("wrote {}", path.display());
    Ok(path)
}
