//! Reading and writing artifact files.
//!
//! CSV files start with a `#` line naming the schema and its version, then a
//! header row. Floats are written in Rust's shortest round-trip form.

use std::path::Path;

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Version of the code that wrote an artifact.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_csv<I>(path: &Path, schema: &str, header: &[&str], rows: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut bytes = format!("# qgan {schema} v{CSV_SCHEMA_VERSION}\n").into_bytes();
    {
        let mut writer = csv::Writer::from_writer(&mut bytes);
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(&row)?;
        }
        writer.flush()?;
    }
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

/// Header and rows of a CSV written by [`write_csv`]; the header must match
/// `expected`.
pub fn read_csv(path: &Path, expected: &[&str]) -> anyhow::Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header = reader.headers()?.clone();
    if header.iter().ne(expected.iter().copied()) {
        bail!(
            "{}: unexpected columns {:?}",
            path.display(),
            header.iter().collect::<Vec<_>>()
        );
    }
    reader
        .records()
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("malformed row in {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}
