//! CSV files with a `#`-prefixed metadata preamble.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

pub const TOOL: &str = concat!("clef ", env!("CARGO_PKG_VERSION"));

pub const D_FP_NOTE: &str = "d_fp charges a falsely detected legitimate flow its nominal rate from detection to the horizon";

/// Lines written before the CSV header: tool, seed, command and the full config.
pub fn preamble(cmd: &str, cfg: &ExperimentConfig, extra: &[String]) -> Vec<String> {
    let mut v = vec![
        format!("# tool: {TOOL}"),
        format!("# command: {cmd}"),
        format!("# master_seed: {}", cfg.run.seed),
    ];
    v.extend(extra.iter().map(|e| format!("# {e}")));
    v.push("# config:".into());
    v.extend(cfg.to_toml().lines().map(|l| format!("#   {l}")));
    v
}

pub fn write_csv<T: Serialize>(path: &Path, preamble: &[String], rows: &[T]) -> Result<()> {
    let f = File::create(path)?;
    let mut w = BufWriter::new(f);
    for l in preamble {
        writeln!(w, "{l}")?;
    }
    let mut c = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    for r in rows {
        c.serialize(r).map_err(csv_err)?;
    }
    c.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Invariant(format!("csv: {other:?}")),
    }
}
