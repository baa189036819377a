use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::Cli;

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Report body wrapped with the run configuration and generation time.
pub fn envelope(cli: &Cli, result: impl Serialize) -> Result<Value> {
    Ok(json!({
        "config": cli,
        "generated_at": timestamp(),
        "result": serde_json::to_value(result)?,
    }))
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json(cli: &Cli, value: &Value) -> Result<()> {
    let mut out = open(cli.common.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_text(cli: &Cli, text: &str) -> Result<()> {
    let mut out = open(cli.common.output.as_deref())?;
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

/// Where the configuration of a CSV run goes: `<out>.run.json` next to the
/// CSV file, or stderr when the CSV goes to stdout.
pub fn write_csv_config(cli: &Cli) -> Result<()> {
    let value = json!({ "config": cli, "generated_at": timestamp() });
    match &cli.common.output {
        Some(p) => {
            let side = sidecar(p);
            let f = File::create(&side).with_context(|| format!("cannot create {}", side.display()))?;
            serde_json::to_writer_pretty(BufWriter::new(f), &value)?;
        }
        None => eprintln!("{}", serde_json::to_string(&value)?),
    }
    Ok(())
}

pub fn sidecar(csv: &Path) -> PathBuf {
    let mut name = csv.file_stem().unwrap_or_default().to_os_string();
    name.push(".run.json");
    csv.with_file_name(name)
}
