//! CSV and JSON emission. CSV floats carry 17 significant digits so values
//! round-trip exactly; JSON uses serde_json's shortest round-trip encoding.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// 17 significant digits: exact round-trip for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}"))),
        Some(path) => {
            let mut file = File::create(path)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
            file.write_all(bytes)
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
        }
    }
}

pub fn write_csv(
    out: Option<&PathBuf>,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(header)
        .and_then(|_| rows.iter().try_for_each(|row| writer.write_record(row)))
        .map_err(|e| CliError::Runtime(format!("csv serialization failed: {e}")))?;
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Runtime(format!("csv serialization failed: {e}")))?;
    write_bytes(out.map(|p| p.as_path()), &bytes)
}

pub fn write_json<T: Serialize>(out: Option<&PathBuf>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("json serialization failed: {e}")))?;
    text.push('\n');
    write_bytes(out.map(|p| p.as_path()), text.as_bytes())
}
