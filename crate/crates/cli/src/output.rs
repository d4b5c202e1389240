use crate::CliError;
use serde::Serialize;
use std::fs::File;
use std::path::Path;

pub fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    csv::WriterBuilder::new()
        .has_headers(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Resolved inputs and produced files of one run.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, P: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub created_unix: u64,
    pub seed: Option<u64>,
    pub threads: usize,
    pub config: &'a crate::config::RunConfig,
    pub params: &'a P,
    pub outputs: Vec<String>,
}
