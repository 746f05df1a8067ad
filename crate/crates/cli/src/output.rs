use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

/// Where results go and the provenance line every file starts with.
pub struct Output {
    pub dir: PathBuf,
    header: String,
}

impl Output {
    pub fn new(dir: PathBuf, invocation: &str, seed: u64) -> Self {
        Self {
            dir,
            header: format!("# {invocation} (seed {seed})\n"),
        }
    }

    /// Writes `body` under `name` via a temporary file in the same directory
    /// and a rename, so readers never see a partial file.
    pub fn write(&self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| io_error(&self.dir, e))?;
        let path = self.dir.join(name);
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(|e| io_error(&self.dir, e))?;
        tmp.write_all(self.header.as_bytes())
            .and_then(|_| tmp.write_all(body.as_bytes()))
            .map_err(|e| io_error(&path, e))?;
        tmp.persist(&path).map_err(|e| io_error(&path, e.error))?;
        Ok(path)
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Rows of `Display` cells joined by commas.
#[derive(Default)]
pub struct Table(String);

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self(format!("{}\n", columns.join(",")))
    }

    pub fn row(&mut self, cells: &[&dyn std::fmt::Display]) {
        let mut first = true;
        for c in cells {
            if !first {
                self.0.push(',');
            }
            first = false;
            let text = c.to_string();
            match text.parse::<f64>() {
                // Display never uses an exponent; switch to one for extreme magnitudes
                Ok(v) if v != 0.0 && v.is_finite() && !(1e-4..1e15).contains(&v.abs()) => {
                    let _ = write!(self.0, "{v:e}");
                }
                _ => self.0.push_str(&text),
            }
        }
        self.0.push('\n');
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

/// Empty cell for absent optional values.
pub fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}
