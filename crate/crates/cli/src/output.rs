use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Where reports go: stdout always, plus `<stem>.txt` / `<stem>.json` under
/// the output directory when one is set.
pub struct Output {
    pub dir: Option<PathBuf>,
    pub json: bool,
}

impl Output {
    pub fn new(dir: Option<PathBuf>, json: bool) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| stresslens::Error::io(d, e))?;
        }
        Ok(Output { dir, json })
    }

    pub fn emit(&self, stem: &str, text: &str, json: &str) -> Result<()> {
        let shown = if self.json { json } else { text };
        let mut out = std::io::stdout().lock();
        out.write_all(shown.as_bytes()).context("writing to stdout")?;
        if let Some(d) = &self.dir {
            write_file(&d.join(format!("{stem}.txt")), text)?;
            write_file(&d.join(format!("{stem}.json")), json)?;
        }
        Ok(())
    }

    /// Path for an artifact under the output directory, if there is one.
    pub fn artifact(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| stresslens::Error::io(path, e))?;
    Ok(())
}

/// Writes to `path`, or to stdout when there is none.
pub fn write_or_stdout(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, content),
        None => {
            std::io::stdout().lock().write_all(content.as_bytes()).context("writing to stdout")?;
            Ok(())
        }
    }
}

pub fn to_json<S: serde::Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}
