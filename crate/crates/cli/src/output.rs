//! Output directory handling: CSV/JSON files plus a manifest per run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

pub struct OutputDir {
    dir: PathBuf,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    files: &'a [String],
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: vec![],
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Records every file written so far together with the configuration.
    pub fn finish(self, command: &str, config: &RunConfig) -> Result<Vec<String>> {
        let files = self.files.clone();
        let manifest = Manifest {
            tool: "tridiag",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            files: &files,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.path("manifest.json");
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(files)
    }
}

/// One value per line after a `# header` comment line, shortest round-trip
/// formatting.
pub fn column_csv(header: &str, values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20 + header.len() + 3);
    s.push_str("# ");
    s.push_str(header);
    s.push('\n');
    for v in values {
        let _ = writeln!(s, "{v:?}");
    }
    s
}

pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn fmt(v: f64) -> String {
    format!("{v:?}")
}
