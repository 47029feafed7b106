//! Run manifests and the writers for CSV, JSON and plain-text files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::config::Config;

/// Overrides the manifest timestamp, for reproducible output.
pub const TIMESTAMP_ENV: &str = "SOURCE_DATE_EPOCH";

/// Enough to rerun the command that produced a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    /// Fully resolved; usable as a `--config` file.
    pub config: Config,
}

impl RunManifest {
    pub fn new(command: &str, config: &Config) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed(),
            timestamp: timestamp(),
            config: config.clone(),
        }
    }

    pub fn header_line(&self) -> String {
        format!(
            "# manifest: {}\n",
            serde_json::to_string(self).expect("manifest serializes")
        )
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var(TIMESTAMP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// 17 significant digits, enough to read back the identical `f64`.
pub fn full(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn percent(x: f64) -> String {
    format!("{:.3}", 100.0 * x)
}

/// A table of strings destined for a CSV file.
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        CsvTable {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, manifest: &RunManifest) -> anyhow::Result<Vec<u8>> {
        let mut buf = manifest.header_line().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(buf)
    }
}

/// Writes the files of one run into the output directory.
pub struct Sink {
    dir: PathBuf,
    manifest: RunManifest,
    pub written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: &'a T,
}

impl Sink {
    pub fn new(dir: &Path, manifest: RunManifest) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            manifest,
            written: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        let mut f =
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        f.write_all(bytes)?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &CsvTable) -> anyhow::Result<()> {
        let bytes = table.render(&self.manifest)?;
        self.put(name, &bytes)
    }

    /// `body` must serialize to a map; its keys sit next to `manifest`.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> anyhow::Result<()> {
        let doc = Document {
            manifest: &self.manifest,
            body,
        };
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.put(name, text.as_bytes())
    }

    pub fn text(&mut self, name: &str, body: &str) -> anyhow::Result<()> {
        let text = format!("{}{body}", self.manifest.header_line());
        self.put(name, text.as_bytes())
    }
}
