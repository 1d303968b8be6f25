use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::args::{Cli, Command};

/// Everything needed to rerun a command.
#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a Command,
    pub seed: u64,
    pub threads: Option<usize>,
    pub argv: Vec<String>,
    pub output: Option<String>,
    pub started: String,
    pub finished: String,
}

/// Where the machine-readable result and its manifest go.
pub struct Sink {
    out: Option<PathBuf>,
    manifest: Option<PathBuf>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>, manifest: Option<PathBuf>) -> Self {
        let manifest = manifest.or_else(|| {
            out.as_ref().map(|o| {
                let mut name = o.clone().into_os_string();
                name.push(".manifest.json");
                PathBuf::from(name)
            })
        });
        Self { out, manifest }
    }

    pub fn has_out(&self) -> bool {
        self.out.is_some()
    }

    /// Human-readable text goes to stdout unless stdout carries the result.
    pub fn human(&self) -> Box<dyn Write> {
        if self.out.is_some() {
            Box::new(io::stdout())
        } else {
            Box::new(io::stderr())
        }
    }

    /// How the result file names its manifest. Relative to the result's
    /// directory when both sit together, so reruns elsewhere stay byte-identical.
    pub fn manifest_reference(&self) -> Option<String> {
        let manifest = self.manifest.as_ref()?;
        let same_dir = self
            .out
            .as_ref()
            .is_some_and(|o| parent(o) == parent(manifest));
        Some(if same_dir {
            manifest.file_name().unwrap_or_default().to_string_lossy().into_owned()
        } else {
            manifest.display().to_string()
        })
    }

    pub fn write(&self, body: &[u8]) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, body)
                .with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(body)?;
                stdout.flush()?;
                Ok(())
            }
        }
    }

    pub fn write_manifest(&self, cli: &Cli, started: String) -> Result<()> {
        let Some(path) = &self.manifest else {
            return Ok(());
        };
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: &cli.command,
            seed: cli.global.seed,
            threads: cli.global.threads,
            argv: std::env::args().collect(),
            output: self.out.as_ref().map(|o| o.display().to_string()),
            started,
            finished: now(),
        };
        let mut json = serde_json::to_string_pretty(&manifest)?;
        json.push('\n');
        fs::write(path, json).with_context(|| format!("writing {}", path.display()))
    }
}

fn parent(p: &Path) -> &Path {
    p.parent().unwrap_or(Path::new(""))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
