//! Error type with exit codes, file writing and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
    #[error(transparent)]
    Core(#[from] mathieu_lattice::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 = validation, 2 = numeric, 3 = I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Core(mathieu_lattice::Error::Numeric { .. }) => 2,
            CliError::Core(_) => 1,
            CliError::Io { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Collects output files of one run and writes its manifest last.
pub struct Run {
    dir: PathBuf,
    outputs: Vec<PathBuf>,
    extra: Map<String, Value>,
}

impl Run {
    pub fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), outputs: Vec::new(), extra: Map::new() })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        println!("wrote {}", path.display());
        self.outputs.push(path.clone());
        Ok(path)
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.write(name, text)
    }

    /// Extra manifest field.
    pub fn record(&mut self, key: &str, value: impl Serialize) {
        self.extra.insert(key.to_owned(), serde_json::to_value(value).expect("serializable manifest field"));
    }

    pub fn finish(self, subcommand: &str, parameters: &impl Serialize, config_file: Option<&Path>) -> CliResult<()> {
        let manifest = RunManifest {
            subcommand,
            version: env!("CARGO_PKG_VERSION"),
            parameters,
            config_file,
            outputs: &self.outputs,
            threads: rayon::current_num_threads(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            extra: &self.extra,
        };
        let path = self.dir.join(format!("{subcommand}_manifest.json"));
        let mut text = serde_json::to_string_pretty(&manifest).expect("serializable manifest");
        text.push('\n');
        fs::write(&path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

#[derive(Serialize)]
struct RunManifest<'a, P: Serialize> {
    subcommand: &'a str,
    version: &'a str,
    parameters: &'a P,
    config_file: Option<&'a Path>,
    outputs: &'a [PathBuf],
    threads: usize,
    timestamp_unix: u64,
    #[serde(flatten)]
    extra: &'a Map<String, Value>,
}
