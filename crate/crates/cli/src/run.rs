//! Run directory bookkeeping: artifact list, config hash and `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};

use evtmodes::io::{read_json, write_json};
use evtmodes::{EvtError, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";
pub const ERROR_FILE: &str = "error.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub kind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

/// One subcommand invocation as recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config_hash: String,
    pub config: Value,
    pub inputs: Vec<InputFile>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub runs: Vec<RunRecord>,
}

pub struct Run {
    out: PathBuf,
    record: RunRecord,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Run {
    /// Starts a run; `config` is everything that determines the outputs
    /// except the output directory.
    pub fn start<C: Serialize>(command: &str, out: &Path, config: &C) -> Result<Self> {
        fs::create_dir_all(out)?;
        let stale = out.join(ERROR_FILE);
        if stale.exists() {
            fs::remove_file(stale)?;
        }
        let config = serde_json::to_value(config)?;
        let config_hash = sha256_hex(&serde_json::to_vec(&config)?);
        Ok(Self {
            out: out.to_path_buf(),
            record: RunRecord { command: command.into(), config_hash, config, inputs: Vec::new(), artifacts: Vec::new() },
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path)?;
        self.record.inputs.push(InputFile { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    /// Path of an artifact inside the run directory, registered in the manifest.
    pub fn artifact(&mut self, name: &str, kind: &str) -> PathBuf {
        self.record.artifacts.push(Artifact { path: name.into(), kind: kind.into() });
        self.out.join(name)
    }

    /// Registers a return matrix CSV and its JSON sidecar.
    pub fn matrix(&mut self, name: &str) -> PathBuf {
        let path = self.artifact(name, "return_matrix");
        let side = evtmodes::io::sidecar_path(Path::new(name));
        self.artifact(&side.display().to_string(), "matrix_sidecar");
        path
    }

    /// Writes `manifest.json`, replacing an earlier record of the same command.
    pub fn finish(self) -> Result<()> {
        let path = self.out.join(MANIFEST);
        let mut manifest = match read_json::<Manifest>(&path) {
            Ok(m) => m,
            Err(_) => Manifest { tool: "evtmodes".into(), version: env!("CARGO_PKG_VERSION").into(), runs: Vec::new() },
        };
        match manifest.runs.iter_mut().find(|r| r.command == self.record.command) {
            Some(slot) => *slot = self.record,
            None => manifest.runs.push(self.record),
        }
        write_json(&path, &manifest)
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: u8,
}

pub fn write_error(out: &Path, err: &EvtError, exit_code: u8) -> Result<()> {
    let report = ErrorReport { error: err.kind(), message: err.to_string(), exit_code };
    write_json(&out.join(ERROR_FILE), &report)
}

/// CSV writer for small tables whose cells are already formatted.
pub fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    evtmodes::io::write_table(path, Some(header), rows)
}

pub fn invalid(msg: impl Into<String>) -> EvtError {
    EvtError::InvalidArgument(msg.into())
}
