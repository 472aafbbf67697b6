//! Per-invocation bookkeeping: hashed inputs and outputs, and the manifest
//! line appended to `manifest.jsonl` in the output directory.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.jsonl";

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Run {
    out_dir: PathBuf,
    subcommand: &'static str,
    config: Value,
    inputs: Vec<Value>,
    outputs: Vec<Value>,
    notes: serde_json::Map<String, Value>,
}

impl Run {
    pub fn new(out_dir: &Path, subcommand: &'static str, config: Value) -> Self {
        Run {
            out_dir: out_dir.to_path_buf(),
            subcommand,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: serde_json::Map::new(),
        }
    }

    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).map_err(ultrahaar::Error::from).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(json!({ "path": path.display().to_string(), "sha256": sha256(&bytes) }));
        String::from_utf8(bytes)
            .map_err(|_| ultrahaar::Error::InvalidArgument(format!("{} is not valid UTF-8", path.display())).into())
    }

    /// Write `name` inside the output directory.
    pub fn write_output(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)
            .map_err(ultrahaar::Error::from)
            .with_context(|| format!("creating {}", self.out_dir.display()))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents)
            .map_err(ultrahaar::Error::from)
            .with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(json!({ "path": path.display().to_string(), "sha256": sha256(contents.as_bytes()) }));
        Ok(path)
    }

    /// Extra facts worth keeping with the run, such as dropped labels.
    pub fn note(&mut self, key: &str, value: Value) {
        self.notes.insert(key.to_string(), value);
    }

    /// Append the manifest line. `status` is `"ok"` or an error kind.
    pub fn finish(self, status: &str) -> Result<()> {
        let line = json!({
            "tool": "ultrahaar",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "status": status,
            "argv": std::env::args().skip(1).collect::<Vec<_>>(),
            "config": self.config,
            "parallel": ultrahaar::exec::PARALLEL,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "notes": self.notes,
        });
        fs::create_dir_all(&self.out_dir)?;
        let mut f = OpenOptions::new().create(true).append(true).open(self.out_dir.join(MANIFEST))?;
        writeln!(f, "{line}")?;
        Ok(())
    }
}
