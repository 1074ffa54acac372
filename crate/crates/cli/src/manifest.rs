// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

impl InputFile {
    pub fn new(path: &Path, bytes: &[u8]) -> Self {
        InputFile {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        }
    }

    /// Fails if the file is gone or its content changed since the run.
    pub fn verify(&self) -> Result<()> {
        let bytes = std::fs::read(&self.path)
            .with_context(|| format!("reading manifest input `{}`", self.path))?;
        let now = sha256_hex(&bytes);
        if now != self.sha256 {
            bail!(
                "input `{}` changed since the recorded run (sha256 {} , recorded {})",
                self.path,
                now,
                self.sha256
            );
        }
        Ok(())
    }
}

/// Provenance record written next to every output set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Command line after the program name.
    pub args: Vec<String>,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, args: Vec<String>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            args,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest `{}`", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing manifest `{}`", path.display()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest is serializable");
        s.push('\n');
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `args` with any `--out` flag removed and `--out dir` appended.
pub fn redirect_out(args: &[String], dir: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len() + 2);
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out.push("--out".into());
    out.push(dir.into());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_is_replaced() {
        let args: Vec<String> = ["cost", "--out", "a", "--spec", "s.json", "--out=b"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            redirect_out(&args, "c"),
            ["cost", "--spec", "s.json", "--out", "c"]
        );
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
