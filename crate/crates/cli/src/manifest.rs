//! Provenance written next to every artifact.
//!
//! A manifest holds the command, the full configuration, the seed and the
//! SHA-256 of every input and output file. It contains no timestamps or
//! host details, so identical runs produce identical manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// `<artifact>.manifest`.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    text: String,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.field("command", command);
        m.field("version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        writeln!(self.text, "{key} = {value}").unwrap();
        self
    }

    /// Configuration lines, indented under a `config` heading.
    pub fn config(&mut self, fingerprint: &str, text: &str) -> &mut Self {
        self.field("config_fingerprint", fingerprint);
        for line in text.lines() {
            writeln!(self.text, "config.{line}").unwrap();
        }
        self
    }

    pub fn input(&mut self, label: &str, path: &Path) -> Result<&mut Self> {
        let digest = sha256_file(path)?;
        self.field(&format!("input.{label}"), path.display());
        self.field(&format!("input.{label}.sha256"), digest);
        Ok(self)
    }

    pub fn output(&mut self, label: &str, path: &Path) -> Result<&mut Self> {
        let digest = sha256_file(path)?;
        self.field(&format!("output.{label}"), path.display());
        self.field(&format!("output.{label}.sha256"), digest);
        Ok(self)
    }

    #[cfg(test)]
    pub fn text(&self) -> &str {
        &self.text
    }

    /// Writes to `<artifact>.manifest` and returns that path.
    pub fn write_beside(&self, artifact: &Path) -> Result<PathBuf> {
        let path = manifest_path(artifact);
        std::fs::write(&path, &self.text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_digests_without_timestamps() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        std::fs::write(&input, "abc").unwrap();
        let mut m = Manifest::new("vocab");
        m.field("seed", 3).input("train", &input).unwrap();
        let text = m.text();
        // SHA-256 of "abc"
        assert!(text.contains("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"));
        assert!(text.starts_with("command = vocab\n"));
        assert_eq!(manifest_path(&input), dir.path().join("in.txt.manifest"));
        let written = m.write_beside(&input).unwrap();
        assert_eq!(std::fs::read_to_string(written).unwrap(), text);
    }
}
