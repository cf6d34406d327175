//! Run manifest: one JSON record per executed stage.
//!
//! Each record carries document and token counts in and out, a drop-reason
//! histogram, wall time, and SHA-256 hashes of every input and output file.
//! Hashes let a rerun be checked for byte-identical results without keeping
//! the intermediate files around.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, Read, Write};
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Name of the manifest file inside the output directory.
pub const MANIFEST_NAME: &str = "manifest.jsonl";

/// A hashed file reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    /// Path as the stage saw it.
    pub path: String,
    /// Lowercase hex SHA-256 of the file bytes.
    pub sha256: String,
}

/// Statistics and hashes for one stage execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Stage identifier, for example "clean:web" or "denoise".
    pub stage: String,
    /// Root seed, for stochastic stages.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Records read.
    pub docs_in: u64,
    /// Records written.
    pub docs_out: u64,
    /// Whitespace tokens read.
    pub tokens_in: u64,
    /// Whitespace tokens written.
    pub tokens_out: u64,
    /// Dropped-record counts keyed by reason.
    pub drops: BTreeMap<String, u64>,
    /// Stage wall time in milliseconds.
    pub wall_ms: u64,
    /// Input files with their hashes.
    pub inputs: Vec<FileHash>,
    /// Output files with their hashes.
    pub outputs: Vec<FileHash>,
}

impl StageRecord {
    /// Fresh all-zero record for a stage.
    pub fn new(stage: impl Into<String>) -> StageRecord {
        StageRecord {
            stage: stage.into(),
            seed: None,
            docs_in: 0,
            docs_out: 0,
            tokens_in: 0,
            tokens_out: 0,
            drops: BTreeMap::new(),
            wall_ms: 0,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Count one dropped record under a reason.
    pub fn drop_one(&mut self, reason: &str) {
        *self.drops.entry(reason.to_string()).or_insert(0) += 1;
    }
}

/// SHA-256 of a file's bytes as lowercase hex.
pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let file = File::open(path).with_context(|| format!("cannot hash {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buffer = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buffer)?;
        if n == 0 {
            break;
        }
        hasher.update(&buffer[..n]);
    }
    let mut hex = String::with_capacity(64);
    for byte in hasher.finalize() {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

/// Hash a file into a manifest reference.
pub fn file_hash(path: &Path) -> anyhow::Result<FileHash> {
    Ok(FileHash {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

/// Append one record to the manifest in `out_dir`, creating it if needed.
pub fn append(out_dir: &Path, record: &StageRecord) -> anyhow::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(MANIFEST_NAME);
    let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
    serde_json::to_writer(&mut file, record)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Remove any previous manifest so an end-to-end run starts fresh.
pub fn reset(out_dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(MANIFEST_NAME);
    if path.exists() {
        std::fs::remove_file(&path)?;
    }
    Ok(())
}

/// Read all records from a manifest file.
#[cfg(test)]
pub fn read(path: &Path) -> anyhow::Result<Vec<StageRecord>> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    raw.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| serde_json::from_str(line).map_err(Into::into))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// SHA-256 of the empty string, a fixed point of the algorithm.
    const EMPTY_SHA256: &str =
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";

    #[test]
    fn hashes_match_known_digests() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty");
        std::fs::write(&path, b"").unwrap();
        assert_eq!(sha256_file(&path).unwrap(), EMPTY_SHA256);

        std::fs::write(&path, b"abc").unwrap();
        assert_eq!(
            sha256_file(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn append_and_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut first = StageRecord::new("clean");
        first.docs_in = 10;
        first.docs_out = 8;
        first.drop_one("too_short");
        first.drop_one("too_short");
        let mut second = StageRecord::new("tokenize");
        second.seed = Some(7);

        append(dir.path(), &first).unwrap();
        append(dir.path(), &second).unwrap();
        let records = read(&dir.path().join(MANIFEST_NAME)).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].stage, "clean");
        assert_eq!(records[0].drops["too_short"], 2);
        assert_eq!(records[1].seed, Some(7));
    }

    #[test]
    fn reset_clears_previous_runs() {
        let dir = tempfile::tempdir().unwrap();
        append(dir.path(), &StageRecord::new("old")).unwrap();
        reset(dir.path()).unwrap();
        assert!(!dir.path().join(MANIFEST_NAME).exists());
        // Resetting a directory with no manifest is not an error.
        reset(dir.path()).unwrap();
        append(dir.path(), &StageRecord::new("new")).unwrap();
        let records = read(&dir.path().join(MANIFEST_NAME)).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].stage, "new");
    }
}
