use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::failure::{internal, CmdResult, Failure};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes go to a sibling temp file that is renamed into place, so a reader
/// never observes a partial artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CmdResult<()> {
    let fail = |what: &str, e: std::io::Error| {
        Failure::Internal(anyhow::Error::new(e).context(format!("{what} {}", path.display())))
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| fail("creating directory for", e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| internal(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| fail("writing", e))?;
    fs::rename(&tmp, path).map_err(|e| fail("renaming into", e))
}

/// Tracks every artifact written during a run, for the manifest.
#[derive(Debug)]
pub struct ArtifactWriter {
    root: PathBuf,
    written: Vec<(String, String)>,
}

impl ArtifactWriter {
    pub fn new(root: &Path) -> Self {
        ArtifactWriter {
            root: root.to_path_buf(),
            written: Vec::new(),
        }
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> CmdResult<PathBuf> {
        let path = self.root.join(rel);
        write_atomic(&path, bytes)?;
        self.written.push((rel.to_string(), sha256_hex(bytes)));
        Ok(path)
    }

    pub fn write_with<F>(&mut self, rel: &str, f: F) -> CmdResult<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> anyhow::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| Failure::Internal(e.context(format!("serializing {rel}"))))?;
        self.write(rel, &buf)
    }

    /// `(relative path, sha256)` pairs sorted by path.
    pub fn artifacts(&self) -> Vec<(String, String)> {
        let mut a = self.written.clone();
        a.sort();
        a
    }
}
