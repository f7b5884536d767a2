//! Atomic artifact output.
//!
//! Each file is written to a hidden temporary name in the output directory
//! and renamed into place, so readers never observe a half-written file.
//! [`ArtifactWriter::discard`] removes everything written so far.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<OutputEntry>,
}

impl ArtifactWriter {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn tmp_path(&self, name: &str) -> PathBuf {
        self.dir.join(format!(".{name}.tmp"))
    }

    /// Writes `name` atomically. Names are plain file names.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        assert!(!name.contains(['/', '\\']), "artifact names are plain file names");
        let tmp = self.tmp_path(name);
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, self.dir.join(name))
        })();
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        result?;
        self.written.retain(|e| e.path != name);
        self.written.push(OutputEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn outputs(&self) -> &[OutputEntry] {
        &self.written
    }

    /// Removes every artifact this writer produced.
    pub fn discard(self) {
        for e in &self.written {
            let _ = fs::remove_file(self.dir.join(&e.path));
            let _ = fs::remove_file(self.tmp_path(&e.path));
        }
    }
}
