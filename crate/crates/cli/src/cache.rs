//! Report cache keyed by the digest of command, configuration, input file
//! contents and tool version.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use umbilic_core::Result;

use crate::report::{Input, Report};

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    pub fn key(command: &str, config: &serde_json::Value, inputs: &[Input]) -> String {
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update([0]);
        h.update(command.as_bytes());
        h.update([0]);
        h.update(config.to_string().as_bytes());
        for i in inputs {
            h.update([0]);
            h.update(i.role.as_bytes());
            h.update(i.sha256.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn load(&self, key: &str) -> Option<Report> {
        let text = std::fs::read_to_string(self.dir.join(format!("{key}.json"))).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Writes the structured report and a text summary, each through a
    /// temporary file renamed into place.
    pub fn store(&self, key: &str, report: &Report) -> Result<()> {
        self.write_atomic(&format!("{key}.json"), report.to_json().as_bytes())?;
        self.write_atomic(&format!("{key}.txt"), report.to_text().as_bytes())
    }

    fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.dir.join(name)).map_err(|e| e.error)?;
        Ok(())
    }
}
