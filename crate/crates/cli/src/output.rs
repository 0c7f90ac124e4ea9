//! All-or-nothing output files.
//!
//! Every command writes into a hidden staging directory inside the output
//! directory and only renames its files into place once all of them have been
//! written. If anything fails, the staging directory is dropped and the output
//! directory is left as it was.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::TempDir;

pub struct Outputs {
    out_dir: PathBuf,
    staging: TempDir,
    names: Vec<String>,
}

impl Outputs {
    pub fn new(out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        let staging = tempfile::Builder::new()
            .prefix(".staging-")
            .tempdir_in(out_dir)
            .with_context(|| format!("creating staging directory in {}", out_dir.display()))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            staging,
            names: Vec::new(),
        })
    }

    /// Where to write output `name` before [`Outputs::commit`].
    pub fn stage(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.staging.path().join(name)
    }

    /// The staging directory itself, for writers that produce several files.
    /// Files written here must also be registered with [`Outputs::stage`].
    pub fn staging_dir(&self) -> &Path {
        self.staging.path()
    }

    /// Moves every staged file into the output directory. On a failed rename
    /// the files already moved are removed again.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut done: Vec<PathBuf> = Vec::with_capacity(self.names.len());
        for name in &self.names {
            let from = self.staging.path().join(name);
            let to = self.out_dir.join(name);
            if let Err(e) = std::fs::rename(&from, &to) {
                for p in &done {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e).with_context(|| format!("moving output into {}", to.display()));
            }
            done.push(to);
        }
        Ok(done)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_appears_until_commit() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::new(dir.path()).unwrap();
        std::fs::write(out.stage("a.txt"), "a").unwrap();
        std::fs::write(out.stage("b.txt"), "b").unwrap();
        assert!(!dir.path().join("a.txt").exists());
        let written = out.commit().unwrap();
        assert_eq!(written.len(), 2);
        assert_eq!(std::fs::read_to_string(dir.path().join("b.txt")).unwrap(), "b");
        let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 2, "staging directory is cleaned up");
    }

    #[test]
    fn dropping_discards_everything() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut out = Outputs::new(dir.path()).unwrap();
            std::fs::write(out.stage("a.txt"), "a").unwrap();
        }
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn failed_commit_rolls_back() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::new(dir.path()).unwrap();
        std::fs::write(out.stage("a.txt"), "a").unwrap();
        // staged but never written: the rename fails
        out.stage("missing.txt");
        assert!(out.commit().is_err());
        assert!(!dir.path().join("a.txt").exists());
    }
}
