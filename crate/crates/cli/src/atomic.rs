//! Outputs are staged next to their destination and renamed into place, so a
//! failed run never leaves a half-written file or directory behind.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tempfile::{NamedTempFile, TempDir};

fn parent_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Calls `write` on a temporary path in the destination directory, then
/// renames the result to `dest`.
pub fn write_file(dest: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let dir = parent_of(dest);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = NamedTempFile::new_in(&dir).with_context(|| format!("staging in {}", dir.display()))?;
    write(tmp.path())?;
    tmp.persist(dest)
        .with_context(|| format!("moving output to {}", dest.display()))?;
    Ok(())
}

pub fn write_bytes(dest: &Path, bytes: &[u8]) -> Result<()> {
    write_file(dest, |p| {
        fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))
    })
}

/// A directory filled in place and promoted with [`StagedDir::commit`].
/// Dropping it without committing removes everything.
pub struct StagedDir {
    tmp: TempDir,
    dest: PathBuf,
    replace: bool,
}

impl StagedDir {
    pub fn new(dest: &Path, replace: bool) -> Result<Self> {
        if dest.exists() && !replace {
            bail!("{} already exists (use --force to replace it)", dest.display());
        }
        let dir = parent_of(dest);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let tmp = tempfile::Builder::new()
            .prefix(".spv-staging-")
            .tempdir_in(&dir)
            .with_context(|| format!("staging in {}", dir.display()))?;
        Ok(Self {
            tmp,
            dest: dest.to_path_buf(),
            replace,
        })
    }

    pub fn path(&self) -> &Path {
        self.tmp.path()
    }

    pub fn commit(self) -> Result<PathBuf> {
        if self.replace && self.dest.exists() {
            fs::remove_dir_all(&self.dest)
                .with_context(|| format!("removing old {}", self.dest.display()))?;
        }
        let staged = self.tmp.keep();
        fs::rename(&staged, &self.dest).with_context(|| {
            format!("moving {} to {}", staged.display(), self.dest.display())
        })?;
        Ok(self.dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let dest = dir.path().join("out.txt");
        let r = write_file(&dest, |_| bail!("boom"));
        assert!(r.is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn staged_dir_commits_and_cleans_up() {
        let dir = tempfile::tempdir().unwrap();
        let dest = dir.path().join("seq");
        {
            let s = StagedDir::new(&dest, false).unwrap();
            fs::write(s.path().join("a"), "x").unwrap();
        }
        assert!(!dest.exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
        let s = StagedDir::new(&dest, false).unwrap();
        fs::write(s.path().join("a"), "x").unwrap();
        s.commit().unwrap();
        assert!(dest.join("a").exists());
        assert!(StagedDir::new(&dest, false).is_err());
        let s = StagedDir::new(&dest, true).unwrap();
        fs::write(s.path().join("b"), "y").unwrap();
        s.commit().unwrap();
        assert!(!dest.join("a").exists() && dest.join("b").exists());
    }
}
