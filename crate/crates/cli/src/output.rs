use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Named outputs of one command, printed or written as a group.
pub struct Emitter {
    dir: Option<PathBuf>,
}

impl Emitter {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Emitter { dir }
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` when an output directory is set, otherwise prints
    /// `contents` to stdout.
    pub fn emit(&self, name: &str, contents: &str) -> Result<()> {
        match &self.dir {
            Some(dir) => {
                let path = write_atomic(dir, name, contents)?;
                println!("wrote {}", path.display());
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(contents.as_bytes())?;
                if !contents.ends_with('\n') {
                    out.write_all(b"\n")?;
                }
            }
        }
        Ok(())
    }

    /// Like [`Emitter::emit`], but prints to stderr when there is no directory.
    pub fn emit_side(&self, name: &str, contents: &str) -> Result<()> {
        match &self.dir {
            Some(_) => self.emit(name, contents),
            None => {
                eprintln!("{}", contents.trim_end());
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.txt", "one").unwrap();
        let p = write_atomic(dir.path(), "a.txt", "two").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "two");
        let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(names.len(), 1);
    }
}
