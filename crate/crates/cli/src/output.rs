//! Staged outputs, atomic writes and run manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

const MANIFEST_SUFFIX: &str = ".manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    inputs: &'a [FileDigest],
    outputs: Vec<FileDigest>,
}

/// Collects everything a command reads and writes so the run can be
/// committed in one go and described by a manifest.
pub struct Run {
    command: &'static str,
    pub cfg: RunConfig,
    inputs: Vec<FileDigest>,
    files: Vec<(PathBuf, Vec<u8>)>,
    stdout: Vec<u8>,
}

impl Run {
    pub fn new(command: &'static str, cfg: RunConfig) -> Self {
        Self {
            command,
            cfg,
            inputs: Vec::new(),
            files: Vec::new(),
            stdout: Vec::new(),
        }
    }

    /// Reads an input file and records its checksum.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        if !self.inputs.iter().any(|d| Path::new(&d.path) == path) {
            self.inputs.push(FileDigest {
                path: path.display().to_string(),
                sha256: sha256_hex(&bytes),
            });
        }
        Ok(bytes)
    }

    /// Stages `bytes` for `path`, or for stdout when `path` is `None`.
    pub fn emit(&mut self, path: Option<&Path>, bytes: Vec<u8>) {
        match path {
            Some(p) => self.files.push((p.to_path_buf(), bytes)),
            None => self.stdout.extend(bytes),
        }
    }

    fn manifest_path(&self) -> Option<PathBuf> {
        if let Some(dir) = &self.cfg.output.out_dir {
            return Some(dir.join("manifest.json"));
        }
        self.files.first().map(|(p, _)| {
            let mut s = p.clone().into_os_string();
            s.push(MANIFEST_SUFFIX);
            PathBuf::from(s)
        })
    }

    /// Writes staged files atomically, then the manifest, then stdout.
    pub fn commit(self) -> Result<(), CliError> {
        for (path, _) in &self.files {
            if self.inputs.iter().any(|d| Path::new(&d.path) == path) {
                return Err(CliError::usage(
                    "usage.output_overwrites_input",
                    format!("refusing to overwrite input {}", path.display()),
                ));
            }
        }
        if let Some(manifest_path) = self.manifest_path() {
            for (path, bytes) in &self.files {
                write_atomic(path, bytes)?;
            }
            let manifest = Manifest {
                tool: "rvcap",
                version: env!("CARGO_PKG_VERSION"),
                command: self.command,
                config: &self.cfg,
                inputs: &self.inputs,
                outputs: self
                    .files
                    .iter()
                    .map(|(p, b)| FileDigest {
                        path: p.display().to_string(),
                        sha256: sha256_hex(b),
                    })
                    .collect(),
            };
            let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
            json.push(b'\n');
            write_atomic(&manifest_path, &json)?;
        }
        if !self.stdout.is_empty() {
            let mut out = std::io::stdout().lock();
            out.write_all(&self.stdout)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
        Ok(())
    }
}

/// Temp file in the destination directory, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
