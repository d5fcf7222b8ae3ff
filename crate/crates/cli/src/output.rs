use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

/// Fixed 17-significant-digit formatting used in every CSV.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// An output directory that ends up with a manifest of what was written.
pub struct OutputDir {
    root: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: String,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str]) -> CliResult<CsvWriter> {
        let mut out = BufWriter::new(File::create(self.path(name))?);
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter { out })
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).map_err(fdkp_core::Error::from)?;
        fs::write(self.path(name), text + "\n")?;
        Ok(())
    }

    /// Writes `manifest.json` listing every other file under the directory.
    pub fn finish(&self, command: &str, config: &str) -> CliResult<()> {
        let mut files = Vec::new();
        collect(&self.root, &self.root, &mut files)?;
        files.retain(|f| f != "manifest.json");
        files.sort();
        let digest = Sha256::digest(config.as_bytes());
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            files,
        };
        self.json("manifest.json", &manifest)
    }
}

fn collect(root: &Path, dir: &Path, files: &mut Vec<String>) -> CliResult<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect(root, &path, files)?;
        } else if let Ok(rel) = path.strip_prefix(root) {
            files.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn row(&mut self, fields: &[String]) -> CliResult<()> {
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn close(mut self) -> CliResult<()> {
        self.out.flush()?;
        Ok(())
    }
}
