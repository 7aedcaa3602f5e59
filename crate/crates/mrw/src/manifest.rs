//! `manifest.txt`: enough to reproduce a run from its output directory.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::TextWriter;

pub const FILE_NAME: &str = "manifest.txt";

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub command: String,
    pub seed: Option<u64>,
    /// JSON echo of the resolved configuration.
    pub config: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut w = TextWriter::create(&dir.join(FILE_NAME))?;
        w.line(format!("command={}", self.command))?;
        w.line(format!("version={}", env!("CARGO_PKG_VERSION")))?;
        w.line(format!(
            "seed={}",
            self.seed
                .map_or_else(|| "none".to_string(), |s| s.to_string())
        ))?;
        w.line(format!("config={}", self.config))?;
        for input in &self.inputs {
            w.line(format!(
                "input={} sha256={}",
                input.display(),
                sha256_file(input)?
            ))?;
        }
        for output in &self.outputs {
            w.line(format!("output={output}"))?;
        }
        w.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc.txt");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_inputs_and_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.csv");
        std::fs::write(&input, b"x\n1\n").unwrap();
        let m = Manifest {
            command: "estimate".into(),
            seed: None,
            config: "{}".into(),
            inputs: vec![input],
            outputs: vec!["fit.txt".into()],
        };
        m.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join(FILE_NAME)).unwrap();
        assert!(text.starts_with("command=estimate\nversion="));
        assert!(text.contains("seed=none\n"));
        assert!(text.contains("sha256="));
        assert!(text.ends_with("output=fit.txt\n"));
    }
}
