use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

/// Record of the files one invocation wrote.
#[derive(Debug)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub files: Vec<(String, String)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Option<&Path>, out_dir: &Path) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            config: config.map(Path::to_path_buf),
            out_dir: out_dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    /// Writes `contents` to `name` inside the output directory and records its hash.
    pub fn emit(&mut self, name: &str, contents: &[u8]) -> std::io::Result<()> {
        fs::create_dir_all(&self.out_dir)?;
        fs::write(self.out_dir.join(name), contents)?;
        self.files.push((name.to_string(), sha256_hex(contents)));
        Ok(())
    }

    pub fn write(&self) -> std::io::Result<()> {
        let files: Vec<_> = self.files.iter().map(|(f, h)| json!({ "path": f, "sha256": h })).collect();
        let doc = json!({
            "subcommand": self.subcommand,
            "config": self.config.as_ref().map(|p| p.display().to_string()),
            "out_dir": self.out_dir.display().to_string(),
            "files": files,
        });
        let mut text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::create_dir_all(&self.out_dir)?;
        fs::write(self.out_dir.join("manifest.json"), text)
    }
}
