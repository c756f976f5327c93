//! Run manifests: a canonical record of inputs, flags and seeds whose hash
//! is stamped into every output file, so identical invocations are
//! recognizably identical.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

pub struct RunManifest {
    lines: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            lines: vec![
                format!("tool=mlob {}", env!("CARGO_PKG_VERSION")),
                format!("command={command}"),
            ],
        }
    }

    pub fn flag(&mut self, name: &str, value: impl std::fmt::Display) -> &mut Self {
        self.lines.push(format!("{name}={value}"));
        self
    }

    /// Records an input file by content digest, so the manifest changes when
    /// the data does.
    pub fn input(&mut self, path: &Path) -> std::io::Result<&mut Self> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        self.lines
            .push(format!("input={}:{}", path.display(), short_hex(&digest)));
        Ok(self)
    }

    /// 16-hex-character digest of the canonical manifest text.
    pub fn hash(&self) -> String {
        let mut text = String::new();
        for line in &self.lines {
            let _ = writeln!(text, "{line}");
        }
        short_hex(&Sha256::digest(text.as_bytes()))
    }
}

fn short_hex(digest: &[u8]) -> String {
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
