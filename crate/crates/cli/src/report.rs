//! Output envelope shared by every command.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

pub const TOOL: &str = "rvb";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Git-style content hash: sha256 over `blob <len>\0<bytes>`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

/// Provenance recorded in every output.
#[derive(Serialize)]
pub struct Meta<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub input_hash: String,
    pub config: &'a C,
}

impl<'a, C: Serialize> Meta<'a, C> {
    /// `extra` is hashed with the config, e.g. the contents of an input file.
    pub fn new(command: &'static str, seed: u64, config: &'a C, extra: &[u8]) -> Self {
        let mut bytes = serde_json::to_vec(config).expect("config serializes");
        bytes.extend_from_slice(extra);
        Meta {
            tool: TOOL,
            version: VERSION,
            command,
            seed,
            input_hash: content_hash(&bytes),
            config,
        }
    }

    /// The same provenance as `#`-prefixed lines for text and CSV outputs.
    pub fn comment_lines(&self) -> String {
        format!(
            "# tool={} version={}\n# command={}\n# seed={}\n# input_hash={}\n# config={}\n",
            self.tool,
            self.version,
            self.command,
            self.seed,
            self.input_hash,
            serde_json::to_string(self.config).expect("config serializes")
        )
    }
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    #[serde(flatten)]
    meta: &'a Meta<'a, C>,
    result: &'a R,
}

pub fn json_report<C: Serialize, R: Serialize>(meta: &Meta<C>, result: &R) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { meta, result }).expect("report serializes");
    s.push('\n');
    s
}

/// Destination of a command's main output.
pub enum Sink {
    Stdout(io::Stdout),
    File(PathBuf, BufWriter<File>),
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Sink, Failure> {
        match path {
            None => Ok(Sink::Stdout(io::stdout())),
            Some(p) => File::create(p)
                .map(|f| Sink::File(p.to_path_buf(), BufWriter::new(f)))
                .map_err(|e| Failure::io(p, e)),
        }
    }

    pub fn write_str(&mut self, s: &str) -> Result<(), Failure> {
        let r = match self {
            Sink::Stdout(out) => out.write_all(s.as_bytes()).and_then(|_| out.flush()),
            Sink::File(_, w) => w.write_all(s.as_bytes()).and_then(|_| w.flush()),
        };
        r.map_err(|e| self.fail(e))
    }

    fn fail(&self, e: io::Error) -> Failure {
        match self {
            Sink::Stdout(_) => Failure::io(Path::new("<stdout>"), e),
            Sink::File(p, _) => Failure::io(p, e),
        }
    }
}

/// Writes `text` to `path`, or stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    Sink::open(path)?.write_str(text)
}

/// Seconds as a report value, or `"NA"` unless timings were requested.
pub fn wall_time(enabled: bool, start: std::time::Instant) -> serde_json::Value {
    if enabled {
        serde_json::json!(start.elapsed().as_secs_f64())
    } else {
        serde_json::Value::String("NA".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob_digest() {
        assert_eq!(
            content_hash(b"hello\n"),
            "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }
}
