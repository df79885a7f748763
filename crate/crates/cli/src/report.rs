use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use sumlike_core::ToleranceConfig;

/// One command run. `result` is the deterministic payload; `wall_time_s` is
/// the only field that varies between identical runs.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_digest: String,
    pub tolerance: ToleranceConfig,
    pub result: Value,
    pub wall_time_s: f64,
    pub verdict: String,
}

pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Writes to `path`, or standard output when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
