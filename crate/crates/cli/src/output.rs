//! Output files, run manifests and input digests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::{Classify, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Every flag of the command, keyed by its field name.
    pub arguments: serde_json::Value,
    pub tool_version: String,
    pub timestamp: String,
    /// Input file path → first 64 bits of its SHA-256, as 16 hex digits.
    pub input_digests: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, arguments: &impl Serialize, inputs: &[&Path]) -> CliResult<Self> {
        let mut input_digests = BTreeMap::new();
        for input in inputs {
            digest_tree(input, &mut input_digests)?;
        }
        Ok(Self {
            command: command.to_string(),
            arguments: serde_json::to_value(arguments).systemic("serializing arguments")?,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp(),
            input_digests,
        })
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).systemic("serializing manifest")?;
        text.push('\n');
        write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }
}

/// `SOURCE_DATE_EPOCH` when set, so reproducible builds get stable manifests.
fn timestamp() -> String {
    let at = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now);
    at.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn digest64(bytes: &[u8]) -> String {
    Sha256::digest(bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Digests a file, or every file below a directory in sorted order.
fn digest_tree(path: &Path, out: &mut BTreeMap<String, String>) -> CliResult<()> {
    if path.is_dir() {
        let mut children: Vec<PathBuf> = fs::read_dir(path)
            .data(format!("reading {}", path.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .data(format!("reading {}", path.display()))?;
        children.sort();
        for child in children {
            digest_tree(&child, out)?;
        }
    } else {
        let bytes = fs::read(path).data(format!("reading {}", path.display()))?;
        out.insert(path.display().to_string(), digest64(&bytes));
    }
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).systemic(format!("creating {}", dir.display()))
}

/// Writes through a sibling temporary file so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let ctx = || format!("writing {}", path.display());
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent).systemic(ctx())?;
    tmp.write_all(bytes).systemic(ctx())?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(fs::Permissions::from_mode(0o644))
            .systemic(ctx())?;
    }
    tmp.persist(path).map_err(|e| e.error).systemic(ctx())?;
    Ok(())
}
