use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::report::Artifact;

/// Writes `bytes` through a temporary file in the destination directory
/// and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_artifact(path: &Path, format: &str, bytes: &[u8]) -> std::io::Result<Artifact> {
    write_atomic(path, bytes)?;
    Ok(Artifact {
        path: path.display().to_string(),
        format: format.into(),
        bytes: bytes.len(),
        sha256: sha256_hex(bytes),
    })
}
