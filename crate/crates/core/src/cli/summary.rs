use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geodata::io::{raster_paths, write_json};
use crate::geodata::read_manifest;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn digest(path: &Path) -> Result<InputDigest> {
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

/// Header and payload of a raster.
pub fn raster_digests(path: &Path) -> Result<Vec<InputDigest>> {
    let (h, b) = raster_paths(path);
    Ok(vec![digest(&h)?, digest(&b)?])
}

/// The manifest plus every layer it references.
pub fn stack_digests(manifest: &Path) -> Result<Vec<InputDigest>> {
    let mut out = vec![digest(manifest)?];
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    for entry in read_manifest(manifest)? {
        let p = PathBuf::from(&entry.path);
        let p = if p.is_absolute() { p } else { base.join(p) };
        out.extend(raster_digests(&p)?);
    }
    Ok(out)
}

/// Writes `{"command", "version", "inputs", "params", ...results}` with the
/// entries of the `results` object at top level. Output paths are left out so
/// that identical inputs give identical bytes wherever results are written.
pub fn write_summary(
    path: &Path,
    command: &str,
    inputs: &[InputDigest],
    params: Value,
    results: Value,
) -> Result<()> {
    let mut doc = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "inputs": inputs,
        "params": params,
    });
    if let (Some(d), Value::Object(r)) = (doc.as_object_mut(), results) {
        d.extend(r);
    }
    write_json(path, &doc)
}

/// `out` with its extension replaced by `summary.json`.
pub fn sidecar(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}
