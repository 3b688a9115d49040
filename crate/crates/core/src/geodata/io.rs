//! Raster container: a JSON header `<name>.json` next to a flat payload
//! `<name>.bin` of row-major, top-row-first, little-endian `f32` values.
//!
//! Stacks are described by a JSON manifest listing `{timestamp, path}` entries;
//! relative paths resolve against the manifest's directory.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{GridSpec, Raster, RasterStack};
use crate::error::{Error, Result};

pub const DTYPE_F32LE: &str = "f32le";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RasterHeader {
    width: usize,
    height: usize,
    dtype: String,
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    nodata: Option<f64>,
    crs: String,
    timestamp: Option<NaiveDate>,
}

/// One manifest entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub timestamp: NaiveDate,
    pub path: String,
}

/// Resolves `(header, payload)` paths. `scene.json`, `scene.bin` and `scene`
/// all name the same raster.
pub fn raster_paths(path: &Path) -> (PathBuf, PathBuf) {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => (path.to_path_buf(), path.with_extension("bin")),
        Some("bin") => (path.with_extension("json"), path.to_path_buf()),
        _ => {
            let mut header = OsString::from(path.as_os_str());
            header.push(".json");
            let mut payload = OsString::from(path.as_os_str());
            payload.push(".bin");
            (PathBuf::from(header), PathBuf::from(payload))
        }
    }
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let (header_path, payload_path) = raster_paths(path.as_ref());
    let text = fs::read_to_string(&header_path).map_err(|e| Error::io(&header_path, e))?;
    let header: RasterHeader =
        serde_json::from_str(&text).map_err(|e| Error::json(&header_path, e))?;
    if header.dtype != DTYPE_F32LE {
        return Err(Error::UnsupportedDtype(header.dtype));
    }
    let grid = GridSpec {
        x0: header.x0,
        y0: header.y0,
        dx: header.dx,
        dy: header.dy,
        width: header.width,
        height: header.height,
        crs: header.crs,
    };
    grid.validate().map_err(|e| Error::Header {
        path: header_path.clone(),
        reason: e.to_string(),
    })?;

    let bytes = fs::read(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
    let expected = (grid.len() as u64) * 4;
    if bytes.len() as u64 != expected {
        return Err(Error::PayloadSize {
            path: payload_path,
            expected,
            actual: bytes.len() as u64,
        });
    }
    let values = decode_f32le(&bytes);
    Raster::new(grid, values, header.nodata, header.timestamp).map_err(|e| Error::Header {
        path: header_path,
        reason: e.to_string(),
    })
}

pub fn write_raster(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let (header_path, payload_path) = raster_paths(path.as_ref());
    if let Some(nd) = raster.nodata() {
        if (nd as f32) as f64 != nd {
            return Err(Error::Validation(format!(
                "nodata sentinel {nd} is not representable as f32"
            )));
        }
    }
    let payload = encode_f32le(raster.values())?;
    let g = raster.grid();
    let header = RasterHeader {
        width: g.width,
        height: g.height,
        dtype: DTYPE_F32LE.to_string(),
        x0: g.x0,
        y0: g.y0,
        dx: g.dx,
        dy: g.dy,
        nodata: raster.nodata(),
        crs: g.crs.clone(),
        timestamp: raster.timestamp(),
    };
    let mut text = serde_json::to_string_pretty(&header).map_err(|e| Error::json(&header_path, e))?;
    text.push('\n');
    create_parent(&header_path)?;
    fs::write(&payload_path, payload).map_err(|e| Error::io(&payload_path, e))?;
    fs::write(&header_path, text).map_err(|e| Error::io(&header_path, e))?;
    Ok(())
}

fn encode_f32le(values: &[f64]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(values.len() * 4);
    for (i, &v) in values.iter().enumerate() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::Validation(format!(
                "value {v} at index {i} does not fit a finite f32"
            )));
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(out)
}

fn decode_f32le(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect()
}

pub(crate) fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Loads every manifest entry and returns the layers sorted by date.
pub fn read_stack(manifest_path: impl AsRef<Path>) -> Result<RasterStack> {
    let manifest_path = manifest_path.as_ref();
    let mut entries = read_manifest(manifest_path)?;
    if entries.is_empty() {
        return Err(Error::InsufficientData(format!(
            "manifest {} lists no layers",
            manifest_path.display()
        )));
    }
    entries.sort_by_key(|e| e.timestamp);
    for pair in entries.windows(2) {
        if pair[0].timestamp == pair[1].timestamp {
            return Err(Error::Timestamps(format!(
                "duplicate timestamp {} ({} and {})",
                pair[0].timestamp, pair[0].path, pair[1].path
            )));
        }
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new(""));
    let mut layers: Vec<(NaiveDate, Raster)> = Vec::with_capacity(entries.len());
    let mut first_path: Option<&str> = None;
    for entry in &entries {
        let raster = read_raster(resolve(base, &entry.path))?;
        match first_path {
            None => first_path = Some(&entry.path),
            Some(p) => {
                if raster.grid() != layers[0].1.grid() {
                    return Err(Error::GridMismatch {
                        first: p.to_string(),
                        second: entry.path.clone(),
                    });
                }
            }
        }
        layers.push((entry.timestamp, raster));
    }
    RasterStack::new(layers)
}

/// Writes each layer as `<dir>/<prefix>_<index>` and a `manifest.json` with
/// relative paths. Returns the manifest path.
pub fn write_stack(stack: &RasterStack, dir: impl AsRef<Path>, prefix: &str) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(stack.len());
    for (i, (t, r)) in stack.iter().enumerate() {
        let name = format!("{prefix}_{i:03}.json");
        write_raster(r, dir.join(&name))?;
        entries.push(ManifestEntry {
            timestamp: t,
            path: name,
        });
    }
    let manifest = dir.join("manifest.json");
    write_json(&manifest, &entries)?;
    Ok(manifest)
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Pretty JSON with a trailing newline.
pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    create_parent(path)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_forms_resolve_to_the_same_pair() {
        let a = raster_paths(Path::new("out/scene.json"));
        let b = raster_paths(Path::new("out/scene.bin"));
        let c = raster_paths(Path::new("out/scene"));
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.1, PathBuf::from("out/scene.bin"));
    }

    #[test]
    fn dtype_and_size_errors() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(0.0, 0.0, 1.0, -1.0, 2, 2, "LOCAL").unwrap();
        let r = Raster::new(g, vec![1.0, 2.0, 3.0, 4.0], None, None).unwrap();
        let p = dir.path().join("r.json");
        write_raster(&r, &p).unwrap();

        fs::write(dir.path().join("r.bin"), [0u8; 12]).unwrap();
        assert!(matches!(
            read_raster(&p),
            Err(Error::PayloadSize { expected: 16, actual: 12, .. })
        ));

        let text = fs::read_to_string(&p).unwrap().replace("f32le", "f64le");
        fs::write(&p, text).unwrap();
        assert!(matches!(read_raster(&p), Err(Error::UnsupportedDtype(_))));

        fs::write(&p, "{ not json").unwrap();
        assert!(matches!(read_raster(&p), Err(Error::Json { .. })));
    }

    #[test]
    fn nan_payload_is_rejected_on_read() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(0.0, 0.0, 1.0, -1.0, 1, 1, "LOCAL").unwrap();
        let p = dir.path().join("n.json");
        write_raster(&Raster::new(g, vec![0.0], None, None).unwrap(), &p).unwrap();
        fs::write(dir.path().join("n.bin"), f32::NAN.to_le_bytes()).unwrap();
        assert!(matches!(read_raster(&p), Err(Error::Header { .. })));
    }

    #[test]
    fn out_of_range_value_is_rejected_on_write() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(0.0, 0.0, 1.0, -1.0, 1, 1, "LOCAL").unwrap();
        let r = Raster::new(g, vec![1e300], None, None).unwrap();
        assert!(matches!(write_raster(&r, dir.path().join("x")), Err(Error::Validation(_))));
    }
}
