use std::fs;
use std::path::Path;

use super::io::create_parent;
use super::Raster;
use crate::error::{Error, Result};

/// 8-bit grey levels for a raster: valid values are stretched linearly from
/// their minimum (0) to maximum (255), rounding half away from zero; nodata
/// maps to 0 and a constant raster maps to 128.
pub fn quicklook_bytes(raster: &Raster) -> Result<Vec<u8>> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in (0..raster.values().len()).filter_map(|i| raster.get(i)) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return Err(Error::InsufficientData("quicklook of an all-nodata raster".into()));
    }
    let span = hi - lo;
    Ok((0..raster.values().len())
        .map(|i| match raster.get(i) {
            None => 0,
            Some(_) if span == 0.0 => 128,
            Some(v) => ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8,
        })
        .collect())
}

/// Writes a binary PGM (P5, maxval 255).
pub fn quicklook(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let pixels = quicklook_bytes(raster)?;
    let mut out = format!("P5\n{} {}\n255\n", raster.width(), raster.height()).into_bytes();
    out.extend_from_slice(&pixels);
    create_parent(path)?;
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::{GridSpec, DEFAULT_NODATA};

    fn raster(values: Vec<f64>) -> Raster {
        let g = GridSpec::new(0.0, 0.0, 1.0, -1.0, values.len(), 1, "LOCAL").unwrap();
        Raster::new(g, values, Some(DEFAULT_NODATA), None).unwrap()
    }

    #[test]
    fn constant_raster_is_mid_grey() {
        assert_eq!(quicklook_bytes(&raster(vec![7.5; 4])).unwrap(), vec![128; 4]);
    }

    #[test]
    fn binary_raster_spans_full_range() {
        assert_eq!(quicklook_bytes(&raster(vec![0.0, 1.0, 1.0, 0.0])).unwrap(), vec![0, 255, 255, 0]);
    }

    #[test]
    fn three_levels_round_half_away_from_zero() {
        // 5/10 * 255 = 127.5 -> 128
        assert_eq!(quicklook_bytes(&raster(vec![0.0, 5.0, 10.0])).unwrap(), vec![0, 128, 255]);
    }

    #[test]
    fn nodata_is_black_and_all_nodata_fails() {
        assert_eq!(
            quicklook_bytes(&raster(vec![DEFAULT_NODATA, 2.0, 4.0])).unwrap(),
            vec![0, 0, 255]
        );
        assert!(quicklook_bytes(&raster(vec![DEFAULT_NODATA; 2])).is_err());
    }

    #[test]
    fn pgm_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.pgm");
        quicklook(&raster(vec![0.0, 1.0]), &p).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..11], b"P5\n2 1\n255\n");
        assert_eq!(&bytes[11..], &[0, 255]);
    }
}
