use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::rng;
use crate::error::Result;
use crate::firms::BBox;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SettlementSpec {
    pub n: usize,
    pub bbox: BBox,
    pub seed: u64,
}

impl Default for SettlementSpec {
    fn default() -> Self {
        SettlementSpec {
            n: 25,
            bbox: BBox {
                lon_min: 92.2,
                lat_min: 20.3,
                lon_max: 92.8,
                lat_max: 21.3,
            },
            seed: 7,
        }
    }
}

/// `n` points uniform in `bbox`, rounded to 1e-5 degrees, as `(lon, lat)`.
pub fn gen_settlements(n: usize, bbox: &BBox, seed: u64) -> Result<Vec<(f64, f64)>> {
    bbox.validate()?;
    let mut r = rng(seed, 0);
    let round = |v: f64| (v * 1e5).round() / 1e5;
    Ok((0..n)
        .map(|_| {
            let lon = round(r.random_range(bbox.lon_min..=bbox.lon_max)).clamp(bbox.lon_min, bbox.lon_max);
            let lat = round(r.random_range(bbox.lat_min..=bbox.lat_max)).clamp(bbox.lat_min, bbox.lat_max);
            (lon, lat)
        })
        .collect())
}

/// GeoJSON FeatureCollection of points with an `id` property.
pub fn settlements_geojson(points: &[(f64, f64)]) -> Value {
    let features: Vec<Value> = points
        .iter()
        .enumerate()
        .map(|(i, &(lon, lat))| {
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [lon, lat]},
                "properties": {"id": i},
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_bounds_and_determinism() {
        let spec = SettlementSpec::default();
        assert!(gen_settlements(0, &spec.bbox, 1).unwrap().is_empty());
        let a = gen_settlements(25, &spec.bbox, 3).unwrap();
        assert_eq!(a.len(), 25);
        assert!(a.iter().all(|&(x, y)| spec.bbox.contains(x, y)));
        assert_eq!(a, gen_settlements(25, &spec.bbox, 3).unwrap());
        assert_ne!(a, gen_settlements(25, &spec.bbox, 4).unwrap());
    }

    #[test]
    fn empty_collection() {
        assert_eq!(settlements_geojson(&[])["features"].as_array().unwrap().len(), 0);
    }
}
