use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::firms::FireDetection;

/// Mean earth radius used for the local equirectangular frame, meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Planar points in meters relative to `origin = (lon0, lat0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<(f64, f64)>,
    origin: (f64, f64),
}

impl PointSet {
    pub fn new(points: Vec<(f64, f64)>, origin: (f64, f64)) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientData("point set is empty".into()));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Validation("point coordinates must be finite".into()));
        }
        Ok(PointSet { points, origin })
    }

    #[inline]
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    #[inline]
    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned extent `(xmin, ymin, xmax, ymax)`.
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        self.points.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.min(y), c.max(x), d.max(y)),
        )
    }

    /// Same points shifted by `(ox, oy)` meters.
    pub fn translated(&self, ox: f64, oy: f64) -> Self {
        PointSet {
            points: self.points.iter().map(|&(x, y)| (x + ox, y + oy)).collect(),
            origin: self.origin,
        }
    }
}

/// Equirectangular projection of `(lon, lat)` degrees about `origin`
/// (default: the centroid): `x = R (lon - lon0) cos(lat0)`, `y = R (lat - lat0)`.
pub fn project_local(lonlat: &[(f64, f64)], origin: Option<(f64, f64)>) -> Result<PointSet> {
    if lonlat.is_empty() {
        return Err(Error::InsufficientData("no points to project".into()));
    }
    let origin = origin.unwrap_or_else(|| {
        let n = lonlat.len() as f64;
        let (sx, sy) = lonlat.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        (sx / n, sy / n)
    });
    let (lon0, lat0) = origin;
    let coslat = lat0.to_radians().cos();
    let points = lonlat
        .iter()
        .map(|&(lon, lat)| {
            (
                EARTH_RADIUS_M * (lon - lon0).to_radians() * coslat,
                EARTH_RADIUS_M * (lat - lat0).to_radians(),
            )
        })
        .collect();
    PointSet::new(points, origin)
}

/// Inverse of [`project_local`].
pub fn unproject_local(x: f64, y: f64, origin: (f64, f64)) -> (f64, f64) {
    let (lon0, lat0) = origin;
    let lat = lat0 + (y / EARTH_RADIUS_M).to_degrees();
    let lon = lon0 + (x / (EARTH_RADIUS_M * lat0.to_radians().cos())).to_degrees();
    (lon, lat)
}

pub fn project_detections(detections: &[FireDetection], origin: Option<(f64, f64)>) -> Result<PointSet> {
    let lonlat: Vec<(f64, f64)> = detections.iter().map(|d| (d.lon, d.lat)).collect();
    project_local(&lonlat, origin)
}

/// CRS tag for grids in a local frame: `LOCAL-EQRECT:<lon0>,<lat0>`.
pub fn local_crs(origin: (f64, f64)) -> String {
    format!("LOCAL-EQRECT:{},{}", origin.0, origin.1)
}

/// Origin of a [`local_crs`] tag.
pub fn parse_local_crs(crs: &str) -> Option<(f64, f64)> {
    let (lon, lat) = crs.strip_prefix("LOCAL-EQRECT:")?.split_once(',')?;
    Some((lon.parse().ok()?, lat.parse().ok()?))
}
