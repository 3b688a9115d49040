//! Seeded synthetic scenes with ground truth: fire catalogs with a seasonal
//! cycle and an injected burst, settlement points, speckled backscatter
//! stacks with a razing step, and coherence stacks with a construction onset.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)` with a fixed
//! stream per purpose or layer, so output bytes depend only on the spec.

mod fires;
mod radar;
mod settlements;

pub use fires::{
    gen_fire_catalog, AnomalySpec, AnomalyTruth, DayTruth, EventClass, EventTruth, FireScene, FireSceneSpec,
    FireTruth, SettlementSource,
};
pub use radar::{
    gen_backscatter_stack, gen_coherence_stack, BackscatterScene, BackscatterTruth, CoherenceScene,
    CoherenceSceneSpec, CoherenceTruth, SarSceneSpec,
};
pub use settlements::{gen_settlements, settlements_geojson, SettlementSpec};

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodata::GridSpec;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Reads a scene spec; missing fields take their defaults, unknown fields are
/// rejected.
pub fn read_spec<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Union of world-coordinate polygons; a cell belongs to the footprint when
/// its center is inside any polygon (even-odd rule).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub polygons: Vec<Vec<[f64; 2]>>,
}

impl Footprint {
    /// Rectangle covering rows `row0..row0+rows` and columns `col0..col0+cols`.
    pub fn pixel_rect(grid: &GridSpec, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        let (xa, ya) = grid.corner(row0, col0);
        let (xb, yb) = grid.corner(row0 + rows, col0 + cols);
        let ring = vec![[xa, ya], [xb, ya], [xb, yb], [xa, yb], [xa, ya]];
        Footprint { polygons: vec![ring] }
    }

    pub fn empty() -> Self {
        Footprint { polygons: Vec::new() }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.polygons.iter().any(|p| point_in_polygon(p, x, y))
    }

    pub fn mask(&self, grid: &GridSpec) -> Vec<bool> {
        let mut m = Vec::with_capacity(grid.len());
        for r in 0..grid.height {
            for c in 0..grid.width {
                let (x, y) = grid.cell_center(r, c);
                m.push(self.contains(x, y));
            }
        }
        m
    }

    fn validate(&self) -> Result<()> {
        for p in &self.polygons {
            if p.len() < 3 || p.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParams("footprint polygons need >= 3 finite vertices".into()));
            }
        }
        Ok(())
    }
}

fn point_in_polygon(ring: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = ring.len();
    let mut j = n - 1;
    for i in 0..n {
        let ([xi, yi], [xj, yj]) = (ring[i], ring[j]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_rect_mask_matches_rows_and_cols() {
        let g = GridSpec::new(100.0, 500.0, 10.0, -10.0, 8, 6, "L").unwrap();
        let m = Footprint::pixel_rect(&g, 1, 2, 3, 4).mask(&g);
        for r in 0..6 {
            for c in 0..8 {
                let want = (1..4).contains(&r) && (2..6).contains(&c);
                assert_eq!(m[g.index(r, c)], want, "({r},{c})");
            }
        }
    }

    #[test]
    fn triangle_containment() {
        let f = Footprint { polygons: vec![vec![[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]]] };
        assert!(f.contains(2.0, 2.0));
        assert!(!f.contains(6.0, 6.0));
    }
}
