//! Cross-module invariants checked against brute-force oracles.

use chrono::NaiveDate;
use conflict_watch::geodata::{GridSpec, Raster, RasterStack};
use conflict_watch::sar_change::{area_of_mask, median_composite};
use conflict_watch::spatial_stats::{entropy, kde2d, mutual_information, Bandwidth, PointSet};
use conflict_watch::synthgen::{gen_settlements, Footprint};
use conflict_watch::firms::BBox;
use proptest::prelude::*;

const NODATA: f64 = -9999.0;

fn grid(x0: f64, y0: f64, cell: f64, w: usize, h: usize) -> GridSpec {
    GridSpec::new(x0, y0, cell, -cell, w, h, "LOCAL").unwrap()
}

fn day(i: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Duration::days(12 * i as i64)
}

fn raster_of(g: &GridSpec, vals: Vec<f64>) -> Raster {
    Raster::new(g.clone(), vals, Some(NODATA), None).unwrap()
}

/// Layers of small random values, some of them nodata.
fn stack_strategy() -> impl Strategy<Value = (usize, usize, Vec<Vec<Option<f64>>>)> {
    (1usize..5, 1usize..5, 1usize..8).prop_flat_map(|(w, h, n)| {
        let layer = prop::collection::vec(prop::option::weighted(0.8, 0.001f64..1.0), w * h);
        (Just(w), Just(h), prop::collection::vec(layer, n))
    })
}

fn brute_median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn median_matches_sorted_oracle((w, h, layers) in stack_strategy(), cut in 0usize..8) {
        let g = grid(0.0, 0.0, 10.0, w, h);
        let n = layers.len();
        let stack = RasterStack::new(
            layers.iter().enumerate().map(|(k, l)| {
                let vals = l.iter().map(|v| v.unwrap_or(NODATA)).collect();
                (day(k), raster_of(&g, vals))
            }).collect(),
        ).unwrap();
        let end = day(cut.clamp(1, n));
        let med = median_composite(&stack, day(0), end).unwrap();
        for i in 0..w * h {
            let vals: Vec<f64> = layers.iter().enumerate()
                .filter(|(k, _)| day(*k) < end)
                .filter_map(|(_, l)| l[i])
                .collect();
            prop_assert_eq!(med.get(i), brute_median(vals));
        }
    }

    #[test]
    fn mask_area_is_popcount(bits in prop::collection::vec(prop::option::weighted(0.9, any::<bool>()), 1..200), cell in 1.0f64..50.0) {
        let g = grid(0.0, 0.0, cell, bits.len(), 1);
        let vals = bits.iter().map(|b| match b { Some(true) => 1.0, Some(false) => 0.0, None => NODATA }).collect();
        let ones = bits.iter().filter(|b| **b == Some(true)).count();
        prop_assert_eq!(area_of_mask(&raster_of(&g, vals)), ones as f64 * g.cell_area());
    }

    #[test]
    fn kde_commutes_with_translation(
        pts in prop::collection::vec((-3000.0f64..3000.0, -3000.0f64..3000.0), 3..30),
        ox in -50_000i32..50_000,
        oy in -50_000i32..50_000,
        hx in 200.0f64..2000.0,
        hy in 200.0f64..2000.0,
    ) {
        let (ox, oy) = (f64::from(ox), f64::from(oy));
        let bw = Bandwidth::Fixed { hx, hy };
        let ps = PointSet::new(pts, (92.5, 20.8)).unwrap();
        let g = grid(-8000.0, 8000.0, 500.0, 32, 32);
        let moved = grid(-8000.0 + ox, 8000.0 + oy, 500.0, 32, 32);
        let a = kde2d(&ps, &g, bw).unwrap().into_raster();
        let b = kde2d(&ps.translated(ox, oy), &moved, bw).unwrap().into_raster();
        for (u, v) in a.values().iter().zip(b.values()) {
            prop_assert!((u - v).abs() <= 1e-12, "{} vs {}", u, v);
        }
    }

    #[test]
    fn mi_symmetric_and_bounded(
        a in prop::collection::vec(0.0f64..1.0, 16..120),
        b_seed in prop::collection::vec(0.0f64..1.0, 120),
        bins in 2usize..20,
    ) {
        let n = a.len();
        let g = grid(0.0, 0.0, 1.0, n, 1);
        let ra = raster_of(&g, a.clone());
        let rb = raster_of(&g, b_seed[..n].to_vec());
        let ab = mutual_information(&ra, &rb, bins).unwrap().mi_nats;
        let ba = mutual_information(&rb, &ra, bins).unwrap().mi_nats;
        prop_assert!((ab - ba).abs() <= 1e-12);
        let (ha, hb) = (entropy(&ra, bins).unwrap(), entropy(&rb, bins).unwrap());
        prop_assert!(ab >= -1e-12 && ab <= ha.min(hb) + 1e-12);
        let aa = mutual_information(&ra, &ra, bins).unwrap().mi_nats;
        prop_assert!((aa - ha).abs() <= 1e-12);
    }

    #[test]
    fn pixel_rect_footprint_counts(rows in 1usize..12, cols in 1usize..12, r0 in 0usize..8, c0 in 0usize..8) {
        let g = grid(1000.0, 5000.0, 20.0, 20, 20);
        let mask = Footprint::pixel_rect(&g, r0, c0, rows, cols).mask(&g);
        prop_assert_eq!(mask.iter().filter(|&&m| m).count(), rows * cols);
        for r in 0..20 {
            for c in 0..20 {
                let inside = (r0..r0 + rows).contains(&r) && (c0..c0 + cols).contains(&c);
                prop_assert_eq!(mask[g.index(r, c)], inside);
            }
        }
    }

    #[test]
    fn settlements_deterministic_and_inside(n in 1usize..60, seed in any::<u64>()) {
        let bbox = BBox::new(92.2, 20.3, 92.8, 21.3).unwrap();
        let a = gen_settlements(n, &bbox, seed).unwrap();
        prop_assert_eq!(&a, &gen_settlements(n, &bbox, seed).unwrap());
        prop_assert_eq!(a.len(), n);
        for p in &a {
            prop_assert!(bbox.contains(p.0, p.1));
        }
    }
}
