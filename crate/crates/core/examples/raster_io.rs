//! Writing and reading rasters, stacks and quicklooks.
//!
//! Rasters are a JSON header next to a little-endian f32 payload; stacks are
//! a manifest listing dated layers.
//!
//!     cargo run --example raster_io

use chrono::NaiveDate;
use conflict_watch::geodata::{quicklook, read_raster, read_stack, write_raster, write_stack, GridSpec, Raster, RasterStack};

fn main() -> conflict_watch::Result<()> {
    let dir = std::env::temp_dir().join(format!("conflict-watch-raster-io-{}", std::process::id()));
    let grid = GridSpec::new(500_000.0, 2_300_000.0, 30.0, -30.0, 8, 6, "EPSG:32646")?;

    let values: Vec<f64> = (0..grid.len()).map(|i| if i % 7 == 0 { -9999.0 } else { i as f64 * 0.5 }).collect();
    let r = Raster::new(grid.clone(), values, Some(-9999.0), None)?;
    let path = dir.join("ramp.json");
    write_raster(&r, &path)?;
    let back = read_raster(&path)?;
    println!("{} of {} cells valid after round trip, equal: {}", back.valid_count(), grid.len(), back == r);

    let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date");
    let layers = (0..4)
        .map(|k| Ok((d0 + chrono::Duration::days(12 * k), Raster::filled(grid.clone(), k as f64, None)?)))
        .collect::<conflict_watch::Result<Vec<_>>>()?;
    let manifest = write_stack(&RasterStack::new(layers)?, dir.join("stack"), "layer")?;
    let stack = read_stack(&manifest)?;
    println!("stack of {} layers: {:?}", stack.len(), stack.timestamps());

    quicklook(&back, dir.join("ramp.pgm"))?;
    println!("wrote {}", dir.display());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
