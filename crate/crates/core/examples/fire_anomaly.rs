//! Off-season fire anomalies on a simulated catalog.
//!
//! Generates six years of agricultural burning plus one late-monsoon burst,
//! finds each year's quiet season from the daily counts and scores the
//! yearly off-season totals.
//!
//!     cargo run --example fire_anomaly

use conflict_watch::fire_analysis::{
    anomaly_zscores, daily_counts, detect_off_season, off_season_counts, AnomalyParams, AutoSeasonParams,
};
use conflict_watch::firms::{parse_firms_reader, ParseOptions};
use conflict_watch::synthgen::{gen_fire_catalog, FireSceneSpec};

fn main() -> conflict_watch::Result<()> {
    let spec = FireSceneSpec::default();
    let scene = gen_fire_catalog(&spec)?;
    let catalog = parse_firms_reader(scene.csv.as_bytes(), &ParseOptions::default())?;
    println!("{} detections, {} skipped", catalog.detections.len(), catalog.skipped);

    let series = daily_counts(&catalog.detections, spec.first_day(), spec.last_day())?;
    let auto = AutoSeasonParams::default();
    let per_year = detect_off_season(&series, &auto)?;
    for (year, w) in &per_year.windows {
        println!("{year}: quiet {} .. {}{}", w.first, w.last, if w.fallback { " (fallback)" } else { "" });
    }

    // The burst cuts its own year's quiet run short, so every year is scored
    // on the consensus window.
    let windows = per_year.consensus_windows(auto.fallback)?;
    let yearly = off_season_counts(&series, &windows)?;
    let report = anomaly_zscores(&yearly, &AnomalyParams::default())?;
    println!("mean {:.2}, std {:.2}", report.mean, report.std);
    for y in &report.years {
        println!("{}  {:>5}  z = {:+.3}{}", y.year, y.count, y.z, if y.flagged { "  <- flagged" } else { "" });
    }
    Ok(())
}
