//! Kernel density surfaces and their mutual information.
//!
//! Anomalous fires are drawn around settlements, agricultural fires around
//! unrelated centers; the anomaly surface should share far more information
//! with the settlement surface than the agricultural one does.
//!
//!     cargo run --example kde_mutual_information

use conflict_watch::spatial_stats::{auto_grid, kde2d, mutual_information, project_local, Bandwidth, DEFAULT_BINS};
use conflict_watch::synthgen::{gen_fire_catalog, EventClass, FireSceneSpec};

fn main() -> conflict_watch::Result<()> {
    let spec = FireSceneSpec::default();
    let scene = gen_fire_catalog(&spec)?;
    let anomaly = scene.truth.anomaly.as_ref().expect("default scene has a burst");
    let settlements: Vec<(f64, f64)> = anomaly.settlement_centers.iter().map(|p| (p[0], p[1])).collect();

    // One origin for every layer keeps the surfaces on a shared frame.
    let origin = spec.bbox.center();
    let anom = project_local(&scene.points_of(EventClass::Anomalous), Some(origin))?;
    let agri = project_local(&scene.points_of(EventClass::Agricultural), Some(origin))?;
    let settl = project_local(&settlements, Some(origin))?;

    let grid = auto_grid(&[&anom, &agri, &settl], 500.0, 3.0)?;
    println!("grid {}x{} at {} m", grid.width, grid.height, grid.dx);
    let d_anom = kde2d(&anom, &grid, Bandwidth::Scott)?.into_raster();
    let d_agri = kde2d(&agri, &grid, Bandwidth::Scott)?.into_raster();
    let d_settl = kde2d(&settl, &grid, Bandwidth::Scott)?.into_raster();

    for (name, a, b) in [
        ("anomaly / settlements", &d_anom, &d_settl),
        ("agricultural / settlements", &d_agri, &d_settl),
        ("agricultural / anomaly", &d_agri, &d_anom),
    ] {
        let m = mutual_information(a, b, DEFAULT_BINS)?;
        println!("I({name}) = {:.3} nats", m.mi_nats);
    }
    Ok(())
}
