//! Log-ratio change detection on a simulated backscatter stack.
//!
//! A 3 dB drop is applied to a rectangle halfway through a speckled time
//! series. The detector compares pairwise means of later acquisitions with a
//! median reference and reports new changed area per window.
//!
//!     cargo run --release --example backscatter_change

use conflict_watch::sar_change::{run_change_detection, ChangeParams};
use conflict_watch::synthgen::{gen_backscatter_stack, Footprint, SarSceneSpec};
use conflict_watch::geodata::GridSpec;

fn main() -> conflict_watch::Result<()> {
    let grid = GridSpec::new(200_000.0, 2_330_000.0, 10.0, -10.0, 160, 160, "EPSG:32646")?;
    let base = SarSceneSpec::default();
    let dates = base.dates[..30].to_vec();
    let spec = SarSceneSpec {
        footprint: Footprint::pixel_rect(&grid, 50, 40, 50, 60),
        change_date: Some(dates[18]),
        grid,
        dates,
        ..base
    };
    let scene = gen_backscatter_stack(&spec)?;
    let truth = &scene.truth;
    println!("change on {:?}, footprint {} m2", truth.change_date, truth.footprint_area_m2);

    let params = ChangeParams::new(spec.dates[0], spec.dates[14]);
    let out = run_change_detection(&scene.stack, &params)?;
    for row in &out.series.rows {
        println!(
            "{} .. {}  new {:>5} px  cumulative {:>9.0} m2",
            row.window_start, row.window_end, row.new_pixels, row.cumulative_area_m2
        );
    }
    println!("first detection: {:?}", out.series.first_detection_date);
    println!("detected / true area: {:.3}", out.series.total_area_m2 / truth.footprint_area_m2);
    Ok(())
}
