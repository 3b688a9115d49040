//! Low-to-high coherence transitions as a sign of new construction.
//!
//!     cargo run --example coherence_construction

use conflict_watch::coherence::{detect_low_to_high, event_components, CoherenceStack, EventParams, DEFAULT_MIN_COMPONENT_PX};
use conflict_watch::synthgen::{gen_coherence_stack, CoherenceSceneSpec};

fn main() -> conflict_watch::Result<()> {
    let spec = CoherenceSceneSpec::default();
    let scene = gen_coherence_stack(&spec)?;
    println!(
        "{} pairs, onset {:?}, footprint {} px",
        scene.stack.len(),
        scene.truth.onset_date,
        scene.truth.footprint_pixels
    );

    let stack = CoherenceStack::new(scene.stack)?;
    let events = detect_low_to_high(&stack, &EventParams::default())?;
    let inside = (0..events.event_index.len())
        .filter(|&i| events.event_index[i].is_some() && scene.footprint_mask[i])
        .count();
    println!("{} event pixels, {inside} inside the footprint", events.event_count());

    for c in event_components(&events, DEFAULT_MIN_COMPONENT_PX) {
        println!(
            "component: {} px, {:.0} m2, first {} last {}, bbox {:?}",
            c.pixel_count, c.area_m2, c.first_event_date, c.last_event_date, c.bbox_px
        );
    }
    Ok(())
}
