//! Geo-referenced rasters, time stacks and their on-disk container.

mod grid;
pub mod io;
mod quicklook;
mod raster;
mod stack;

pub use grid::GridSpec;
pub use io::{read_manifest, read_raster, read_stack, write_raster, write_stack, ManifestEntry};
pub use quicklook::{quicklook, quicklook_bytes};
pub use raster::{Raster, DEFAULT_NODATA};
pub use stack::RasterStack;

use chrono::NaiveDate;

/// Days since 1970-01-01, the encoding used for date-valued rasters.
pub fn days_since_epoch(date: NaiveDate) -> i64 {
    (date - NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch")).num_days()
}

pub fn date_from_epoch_days(days: i64) -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(1970, 1, 1)?.checked_add_signed(chrono::Duration::days(days))
}
