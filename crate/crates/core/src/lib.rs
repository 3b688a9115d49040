pub mod cli;
pub mod coherence;
pub mod error;
pub mod fire_analysis;
pub mod firms;
pub mod geodata;
pub mod labeling;
pub mod sar_change;
pub mod spatial_stats;
pub mod synthgen;

pub use error::{Error, Result};
