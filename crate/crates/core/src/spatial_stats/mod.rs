//! Kernel density surfaces of point locations and mutual information between
//! density rasters.

mod kde;
mod mi;
mod project;

pub use kde::{auto_grid, kde2d, kde_density, resolve_bandwidth, scott_bandwidth, Bandwidth, DensityRaster};
pub use mi::{bin_values, entropy, joint_histogram, mutual_information, JointHistogram, MutualInformation, DEFAULT_BINS};
pub use project::{local_crs, parse_local_crs, project_detections, project_local, unproject_local, PointSet, EARTH_RADIUS_M};
