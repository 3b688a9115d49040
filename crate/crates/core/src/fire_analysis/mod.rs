//! Daily fire-count series, off-season windows and yearly z-score anomalies.

mod anomaly;
mod comparison;
mod season;
mod series;

pub use anomaly::{anomaly_zscores, mean_std, zscore, AnomalyParams, AnomalyReport, StdKind, YearScore};
pub use comparison::{export_daily_comparison, ComparisonRow, DailyComparison};
pub use season::{
    detect_off_season, off_season_counts, AutoSeasonParams, MonthDay, MonthRange, OffSeasonWindows,
    SeasonMode, SeasonWindow,
};
pub use series::{daily_counts, DailyCountSeries};
