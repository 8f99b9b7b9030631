//! Listening-test ratings: ingestion, descriptive statistics and the
//! correlation of stimulus metrics with mean annoyance.

mod records;
mod stats;
mod table;

pub use records::{
    load_ratings, parse_ratings_csv, ratings_from_session, write_ratings_csv, KeyAction, KeyEvent,
    KeypressTimeline, RatingRecord, SessionResult, TrialRatings, TrialResult, CSV_HEADER,
};
pub use stats::{
    box_stats, correlation_p_value, describe, describe_group, linear_fit, pearson, BoxStats,
    CorrelationResult, LinearFit, ALPHA,
};
pub use table::{
    correlation_table, mean_ratings, read_metrics_csv, scatter, write_metrics_csv,
    write_table_csv, Metric, MetricSet, RatingSummary, Scatter, ScatterPoint, DEFAULT_EXCLUDE,
};
