//! Plain-text formats: CSV spectra and decay traces, streak-camera images
//! and flat `key = value` run configuration. Parse failures report
//! `file:line:column`.

mod config;
mod series;
mod streak;

pub use config::RunConfig;
pub use series::{
    decay_csv, fmt_f64, g2_csv, parse_series, parse_tuning_map, read_series_csv, spectrum_csv,
    tuning_map_csv, write_decay_csv, write_spectrum_csv, Series, SeriesKind, TUNING_MAP_HEADER,
};
pub use streak::{bin_streak_region, parse_streak, read_streak, streak_text, write_streak, StreakImage};
