//! Configuration ingestion, experiment drivers and output rendering for the
//! `monotrack` command-line tool.

pub mod commands;
pub mod config;
pub mod format;

pub use commands::{
    cmd_codebook, cmd_montecarlo, cmd_pattern, cmd_track, MonteCarloSummary, PatternTable, Side, TrackOutput,
    TrackRecord, TrackSummary, TRACK_CSV_HEADER,
};
pub use config::{ChannelConfig, Epsilon, EpsilonRule, MonteCarloSettings, SimConfig, TrackerSettings};
