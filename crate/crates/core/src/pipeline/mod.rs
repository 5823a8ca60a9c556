//! Batch commands behind the `bvpkit` binary: segment, encode, stationarity,
//! anova, train-sweep and demo. Each writes CSV (with a config-hash comment
//! line), SVG and binary archives into an output directory.

pub mod archive;
mod commands;
mod config;
pub mod svg;

pub use commands::{
    cmd_anova, cmd_demo, cmd_encode, cmd_segment, cmd_stationarity, cmd_train_sweep, load_corpus,
    Context, Corpus, Outcome, RowError,
};
pub use config::{
    gaf_sweep_default, raw_sweep_default, AnovaSettings, RunConfig, SpecList, StationaritySettings,
    SweepSettings, TrainSettings,
};
