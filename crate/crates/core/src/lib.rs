pub mod error;
pub mod gaf;
pub mod hypothesis;
pub mod ingest;
pub mod nn;
pub mod pipeline;
pub mod signals;
pub mod stationarity;
pub mod stats;
pub mod windowing;

pub use error::{Error, Result};
