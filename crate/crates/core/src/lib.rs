//! Path-entropy analytics for procedurally generated, layered act maps.
//!
//! A run's path through each act is scored by summing the Shannon entropy of
//! the rooms it enters, then rescaled against the lowest and highest scores
//! any alternative path on the same map could have reached. Groups of runs
//! are compared with Welch's t-test.

pub mod entropy;
pub mod error;
pub mod ingest;
pub mod model;
pub mod paths;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use model::{ActMap, MapNode, NodeId, PathTrace, RoomType, RunRecord};
