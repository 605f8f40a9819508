//! Distributed transmit beamforming simulation: multipath channels, feedback
//! based phase adaptation, OFDM pilot interpolation and capacity analysis.

pub mod beamforming;
pub mod capacity;
pub mod channel;
pub mod error;
pub mod harness;
pub mod ofdm;
pub mod rng;
pub mod stats;

pub use beamforming::{
    AdaptationTrace, Algorithm, AlgorithmConfig, FeedbackSample, QuantizerSpec, TrainingMatrix,
};
pub use channel::{FrequencyResponse, NodeChannel, PathTap, PowerDelayProfile};
pub use error::{Error, Result};
pub use harness::{run_experiment, Experiment, ExperimentConfig, OutputFormat, ResultRecord};
pub use rng::{SeedTree, SimRng};
