//! Narrowband adaptation algorithms and the feedback pipeline they share.

pub mod adaptation;
pub mod dost;
pub mod quantizer;
pub mod signal;
pub mod stochastic;
pub mod training;

pub use adaptation::{run_adaptation, AdaptationTrace, Algorithm, AlgorithmConfig, BeamformerState, TraceRow};
pub use dost::{dost_round, sddb_round, TrainingOutcome, TrainingState};
pub use quantizer::{
    quantize, training_sigma, FeedbackSample, QuantizerConfig, QuantizerSpec, DEFAULT_CLIP_MULTIPLIER,
};
pub use signal::{
    coherent_sum, gain_db, ideal_rss, noise_variance, normalized_rss, phase_only_weights, received_sample,
    weights_from_phases,
};
pub use stochastic::{M2bf, M2bfConfig, Obf, ObfConfig, R2bf, R2bfConfig};
pub use training::{correlation_estimate, least_squares_estimate, TrainingKind, TrainingMatrix};
