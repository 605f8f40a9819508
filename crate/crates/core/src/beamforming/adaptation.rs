//! Algorithm selection and the per-iteration adaptation loop.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dost::TrainingState;
use super::quantizer::{training_sigma, FeedbackSample, QuantizerConfig};
use super::signal::{gain_db, ideal_rss, noise_variance, normalized_rss};
use super::stochastic::{M2bf, M2bfConfig, Obf, ObfConfig, R2bf, R2bfConfig};
use super::training::TrainingMatrix;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dost,
    Sddb,
    Obf,
    R2bf,
    M2bf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Dost,
        Algorithm::Sddb,
        Algorithm::Obf,
        Algorithm::R2bf,
        Algorithm::M2bf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dost => "dost",
            Algorithm::Sddb => "sddb",
            Algorithm::Obf => "obf",
            Algorithm::R2bf => "r2bf",
            Algorithm::M2bf => "m2bf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum AlgorithmConfig {
    Dost {
        /// Defaults to the number of nodes.
        training_length: Option<usize>,
        quantizer: QuantizerConfig,
    },
    Sddb {
        quantizer: QuantizerConfig,
    },
    Obf(ObfConfig),
    R2bf(R2bfConfig),
    M2bf(M2bfConfig),
}

impl AlgorithmConfig {
    pub fn default_for(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Dost => AlgorithmConfig::Dost {
                training_length: None,
                quantizer: QuantizerConfig::default(),
            },
            Algorithm::Sddb => AlgorithmConfig::Sddb {
                quantizer: QuantizerConfig::default(),
            },
            Algorithm::Obf => AlgorithmConfig::Obf(ObfConfig::default()),
            Algorithm::R2bf => AlgorithmConfig::R2bf(R2bfConfig::default()),
            Algorithm::M2bf => AlgorithmConfig::M2bf(M2bfConfig::default()),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            AlgorithmConfig::Dost { .. } => Algorithm::Dost,
            AlgorithmConfig::Sddb { .. } => Algorithm::Sddb,
            AlgorithmConfig::Obf(_) => Algorithm::Obf,
            AlgorithmConfig::R2bf(_) => Algorithm::R2bf,
            AlgorithmConfig::M2bf(_) => Algorithm::M2bf,
        }
    }

    /// Replaces the quantizer of the training-based schemes; no-op otherwise.
    pub fn with_quantizer(self, q: QuantizerConfig) -> Self {
        match self {
            AlgorithmConfig::Dost {
                training_length, ..
            } => AlgorithmConfig::Dost {
                training_length,
                quantizer: q,
            },
            AlgorithmConfig::Sddb { .. } => AlgorithmConfig::Sddb { quantizer: q },
            other => other,
        }
    }
}

impl FromStr for AlgorithmConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(AlgorithmConfig::default_for(s.parse()?))
    }
}

/// Adaptation state of any algorithm.
#[derive(Debug, Clone)]
pub enum BeamformerState {
    Training(TrainingState),
    Obf(Obf),
    R2bf(R2bf),
    M2bf(M2bf),
}

impl BeamformerState {
    pub fn new(config: &AlgorithmConfig, gains: &[Complex64], noise_var: f64) -> Result<Self> {
        let n = gains.len();
        if n == 0 {
            return Err(invalid("nodes", "at least one node is required"));
        }
        Ok(match *config {
            AlgorithmConfig::Dost {
                training_length,
                quantizer,
            } => {
                let training = TrainingMatrix::dft(training_length.unwrap_or(n), n)?;
                let q = quantizer.resolve(training_sigma(n, noise_var))?;
                BeamformerState::Training(TrainingState::new(training, q)?)
            }
            AlgorithmConfig::Sddb { quantizer } => {
                let q = quantizer.resolve(training_sigma(1, noise_var))?;
                BeamformerState::Training(TrainingState::new(TrainingMatrix::identity(n)?, q)?)
            }
            AlgorithmConfig::Obf(c) => BeamformerState::Obf(Obf::new(n, c)?),
            AlgorithmConfig::R2bf(c) => {
                let rss_max = gains.iter().map(|h| h.norm()).sum();
                BeamformerState::R2bf(R2bf::new(n, rss_max, c)?)
            }
            AlgorithmConfig::M2bf(c) => BeamformerState::M2bf(M2bf::new(n, c)?),
        })
    }

    /// One feedback iteration; `None` when a training round has finished and
    /// the weights are frozen.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        gains: &[Complex64],
        noise_var: f64,
        rng: &mut R,
    ) -> Result<Option<FeedbackSample>> {
        match self {
            BeamformerState::Training(s) => s.step(gains, noise_var, rng),
            BeamformerState::Obf(s) => s.step(gains, noise_var, rng).map(Some),
            BeamformerState::R2bf(s) => s.step(gains, noise_var, rng).map(Some),
            BeamformerState::M2bf(s) => s.step(gains, noise_var, rng).map(Some),
        }
    }

    pub fn weights(&self) -> Vec<Complex64> {
        match self {
            BeamformerState::Training(s) => s.weights(),
            BeamformerState::Obf(s) => s.weights(),
            BeamformerState::R2bf(s) => s.weights(),
            BeamformerState::M2bf(s) => s.weights(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationTrace {
    /// Noiseless normalized RSS under the weights held after each iteration.
    pub rss_per_iteration: Vec<f64>,
    /// RSS with all weights equal to 1, before any feedback.
    pub initial_rss: f64,
    /// `sum_i |H_i| / N`.
    pub ideal_rss: f64,
    /// `20 log10(N r)` of the final iterate.
    pub converged_gain_db: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub trial: u64,
    pub iteration: usize,
    pub rss: f64,
    pub gain_db: f64,
}

impl AdaptationTrace {
    pub fn final_rss(&self) -> f64 {
        *self.rss_per_iteration.last().unwrap_or(&self.initial_rss)
    }

    /// RSS after `iterations` feedback rounds (0 gives the initial RSS).
    pub fn rss_at(&self, iterations: usize) -> f64 {
        match iterations {
            0 => self.initial_rss,
            k => self.rss_per_iteration[(k - 1).min(self.rss_per_iteration.len() - 1)],
        }
    }

    pub fn rows(&self, trial: u64) -> Vec<TraceRow> {
        self.rss_per_iteration
            .iter()
            .enumerate()
            .map(|(i, &rss)| TraceRow {
                trial,
                iteration: i + 1,
                rss,
                gain_db: gain_db(rss, self.nodes),
            })
            .collect()
    }
}

/// Runs `iterations` feedback rounds of one algorithm on a narrowband channel
/// and records the noiseless RSS after each.
pub fn run_adaptation<R: Rng + ?Sized>(
    config: &AlgorithmConfig,
    gains: &[Complex64],
    snr_per_node_db: f64,
    iterations: usize,
    rng: &mut R,
) -> Result<AdaptationTrace> {
    if iterations == 0 {
        return Err(invalid("iterations", "must be at least 1"));
    }
    let noise_var = noise_variance(snr_per_node_db);
    let mut state = BeamformerState::new(config, gains, noise_var)?;
    let n = gains.len();
    let initial_rss = normalized_rss(&vec![Complex64::new(1.0, 0.0); n], gains)?;
    let mut rss = Vec::with_capacity(iterations);
    let mut last = initial_rss;
    for _ in 0..iterations {
        if state.step(gains, noise_var, rng)?.is_some() {
            last = normalized_rss(&state.weights(), gains)?;
        }
        rss.push(last);
    }
    Ok(AdaptationTrace {
        converged_gain_db: gain_db(last, n),
        rss_per_iteration: rss,
        initial_rss,
        ideal_rss: ideal_rss(gains),
        nodes: n,
    })
}
