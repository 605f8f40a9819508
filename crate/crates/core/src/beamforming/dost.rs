//! Training-based estimation: orthogonal-sequence training and its
//! time-multiplexed special case (identity training).

use num_complex::Complex64;
use rand::Rng;

use super::quantizer::{FeedbackSample, QuantizerSpec};
use super::signal::{normalized_rss, phase_only_weights, received_sample};
use super::training::{least_squares_estimate, TrainingKind, TrainingMatrix};
use crate::error::{Error, Result};

/// Running state of one training round. Each step transmits one row of the
/// training matrix, quantizes the aggregate sample and folds it into every
/// node's correlation.
#[derive(Debug, Clone)]
pub struct TrainingState {
    training: TrainingMatrix,
    quantizer: Option<QuantizerSpec>,
    observations: Vec<Complex64>,
    correlation: Vec<Complex64>,
    inverse_energy: Vec<f64>,
    orthogonal: bool,
}

impl TrainingState {
    pub fn new(training: TrainingMatrix, quantizer: Option<QuantizerSpec>) -> Result<Self> {
        let n = training.nodes();
        // DFT (L >= N) and identity training are orthogonal by construction
        let orthogonal = match training.kind() {
            TrainingKind::Dft | TrainingKind::Identity => true,
            TrainingKind::Custom => {
                let zeros = vec![Complex64::new(0.0, 0.0); training.length()];
                least_squares_estimate(&zeros, &training)?;
                training.is_orthogonal(1e-9)
            }
        };
        let inverse_energy = (0..n)
            .map(|i| 1.0 / training.column(i).iter().map(|a| a.norm_sqr()).sum::<f64>())
            .collect();
        Ok(TrainingState {
            training,
            quantizer,
            observations: Vec::new(),
            correlation: vec![Complex64::new(0.0, 0.0); n],
            inverse_energy,
            orthogonal,
        })
    }

    pub fn nodes(&self) -> usize {
        self.training.nodes()
    }

    pub fn training(&self) -> &TrainingMatrix {
        &self.training
    }

    pub fn is_complete(&self) -> bool {
        self.observations.len() == self.training.length()
    }

    /// Fed-back samples so far.
    pub fn observations(&self) -> &[Complex64] {
        &self.observations
    }

    /// One training transmission; `None` once all `L` slots are used.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        gains: &[Complex64],
        noise_var: f64,
        rng: &mut R,
    ) -> Result<Option<FeedbackSample>> {
        if gains.len() != self.nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes(),
                actual: gains.len(),
            });
        }
        if self.is_complete() {
            return Ok(None);
        }
        let l = self.observations.len();
        let row = self.training.row(l);
        let y = received_sample(row, gains, noise_var, rng)?;
        let v = match &self.quantizer {
            Some(q) => q.quantize_value(y),
            None => y,
        };
        for (acc, a) in self.correlation.iter_mut().zip(row) {
            *acc += a.conj() * v;
        }
        self.observations.push(v);
        Ok(Some(FeedbackSample::Value(v)))
    }

    /// Current channel estimates. Orthogonal training uses the per-node
    /// correlation `a_n^H y / (a_n^H a_n)`; other full-rank training switches
    /// to least squares once every slot has been observed.
    pub fn estimates(&self) -> Vec<Complex64> {
        if self.is_complete() && !self.orthogonal {
            if let Ok(h) = least_squares_estimate(&self.observations, &self.training) {
                return h;
            }
        }
        self.correlation
            .iter()
            .zip(&self.inverse_energy)
            .map(|(c, e)| c * e)
            .collect()
    }

    /// Phase-only weights from the current estimates.
    pub fn weights(&self) -> Vec<Complex64> {
        phase_only_weights(&self.estimates())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOutcome {
    pub estimates: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Noiseless normalized RSS after each training slot.
    pub trace: Vec<f64>,
}

fn run_round<R: Rng + ?Sized>(
    mut state: TrainingState,
    gains: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    let mut trace = Vec::with_capacity(state.training().length());
    while state.step(gains, noise_var, rng)?.is_some() {
        trace.push(normalized_rss(&state.weights(), gains)?);
    }
    let estimates = state.estimates();
    Ok(TrainingOutcome {
        weights: phase_only_weights(&estimates),
        estimates,
        trace,
    })
}

/// Full orthogonal-training round of `L` transmissions.
pub fn dost_round<R: Rng + ?Sized>(
    training: &TrainingMatrix,
    gains: &[Complex64],
    noise_var: f64,
    quantizer: Option<&QuantizerSpec>,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    let state = TrainingState::new(training.clone(), quantizer.copied())?;
    run_round(state, gains, noise_var, rng)
}

/// Time-multiplexed training: slot `t` activates node `t` alone and its
/// estimate is that single fed-back sample.
pub fn sddb_round<R: Rng + ?Sized>(
    gains: &[Complex64],
    noise_var: f64,
    quantizer: Option<&QuantizerSpec>,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    let state = TrainingState::new(TrainingMatrix::identity(gains.len())?, quantizer.copied())?;
    run_round(state, gains, noise_var, rng)
}
