//! Received-signal model and RSS metrics shared by every algorithm.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::complex_gaussian;

/// `sum_i w_i H_i` without noise.
pub fn coherent_sum(weights: &[Complex64], gains: &[Complex64]) -> Result<Complex64> {
    if weights.len() != gains.len() {
        return Err(Error::DimensionMismatch {
            expected: gains.len(),
            actual: weights.len(),
        });
    }
    Ok(weights.iter().zip(gains).map(|(w, h)| w * h).sum())
}

/// One noisy observation `sum_i w_i H_i + w`, `w ~ CN(0, noise_var)`.
/// Weights are expected to have unit modulus; this is not enforced so that
/// silent nodes (zero weight) can be expressed.
pub fn received_sample<R: Rng + ?Sized>(
    weights: &[Complex64],
    gains: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> Result<Complex64> {
    let s = coherent_sum(weights, gains)?;
    if noise_var > 0.0 {
        Ok(s + complex_gaussian(rng, noise_var))
    } else {
        Ok(s)
    }
}

/// Normalized RSS `r = |sum_i w_i H_i| / N`.
pub fn normalized_rss(weights: &[Complex64], gains: &[Complex64]) -> Result<f64> {
    Ok(coherent_sum(weights, gains)?.norm() / gains.len() as f64)
}

/// Upper bound `sum_i |H_i| / N`, attained by conjugate-phase weights.
pub fn ideal_rss(gains: &[Complex64]) -> f64 {
    gains.iter().map(|h| h.norm()).sum::<f64>() / gains.len() as f64
}

/// `e^{-j arg h}` per estimate; a zero estimate yields weight 1.
pub fn phase_only_weights(estimates: &[Complex64]) -> Vec<Complex64> {
    estimates
        .iter()
        .map(|h| Complex64::from_polar(1.0, -h.arg()))
        .collect()
}

pub fn weights_from_phases(phases: &[f64]) -> Vec<Complex64> {
    phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
}

/// Noise variance for a per-node SNR in dB; `+inf` gives a noiseless link.
pub fn noise_variance(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

/// Beamforming gain `20 log10(N r)` over a single unit-amplitude node.
pub fn gain_db(rss: f64, nodes: usize) -> f64 {
    20.0 * (nodes as f64 * rss).log10()
}
