//! Outage capacity of phase-only beamforming over an OFDM band.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::outage::{snr_linear, OutageSpec};
use crate::beamforming::quantizer::{training_sigma, QuantizerSpec, DEFAULT_CLIP_MULTIPLIER};
use crate::beamforming::signal::{noise_variance, phase_only_weights};
use crate::channel::{sample_node_channel, PowerDelayProfile, ResponseGrid};
use crate::error::Result;
use crate::ofdm::{comb_grid, wideband_dost, OfdmConfig};
use crate::rng::{domain, SeedTree};
use crate::stats::{empirical_quantile, pairwise_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    /// Perfect per-subcarrier phase alignment.
    Ideal,
    /// Comb-pilot training with quantized feedback and interpolation.
    Dost,
}

/// Settings of the training used in [`CsiMode::Dost`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidebandTraining {
    pub feedback_bits: Option<u32>,
    pub clip_multiplier: f64,
    /// Defaults to the number of nodes.
    pub training_length: Option<usize>,
}

impl Default for WidebandTraining {
    fn default() -> Self {
        WidebandTraining {
            feedback_bits: Some(2),
            clip_multiplier: DEFAULT_CLIP_MULTIPLIER,
            training_length: None,
        }
    }
}

/// `(1/K) sum_k log2(1 + snr |sum_i w_ik H_ik|^2)`.
pub fn spectral_efficiency(snr: f64, weights: &[Vec<Complex64>], responses: &[Vec<Complex64>]) -> f64 {
    let k_count = responses.first().map_or(0, Vec::len);
    let rates: Vec<f64> = (0..k_count)
        .map(|k| {
            let s: Complex64 = weights.iter().zip(responses).map(|(w, h)| w[k] * h[k]).sum();
            (snr * s.norm_sqr()).ln_1p() / std::f64::consts::LN_2
        })
        .collect();
    pairwise_sum(&rates) / k_count as f64
}

/// Spectral efficiency of one channel realization under both CSI modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidebandTrialRates {
    pub ideal: f64,
    pub dost: f64,
}

/// Per-trial rates in trial order. Each trial draws fresh EPA channels from
/// `tree.path([trial, CHANNEL])` and training noise from `[trial, NOISE]`.
pub fn wideband_rates(
    spec: &OutageSpec,
    cfg: &OfdmConfig,
    pdp: &PowerDelayProfile,
    training: &WidebandTraining,
    tree: &SeedTree,
) -> Result<Vec<WidebandTrialRates>> {
    cfg.validate()?;
    let n = spec.n_nodes;
    let grid = comb_grid(cfg)?;
    let response = ResponseGrid::new(pdp, &cfg.subcarrier_frequencies());
    let snr = spec.snr_linear();
    let quantizer = training
        .feedback_bits
        .map(|b| {
            QuantizerSpec::auto(
                b,
                training_sigma(n, noise_variance(spec.snr_per_node_db)),
                training.clip_multiplier,
            )
        })
        .transpose()?;
    let length = training.training_length.unwrap_or(n);
    (0..spec.n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let channel_tree = tree.path(&[t, domain::CHANNEL]);
            let channels: Vec<_> = (0..n as u64)
                .map(|i| sample_node_channel(pdp, &mut channel_tree.child(i).rng()))
                .collect();
            let responses: Vec<Vec<Complex64>> = channels.iter().map(|c| response.evaluate(c)).collect();
            let ideal_weights: Vec<Vec<Complex64>> = responses.iter().map(|h| phase_only_weights(h)).collect();
            let est = wideband_dost(
                &channels,
                cfg,
                &grid,
                length,
                spec.snr_per_node_db,
                quantizer.as_ref(),
                &tree.path(&[t, domain::NOISE]),
            )?;
            let dost_weights: Vec<Vec<Complex64>> = est.per_node.iter().map(|h| phase_only_weights(h)).collect();
            Ok(WidebandTrialRates {
                ideal: spectral_efficiency(snr, &ideal_weights, &responses),
                dost: spectral_efficiency(snr, &dost_weights, &responses),
            })
        })
        .collect()
}

/// `eps`-quantile of the per-trial spectral efficiency.
pub fn wideband_outage_capacity(
    spec: &OutageSpec,
    cfg: &OfdmConfig,
    pdp: &PowerDelayProfile,
    mode: CsiMode,
    tree: &SeedTree,
) -> Result<f64> {
    spec.validate()?;
    let rates = wideband_rates(spec, cfg, pdp, &WidebandTraining::default(), tree)?;
    Ok(wideband_quantile(&rates, mode, spec.epsilon))
}

pub fn wideband_quantile(rates: &[WidebandTrialRates], mode: CsiMode, epsilon: f64) -> f64 {
    let v: Vec<f64> = rates
        .iter()
        .map(|r| match mode {
            CsiMode::Ideal => r.ideal,
            CsiMode::Dost => r.dost,
        })
        .collect();
    empirical_quantile(&v, epsilon)
}

/// Spectral efficiency of one node alone, `(1/K) sum_k log2(1 + snr |H_k|^2)`.
pub fn single_link_efficiency(snr_db: f64, response: &[Complex64]) -> f64 {
    let snr = snr_linear(snr_db);
    let rates: Vec<f64> = response
        .iter()
        .map(|h| (snr * h.norm_sqr()).ln_1p() / std::f64::consts::LN_2)
        .collect();
    pairwise_sum(&rates) / rates.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> OfdmConfig {
        OfdmConfig {
            n_subcarriers: 120,
            n_pilot_subcarriers: 20,
            fft_size: 128,
            ..OfdmConfig::default()
        }
    }

    fn spec(n: usize, trials: usize) -> OutageSpec {
        OutageSpec {
            epsilon: 0.1,
            snr_per_node_db: -5.0,
            n_nodes: n,
            n_trials: trials,
        }
    }

    #[test]
    fn ideal_dominates_training_every_trial() {
        let rates = wideband_rates(&spec(6, 200), &small_cfg(), &PowerDelayProfile::epa(), &WidebandTraining::default(), &SeedTree::new(1)).unwrap();
        assert!(rates.iter().all(|r| r.ideal >= r.dost - 1e-12));
        assert!(
            wideband_quantile(&rates, CsiMode::Ideal, 0.1) >= wideband_quantile(&rates, CsiMode::Dost, 0.1)
        );
    }

    #[test]
    fn single_node_modes_coincide() {
        let cfg = small_cfg();
        let tree = SeedTree::new(2);
        let rates = wideband_rates(&spec(1, 200), &cfg, &PowerDelayProfile::epa(), &WidebandTraining::default(), &tree).unwrap();
        let pdp = PowerDelayProfile::epa();
        let grid = ResponseGrid::new(&pdp, &cfg.subcarrier_frequencies());
        for (t, r) in rates.iter().enumerate() {
            let ch = sample_node_channel(&pdp, &mut tree.path(&[t as u64, domain::CHANNEL]).child(0).rng());
            let single = single_link_efficiency(-5.0, &grid.evaluate(&ch));
            assert!((r.ideal - single).abs() < 1e-12);
            assert!((r.dost - single).abs() < 0.1);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let run = || wideband_rates(&spec(3, 50), &small_cfg(), &PowerDelayProfile::epa(), &WidebandTraining::default(), &SeedTree::new(3)).unwrap();
        assert_eq!(run(), run());
    }
}
