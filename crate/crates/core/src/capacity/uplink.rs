//! Feedback-link (uplink) outage rates for three reception strategies.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::outage::snr_linear;
use crate::channel::{sample_node_channel, PowerDelayProfile, ResponseGrid};
use crate::error::{invalid, Result};
use crate::ofdm::OfdmConfig;
use crate::rng::{domain, SeedTree};
use crate::stats::{empirical_quantile, pairwise_sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UplinkStrategy {
    /// One designated node decodes the feedback.
    SingleNode,
    /// Every node decodes; the feedback gets through if any node succeeds.
    BestNode,
    /// Nodes combine their observations coherently.
    ReceiveBeamforming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubcarrierPlacement {
    /// Every `n_subcarriers / M_u`-th subcarrier across the whole band.
    Interleaved,
    /// `M_u` adjacent subcarriers at the band centre.
    Contiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkSpec {
    pub feedback_bandwidth: f64,
    pub n_uplink_subcarriers: usize,
    pub placement: SubcarrierPlacement,
    pub strategy: UplinkStrategy,
    pub snr_per_node_db: f64,
    pub n_nodes: usize,
}

impl Default for UplinkSpec {
    fn default() -> Self {
        UplinkSpec {
            feedback_bandwidth: 2e6,
            n_uplink_subcarriers: 120,
            placement: SubcarrierPlacement::Interleaved,
            strategy: UplinkStrategy::SingleNode,
            snr_per_node_db: -5.0,
            n_nodes: 10,
        }
    }
}

impl UplinkSpec {
    pub fn validate(&self, cfg: &OfdmConfig) -> Result<()> {
        if !(self.feedback_bandwidth > 0.0 && self.feedback_bandwidth <= cfg.bandwidth) {
            return Err(invalid("feedback_bandwidth", "must lie in (0, bandwidth]"));
        }
        if self.n_uplink_subcarriers == 0 || self.n_uplink_subcarriers > cfg.n_subcarriers {
            return Err(invalid("n_uplink_subcarriers", "must lie in 1..=n_subcarriers"));
        }
        if self.n_nodes == 0 {
            return Err(invalid("n_nodes", "at least one node is required"));
        }
        Ok(())
    }

    /// Subcarrier indices carrying feedback.
    pub fn subcarriers(&self, cfg: &OfdmConfig) -> Vec<usize> {
        let m = self.n_uplink_subcarriers;
        match self.placement {
            SubcarrierPlacement::Interleaved => {
                let step = cfg.n_subcarriers / m;
                (0..m).map(|i| i * step).collect()
            }
            SubcarrierPlacement::Contiguous => {
                let start = (cfg.n_subcarriers - m) / 2;
                (start..start + m).collect()
            }
        }
    }
}

/// Per-trial mutual information of every node and of the combined receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkSample {
    /// `I_k = (1/M_u) sum_i log2(1 + snr |H_k(f_i)|^2)` per node.
    pub per_node: Vec<f64>,
    /// `(1/M_u) sum_i log2(1 + snr sum_k |H_k(f_i)|^2)`.
    pub combined: f64,
}

fn mean_rate(snr: f64, gains: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = gains.map(|g| (snr * g).ln_1p() / std::f64::consts::LN_2).collect();
    pairwise_sum(&v) / v.len() as f64
}

pub fn uplink_samples(
    spec: &UplinkSpec,
    cfg: &OfdmConfig,
    pdp: &PowerDelayProfile,
    trials: usize,
    tree: &SeedTree,
) -> Result<Vec<UplinkSample>> {
    spec.validate(cfg)?;
    let freqs: Vec<f64> = spec.subcarriers(cfg).into_iter().map(|k| cfg.subcarrier_frequency(k)).collect();
    let grid = ResponseGrid::new(pdp, &freqs);
    let snr = snr_linear(spec.snr_per_node_db);
    Ok((0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ch_tree = tree.path(&[t, domain::CHANNEL]);
            let h: Vec<Vec<Complex64>> = (0..spec.n_nodes as u64)
                .map(|k| grid.evaluate(&sample_node_channel(pdp, &mut ch_tree.child(k).rng())))
                .collect();
            let per_node = h.iter().map(|hk| mean_rate(snr, hk.iter().map(|x| x.norm_sqr()))).collect();
            let combined = mean_rate(snr, (0..freqs.len()).map(|i| h.iter().map(|hk| hk[i].norm_sqr()).sum()));
            UplinkSample { per_node, combined }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkRates {
    pub single_node: f64,
    pub best_node: f64,
    /// Best-node rate from the single-node quantile at `eps^{1/N}`.
    pub best_node_from_quantile: f64,
    pub receive_beamforming: f64,
}

impl UplinkRates {
    pub fn get(&self, strategy: UplinkStrategy) -> f64 {
        match strategy {
            UplinkStrategy::SingleNode => self.single_node,
            UplinkStrategy::BestNode => self.best_node,
            UplinkStrategy::ReceiveBeamforming => self.receive_beamforming,
        }
    }
}

pub fn rates_from_samples(samples: &[UplinkSample], epsilon: f64) -> UplinkRates {
    let n = samples.first().map_or(1, |s| s.per_node.len());
    let first: Vec<f64> = samples.iter().map(|s| s.per_node[0]).collect();
    let all: Vec<f64> = samples.iter().flat_map(|s| s.per_node.iter().copied()).collect();
    let best: Vec<f64> = samples
        .iter()
        .map(|s| s.per_node.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let combined: Vec<f64> = samples.iter().map(|s| s.combined).collect();
    UplinkRates {
        single_node: empirical_quantile(&first, epsilon),
        best_node: empirical_quantile(&best, epsilon),
        best_node_from_quantile: empirical_quantile(&all, epsilon.powf(1.0 / n as f64)),
        receive_beamforming: empirical_quantile(&combined, epsilon),
    }
}

/// `eps`-outage rate of the strategy in `spec`.
pub fn uplink_outage_rate(
    spec: &UplinkSpec,
    cfg: &OfdmConfig,
    pdp: &PowerDelayProfile,
    epsilon: f64,
    trials: usize,
    tree: &SeedTree,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", format!("{epsilon} is not in (0, 1)")));
    }
    let samples = uplink_samples(spec, cfg, pdp, trials, tree)?;
    Ok(rates_from_samples(&samples, epsilon).get(spec.strategy))
}
