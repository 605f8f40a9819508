//! Narrowband outage and ergodic capacity of coherent beamforming with ideal
//! phases, where the received amplitude is `||H||_1 = sum_i |H_i|`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::gamma_lr;

use crate::error::{invalid, Error, Result};
use crate::rng::{complex_gaussian, SeedTree};
use crate::stats::{empirical_quantile, pairwise_sum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageSpec {
    pub epsilon: f64,
    pub snr_per_node_db: f64,
    pub n_nodes: usize,
    pub n_trials: usize,
}

impl Default for OutageSpec {
    fn default() -> Self {
        OutageSpec {
            epsilon: 0.01,
            snr_per_node_db: -5.0,
            n_nodes: 10,
            n_trials: 100_000,
        }
    }
}

impl OutageSpec {
    /// Fewest trials that leave at least ten samples below the quantile.
    pub fn required_trials(epsilon: f64) -> usize {
        (10.0 / epsilon).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", format!("{} is not in (0, 1)", self.epsilon)));
        }
        if self.n_nodes == 0 {
            return Err(invalid("n_nodes", "at least one node is required"));
        }
        if self.snr_per_node_db.is_nan() || self.snr_per_node_db == f64::INFINITY {
            return Err(invalid("snr_per_node_db", "must be finite or -inf"));
        }
        let required = Self::required_trials(self.epsilon);
        if self.n_trials < required {
            return Err(Error::InsufficientTrials {
                epsilon: self.epsilon,
                required,
                trials: self.n_trials,
            });
        }
        Ok(())
    }

    pub fn snr_linear(&self) -> f64 {
        snr_linear(self.snr_per_node_db)
    }
}

/// `10^(dB/10)`, with `-inf` mapping to 0.
pub fn snr_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// `log2(1 + snr x^2)` for received amplitude `x`.
pub fn rate_from_amplitude(snr: f64, amplitude: f64) -> f64 {
    (snr * amplitude * amplitude).ln_1p() / std::f64::consts::LN_2
}

/// `||H||_1` for `trials` independent draws of `n` unit-power Rayleigh
/// channels, in trial order.
pub fn sample_l1_norms(n: usize, trials: usize, tree: &SeedTree) -> Vec<f64> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree.child(t).rng();
            (0..n).map(|_| complex_gaussian(&mut rng, 1.0).norm()).sum()
        })
        .collect()
}

/// Monte Carlo `C_eps` from the empirical `eps`-quantile of `||H||_1`.
pub fn narrowband_outage_capacity_mc(spec: &OutageSpec, tree: &SeedTree) -> Result<f64> {
    spec.validate()?;
    let norms = sample_l1_norms(spec.n_nodes, spec.n_trials, tree);
    Ok(outage_from_norms(spec.snr_linear(), &norms, spec.epsilon))
}

pub fn outage_from_norms(snr: f64, norms: &[f64], epsilon: f64) -> f64 {
    rate_from_amplitude(snr, empirical_quantile(norms, epsilon))
}

/// `Q^{-1}(eps)` for the standard normal tail.
pub fn q_inverse(epsilon: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * epsilon)
}

/// Central-limit approximation: `||H||_1 ~ N(N sqrt(pi/4), N (1 - pi/4))`.
pub fn gaussian_outage_capacity(spec: &OutageSpec) -> f64 {
    let n = spec.n_nodes as f64;
    let mu = n * (std::f64::consts::PI / 4.0).sqrt();
    let sigma = (n * (1.0 - std::f64::consts::PI / 4.0)).sqrt();
    let q = (mu - sigma * q_inverse(spec.epsilon)).max(0.0);
    rate_from_amplitude(spec.snr_linear(), q)
}

/// Per-component variance of each channel (`E|H|^2 = 1`).
const COMPONENT_VARIANCE: f64 = 0.5;

/// Small-argument approximation to the CDF of a sum of `n` i.i.d. Rayleigh
/// amplitudes, evaluated at `x`.
pub fn saa_cdf(n: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    // [(2n-1)!!]^{1/n} in the log domain
    let log_df: f64 = (1..=n).map(|i| ((2 * i - 1) as f64).ln()).sum();
    let b = COMPONENT_VARIANCE / nf * (log_df / nf).exp();
    let t = x / nf.sqrt();
    gamma_lr(nf, t * t / (2.0 * b))
}

/// Inverts [`saa_cdf`] by bisection on the normalized argument `t = x/sqrt(N)`.
pub fn saa_quantile(n: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", format!("{epsilon} is not in (0, 1)")));
    }
    let root_n = (n as f64).sqrt();
    let f = |t: f64| saa_cdf(n, t * root_n) - epsilon;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence("small-argument quantile bracket".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            return Ok(0.5 * (lo + hi) * root_n);
        }
    }
    Err(Error::NoConvergence("small-argument quantile bisection".into()))
}

pub fn saa_outage_capacity(spec: &OutageSpec) -> Result<f64> {
    if spec.n_nodes == 0 {
        return Err(invalid("n_nodes", "at least one node is required"));
    }
    let x = saa_quantile(spec.n_nodes, spec.epsilon)?;
    Ok(rate_from_amplitude(spec.snr_linear(), x))
}

/// `E[log2(1 + snr ||H||_1^2)]` by Monte Carlo.
pub fn ergodic_capacity_mc(spec: &OutageSpec, tree: &SeedTree) -> Result<f64> {
    if spec.n_nodes == 0 || spec.n_trials == 0 {
        return Err(invalid("n_trials", "nodes and trials must be positive"));
    }
    let norms = sample_l1_norms(spec.n_nodes, spec.n_trials, tree);
    Ok(ergodic_from_norms(spec.snr_linear(), &norms))
}

pub fn ergodic_from_norms(snr: f64, norms: &[f64]) -> f64 {
    let rates: Vec<f64> = norms.iter().map(|&x| rate_from_amplitude(snr, x)).collect();
    pairwise_sum(&rates) / rates.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NarrowbandRow {
    pub n_nodes: usize,
    pub ergodic: f64,
    pub outage_mc: f64,
    pub outage_gaussian: f64,
    pub outage_saa: f64,
}

/// All four capacity curves at one network size, Monte Carlo values sharing
/// the same trials.
pub fn narrowband_row(spec: &OutageSpec, tree: &SeedTree) -> Result<NarrowbandRow> {
    spec.validate()?;
    let norms = sample_l1_norms(spec.n_nodes, spec.n_trials, tree);
    let snr = spec.snr_linear();
    Ok(NarrowbandRow {
        n_nodes: spec.n_nodes,
        ergodic: ergodic_from_norms(snr, &norms),
        outage_mc: outage_from_norms(snr, &norms, spec.epsilon),
        outage_gaussian: gaussian_outage_capacity(spec),
        outage_saa: saa_outage_capacity(spec)?,
    })
}
