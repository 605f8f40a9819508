//! Wideband training over an OFDM subcarrier plan: pilot grids, per-pilot
//! training rounds and lowpass interpolation to data subcarriers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::dost::dost_round;
use crate::beamforming::quantizer::QuantizerSpec;
use crate::beamforming::signal::{noise_variance, phase_only_weights};
use crate::beamforming::training::TrainingMatrix;
use crate::channel::{NodeChannel, ResponseGrid};
use crate::error::{invalid, Error, Result};
use crate::rng::SeedTree;
use crate::stats::pairwise_sum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OfdmConfig {
    pub bandwidth: f64,
    pub n_subcarriers: usize,
    pub n_pilot_subcarriers: usize,
    pub fft_size: usize,
    pub subcarrier_spacing: f64,
    pub subframe_length: f64,
    pub symbols_per_subframe: usize,
    /// OFDM symbols per subframe carrying pilots in the two-dimensional grid.
    pub grid2d_pilot_symbols: usize,
    /// Carried as metadata only; channels are static within a training epoch.
    pub doppler_spread: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        OfdmConfig {
            bandwidth: 20e6,
            n_subcarriers: 1200,
            n_pilot_subcarriers: 200,
            fft_size: 2048,
            subcarrier_spacing: 15e3,
            subframe_length: 1e-3,
            symbols_per_subframe: 14,
            grid2d_pilot_symbols: 2,
            doppler_spread: 5.0,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bandwidth", self.bandwidth),
            ("subcarrier_spacing", self.subcarrier_spacing),
            ("subframe_length", self.subframe_length),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be positive")));
            }
        }
        if self.n_subcarriers == 0 || self.n_pilot_subcarriers == 0 {
            return Err(invalid("n_subcarriers", "subcarrier and pilot counts must be positive"));
        }
        if self.n_pilot_subcarriers > self.n_subcarriers {
            return Err(invalid("n_pilot_subcarriers", "exceeds n_subcarriers"));
        }
        if self.fft_size < self.n_subcarriers {
            return Err(invalid("fft_size", "smaller than the number of subcarriers"));
        }
        if self.n_subcarriers as f64 * self.subcarrier_spacing > self.bandwidth * (1.0 + 1e-12) {
            return Err(invalid("subcarrier_spacing", "occupied band exceeds the bandwidth"));
        }
        if self.symbols_per_subframe == 0
            || self.grid2d_pilot_symbols == 0
            || self.grid2d_pilot_symbols > self.symbols_per_subframe
        {
            return Err(invalid("grid2d_pilot_symbols", "must lie in 1..=symbols_per_subframe"));
        }
        Ok(())
    }

    /// `T_OFDM`, one symbol including its share of cyclic prefix.
    pub fn symbol_duration(&self) -> f64 {
        self.subframe_length / self.symbols_per_subframe as f64
    }

    pub fn comb_spacing(&self) -> Result<usize> {
        if self.n_pilot_subcarriers == 0 || self.n_subcarriers % self.n_pilot_subcarriers != 0 {
            return Err(Error::NonIntegralSpacing {
                subcarriers: self.n_subcarriers,
                pilots: self.n_pilot_subcarriers,
            });
        }
        Ok(self.n_subcarriers / self.n_pilot_subcarriers)
    }

    /// Baseband offset of subcarrier `k` from the band centre.
    pub fn subcarrier_frequency(&self, k: usize) -> f64 {
        (k as f64 - (self.n_subcarriers / 2) as f64) * self.subcarrier_spacing
    }

    pub fn subcarrier_frequencies(&self) -> Vec<f64> {
        (0..self.n_subcarriers).map(|k| self.subcarrier_frequency(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PilotArrangement {
    Comb,
    Block,
    Grid2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotGrid {
    pub pilot_indices: Vec<usize>,
    pub arrangement: PilotArrangement,
}

impl PilotGrid {
    /// Every subcarrier is a pilot.
    pub fn full(n_subcarriers: usize) -> Self {
        PilotGrid {
            pilot_indices: (0..n_subcarriers).collect(),
            arrangement: PilotArrangement::Comb,
        }
    }

    pub fn len(&self) -> usize {
        self.pilot_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pilot_indices.is_empty()
    }

    /// `(offset, spacing)` when the pilots are equispaced.
    pub fn comb_layout(&self) -> Option<(usize, usize)> {
        let idx = &self.pilot_indices;
        let first = *idx.first()?;
        let spacing = if idx.len() > 1 { idx[1].checked_sub(first)? } else { 1 };
        if spacing == 0 {
            return None;
        }
        idx.windows(2)
            .all(|w| w[1] == w[0] + spacing)
            .then_some((first, spacing))
    }
}

pub fn comb_grid(cfg: &OfdmConfig) -> Result<PilotGrid> {
    let spacing = cfg.comb_spacing()?;
    Ok(PilotGrid {
        pilot_indices: (0..cfg.n_pilot_subcarriers).map(|j| j * spacing).collect(),
        arrangement: PilotArrangement::Comb,
    })
}

/// Minimum time to send `L = n_nodes` training symbols.
pub fn training_time(cfg: &OfdmConfig, n_nodes: usize, arrangement: PilotArrangement) -> f64 {
    let symbols = n_nodes as f64;
    match arrangement {
        PilotArrangement::Comb | PilotArrangement::Block => symbols * cfg.symbol_duration(),
        PilotArrangement::Grid2D => {
            let ratio = cfg.symbols_per_subframe as f64 / cfg.grid2d_pilot_symbols as f64;
            ratio * symbols * cfg.symbol_duration()
        }
    }
}

/// Pilots beyond each band edge synthesized by reflection before filtering.
const EDGE_PILOTS: usize = 4;

/// Zero-stuffing interpolator with a Hamming-windowed sinc of `8s + 1` taps.
#[derive(Debug, Clone, PartialEq)]
pub struct LowpassInterpolator {
    spacing: usize,
    taps: Vec<f64>,
    /// Per output phase `k mod s`, the reciprocal of the taps it sums.
    branch_gain: Vec<f64>,
}

impl LowpassInterpolator {
    pub fn new(spacing: usize) -> Result<Self> {
        if spacing == 0 {
            return Err(invalid("spacing", "must be positive"));
        }
        let half = (EDGE_PILOTS * spacing) as i64;
        let s = spacing as f64;
        let taps: Vec<f64> = (-half..=half)
            .map(|n| {
                let x = n as f64 / s;
                let sinc = if n == 0 { 1.0 } else { (PI * x).sin() / (PI * x) };
                let window = 0.54 + 0.46 * (PI * n as f64 / half as f64).cos();
                sinc * window
            })
            .collect();
        let branch_gain = (0..spacing)
            .map(|r| {
                let sum: f64 = taps.iter().skip(r).step_by(spacing).sum();
                1.0 / sum
            })
            .collect();
        Ok(LowpassInterpolator {
            spacing,
            taps,
            branch_gain,
        })
    }

    pub fn spacing(&self) -> usize {
        self.spacing
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Values on subcarriers `0..n_out` from pilots at `offset + j * spacing`.
    pub fn interpolate(&self, pilots: &[Complex64], offset: usize, n_out: usize) -> Vec<Complex64> {
        let p = pilots.len() as i64;
        let s = self.spacing as i64;
        let half = (self.taps.len() / 2) as i64;
        // point reflection about the end pilots keeps value and slope continuous
        let extended = |j: i64| -> Complex64 {
            if j < 0 {
                2.0 * pilots[0] - pilots[(-j).min(p - 1) as usize]
            } else if j >= p {
                2.0 * pilots[(p - 1) as usize] - pilots[(2 * (p - 1) - j).max(0) as usize]
            } else {
                pilots[j as usize]
            }
        };
        (0..n_out as i64)
            .map(|k| {
                let rel = k - offset as i64;
                let r = rel.rem_euclid(s);
                // pilots j with |rel - j s| <= half
                let j_lo = (rel - half + s - 1).div_euclid(s);
                let j_hi = (rel + half).div_euclid(s);
                let j_lo = j_lo.max(-(EDGE_PILOTS as i64));
                let j_hi = j_hi.min(p - 1 + EDGE_PILOTS as i64);
                let mut acc = Complex64::new(0.0, 0.0);
                for j in j_lo..=j_hi {
                    let t = (rel - j * s + half) as usize;
                    acc += extended(j) * self.taps[t];
                }
                acc * self.branch_gain[r as usize]
            })
            .collect()
    }
}

/// Interpolates pilot estimates on a comb to all `n_subcarriers`.
pub fn lowpass_interpolate(
    pilot_values: &[Complex64],
    grid: &PilotGrid,
    n_subcarriers: usize,
) -> Result<Vec<Complex64>> {
    if pilot_values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            actual: pilot_values.len(),
        });
    }
    let (offset, spacing) = grid
        .comb_layout()
        .ok_or_else(|| invalid("grid", "lowpass interpolation needs an equispaced comb"))?;
    Ok(LowpassInterpolator::new(spacing)?.interpolate(pilot_values, offset, n_subcarriers))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidebandEstimate {
    /// `[node][subcarrier]`, interpolated.
    pub per_node: Vec<Vec<Complex64>>,
    /// `[node][pilot]`.
    pub per_node_pilot: Vec<Vec<Complex64>>,
    pub pilot_indices: Vec<usize>,
}

/// Runs one training round per pilot subcarrier and interpolates.
///
/// The noise of pilot subcarrier `k` comes from `noise.child(k)`, so two grids
/// sharing a subcarrier observe identical noise on it.
#[allow(clippy::too_many_arguments)]
pub fn wideband_dost(
    channels: &[NodeChannel],
    cfg: &OfdmConfig,
    grid: &PilotGrid,
    training_length: usize,
    snr_per_node_db: f64,
    quantizer: Option<&QuantizerSpec>,
    noise: &SeedTree,
) -> Result<WidebandEstimate> {
    let n = channels.len();
    let training = TrainingMatrix::dft(training_length, n)?;
    if grid.pilot_indices.iter().any(|&k| k >= cfg.n_subcarriers) {
        return Err(invalid("grid", "pilot index outside the subcarrier range"));
    }
    let freqs: Vec<f64> = grid.pilot_indices.iter().map(|&k| cfg.subcarrier_frequency(k)).collect();
    let responses = node_responses(channels, &freqs)?;
    let noise_var = noise_variance(snr_per_node_db);
    let per_pilot: Vec<Vec<Complex64>> = grid
        .pilot_indices
        .iter()
        .enumerate()
        .map(|(p, &k)| {
            let gains: Vec<Complex64> = responses.iter().map(|r| r[p]).collect();
            let mut rng = noise.child(k as u64).rng();
            Ok(dost_round(&training, &gains, noise_var, quantizer, &mut rng)?.estimates)
        })
        .collect::<Result<_>>()?;
    let per_node_pilot: Vec<Vec<Complex64>> =
        (0..n).map(|i| per_pilot.iter().map(|e| e[i]).collect()).collect();
    let per_node = per_node_pilot
        .iter()
        .map(|v| lowpass_interpolate(v, grid, cfg.n_subcarriers))
        .collect::<Result<_>>()?;
    Ok(WidebandEstimate {
        per_node,
        per_node_pilot,
        pilot_indices: grid.pilot_indices.clone(),
    })
}

fn node_responses(channels: &[NodeChannel], freqs: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let first = channels
        .first()
        .ok_or_else(|| invalid("channels", "at least one node is required"))?;
    if channels.iter().all(|c| c.pdp == first.pdp) {
        let grid = ResponseGrid::new(&first.pdp, freqs);
        Ok(channels.iter().map(|c| grid.evaluate(c)).collect())
    } else {
        Ok(channels
            .iter()
            .map(|c| ResponseGrid::new(&c.pdp, freqs).evaluate(c))
            .collect())
    }
}

/// True per-node responses over every subcarrier of `cfg`.
pub fn channel_responses(channels: &[NodeChannel], cfg: &OfdmConfig) -> Result<Vec<Vec<Complex64>>> {
    node_responses(channels, &cfg.subcarrier_frequencies())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidebandRss {
    pub per_subcarrier: Vec<f64>,
    /// `sum_i |H_i(f_k)| / N`.
    pub ideal_per_subcarrier: Vec<f64>,
    pub average: f64,
    pub ideal_average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierRow {
    pub subcarrier: usize,
    pub ideal_rss: f64,
    pub dost_rss: f64,
    pub interpolated: bool,
}

impl WidebandRss {
    pub fn rows(&self, pilot_indices: &[usize]) -> Vec<SubcarrierRow> {
        let mut is_pilot = vec![false; self.per_subcarrier.len()];
        for &k in pilot_indices {
            if k < is_pilot.len() {
                is_pilot[k] = true;
            }
        }
        (0..self.per_subcarrier.len())
            .map(|k| SubcarrierRow {
                subcarrier: k,
                ideal_rss: self.ideal_per_subcarrier[k],
                dost_rss: self.per_subcarrier[k],
                interpolated: !is_pilot[k],
            })
            .collect()
    }
}

/// Noiseless RSS per subcarrier with phase-only weights from the estimate.
pub fn wideband_rss(estimate: &WidebandEstimate, channels: &[NodeChannel], cfg: &OfdmConfig) -> Result<WidebandRss> {
    wideband_rss_from_responses(estimate, &channel_responses(channels, cfg)?)
}

/// As [`wideband_rss`] with the true responses `[node][subcarrier]` given.
pub fn wideband_rss_from_responses(
    estimate: &WidebandEstimate,
    responses: &[Vec<Complex64>],
) -> Result<WidebandRss> {
    let n = responses.len();
    if estimate.per_node.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: estimate.per_node.len(),
        });
    }
    let k_count = responses.first().map_or(0, Vec::len);
    for (e, r) in estimate.per_node.iter().zip(responses) {
        if e.len() != k_count || r.len() != k_count {
            return Err(Error::DimensionMismatch {
                expected: k_count,
                actual: e.len().min(r.len()),
            });
        }
    }
    let weights: Vec<Vec<Complex64>> = estimate.per_node.iter().map(|e| phase_only_weights(e)).collect();
    let (per_subcarrier, ideal_per_subcarrier): (Vec<f64>, Vec<f64>) = (0..k_count)
        .map(|k| {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut ideal = 0.0;
            for i in 0..n {
                sum += weights[i][k] * responses[i][k];
                ideal += responses[i][k].norm();
            }
            (sum.norm() / n as f64, ideal / n as f64)
        })
        .unzip();
    Ok(WidebandRss {
        average: pairwise_sum(&per_subcarrier) / k_count as f64,
        ideal_average: pairwise_sum(&ideal_per_subcarrier) / k_count as f64,
        per_subcarrier,
        ideal_per_subcarrier,
    })
}

/// Subcarrier-averaged RSS over many independent trials, in trial order.
pub fn wideband_trials<F>(trials: u64, f: F) -> Result<Vec<WidebandRss>>
where
    F: Fn(u64) -> Result<WidebandRss> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::quantizer::training_sigma;
    use crate::channel::{sample_node_channel, PowerDelayProfile};
    use crate::stats::{amplitude_db, mean};

    fn channels(seed: u64, n: usize) -> Vec<NodeChannel> {
        let pdp = PowerDelayProfile::epa();
        let tree = SeedTree::new(seed);
        (0..n).map(|i| sample_node_channel(&pdp, &mut tree.child(i as u64).rng())).collect()
    }

    #[test]
    fn default_plan() {
        let cfg = OfdmConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.comb_spacing().unwrap(), 6);
        let g = comb_grid(&cfg).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(&g.pilot_indices[..3], &[0, 6, 12]);
        assert_eq!(*g.pilot_indices.last().unwrap(), 1194);
        assert_eq!(cfg.subcarrier_frequency(600), 0.0);
        assert_eq!(cfg.subcarrier_frequency(0), -9e6);
    }

    #[test]
    fn small_grids() {
        let cfg = OfdmConfig {
            n_subcarriers: 12,
            n_pilot_subcarriers: 4,
            ..OfdmConfig::default()
        };
        assert_eq!(comb_grid(&cfg).unwrap().pilot_indices, vec![0, 3, 6, 9]);
        let bad = OfdmConfig {
            n_subcarriers: 10,
            ..cfg
        };
        assert!(matches!(comb_grid(&bad), Err(Error::NonIntegralSpacing { .. })));
    }

    #[test]
    fn training_times() {
        let cfg = OfdmConfig::default();
        assert!((training_time(&cfg, 10, PilotArrangement::Comb) - 10.0e-3 / 14.0).abs() < 1e-15);
        assert!((training_time(&cfg, 10, PilotArrangement::Grid2D) - 5e-3).abs() < 1e-15);
        assert_eq!(training_time(&cfg, 0, PilotArrangement::Comb), 0.0);
    }

    #[test]
    fn interpolator_passes_through_pilots() {
        let it = LowpassInterpolator::new(6).unwrap();
        assert_eq!(it.taps().len(), 49);
        let pilots: Vec<Complex64> = (0..30).map(|j| Complex64::new(j as f64, -(j as f64).sqrt())).collect();
        let out = it.interpolate(&pilots, 0, 180);
        for (j, p) in pilots.iter().enumerate() {
            assert!((out[6 * j] - p).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_pilots_are_preserved() {
        let c = Complex64::new(0.3, -1.1);
        let grid = comb_grid(&OfdmConfig::default()).unwrap();
        let out = lowpass_interpolate(&vec![c; 200], &grid, 1200).unwrap();
        assert!(out.iter().all(|v| (v - c).norm() < 0.01 * c.norm()));
    }

    #[test]
    fn bandlimited_exponential_is_reconstructed() {
        let grid = comb_grid(&OfdmConfig::default()).unwrap();
        let nu = 0.013;
        let f = |k: usize| Complex64::from_polar(1.0, 2.0 * PI * nu * k as f64);
        let pilots: Vec<Complex64> = grid.pilot_indices.iter().map(|&k| f(k)).collect();
        let out = lowpass_interpolate(&pilots, &grid, 1200).unwrap();
        for k in 60..1140 {
            assert!((out[k] - f(k)).norm() < 0.02, "k {k}: {}", (out[k] - f(k)).norm());
        }
    }

    #[test]
    fn lowpass_beats_linear_on_epa_channels() {
        let cfg = OfdmConfig::default();
        let grid = comb_grid(&cfg).unwrap();
        let pdp = PowerDelayProfile::epa();
        let resp = ResponseGrid::new(&pdp, &cfg.subcarrier_frequencies());
        let tree = SeedTree::new(21);
        let (mut lp, mut lin) = (0.0, 0.0);
        for trial in 0..1000 {
            let h = resp.evaluate(&sample_node_channel(&pdp, &mut tree.child(trial).rng()));
            let pilots: Vec<Complex64> = grid.pilot_indices.iter().map(|&k| h[k]).collect();
            let out = lowpass_interpolate(&pilots, &grid, 1200).unwrap();
            // linear oracle, interior subcarriers only
            for k in 0..1194 {
                let j = k / 6;
                let t = (k % 6) as f64 / 6.0;
                let linear = pilots[j] * (1.0 - t) + pilots[j + 1] * t;
                lp += (out[k] - h[k]).norm_sqr();
                lin += (linear - h[k]).norm_sqr();
            }
        }
        assert!(lp < lin, "lowpass {lp} linear {lin}");
    }

    #[test]
    fn noiseless_full_pilot_training_is_exact() {
        let cfg = OfdmConfig {
            n_subcarriers: 120,
            n_pilot_subcarriers: 120,
            fft_size: 128,
            ..OfdmConfig::default()
        };
        let ch = channels(3, 4);
        let grid = PilotGrid::full(120);
        let est = wideband_dost(&ch, &cfg, &grid, 4, f64::INFINITY, None, &SeedTree::new(0)).unwrap();
        let truth = channel_responses(&ch, &cfg).unwrap();
        for (e, t) in est.per_node.iter().zip(&truth) {
            for (a, b) in e.iter().zip(t) {
                assert!((a - b).norm() < 1e-10);
            }
        }
        let rss = wideband_rss(&est, &ch, &cfg).unwrap();
        for (a, b) in rss.per_subcarrier.iter().zip(&rss.ideal_per_subcarrier) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(rss.rows(&grid.pilot_indices).iter().filter(|r| r.interpolated).count(), 0);
    }

    #[test]
    fn shared_pilots_see_identical_noise() {
        let cfg = OfdmConfig::default();
        let ch = channels(4, 3);
        let noise = SeedTree::new(5);
        let comb = wideband_dost(&ch, &cfg, &comb_grid(&cfg).unwrap(), 3, 0.0, None, &noise).unwrap();
        let full = wideband_dost(&ch, &cfg, &PilotGrid::full(1200), 3, 0.0, None, &noise).unwrap();
        for i in 0..3 {
            for (j, &k) in comb.pilot_indices.iter().enumerate() {
                assert!((comb.per_node_pilot[i][j] - full.per_node[i][k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn random_phases_give_incoherent_average() {
        let cfg = OfdmConfig {
            n_subcarriers: 60,
            n_pilot_subcarriers: 10,
            fft_size: 64,
            ..OfdmConfig::default()
        };
        let n = 6;
        let tree = SeedTree::new(11);
        let v: Vec<f64> = (0..4000)
            .map(|trial| {
                let ch = channels(tree.child(trial).key(), n);
                let mut rng = tree.path(&[trial, 1]).rng();
                let per_node = (0..n)
                    .map(|_| (0..60).map(|_| crate::rng::complex_gaussian(&mut rng, 1.0)).collect())
                    .collect();
                let est = WidebandEstimate {
                    per_node,
                    per_node_pilot: vec![],
                    pilot_indices: vec![],
                };
                let rss = wideband_rss(&est, &ch, &cfg).unwrap();
                mean(&rss.per_subcarrier.iter().map(|r| (n as f64 * r).powi(2)).collect::<Vec<_>>())
            })
            .collect();
        assert!((mean(&v) / n as f64 - 1.0).abs() < 0.03, "{}", mean(&v));
    }

    #[test]
    fn phase_error_reduces_rss_by_mean_cosine() {
        // estimates = H e^{j e} with e ~ U(-a, a); E[cos e] = sin(a)/a
        let cfg = OfdmConfig {
            n_subcarriers: 60,
            n_pilot_subcarriers: 10,
            fft_size: 64,
            ..OfdmConfig::default()
        };
        let (n, a) = (30, 0.8f64);
        let tree = SeedTree::new(12);
        let (mut got, mut ideal) = (Vec::new(), Vec::new());
        for trial in 0..300 {
            let ch = channels(tree.child(trial).key(), n);
            let truth = channel_responses(&ch, &cfg).unwrap();
            let mut rng = tree.path(&[trial, 1]).rng();
            let per_node = truth
                .iter()
                .map(|h| {
                    h.iter()
                        .map(|x| x * Complex64::from_polar(1.0, crate::rng::symmetric_uniform(&mut rng, a)))
                        .collect()
                })
                .collect();
            let est = WidebandEstimate {
                per_node,
                per_node_pilot: vec![],
                pilot_indices: vec![],
            };
            let rss = wideband_rss_from_responses(&est, &truth).unwrap();
            got.push(rss.average);
            ideal.push(rss.ideal_average);
        }
        let ratio = mean(&got) / mean(&ideal);
        assert!((ratio / (a.sin() / a) - 1.0).abs() < 0.03, "{ratio}");
    }

    #[test]
    fn moderate_snr_comb_training_is_close_to_ideal() {
        let cfg = OfdmConfig::default();
        let grid = comb_grid(&cfg).unwrap();
        let n = 4;
        let n0 = noise_variance(-5.0);
        let q = QuantizerSpec::auto(2, training_sigma(n, n0), 1.0).unwrap();
        let tree = SeedTree::new(13);
        let runs = wideband_trials(40, |t| {
            let ch = channels(tree.child(t).key(), n);
            let est = wideband_dost(&ch, &cfg, &grid, n, -5.0, Some(&q), &tree.path(&[t, 1]))?;
            wideband_rss(&est, &ch, &cfg)
        })
        .unwrap();
        let got = mean(&runs.iter().map(|r| r.average).collect::<Vec<_>>());
        let ideal = mean(&runs.iter().map(|r| r.ideal_average).collect::<Vec<_>>());
        assert!(amplitude_db(got / ideal) > -3.5);
    }

    #[test]
    fn mismatched_estimate_is_rejected() {
        let cfg = OfdmConfig::default();
        let ch = channels(1, 2);
        let est = WidebandEstimate {
            per_node: vec![vec![Complex64::new(1.0, 0.0); 1200]],
            per_node_pilot: vec![],
            pilot_indices: vec![],
        };
        assert!(matches!(wideband_rss(&est, &ch, &cfg), Err(Error::DimensionMismatch { .. })));
        let grid = comb_grid(&cfg).unwrap();
        assert!(lowpass_interpolate(&[Complex64::new(0.0, 0.0)], &grid, 1200).is_err());
    }
}
