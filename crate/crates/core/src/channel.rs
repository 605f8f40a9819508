//! Tapped-delay-line Rayleigh channels and their frequency responses.
//!
//! Each transmitter node sees an independent realization of the same power
//! delay profile. Tap gains are `alpha_p = A_p * v_p` with `v_p ~ CN(0, 1)`
//! and `sum_p A_p^2 = 1`, so the response on any single subcarrier is
//! `CN(0, 1)` while neighbouring subcarriers are correlated.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{complex_gaussian, symmetric_uniform};

const NORMALIZATION_TOL: f64 = 1e-12;

/// Small-scale fading law of a tap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fading {
    Rayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathTap {
    /// Excess delay in seconds.
    pub delay: f64,
    /// Power relative to the strongest tap, in dB.
    pub relative_power_db: f64,
    pub fading: Fading,
}

/// Tap list plus the normalized amplitudes `A_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    taps: Vec<PathTap>,
    amplitudes: Vec<f64>,
}

/// Human-editable form used by the harness config (delays in ns, powers in dB).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdpConfig {
    pub delays_ns: Vec<f64>,
    pub powers_db: Vec<f64>,
}

impl PdpConfig {
    /// The EPA table in config units.
    pub fn epa() -> Self {
        PdpConfig {
            delays_ns: vec![0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0],
            powers_db: vec![0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8],
        }
    }
}

impl PowerDelayProfile {
    /// Builds a profile from taps, sorting by delay and normalizing the
    /// amplitudes to unit total power.
    pub fn new(mut taps: Vec<PathTap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(invalid("taps", "a profile needs at least one tap"));
        }
        for tap in &taps {
            if !(tap.delay >= 0.0 && tap.delay.is_finite()) {
                return Err(invalid("delay", format!("{} is not a finite non-negative delay", tap.delay)));
            }
            if !tap.relative_power_db.is_finite() {
                return Err(invalid("relative_power_db", "must be finite"));
            }
        }
        taps.sort_by(|a, b| a.delay.total_cmp(&b.delay));
        let powers: Vec<f64> = taps.iter().map(|t| 10f64.powf(t.relative_power_db / 10.0)).collect();
        let total: f64 = powers.iter().sum();
        let amplitudes = powers.iter().map(|p| (p / total).sqrt()).collect();
        Ok(PowerDelayProfile { taps, amplitudes })
    }

    /// 3GPP Extended Pedestrian A profile (7 Rayleigh taps).
    pub fn epa() -> Self {
        Self::from_config(&PdpConfig::epa()).expect("EPA table is valid")
    }

    /// Single tap at zero delay: a frequency-flat Rayleigh channel.
    pub fn flat() -> Self {
        Self::new(vec![PathTap {
            delay: 0.0,
            relative_power_db: 0.0,
            fading: Fading::Rayleigh,
        }])
        .expect("single tap is valid")
    }

    pub fn from_config(cfg: &PdpConfig) -> Result<Self> {
        if cfg.delays_ns.len() != cfg.powers_db.len() {
            return Err(invalid(
                "pdp",
                format!("{} delays but {} powers", cfg.delays_ns.len(), cfg.powers_db.len()),
            ));
        }
        let taps = cfg
            .delays_ns
            .iter()
            .zip(&cfg.powers_db)
            .map(|(&d, &p)| PathTap {
                delay: d * 1e-9,
                relative_power_db: p,
                fading: Fading::Rayleigh,
            })
            .collect();
        Self::new(taps)
    }

    pub fn to_config(&self) -> PdpConfig {
        PdpConfig {
            delays_ns: self.taps.iter().map(|t| t.delay * 1e9).collect(),
            powers_db: self.taps.iter().map(|t| t.relative_power_db).collect(),
        }
    }

    pub fn taps(&self) -> &[PathTap] {
        &self.taps
    }

    /// Normalized amplitudes `A_p`, one per tap.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn delays(&self) -> impl Iterator<Item = f64> + '_ {
        self.taps.iter().map(|t| t.delay)
    }

    pub fn is_normalized(&self) -> bool {
        let total: f64 = self.amplitudes.iter().map(|a| a * a).sum();
        (total - 1.0).abs() <= NORMALIZATION_TOL
    }

    /// Frequency correlation `E[H(f) H*(f + df)] = sum_p A_p^2 e^{j 2 pi df tau_p}`.
    pub fn frequency_correlation(&self, df: f64) -> Complex64 {
        self.taps
            .iter()
            .zip(&self.amplitudes)
            .map(|(t, a)| Complex64::from_polar(a * a, 2.0 * PI * df * t.delay))
            .sum()
    }

    /// Copy of the profile with every delay jittered by `U(-max_dither, max_dither)`
    /// seconds, clamped at zero.
    pub fn dithered<R: Rng + ?Sized>(&self, max_dither: f64, rng: &mut R) -> Self {
        let taps = self
            .taps
            .iter()
            .map(|t| PathTap {
                delay: (t.delay + symmetric_uniform(rng, max_dither)).max(0.0),
                ..*t
            })
            .collect();
        Self::new(taps).expect("dithered delays stay valid")
    }
}

impl Default for PowerDelayProfile {
    fn default() -> Self {
        Self::epa()
    }
}

/// One transmitter's channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeChannel {
    pub pdp: PowerDelayProfile,
    pub tap_gains: Vec<Complex64>,
    /// Receiver phase offset relative to this node, folded into the channel.
    pub rx_phase_offset: f64,
}

/// Draws `alpha_p = A_p v_p` with i.i.d. `v_p ~ CN(0, 1)`.
pub fn sample_node_channel<R: Rng + ?Sized>(pdp: &PowerDelayProfile, rng: &mut R) -> NodeChannel {
    debug_assert!(pdp.is_normalized());
    let tap_gains = pdp.amplitudes.iter().map(|&a| a * complex_gaussian(rng, 1.0)).collect();
    NodeChannel {
        pdp: pdp.clone(),
        tap_gains,
        rx_phase_offset: 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub frequencies: Vec<f64>,
    pub gains: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn amplitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.gains.iter().map(|g| g.norm())
    }

    pub fn phases(&self) -> impl Iterator<Item = f64> + '_ {
        self.gains.iter().map(|g| g.arg())
    }
}

/// `H(f_k) = e^{j gamma} sum_p alpha_p e^{-j 2 pi f_k tau_p}` at baseband offsets `f_k`.
pub fn frequency_response(ch: &NodeChannel, frequencies: &[f64]) -> FrequencyResponse {
    let rotation = Complex64::from_polar(1.0, ch.rx_phase_offset);
    let gains = frequencies
        .iter()
        .map(|&f| {
            let sum: Complex64 = ch
                .pdp
                .taps
                .iter()
                .zip(&ch.tap_gains)
                .map(|(tap, g)| g * Complex64::from_polar(1.0, -2.0 * PI * f * tap.delay))
                .sum();
            rotation * sum
        })
        .collect();
    FrequencyResponse {
        frequencies: frequencies.to_vec(),
        gains,
    }
}

/// Precomputed tap phasors `e^{-j 2 pi f_k tau_p}` for one profile and
/// frequency grid. Evaluating many realizations on the same grid avoids the
/// trigonometry in [`frequency_response`].
#[derive(Debug, Clone)]
pub struct ResponseGrid {
    frequencies: Vec<f64>,
    n_taps: usize,
    // row-major [tap][frequency]
    phasors: Vec<Complex64>,
}

impl ResponseGrid {
    pub fn new(pdp: &PowerDelayProfile, frequencies: &[f64]) -> Self {
        let mut phasors = Vec::with_capacity(pdp.len() * frequencies.len());
        for tap in &pdp.taps {
            phasors.extend(frequencies.iter().map(|&f| Complex64::from_polar(1.0, -2.0 * PI * f * tap.delay)));
        }
        ResponseGrid {
            frequencies: frequencies.to_vec(),
            n_taps: pdp.len(),
            phasors,
        }
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Writes the node's gains on the grid into `out`.
    pub fn evaluate_into(&self, ch: &NodeChannel, out: &mut [Complex64]) {
        assert_eq!(ch.tap_gains.len(), self.n_taps, "channel drawn from a different profile");
        assert_eq!(out.len(), self.frequencies.len());
        out.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        let k = self.frequencies.len();
        for (p, alpha) in ch.tap_gains.iter().enumerate() {
            let row = &self.phasors[p * k..(p + 1) * k];
            for (g, e) in out.iter_mut().zip(row) {
                *g += alpha * e;
            }
        }
        if ch.rx_phase_offset != 0.0 {
            let rotation = Complex64::from_polar(1.0, ch.rx_phase_offset);
            out.iter_mut().for_each(|g| *g *= rotation);
        }
    }

    pub fn evaluate(&self, ch: &NodeChannel) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.frequencies.len()];
        self.evaluate_into(ch, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn epa_matches_table() {
        let pdp = PowerDelayProfile::epa();
        let delays: Vec<f64> = pdp.delays().map(|d| (d * 1e9).round()).collect();
        assert_eq!(delays, vec![0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0]);
        let powers: Vec<f64> = pdp.taps().iter().map(|t| t.relative_power_db).collect();
        assert_eq!(powers, vec![0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8]);
        assert!(pdp.taps().iter().all(|t| t.fading == Fading::Rayleigh));
        let total: f64 = pdp.amplitudes().iter().map(|a| a * a).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let a = pdp.amplitudes();
        assert!((a[0] / a[1] - 10f64.powf(1.0 / 20.0)).abs() < 1e-12);
        assert!(a.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn config_round_trip_and_validation() {
        let pdp = PowerDelayProfile::epa();
        let back = PowerDelayProfile::from_config(&pdp.to_config()).unwrap();
        for (x, y) in pdp.amplitudes().iter().zip(back.amplitudes()) {
            assert!((x - y).abs() < 1e-15);
        }
        let bad = PdpConfig {
            delays_ns: vec![0.0, 10.0],
            powers_db: vec![0.0],
        };
        assert!(PowerDelayProfile::from_config(&bad).is_err());
        let negative = PdpConfig {
            delays_ns: vec![-1.0],
            powers_db: vec![0.0],
        };
        assert!(PowerDelayProfile::from_config(&negative).is_err());
    }

    #[test]
    fn unsorted_taps_are_sorted() {
        let cfg = PdpConfig {
            delays_ns: vec![100.0, 0.0],
            powers_db: vec![-3.0, 0.0],
        };
        let pdp = PowerDelayProfile::from_config(&cfg).unwrap();
        assert_eq!(pdp.taps()[0].delay, 0.0);
        assert!(pdp.amplitudes()[0] > pdp.amplitudes()[1]);
    }

    #[test]
    fn tap_power_moments() {
        let pdp = PowerDelayProfile::epa();
        let mut rng = SeedTree::new(1).rng();
        let n = 100_000;
        let mut power = vec![0.0; pdp.len()];
        let mut sum = vec![Complex64::new(0.0, 0.0); pdp.len()];
        for _ in 0..n {
            let ch = sample_node_channel(&pdp, &mut rng);
            for (p, g) in ch.tap_gains.iter().enumerate() {
                power[p] += g.norm_sqr();
                sum[p] += g;
            }
        }
        for (p, a) in pdp.amplitudes().iter().enumerate() {
            let expected = a * a;
            assert!(close(power[p] / n as f64, expected, 0.03), "tap {p}");
            // standard error of each component of the mean is A_p / sqrt(2n)
            let se = a / (2.0 * n as f64).sqrt();
            let m = sum[p] / n as f64;
            assert!(m.re.abs() < 3.0 * se && m.im.abs() < 3.0 * se, "tap {p} mean {m}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let pdp = PowerDelayProfile::epa();
        let a = sample_node_channel(&pdp, &mut SeedTree::new(5).child(2).rng());
        let b = sample_node_channel(&pdp, &mut SeedTree::new(5).child(2).rng());
        assert_eq!(a, b);
    }

    #[test]
    fn flat_channel_and_dc_sum() {
        let mut rng = SeedTree::new(3).rng();
        let flat = sample_node_channel(&PowerDelayProfile::flat(), &mut rng);
        let resp = frequency_response(&flat, &[-1e6, 0.0, 2.5e6, 9e6]);
        for g in &resp.gains {
            assert!((g - flat.tap_gains[0]).norm() < 1e-15);
        }
        let epa = sample_node_channel(&PowerDelayProfile::epa(), &mut rng);
        let dc = frequency_response(&epa, &[0.0]).gains[0];
        let sum: Complex64 = epa.tap_gains.iter().sum();
        assert!((dc - sum).norm() < 1e-14);
    }

    #[test]
    fn rx_phase_offset_rotates_response() {
        let mut rng = SeedTree::new(4).rng();
        let mut ch = sample_node_channel(&PowerDelayProfile::epa(), &mut rng);
        let f = [1.5e6];
        let before = frequency_response(&ch, &f).gains[0];
        ch.rx_phase_offset = 0.7;
        let after = frequency_response(&ch, &f).gains[0];
        assert!((after - before * Complex64::from_polar(1.0, 0.7)).norm() < 1e-14);
        let grid = ResponseGrid::new(&ch.pdp, &f);
        assert!((grid.evaluate(&ch)[0] - after).norm() < 1e-14);
    }

    #[test]
    fn grid_matches_direct_evaluation() {
        let pdp = PowerDelayProfile::epa();
        let freqs: Vec<f64> = (0..64).map(|k| (k as f64 - 32.0) * 15e3).collect();
        let grid = ResponseGrid::new(&pdp, &freqs);
        let mut rng = SeedTree::new(9).rng();
        for _ in 0..20 {
            let ch = sample_node_channel(&pdp, &mut rng);
            let direct = frequency_response(&ch, &freqs);
            for (a, b) in direct.gains.iter().zip(grid.evaluate(&ch)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn subcarrier_marginal_power_and_correlation() {
        let pdp = PowerDelayProfile::epa();
        let df = 1.2e6;
        let freqs = [3.0e6, 3.0e6 + df];
        let grid = ResponseGrid::new(&pdp, &freqs);
        let mut rng = SeedTree::new(21).rng();
        let n = 100_000;
        let (mut p0, mut p1) = (0.0, 0.0);
        let mut corr = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let h = grid.evaluate(&sample_node_channel(&pdp, &mut rng));
            p0 += h[0].norm_sqr();
            p1 += h[1].norm_sqr();
            corr += h[0] * h[1].conj();
        }
        assert!(close(p0 / n as f64, 1.0, 0.03));
        assert!(close(p1 / n as f64, 1.0, 0.03));
        let expected = pdp.frequency_correlation(df);
        let got = corr / n as f64;
        assert!((got - expected).norm() <= 0.05 * expected.norm(), "{got} vs {expected}");
    }

    /// Two-sample Kolmogorov-Smirnov test at level 0.01; true if the samples
    /// are compatible with one distribution.
    fn ks_compatible(mut a: Vec<f64>, mut b: Vec<f64>) -> bool {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (n, m) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / n - j as f64 / m).abs());
        }
        d < 1.628 * ((n + m) / (n * m)).sqrt()
    }

    #[test]
    fn delay_dither_leaves_marginal_unchanged() {
        let pdp = PowerDelayProfile::epa();
        let f = [4.2e6];
        let tree = SeedTree::new(33);
        let n = 20_000;
        let mut rng = tree.child(0).rng();
        let plain: Vec<f64> = (0..n)
            .map(|_| frequency_response(&sample_node_channel(&pdp, &mut rng), &f).gains[0].norm())
            .collect();
        let mut rng = tree.child(1).rng();
        let dithered: Vec<f64> = (0..n)
            .map(|_| {
                let jittered = pdp.dithered(10e-9, &mut rng);
                frequency_response(&sample_node_channel(&jittered, &mut rng), &f).gains[0].norm()
            })
            .collect();
        assert!(ks_compatible(plain, dithered));
    }
}
