//! Stochastic-ascent phase adaptation driven by one- or two-bit feedback.
//!
//! The receiver measures the amplitude `R = |sum_i e^{j(theta_i + delta_i)} H_i + w|`
//! and compares it with the best amplitude seen so far. Before the first
//! measurement the best is 0.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::quantizer::FeedbackSample;
use super::signal::{received_sample, weights_from_phases};
use crate::error::{invalid, Error, Result};
use crate::rng::symmetric_uniform;

pub const CODE_00: u8 = 0b00;
pub const CODE_01: u8 = 0b01;
pub const CODE_10: u8 = 0b10;
pub const CODE_11: u8 = 0b11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObfConfig {
    /// Perturbations are `U(-p, p)` degrees.
    pub perturbation_deg: f64,
    /// Window `M` over past measurements; `None` keeps the running best.
    pub window: Option<usize>,
}

impl Default for ObfConfig {
    fn default() -> Self {
        ObfConfig {
            perturbation_deg: 10.0,
            window: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct R2bfConfig {
    /// Perturbation `U(-pi/beta, pi/beta)` selected after codes 01, 10, 11.
    pub betas: [f64; 3],
    /// Thresholds on `R / RSS_max` separating codes 01 | 10 | 11.
    pub xi: [f64; 2],
}

impl Default for R2bfConfig {
    fn default() -> Self {
        R2bfConfig {
            betas: [5.0, 10.0, 25.0],
            xi: [0.3, 0.8],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct M2bfConfig {
    /// Improvement (in amplitude units of `R`) at or above which code 11 is sent.
    pub alpha1: f64,
    /// Degradation at or below which code 00 is sent; negative.
    pub alpha2: f64,
    pub initial_range_deg: f64,
    /// Per-iteration geometric shrink of the perturbation range.
    pub decay: f64,
    pub floor_deg: f64,
}

impl Default for M2bfConfig {
    fn default() -> Self {
        M2bfConfig {
            alpha1: 0.8,
            alpha2: -0.8,
            initial_range_deg: 45.0,
            decay: 0.995,
            floor_deg: 5.0,
        }
    }
}

impl ObfConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("perturbation_deg", self.perturbation_deg)?;
        if self.window == Some(0) {
            return Err(invalid("window", "must be at least 1"));
        }
        Ok(())
    }
}

impl R2bfConfig {
    pub fn validate(&self) -> Result<()> {
        let [b1, b2, b3] = self.betas;
        if !(b1 > 0.0 && b1 < b2 && b2 < b3 && b3.is_finite()) {
            return Err(invalid("betas", "need 0 < beta1 < beta2 < beta3"));
        }
        let [x1, x2] = self.xi;
        if !(x1 > 0.0 && x1 < x2 && x2.is_finite()) {
            return Err(invalid("xi", "need 0 < xi1 < xi2"));
        }
        Ok(())
    }
}

impl M2bfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 > 0.0 && self.alpha1.is_finite()) {
            return Err(invalid("alpha1", "must be positive"));
        }
        if !(self.alpha2 < 0.0 && self.alpha2.is_finite()) {
            return Err(invalid("alpha2", "must be negative"));
        }
        check_positive("initial_range_deg", self.initial_range_deg)?;
        check_positive("floor_deg", self.floor_deg)?;
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(invalid("decay", "must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Perturbation half-width in radians at iteration `t`.
    pub fn half_width(&self, t: usize) -> f64 {
        let deg = (self.initial_range_deg * self.decay.powf(t as f64)).max(self.floor_deg);
        deg.to_radians()
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} must be positive")))
    }
}

/// `R_best`: maximum over the last `M` measurements, or over all of them.
#[derive(Debug, Clone)]
struct BestTracker {
    window: Option<usize>,
    history: VecDeque<f64>,
    running: f64,
}

impl BestTracker {
    fn new(window: Option<usize>) -> Self {
        BestTracker {
            window,
            history: VecDeque::new(),
            running: 0.0,
        }
    }

    fn best(&self) -> f64 {
        match self.window {
            None => self.running,
            Some(_) => self.history.iter().copied().fold(0.0, f64::max),
        }
    }

    fn record(&mut self, r: f64) {
        self.running = self.running.max(r);
        if let Some(m) = self.window {
            self.history.push_back(r);
            while self.history.len() > m {
                self.history.pop_front();
            }
        }
    }
}

fn perturbed_amplitude<R: Rng + ?Sized>(
    phases: &[f64],
    delta: &[f64],
    gains: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> Result<f64> {
    if gains.len() != phases.len() {
        return Err(Error::DimensionMismatch {
            expected: phases.len(),
            actual: gains.len(),
        });
    }
    let trial: Vec<f64> = phases.iter().zip(delta).map(|(t, d)| t + d).collect();
    Ok(received_sample(&weights_from_phases(&trial), gains, noise_var, rng)?.norm())
}

fn draw<R: Rng + ?Sized>(n: usize, half_width: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| symmetric_uniform(rng, half_width)).collect()
}

fn accept(phases: &mut [f64], delta: &[f64]) {
    for (t, d) in phases.iter_mut().zip(delta) {
        *t += d;
    }
}

/// One-bit feedback: keep the perturbation iff the measurement beats `R_best`.
#[derive(Debug, Clone)]
pub struct Obf {
    config: ObfConfig,
    phases: Vec<f64>,
    best: BestTracker,
    last_perturbation: Vec<f64>,
    iteration: usize,
}

impl Obf {
    pub fn new(nodes: usize, config: ObfConfig) -> Result<Self> {
        config.validate()?;
        Ok(Obf {
            phases: vec![0.0; nodes],
            best: BestTracker::new(config.window),
            last_perturbation: vec![0.0; nodes],
            iteration: 0,
            config,
        })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn best_rss(&self) -> f64 {
        self.best.best()
    }

    pub fn last_perturbation(&self) -> &[f64] {
        &self.last_perturbation
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn weights(&self) -> Vec<Complex64> {
        weights_from_phases(&self.phases)
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        gains: &[Complex64],
        noise_var: f64,
        rng: &mut R,
    ) -> Result<FeedbackSample> {
        let delta = draw(self.phases.len(), self.config.perturbation_deg.to_radians(), rng);
        let r = perturbed_amplitude(&self.phases, &delta, gains, noise_var, rng)?;
        let improved = r > self.best.best();
        if improved {
            accept(&mut self.phases, &delta);
        }
        self.best.record(r);
        self.last_perturbation = delta;
        self.iteration += 1;
        Ok(FeedbackSample::Code(improved as u8))
    }
}

/// Two-bit feedback where the code also selects the next perturbation range
/// by how close the measurement is to the receiver-known maximum.
#[derive(Debug, Clone)]
pub struct R2bf {
    config: R2bfConfig,
    rss_max: f64,
    phases: Vec<f64>,
    best: BestTracker,
    beta: f64,
    last_perturbation: Vec<f64>,
    iteration: usize,
}

impl R2bf {
    /// `rss_max` is the ideal amplitude `sum_i |H_i|`, in the units of `R`.
    pub fn new(nodes: usize, rss_max: f64, config: R2bfConfig) -> Result<Self> {
        config.validate()?;
        if !(rss_max > 0.0 && rss_max.is_finite()) {
            return Err(invalid("rss_max", format!("{rss_max} must be positive")));
        }
        Ok(R2bf {
            beta: config.betas[0],
            config,
            rss_max,
            phases: vec![0.0; nodes],
            best: BestTracker::new(None),
            last_perturbation: vec![0.0; nodes],
            iteration: 0,
        })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn best_rss(&self) -> f64 {
        self.best.best()
    }

    pub fn last_perturbation(&self) -> &[f64] {
        &self.last_perturbation
    }

    /// Half-width `pi / beta` of the next perturbation.
    pub fn next_half_width(&self) -> f64 {
        PI / self.beta
    }

    pub fn weights(&self) -> Vec<Complex64> {
        weights_from_phases(&self.phases)
    }

    /// Code for an improving measurement `r`.
    pub fn classify(&self, r: f64) -> u8 {
        let ratio = r / self.rss_max;
        if ratio < self.config.xi[0] {
            CODE_01
        } else if ratio < self.config.xi[1] {
            CODE_10
        } else {
            CODE_11
        }
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        gains: &[Complex64],
        noise_var: f64,
        rng: &mut R,
    ) -> Result<FeedbackSample> {
        let delta = draw(self.phases.len(), self.next_half_width(), rng);
        let r = perturbed_amplitude(&self.phases, &delta, gains, noise_var, rng)?;
        let code = if r > self.best.best() {
            accept(&mut self.phases, &delta);
            let code = self.classify(r);
            self.beta = self.config.betas[code as usize - 1];
            code
        } else {
            CODE_00
        };
        self.best.record(r);
        self.last_perturbation = delta;
        self.iteration += 1;
        Ok(FeedbackSample::Code(code))
    }
}

/// Two-bit feedback quantizing the size of the change in `R`; transmitters
/// repeat a strongly improving perturbation and reverse a strongly degrading
/// one.
#[derive(Debug, Clone)]
pub struct M2bf {
    config: M2bfConfig,
    phases: Vec<f64>,
    best: BestTracker,
    next: Option<Vec<f64>>,
    reversed: bool,
    last_perturbation: Vec<f64>,
    iteration: usize,
}

impl M2bf {
    pub fn new(nodes: usize, config: M2bfConfig) -> Result<Self> {
        config.validate()?;
        Ok(M2bf {
            config,
            phases: vec![0.0; nodes],
            best: BestTracker::new(None),
            next: None,
            reversed: false,
            last_perturbation: vec![0.0; nodes],
            iteration: 0,
        })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn best_rss(&self) -> f64 {
        self.best.best()
    }

    pub fn last_perturbation(&self) -> &[f64] {
        &self.last_perturbation
    }

    /// Perturbation already fixed for the next step, if any.
    pub fn pending_perturbation(&self) -> Option<&[f64]> {
        self.next.as_deref()
    }

    pub fn weights(&self) -> Vec<Complex64> {
        weights_from_phases(&self.phases)
    }

    pub fn classify(&self, change: f64) -> u8 {
        if change >= self.config.alpha1 {
            CODE_11
        } else if change >= 0.0 {
            CODE_10
        } else if change > self.config.alpha2 {
            CODE_01
        } else {
            CODE_00
        }
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        gains: &[Complex64],
        noise_var: f64,
        rng: &mut R,
    ) -> Result<FeedbackSample> {
        let delta = match self.next.take() {
            Some(d) => d,
            None => draw(self.phases.len(), self.config.half_width(self.iteration), rng),
        };
        let r = perturbed_amplitude(&self.phases, &delta, gains, noise_var, rng)?;
        let code = self.classify(r - self.best.best());
        if code >= CODE_10 {
            accept(&mut self.phases, &delta);
        }
        self.best.record(r);
        // a reversal that also degrades falls back to a fresh draw
        let (next, reversed) = match code {
            CODE_11 => (Some(delta.clone()), false),
            CODE_00 if !self.reversed => (Some(delta.iter().map(|d| -d).collect()), true),
            _ => (None, false),
        };
        self.next = next;
        self.reversed = reversed;
        self.last_perturbation = delta;
        self.iteration += 1;
        Ok(FeedbackSample::Code(code))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::signal::{ideal_rss, normalized_rss};
    use crate::rng::{complex_gaussian, SeedTree};
    use crate::stats::mean;
    use proptest::prelude::*;

    fn gains(seed: u64, n: usize) -> Vec<Complex64> {
        let mut rng = SeedTree::new(seed).rng();
        (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
    }

    #[test]
    fn obf_keeps_improving_perturbation() {
        let h = gains(1, 5);
        let mut s = Obf::new(5, ObfConfig::default()).unwrap();
        let mut rng = SeedTree::new(2).rng();
        assert_eq!(s.step(&h, 0.0, &mut rng).unwrap(), FeedbackSample::Code(1));
        assert_eq!(s.phases(), s.last_perturbation());
    }

    #[test]
    fn obf_discards_non_improving_perturbation() {
        let h = gains(1, 5);
        let mut s = Obf::new(5, ObfConfig::default()).unwrap();
        s.best.record(1e9);
        let mut rng = SeedTree::new(2).rng();
        assert_eq!(s.step(&h, 0.0, &mut rng).unwrap(), FeedbackSample::Code(0));
        assert!(s.phases().iter().all(|&p| p == 0.0));
        assert!(s.last_perturbation().iter().all(|d| d.abs() <= 10f64.to_radians()));
    }

    #[test]
    fn finite_window_forgets_old_measurements() {
        let mut t = BestTracker::new(Some(2));
        t.record(5.0);
        t.record(1.0);
        t.record(2.0);
        assert_eq!(t.best(), 2.0);
        let mut inf = BestTracker::new(None);
        inf.record(5.0);
        inf.record(1.0);
        assert_eq!(inf.best(), 5.0);
    }

    #[test]
    fn obf_large_network_reaches_three_quarters_of_ideal() {
        let n = 100;
        let tree = SeedTree::new(3);
        let (mut got, mut ideal) = (Vec::new(), Vec::new());
        for trial in 0..60 {
            let h = gains(tree.child(trial).key(), n);
            let mut s = Obf::new(n, ObfConfig::default()).unwrap();
            let mut rng = tree.path(&[trial, 1]).rng();
            for _ in 0..5 * n {
                s.step(&h, 0.0, &mut rng).unwrap();
            }
            got.push(normalized_rss(&s.weights(), &h).unwrap());
            ideal.push(ideal_rss(&h));
        }
        assert!(mean(&got) >= 0.75 * mean(&ideal), "{} {}", mean(&got), mean(&ideal));
    }

    #[test]
    fn r2bf_codes_and_perturbation_ranges() {
        let cfg = R2bfConfig::default();
        let h = [Complex64::new(1.0, 0.0)];
        let mut s = R2bf::new(1, 1.0 / 0.9, cfg).unwrap();
        assert!((s.next_half_width() - PI / 5.0).abs() < 1e-15);
        let mut rng = SeedTree::new(4).rng();
        assert_eq!(s.step(&h, 0.0, &mut rng).unwrap(), FeedbackSample::Code(CODE_11));
        assert!((s.next_half_width() - PI / 25.0).abs() < 1e-15);
        s.best.record(10.0);
        let phases = s.phases().to_vec();
        assert_eq!(s.step(&h, 0.0, &mut rng).unwrap(), FeedbackSample::Code(CODE_00));
        assert_eq!(s.phases(), &phases[..]);
        assert!((s.next_half_width() - PI / 25.0).abs() < 1e-15);
        assert_eq!(s.classify(0.1), CODE_01);
        assert_eq!(s.classify(0.5), CODE_10);
    }

    #[test]
    fn r2bf_rejects_bad_parameters() {
        assert!(R2bf::new(3, 0.0, R2bfConfig::default()).is_err());
        let bad = R2bfConfig {
            betas: [10.0, 5.0, 25.0],
            ..R2bfConfig::default()
        };
        assert!(R2bf::new(3, 1.0, bad).is_err());
    }

    #[test]
    fn m2bf_repeats_strong_improvement() {
        let h = vec![Complex64::new(3.0, 0.0); 2];
        let mut s = M2bf::new(2, M2bfConfig::default()).unwrap();
        let mut rng = SeedTree::new(5).rng();
        // best is 0, so the first measurement (about 6) improves by more than alpha1
        assert_eq!(s.step(&h, 0.0, &mut rng).unwrap(), FeedbackSample::Code(CODE_11));
        assert_eq!(s.pending_perturbation(), Some(s.last_perturbation()));
        assert_eq!(s.phases(), s.last_perturbation());
    }

    #[test]
    fn m2bf_reverses_strong_degradation_once() {
        let h = vec![Complex64::new(3.0, 0.0); 2];
        let mut s = M2bf::new(2, M2bfConfig::default()).unwrap();
        s.best.record(100.0);
        let mut rng = SeedTree::new(6).rng();
        assert_eq!(s.step(&h, 0.0, &mut rng).unwrap(), FeedbackSample::Code(CODE_00));
        let first = s.last_perturbation().to_vec();
        let negated: Vec<f64> = first.iter().map(|d| -d).collect();
        assert_eq!(s.pending_perturbation(), Some(&negated[..]));
        assert!(s.phases().iter().all(|&p| p == 0.0));
        assert_eq!(s.step(&h, 0.0, &mut rng).unwrap(), FeedbackSample::Code(CODE_00));
        assert_eq!(s.last_perturbation(), &negated[..]);
        assert_eq!(s.pending_perturbation(), None);
    }

    #[test]
    fn m2bf_code_partition() {
        let s = M2bf::new(1, M2bfConfig::default()).unwrap();
        assert_eq!(s.classify(0.8), CODE_11);
        assert_eq!(s.classify(0.3), CODE_10);
        assert_eq!(s.classify(-0.3), CODE_01);
        assert_eq!(s.classify(-0.8), CODE_00);
        let cfg = M2bfConfig::default();
        assert!((cfg.half_width(0) - 45f64.to_radians()).abs() < 1e-15);
        assert!((cfg.half_width(10_000) - 5f64.to_radians()).abs() < 1e-15);
        assert!(M2bf::new(1, M2bfConfig { alpha2: 0.8, ..cfg }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn obf_noiseless_trace_is_monotone(seed in any::<u64>(), n in 2usize..30) {
            let h = gains(seed, n);
            let mut s = Obf::new(n, ObfConfig::default()).unwrap();
            let mut rng = SeedTree::new(seed).child(1).rng();
            let mut best = 0.0;
            for _ in 0..200 {
                s.step(&h, 0.0, &mut rng).unwrap();
                let r = normalized_rss(&s.weights(), &h).unwrap();
                prop_assert!(r >= best - 1e-12);
                prop_assert!(r <= ideal_rss(&h) + 1e-12);
                best = f64::max(best, r);
            }
        }
    }
}
