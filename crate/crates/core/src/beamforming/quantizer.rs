//! Uniform midrise quantizer applied independently to I and Q.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Unsaturated range, in per-component standard deviations of the training
/// signal, used when the step is derived automatically.
pub const DEFAULT_CLIP_MULTIPLIER: f64 = 1.0;

/// What the receiver broadcasts after one measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeedbackSample {
    /// Quantized (or, with the quantizer bypassed, raw) complex amplitude.
    Value(Complex64),
    /// Comparison code of the stochastic-ascent schemes: `0..=1` for one-bit
    /// feedback and `0b00..=0b11` for the two-bit variants.
    Code(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    bits_total: u32,
    step: f64,
    clip_multiplier: f64,
}

impl QuantizerSpec {
    /// Explicit step size. `bits_total` counts both components.
    pub fn new(bits_total: u32, step: f64) -> Result<Self> {
        validate_bits(bits_total)?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("step", format!("{step} is not a positive step")));
        }
        let levels = levels(bits_total) as f64;
        Ok(QuantizerSpec {
            bits_total,
            step,
            clip_multiplier: levels * step / 2.0,
        })
    }

    /// Step chosen so the unsaturated range spans `+/- clip_multiplier * sigma`
    /// per component. With `sigma ~ sqrt(N)` the step scales as `sqrt(N)`.
    pub fn auto(bits_total: u32, sigma: f64, clip_multiplier: f64) -> Result<Self> {
        validate_bits(bits_total)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("{sigma} is not a positive deviation")));
        }
        if !(clip_multiplier > 0.0 && clip_multiplier.is_finite()) {
            return Err(invalid("clip_multiplier", "must be positive"));
        }
        let step = 2.0 * clip_multiplier * sigma / levels(bits_total) as f64;
        Ok(QuantizerSpec {
            bits_total,
            step,
            clip_multiplier,
        })
    }

    pub fn bits_total(&self) -> u32 {
        self.bits_total
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn clip_multiplier(&self) -> f64 {
        self.clip_multiplier
    }

    pub fn levels_per_component(&self) -> u32 {
        levels(self.bits_total)
    }

    /// Lattice index in `[-levels/2, levels/2 - 1]`; the reconstruction is
    /// `(index + 1/2) * step`.
    pub fn component_index(&self, x: f64) -> i64 {
        let half = (self.levels_per_component() / 2) as i64;
        let idx = (x / self.step).floor();
        if idx.is_nan() {
            return 0;
        }
        (idx.clamp(-(half as f64), (half - 1) as f64)) as i64
    }

    pub fn quantize_component(&self, x: f64) -> f64 {
        (self.component_index(x) as f64 + 0.5) * self.step
    }

    pub fn quantize_value(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.quantize_component(z.re), self.quantize_component(z.im))
    }

    /// Largest reconstruction magnitude per component.
    pub fn saturation(&self) -> f64 {
        (self.levels_per_component() as f64 / 2.0 - 0.5) * self.step
    }
}

pub fn quantize(sample: Complex64, q: &QuantizerSpec) -> FeedbackSample {
    FeedbackSample::Value(q.quantize_value(sample))
}

/// Per-component standard deviation of the received training sample when
/// `active_nodes` unit-power channels add incoherently in noise `noise_var`.
pub fn training_sigma(active_nodes: usize, noise_var: f64) -> f64 {
    ((active_nodes as f64 + noise_var) / 2.0).sqrt()
}

/// Feedback resolution as configured by the user. `bits = None` bypasses
/// quantization entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerConfig {
    pub bits: Option<u32>,
    pub clip_multiplier: f64,
}

impl QuantizerConfig {
    pub fn bits(bits: u32) -> Self {
        QuantizerConfig {
            bits: Some(bits),
            clip_multiplier: DEFAULT_CLIP_MULTIPLIER,
        }
    }

    pub fn bypass() -> Self {
        QuantizerConfig {
            bits: None,
            clip_multiplier: DEFAULT_CLIP_MULTIPLIER,
        }
    }

    pub fn with_clip(mut self, clip_multiplier: f64) -> Self {
        self.clip_multiplier = clip_multiplier;
        self
    }

    /// Concrete quantizer for a signal with per-component deviation `sigma`.
    pub fn resolve(&self, sigma: f64) -> Result<Option<QuantizerSpec>> {
        self.bits
            .map(|b| QuantizerSpec::auto(b, sigma, self.clip_multiplier))
            .transpose()
    }
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        Self::bits(2)
    }
}

fn levels(bits_total: u32) -> u32 {
    1 << (bits_total / 2)
}

fn validate_bits(bits_total: u32) -> Result<()> {
    if bits_total == 0 || bits_total % 2 != 0 || bits_total > 32 {
        return Err(invalid(
            "bits_total",
            format!("{bits_total} must be even, between 2 and 32"),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_bit_is_a_sign_quantizer() {
        let q = QuantizerSpec::new(2, 2.0).unwrap();
        assert_eq!(quantize(c(0.7, -1.3), &q), FeedbackSample::Value(c(1.0, -1.0)));
        assert_eq!(q.quantize_value(c(-1e-9, 50.0)), c(-1.0, 1.0));
        assert_eq!(q.levels_per_component(), 2);
    }

    #[test]
    fn four_bit_lattice_and_saturation() {
        let q = QuantizerSpec::new(4, 1.0).unwrap();
        assert_eq!(q.quantize_value(c(0.3, 0.9)), c(0.5, 0.5));
        assert_eq!(q.quantize_value(c(5.0, 5.0)), c(1.5, 1.5));
        assert_eq!(q.quantize_value(c(-5.0, -1.2)), c(-1.5, -1.5));
        assert_eq!(q.saturation(), 1.5);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(QuantizerSpec::new(3, 1.0).is_err());
        assert!(QuantizerSpec::new(0, 1.0).is_err());
        assert!(QuantizerSpec::new(2, 0.0).is_err());
        assert!(QuantizerSpec::auto(2, -1.0, 1.0).is_err());
        assert!(QuantizerSpec::auto(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn auto_step_scales_with_sqrt_n() {
        let a = QuantizerSpec::auto(4, training_sigma(10, 0.0), 1.0).unwrap();
        let b = QuantizerSpec::auto(4, training_sigma(40, 0.0), 1.0).unwrap();
        assert!((b.step() / a.step() - 2.0).abs() < 1e-12);
        // unsaturated range is +/- clip * sigma
        assert!((a.step() * 2.0 - training_sigma(10, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn granular_error_variance_is_step_squared_over_twelve() {
        let q = QuantizerSpec::new(6, 0.37).unwrap();
        let range = q.levels_per_component() as f64 / 2.0 * q.step();
        let mut rng = SeedTree::new(12).rng();
        let n = 100_000;
        let errs: Vec<f64> = (0..n)
            .map(|_| {
                let x = range * (2.0 * rng.random::<f64>() - 1.0);
                q.quantize_component(x) - x
            })
            .collect();
        let var = crate::stats::variance(&errs);
        let expected = q.step() * q.step() / 12.0;
        assert!((var / expected - 1.0).abs() < 0.05, "{var} vs {expected}");
    }

    proptest! {
        #[test]
        fn outputs_lie_on_the_lattice(bits in prop::sample::select(vec![2u32, 4, 6, 8]), step in 0.01f64..10.0, x in -1e3f64..1e3) {
            let q = QuantizerSpec::new(bits, step).unwrap();
            let y = q.quantize_component(x);
            let k = y / step - 0.5;
            prop_assert!((k - k.round()).abs() < 1e-9);
            prop_assert!(y.abs() <= q.saturation() + 1e-12);
            if x.abs() < q.saturation() {
                prop_assert!((y - x).abs() <= step / 2.0 + 1e-12);
            }
        }
    }
}
