//! Deterministic random streams.
//!
//! Every Monte Carlo draw is taken from a stream addressed by a path of
//! indices below a master seed (for example `seed / trial / node`), so trials
//! can run on any number of workers and still reproduce bit for bit.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Stream labels used below a trial node.
pub mod domain {
    pub const CHANNEL: u64 = 0x43;
    pub const NOISE: u64 = 0x4e;
    pub const PERTURBATION: u64 = 0x50;
    pub const DITHER: u64 = 0x44;
}

/// A node in a tree of seeds. Children are derived by hashing, so sibling
/// streams are statistically independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree {
    key: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        SeedTree {
            key: splitmix64(seed ^ 0x6a09_e667_f3bc_c908),
        }
    }

    pub fn child(&self, index: u64) -> Self {
        SeedTree {
            key: splitmix64(self.key ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }

    /// Shorthand for a chain of [`SeedTree::child`] calls.
    pub fn path(&self, indices: &[u64]) -> Self {
        indices.iter().fold(*self, |node, &i| node.child(i))
    }

    pub fn rng(&self) -> SimRng {
        ChaCha8Rng::seed_from_u64(self.key)
    }

    pub fn key(&self) -> u64 {
        self.key
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Circularly symmetric complex Gaussian sample with `E|z|^2 = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    if variance == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Uniform sample on `[-half_width, half_width)`.
pub fn symmetric_uniform<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> f64 {
    half_width * (2.0 * rng.random::<f64>() - 1.0)
}
