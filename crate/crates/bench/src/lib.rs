//! Fixtures shared by the benchmarks.

use dbs_core::channel::{sample_node_channel, NodeChannel, PowerDelayProfile};
use dbs_core::rng::{complex_gaussian, SeedTree};
use num_complex::Complex64;

/// `n` flat-fading unit-power gains.
pub fn narrowband_gains(seed: u64, n: usize) -> Vec<Complex64> {
    let mut rng = SeedTree::new(seed).rng();
    (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
}

/// `n` independent EPA channels.
pub fn epa_channels(seed: u64, n: usize) -> Vec<NodeChannel> {
    let pdp = PowerDelayProfile::epa();
    let tree = SeedTree::new(seed);
    (0..n)
        .map(|i| sample_node_channel(&pdp, &mut tree.child(i as u64).rng()))
        .collect()
}
