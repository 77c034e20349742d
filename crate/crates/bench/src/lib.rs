//! Shared inputs for the benchmarks.

use evident_core::{Dataset, TopologyCase};

/// One simulated case-4 dataset of size `n`.
pub fn case4_data(n: usize, seed: u64) -> Dataset {
    let case = TopologyCase::get(4).expect("case 4");
    case.generator(n, seed).expect("generator").sample(seed, &[0])
}

/// `len` standard normal-ish draws, deterministic.
pub fn draws(len: usize, seed: u64) -> Vec<f64> {
    case4_data(len, seed).response().to_vec()
}
