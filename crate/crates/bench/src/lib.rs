//! Fixtures shared by the criterion benches.

use parcelingam::prelude::*;

/// Data drawn from a builtin network.
pub fn network_data(name: &NetworkName, n: usize, seed: u64) -> DataMatrix {
    let spec = builtin_network(name, seed).expect("builtin network");
    generate(&spec, n).expect("valid spec").0
}

/// Two rows of a two-variable chain, cause first.
pub fn dependent_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let x = network_data(&NetworkName::Chain { d: 2 }, n, seed);
    let (a, b) = (x.row(0).to_vec(), x.row(1).to_vec());
    (a, b)
}
