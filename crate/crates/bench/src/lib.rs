//! Fixed inputs shared by the benchmarks.

use locinv_core::state::random_state;
use locinv_core::structured::DiagonalWeights;
use locinv_core::DensityMatrix;

/// Full-rank random state on `n` qubits, fixed seed.
pub fn qubit_state(n: usize) -> DensityMatrix {
    random_state(&vec![2; n], 1 << n, 1234).expect("valid dims")
}

/// Deterministic, uneven weights on `2^n` labels.
pub fn uneven_weights(n: usize) -> DiagonalWeights {
    let raw: Vec<f64> = (0..1u64 << n)
        .map(|k| 1.0 + (k.wrapping_mul(2654435761) % 97) as f64)
        .collect();
    let total: f64 = raw.iter().sum();
    DiagonalWeights::new(n, raw.into_iter().map(|x| x / total).collect()).expect("normalized")
}
