//! Families of states with closed-form or combinatorial correlation
//! strengths, usable far beyond the dense-matrix ceiling.
//!
//! Bit-string conventions: a [`PartySet`](crate::PartySet) mask has bit `a`
//! for party `a+1`. Dense basis indices and graph-basis labels `μ` are
//! integers with party 1 as the most significant bit, so for GHZ-diagonal
//! weights `p_μ` and `p_{μ+2^{n-1}}` differ only in the phase bit.

pub mod dicke;
pub mod ghz;
pub mod graph;
pub mod wht;

pub use dicke::{dicke_state, dicke_strength, w_detection_threshold, DickeState};
pub use ghz::{
    ghz_diagonal_full_strength, ghz_diagonal_strength, ghz_state, ghz_strength,
    k_separability_bound, k_separability_compatible, m_ppt_delta, m_ppt_strength_bound,
    noisy_ghz_dense, noisy_ghz_thresholds, noisy_ghz_weights, WernerClassState,
};
pub use graph::{
    graph_basis, graph_basis_weights, graph_depolarize, graph_diagonal_dense,
    graph_diagonal_strength, graph_diagonal_strengths, graph_state_dense, graph_strength,
    graph_strength_schmidt, stabilizer_support_counts, DiagonalWeights, GhzDiagonalWeights, Graph,
    PauliProduct,
};
pub use wht::fwht;

/// Largest qubit count for which dense matrices are built.
pub const DENSE_MAX_QUBITS: usize = 12;

/// Reverses the low `n` bits: converts between party-mask order (party 1 =
/// bit 0) and basis-index order (party 1 = most significant bit).
pub fn reverse_bits(mask: u64, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - n)
    }
}
