//! Local-unitary invariants of multipartite quantum states.
//!
//! A density operator on `n` parties is expanded in a product basis of
//! hermitian operators. Grouping basis elements by the set of parties they
//! act on non-trivially splits the operator space into subspaces that local
//! unitaries only rotate, so the squared length of the state's projection on
//! each subspace (the *correlation strength* `L_S`) is a local invariant.
//! Separable states never exceed the pure-product value of any `L_S`, which
//! gives a cheap entanglement test.
//!
//! Modules:
//! - [`basis`]: generalized Gell-Mann bases, multi-indices and party sets.
//! - [`state`]: dense density matrices, tomography expansion, reductions.
//! - [`invariants`]: correlation strengths, the criterion, coarsening and
//!   streaming lower bounds.
//! - [`structured`]: closed forms for Dicke, GHZ, graph and graph-diagonal
//!   families.
//! - [`polynomial`]: tensor contractions and k-copy observables.
//! - [`report`] and [`io`]: serialization and file formats.

pub mod basis;
pub mod error;
pub mod invariants;
pub mod io;
pub mod linalg;
pub mod polynomial;
pub mod report;
pub mod state;
pub mod structured;

pub use basis::{enumerate_b_s, local_basis, LocalBasis, MultiIndex, PartySet, ProductBasis};
pub use error::{Error, Result};
pub use invariants::{
    entanglement_verdict, pure_product_bound, simulate_tomography, strength_from_coeffs,
    strength_from_purities, InvariantReport, Partition, StreamOrder, StreamingBound, StrengthMap,
    SubsetRecord, SweepOptions,
};
pub use linalg::{CMatrix, C64};
pub use polynomial::{
    contract, evaluate_k_copy, m_s_observable, x_abc, ContractionPattern, KCopyObservable,
};
pub use report::Format;
pub use state::{CorrelationTensor, DensityMatrix, ValidationReport};
pub use structured::{DiagonalWeights, Graph, PauliProduct};
