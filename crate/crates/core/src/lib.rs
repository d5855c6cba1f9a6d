//! Unitary time evolution of spin-1/2 systems as phased sums over
//! classical permutation gates.
//!
//! The crate has two complementary halves. The constructive half writes
//! `exp(iβH)` for a bond Hamiltonian `H = −Σ_b J_b h_b` as a complex
//! combination of classical reversible gates, either by an exact
//! group-algebra series ([`gates::series_expand`]) or by Monte Carlo over
//! Poisson bond-event configurations ([`montecarlo::mc_estimate`]). The
//! analytic half asks when such a representation can exist at all: the
//! span of permutation matrices is a strict subalgebra of all matrices,
//! and the analytically continued Ising transfer matrix
//! ([`ising::transfer_matrix`]) walks out of it as soon as its diagonal
//! phase stops being real ([`span::perm_span_membership`]).
//!
//! Matrices are dense and desk-scale ([`matrix::MAX_SITES`] sites at
//! most). Randomness is seeded and splittable, so every stochastic result
//! is reproducible bit for bit.

pub mod error;
pub mod gates;
pub mod ising;
pub mod matrix;
pub mod montecarlo;
pub mod span;
pub mod spin;

pub use error::{Error, Result};
pub use gates::{series_expand, GateSum, PermutationGate, SeriesExpansion};
pub use ising::{partition_check, transfer_matrix, unitarity_defect, IsingCouplings};
pub use matrix::{hermitian_evolve, kron, CMatrix};
pub use montecarlo::{
    count_loops, kernel, mc_estimate, sample_configuration, Configuration, McEstimate,
};
pub use span::{least_squares_decompose, perm_span_membership, unit_modulus_search, SpanReport};
pub use spin::{
    antiferro_bond_operator, build_hamiltonian, exchange_gate, spin_matrices, Bond, BondKind,
    BondSystem,
};
