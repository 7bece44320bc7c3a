//! Exact ground-state toolkit for finite 1D spin chains, built around one
//! question: how much does the ground state change when the chain grows by a
//! single spin, as seen from a window of radius `r` around the new site?
//!
//! The answer is the boundary-effect value `mu_n(r)`: the fidelity deficit
//! between the n-spin ground state and the best unitary-within-radius-`r`
//! extension of the (n-1)-spin ground state. Profiles of `mu` over `(n, r)`
//! feed decay fits, and a set of per-instance inequality checks ties `mu` to
//! the convergence of reduced density matrices, to two-point correlators in a
//! chain joined out of two halves, and to the growth of entanglement entropy
//! under chain extension.
//!
//! Module map:
//! - [`model`]: declarative spin-chain models, site orderings, and local-term
//!   assembly of incremental Hamiltonians.
//! - [`eigensolve`]: matrix-free Hamiltonian application, a seeded Lanczos
//!   ground solver with spectral gap, and a dense small-`n` oracle.
//! - [`statetools`]: bipartition reshapes, reduced density matrices,
//!   entropies, trace distance, and two fidelity algorithms.
//! - [`boundary`]: `mu_n(r)` and `eta_A` evaluation, windowed profiles, and
//!   exponential/power-law decay fits.
//! - [`inequalities`]: per-instance verification reports for the correlation
//!   bound, the entropy-increment bound, the eta/mu sandwich, and the
//!   accumulated entropy bound, plus a gap-vs-decay-rate scan.

pub mod boundary;
pub mod eigensolve;
pub mod inequalities;
pub(crate) mod linalg;
pub mod model;
pub mod statetools;

pub use boundary::{BoundaryProfile, DecayFit, DecayFits, DecayModel, SolverContext};
pub use eigensolve::{GroundSolution, LanczosOptions};
pub use inequalities::{InequalityName, InequalityReport, Observable, ObservableSpec, PauliAxis};
pub use model::{
    build_hamiltonian, graph_ball, increment_terms, ChainGeometry, Family, HamiltonianOperator,
    LocalTerm, ModelSpec, SiteOrdering,
};
