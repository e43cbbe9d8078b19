//! Work, correlations and passivity for finite-dimensional bipartite
//! quantum systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`states`]: Hamiltonians, density matrices, thermal states, entropies,
//!   free energy, mutual information.
//! - [`passivity`]: work under cyclic unitaries, ergotropy, passive and
//!   completely passive states.
//! - [`heatflow`]: heat exchange between correlated subsystems and the
//!   correlation-corrected Clausius inequality.
//! - [`protocol`]: the work cost of leaving equilibrium, its relative-entropy
//!   decomposition, and the cool-then-correlate protocol.
//! - [`feasibility`]: whether a unitary can return both marginals of a cooled
//!   product state to the ambient temperature, decided exactly for two-qubit
//!   X-states and searched numerically in general.

pub mod error;
pub mod feasibility;
pub mod heatflow;
pub mod linalg;
pub mod optimize;
pub mod passivity;
pub mod protocol;
pub mod sampling;
pub mod states;

pub use error::{Error, Result};
pub use optimize::SearchConfig;
pub use states::{BipartiteState, DensityMatrix, Divergence, InverseTemperature, JointHamiltonian, LocalHamiltonian, Side};
