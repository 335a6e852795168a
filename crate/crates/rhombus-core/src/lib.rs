//! Boundary-driven bosonic transport through a flux rhombic lattice.
//!
//! The lattice is a quasi-1D chain of rhombs: hub sites C_m joined through
//! arm pairs (A_m, B_m), with a Peierls phase threading each rhomb. A source
//! reservoir pumps particles into the first site and a drain removes them
//! from the last. Two solvers are provided:
//!
//! * [`lindblad`]: the non-interacting problem closes on the single-particle
//!   density matrix (SPDM); its stationary state is obtained from a dense
//!   linear solve and transients from RK4 integration.
//! * [`twa`]: for interacting bosons, a pseudo-classical phase-space method,
//!   an ensemble of complex-amplitude trajectories driven by boundary noise
//!   and friction, averaged into SPDM estimates with statistical errors.
//!
//! Everything is deterministic: exact results bitwise, Monte-Carlo results
//! bitwise for a fixed seed regardless of thread scheduling.

pub mod lattice;
pub mod lindblad;
mod linalg;
pub mod twa;

pub use lattice::{build_hamiltonian, LatticeSpec, SiteIndex, Sublattice};
pub use lindblad::{CurrentRecord, Method, ReservoirParams, Spdm};
pub use linalg::hermitian_eigenvalues;
pub use twa::{EnsembleEstimate, NoiseOrdering, TwaParams};
