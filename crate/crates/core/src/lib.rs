//! Numerics for the frustrated two-leg Ising ladder with XX catalysts.
//!
//! * [`model`] and [`hamiltonian`]: couplings, basis encoding and the matrix-free operator.
//! * [`lanczos`]: lowest eigenpairs of large sparse operators.
//! * [`spectra`]: gaps, order parameters, energy derivatives, gap scans and scaling fits.
//! * [`rg_dimer`]: three-site block RG in the dimer limit.
//! * [`rg_chain`]: two-site block RG of the transverse-field chain.
//! * [`dimer`]: spin to dimer mapping and the quantum dimer model.

pub mod dimer;
pub mod hamiltonian;
pub mod lanczos;
pub mod model;
pub mod par;
pub mod rg_chain;
pub mod rg_dimer;
pub mod spectra;

pub use hamiltonian::{build_hamiltonian, Basis, Hamiltonian, Sector};
pub use lanczos::{lowest_eigenpairs, EigenResult, LanczosOptions, LinearOperator, SolverError};
pub use model::{Couplings, Lattice, ModelError, SpinConfig, Stoquasticity};
pub use par::Exec;
