//! Hybrid variational eigensolver on a simulated register.
//!
//! A statevector stands in for the quantum device: it prepares parameterized
//! states and answers Pauli-string measurements with shot noise. A classical
//! minimizer closes the loop over the circuit parameters.
//!
//! - [`pauli`]: Pauli strings, Hamiltonians as Pauli sums, decomposition and
//!   the `(H - lambda)^2` fold.
//! - [`statevector`]: register simulation and the layered ansatz.
//! - [`estimation`]: shot-based expectation estimation and shot budgets.
//! - [`optimize`]: Nelder-Mead with restarts and a gradient-descent baseline.
//! - [`vqe`]: the variational loop, traces, and folded-spectrum runs.
//! - [`fermion`]: second quantization, Jordan-Wigner, unitary coupled cluster.
//! - [`analysis`]: spectra, tangle, overlaps, and quadratic minimum fits.
//! - [`runner`]: run configuration, file formats, and experiment drivers.

pub mod analysis;
pub mod error;
pub mod estimation;
pub mod fermion;
pub mod optimize;
pub mod pauli;
pub mod runner;
pub mod statevector;
pub mod vqe;

pub use error::{Error, ErrorCategory, Result};
pub use estimation::{EnergyEstimate, RngStream, ShotPolicy};
pub use pauli::{DenseHermitian, Pauli, PauliHamiltonian, PauliString};
pub use statevector::{AnsatzSpec, ParameterVector, StatePreparation, StateVector};
pub use vqe::{run_folded, run_vqe, VqeResult, VqeSettings};
