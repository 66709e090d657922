//! Classical simulation of bulk spin-1/2 NMR in the collective
//! product-operator algebra.
//!
//! The state of an ensemble of identical molecules is the vector of
//! per-molecule expectation values of every product operator. Its dynamics
//! is linear and closes on the `4^n - 1` dimensional Lie algebra spanned by
//! those operators, so it can be propagated without a wave function. A dense
//! density-matrix simulator ([`oracle`]) is included as an independent
//! reference for small systems.

pub mod algebra;
pub mod config;
mod csv;
pub mod dynamics;
mod error;
pub mod oracle;
mod pauli;
pub mod pipeline;
pub mod signal;
pub mod sparse;
pub mod system;
pub mod thermal;

pub use algebra::{
    enumerate_basis, Axis, Basis, BasisIndex, Dyadic, ProductOperator, SparseCombination, StructureTable,
};
pub use config::RunConfig;
pub use dynamics::{evolve_constant, run_sequence, Generator, Method, Recording, StateVector, Trajectory};
pub use error::{Error, Result};
pub use signal::{Fid, Spectrum};
pub use system::{validate_sequence, Event, FieldSpec, PulseSequence, SpinSystem};
pub use thermal::{thermal_state, ThermalMode, ThermalOptions};
