//! Simulation of photon-to-spin state transfer through an optically active
//! quantum dot tunnel coupled to gate-defined quantum dots.
//!
//! Two transfer schemes are modelled: mapping onto a single electron spin in
//! one gate-defined dot, and mapping onto a singlet-triplet qubit in a gate
//! defined double dot. The crate builds the effective Hamiltonians, tracks
//! their eigen-branches in detuning, bounds the sweep speed from the
//! adiabaticity condition, and evaluates every loss channel that enters the
//! final failure budget (Landau-Zener leakage, radiative recombination,
//! charge and Overhauser-field dephasing, Rabi-pulse leakage and noise).
//!
//! Units are fixed throughout: energies in µeV, times in ns, magnetic fields
//! in T. Angular frequencies are therefore in rad/ns.

pub mod config;
pub mod error;
pub mod exec;
pub mod hamiltonians;
pub mod lossmodels;
pub mod oracle;
pub mod params;
pub mod protocol;
pub mod quadrature;
pub mod rabi;
pub mod report;
pub mod spectra;
pub mod sweep;

pub use error::{Error, Result};
pub use params::{DeviceParams, ProtocolConfig, ProtocolKind};

/// Complex scalar used for all state vectors and operators.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
