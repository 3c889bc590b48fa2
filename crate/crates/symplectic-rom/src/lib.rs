//! Symplectic model reduction of Hamiltonian systems.
//!
//! Builds low-dimensional reduced Hamiltonian systems from simulation
//! snapshots by proper symplectic decomposition (PSD), integrates them with
//! structure-preserving schemes, compresses nonlinear terms with (S)DEIM,
//! and reproduces the linear-wave and sine-Gordon benchmark experiments
//! end to end.
//!
//! Module map:
//! * [`symplectic`] — Poisson matrix action, symplectic inverses and bases
//! * [`models`] — discretized wave-family Hamiltonian systems
//! * [`integrators`] — implicit midpoint and symplectic Euler
//! * [`snapshots`], [`psd`] — snapshot ensembles and basis construction
//! * [`reduction`] — symplectic Galerkin and POD-Galerkin reduced models
//! * [`deim`] — greedy interpolation indices, DEIM and SDEIM operators
//! * [`diagnostics`] — error/energy series and spectral stability
//! * [`pipeline`], [`config`], [`io`] — experiment orchestration and formats

pub mod config;
pub mod deim;
pub mod diagnostics;
pub mod error;
pub mod integrators;
pub mod io;
pub mod linalg;
pub mod models;
pub mod pipeline;
pub mod psd;
pub mod reduction;
pub mod snapshots;
pub mod svg;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
