// SPDX-License-Identifier: Apache-2.0

//! Accelerated two-level detectors coupled to truncated bosonic field modes,
//! simulated in the detectors' comoving frame.
//!
//! The crate is organized bottom-up:
//!
//! * [`hilbert`]: composite qubit ⊗ Fock space, state vectors, ladder operators.
//! * [`trajectory`]: worldlines and the field phase they induce.
//! * [`hamiltonian`]: the time-dependent interaction Hamiltonian.
//! * [`evolve`]: fixed-step integrators and truncation convergence checks.
//! * [`observables`]: populations and occupations.
//! * [`landau_zener`]: closed-form crossing analysis and acceleration sweeps.
//! * [`hardware`]: trapped-ion and circuit-QED schedule compilation.
//! * [`export`]: CSV output.

// `!(x > 0.0)` deliberately rejects NaN alongside nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod export;
pub mod hamiltonian;
pub mod hardware;
pub mod hilbert;
mod interp;
pub mod landau_zener;
pub mod observables;
pub mod trajectory;

pub use error::{Error, Result};
pub use evolve::{evolve, EvolutionResult, IntegratorConfig, Method};
pub use hamiltonian::{DetectorSpec, Hamiltonian, ModelSpec};
pub use hilbert::{BasisIndex, SpaceSpec, StateVector};
pub use landau_zener::LzSetup;
pub use observables::Observer;
pub use trajectory::{ModeSpec, Worldline};
