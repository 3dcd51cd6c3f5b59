//! Configuration-space ensemble dynamics.
//!
//! A physical system is described by a probability density `P` on its
//! configuration space together with a canonically conjugate phase `S`. An
//! ensemble Hamiltonian functional `H[P,S]` generates the motion
//! `∂P/∂t = δH/δS`, `∂S/∂t = -δH/δP`. Choosing the functional makes the same
//! machinery describe classical ensembles, quantum ensembles, and hybrids of
//! the two, including measurement couplings between a quantum system and a
//! classical pointer.
//!
//! The crate provides the grids and operators for the canonical pair
//! ([`grid`], [`field`], [`state`], [`diffops`]), a catalog of ensemble
//! Hamiltonians with exact discrete functional derivatives ([`hamiltonian`]),
//! explicit time integration with conservation monitoring ([`dynamics`]),
//! closed-form and independent numerical references ([`oracles`]), derived
//! quantities and symmetry maps ([`observables`]), a minisuperspace
//! cosmology solver ([`cosmology`]), and the verification battery behind the
//! `check` command ([`checks`]).

pub mod axis;
pub mod checks;
pub mod cosmology;
pub mod diffops;
pub mod dynamics;
pub mod error;
pub mod fftutil;
pub mod field;
pub mod grid;
pub mod hamiltonian;
pub mod hermite;
pub mod interp;
pub mod io;
pub mod observables;
pub mod oracles;
pub mod state;
pub mod tridiag;

pub use axis::{AxisKind, AxisSpec, Boundary};
pub use error::{CoreError, Result};
pub use field::ScalarField;
pub use grid::Grid;
pub use state::{
    product_state, polar_from_wavefunction, wavefunction_from_polar, ComplexField,
    EnsembleState, DEFAULT_FLOOR_REL,
};
