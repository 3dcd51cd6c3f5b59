//! Closed-form reference solutions and one independent numerical reference
//! solver, used as ground truth for the dynamics module.
//!
//! Nothing here shares code with the integrator: shift maps resample the
//! initial state, coherent and stationary states are sampled from their
//! formulas, and the wavefunction reference propagates by split-step Fourier
//! steps on its own.

mod ballistic;
mod coherent;
mod schrodinger;
mod shift;
mod stationary;

pub use ballistic::{ballistic_transport, newtonian_trajectory};
pub use coherent::{coherent_centroids, coherent_state, CoherentStateSpec};
pub use schrodinger::split_step_reference;
pub use shift::{position_measurement_map, spin_measurement_map};
pub use stationary::{stationary_hybrid_state, stationary_spring_mode, StationaryHybridSpec};

#[cfg(test)]
mod tests;
