//! The catalog of ensemble Hamiltonian functionals `H[P,S]`.
//!
//! Each variant evaluates its energy by quadrature and exposes the two
//! variational derivatives that generate the motion:
//! `density_rate = δH/δS` (so `∂P/∂t = density_rate`) and
//! `phase_rate = -δH/δP` (so `∂S/∂t = phase_rate`).
//!
//! Discretization contract: the energy is a sum of face-difference quadratic
//! forms plus cell-wise potential terms, and the rate kernels are the exact
//! gradients of that discrete functional with respect to the quadrature
//! inner product. Two consequences are load-bearing: `∫ density_rate = 0`
//! telescopes to rounding on periodic grids (and on clamped grids via the
//! zero-flux faces), and the finite-difference functional-gradient check
//! converges to rounding rather than to a discretization floor.

mod analysis;
pub(crate) mod engine;
mod kinetic;
mod potential;
#[cfg(test)]
mod tests;

pub use analysis::{
    classical_limit, com_relative_split, functional_gradient_check, noninteraction_residual,
    ComRelativeSplit, GradientCheck,
};
pub use kinetic::{KineticMatrix, SquareMatrix};
pub use potential::{erf, PairProfile, PotentialSpec, Schedule};

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::state::EnsembleState;

use engine::Engine;

/// Mass attached to one named continuous axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisMass {
    pub axis: String,
    pub mass: f64,
}

impl AxisMass {
    pub fn new(axis: &str, mass: f64) -> Self {
        AxisMass {
            axis: axis.to_string(),
            mass,
        }
    }
}

/// Dense Hermitian matrix over the flattened discrete configuration basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(CoreError::InvalidHamiltonian(format!(
                "matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let d = entries[i * dim + j] - entries[j * dim + i].conj();
                if d.norm() > 1e-12 {
                    return Err(CoreError::InvalidHamiltonian(format!(
                        "matrix is not Hermitian at ({i},{j}): defect {:.3e}",
                        d.norm()
                    )));
                }
            }
        }
        Ok(HermitianMatrix { dim, entries })
    }

    pub fn diagonal(levels: &[f64]) -> Self {
        let dim = levels.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &e) in levels.iter().enumerate() {
            entries[i * dim + i] = Complex64::new(e, 0.0);
        }
        HermitianMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for i in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            let row = &self.entries[i * self.dim..(i + 1) * self.dim];
            for (h, &vj) in row.iter().zip(v) {
                acc += h * vj;
            }
            out[i] = acc;
        }
    }
}

/// One ensemble Hamiltonian functional.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    /// `∫ P [ |∇S|²/2m + V ]`: an ensemble of classical particles.
    Classical {
        masses: Vec<AxisMass>,
        potential: PotentialSpec,
    },
    /// Classical plus the Fisher kinetic term `(ħ²/8m) ∫ P |∇log P|²` on
    /// every axis: an ensemble of quantum particles.
    Quantum {
        masses: Vec<AxisMass>,
        potential: PotentialSpec,
        hbar: f64,
    },
    /// Quantum axes `q` (mass m, Fisher term) coupled to classical axes `x`
    /// (mass M, no Fisher term) through `V(q,x,t)`.
    HybridQC {
        quantum_mass: f64,
        classical_mass: f64,
        q_axes: Vec<String>,
        x_axes: Vec<String>,
        potential: PotentialSpec,
        hbar: f64,
    },
    /// One continuous pointer axis and one two-label spin axis with the
    /// readout coupling `κ(t) Σ_α α ∫ P ∂S/∂x`. `quantum_pointer` keeps the
    /// pointer's Fisher term (the fully quantized system the classical limit
    /// acts on).
    SpinPointer {
        pointer_mass: f64,
        potential: PotentialSpec,
        coupling: Schedule,
        hbar: f64,
        quantum_pointer: bool,
    },
    /// A hybrid pair with the position-readout coupling
    /// `κ(t) ∫ P q·∇_x S` added.
    PositionMeasurement {
        base: Box<HamiltonianSpec>,
        coupling: Schedule,
    },
    /// Hybrid particles joined by springs: `V = ½k|q-x|²`.
    HybridOscillator {
        quantum_mass: f64,
        classical_mass: f64,
        spring: f64,
        q_axes: Vec<String>,
        x_axes: Vec<String>,
        hbar: f64,
    },
    /// Generic finite-dimensional quantum ensemble `⟨ψ|H|ψ⟩` with
    /// `ψ_j = √P_j e^{iS_j/ħ}` over the flattened discrete basis.
    FiniteQuantum {
        matrix: HermitianMatrix,
        hbar: f64,
    },
}

impl HamiltonianSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CoreError::InvalidHamiltonian(format!(
                    "{what} must be positive, got {v}"
                )))
            }
        };
        match self {
            HamiltonianSpec::Classical { masses, potential } => {
                for m in masses {
                    positive(m.mass, &format!("mass on `{}`", m.axis))?;
                }
                potential.validate()
            }
            HamiltonianSpec::Quantum {
                masses,
                potential,
                hbar,
            } => {
                for m in masses {
                    positive(m.mass, &format!("mass on `{}`", m.axis))?;
                }
                positive(*hbar, "hbar")?;
                potential.validate()
            }
            HamiltonianSpec::HybridQC {
                quantum_mass,
                classical_mass,
                potential,
                hbar,
                q_axes,
                x_axes,
            } => {
                positive(*quantum_mass, "quantum mass")?;
                positive(*classical_mass, "classical mass")?;
                positive(*hbar, "hbar")?;
                if q_axes.is_empty() || x_axes.is_empty() {
                    return Err(CoreError::InvalidHamiltonian(
                        "hybrid specs need at least one quantum and one classical axis".into(),
                    ));
                }
                potential.validate()
            }
            HamiltonianSpec::SpinPointer {
                pointer_mass,
                potential,
                hbar,
                ..
            } => {
                positive(*pointer_mass, "pointer mass")?;
                positive(*hbar, "hbar")?;
                potential.validate()
            }
            HamiltonianSpec::PositionMeasurement { base, .. } => {
                if !matches!(**base, HamiltonianSpec::HybridQC { .. }) {
                    return Err(CoreError::InvalidHamiltonian(
                        "position-measurement base must be a hybrid particle spec".into(),
                    ));
                }
                base.validate()
            }
            HamiltonianSpec::HybridOscillator {
                quantum_mass,
                classical_mass,
                spring,
                q_axes,
                x_axes,
                hbar,
            } => {
                positive(*quantum_mass, "quantum mass")?;
                positive(*classical_mass, "classical mass")?;
                positive(*hbar, "hbar")?;
                if *spring < 0.0 {
                    return Err(CoreError::InvalidHamiltonian("spring must be >= 0".into()));
                }
                if q_axes.len() != x_axes.len() || q_axes.is_empty() {
                    return Err(CoreError::InvalidHamiltonian(
                        "oscillator needs equally many quantum and classical axes".into(),
                    ));
                }
                Ok(())
            }
            HamiltonianSpec::FiniteQuantum { hbar, .. } => positive(*hbar, "hbar"),
        }
    }

    /// Oscillator dimensionality (number of quantum axes) for hybrid
    /// oscillators.
    pub fn n_dims(&self) -> Option<usize> {
        match self {
            HamiltonianSpec::HybridOscillator { q_axes, .. } => Some(q_axes.len()),
            _ => None,
        }
    }

    pub fn hbar(&self) -> Option<f64> {
        match self {
            HamiltonianSpec::Classical { .. } => None,
            HamiltonianSpec::Quantum { hbar, .. }
            | HamiltonianSpec::HybridQC { hbar, .. }
            | HamiltonianSpec::SpinPointer { hbar, .. }
            | HamiltonianSpec::HybridOscillator { hbar, .. }
            | HamiltonianSpec::FiniteQuantum { hbar, .. } => Some(*hbar),
            HamiltonianSpec::PositionMeasurement { base, .. } => base.hbar(),
        }
    }

    /// True when the functional has explicit time dependence (schedules or
    /// time-scaled potentials), in which case energy is not conserved.
    pub fn time_dependent(&self) -> bool {
        fn potential_td(p: &PotentialSpec) -> bool {
            match p {
                PotentialSpec::TimeScaled { base, schedule } => {
                    !schedule.is_constant() || potential_td(base)
                }
                _ => false,
            }
        }
        match self {
            HamiltonianSpec::Classical { potential, .. }
            | HamiltonianSpec::Quantum { potential, .. }
            | HamiltonianSpec::HybridQC { potential, .. } => potential_td(potential),
            HamiltonianSpec::SpinPointer {
                potential,
                coupling,
                ..
            } => potential_td(potential) || !coupling.is_constant(),
            HamiltonianSpec::PositionMeasurement { base, coupling } => {
                base.time_dependent() || !coupling.is_constant()
            }
            HamiltonianSpec::HybridOscillator { .. } | HamiltonianSpec::FiniteQuantum { .. } => {
                false
            }
        }
    }

    /// The block kinetic matrices (U, E, C) of the hybrid oscillator's
    /// quadratic-form representation.
    pub fn kinetic_matrix(&self) -> Result<KineticMatrix> {
        match self {
            HamiltonianSpec::HybridOscillator {
                quantum_mass,
                classical_mass,
                spring,
                q_axes,
                ..
            } => KineticMatrix::hybrid_oscillator(
                *quantum_mass,
                *classical_mass,
                *spring,
                q_axes.len(),
            ),
            _ => Err(CoreError::InvalidHamiltonian(
                "kinetic matrices are defined for the hybrid oscillator".into(),
            )),
        }
    }

    /// Energy `H[P,S]` of a state under this functional.
    pub fn evaluate(&self, state: &EnsembleState) -> Result<f64> {
        let mut engine = Engine::new(self, state.grid())?;
        engine.energy(
            state.density().values(),
            state.phase().values(),
            state.time(),
        )
    }

    /// `δH/δS`, the generator of `∂P/∂t`.
    pub fn density_rate(&self, state: &EnsembleState) -> Result<ScalarField> {
        let mut engine = Engine::new(self, state.grid())?;
        let mut out = vec![0.0; state.grid().cell_count()];
        engine.density_rate(
            state.density().values(),
            state.phase().values(),
            state.time(),
            &mut out,
        )?;
        Ok(ScalarField::from_raw(state.grid().clone(), out))
    }

    /// `-δH/δP`, the generator of `∂S/∂t`.
    pub fn phase_rate(&self, state: &EnsembleState) -> Result<ScalarField> {
        let mut engine = Engine::new(self, state.grid())?;
        let mut out = vec![0.0; state.grid().cell_count()];
        engine.phase_rate(
            state.density().values(),
            state.phase().values(),
            state.time(),
            &mut out,
        )?;
        Ok(ScalarField::from_raw(state.grid().clone(), out))
    }

    /// Bind this spec to a grid, validating axis compatibility.
    pub(crate) fn engine(&self, grid: &Arc<Grid>) -> Result<Engine> {
        Engine::new(self, grid)
    }

    /// Stability bounds for explicit stepping on this grid/state.
    pub fn stability_bounds(&self, state: &EnsembleState) -> Result<StabilityBounds> {
        let engine = Engine::new(self, state.grid())?;
        Ok(engine.stability_bounds(state))
    }
}

/// Advective and dispersive time-step bounds reported by the pre-flight
/// check: `dt <= 0.5 h / max|U ∇S|` per transport axis and
/// `dt <= 0.25 h² m / ħ` per Fisher axis.
#[derive(Debug, Clone, Copy)]
pub struct StabilityBounds {
    pub advective: f64,
    pub dispersive: f64,
}

impl StabilityBounds {
    pub fn dt_bound(&self) -> f64 {
        self.advective.min(self.dispersive)
    }
}
