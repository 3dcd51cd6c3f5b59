//! Coherent states of the hybrid oscillator: a Gaussian of fixed width
//! `√(ħ/2√(km))` in the quantum coordinates riding the classical trajectory,
//! with the sharp classical position regularized to a Gaussian of width `s`.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::hamiltonian::HamiltonianSpec;
use crate::state::EnsembleState;

/// Parameters of one closed-form hybrid-oscillator solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentStateSpec {
    pub quantum_mass: f64,
    pub classical_mass: f64,
    pub spring: f64,
    /// Common centre `c` of the two trajectories (one entry per dimension).
    pub center: Vec<f64>,
    /// Relative displacement amplitude `d`.
    pub displacement: Vec<f64>,
    /// Phase offset of the oscillation.
    pub phase: f64,
    /// Regularization width of the classical position's sharp distribution.
    pub width: f64,
    pub hbar: f64,
}

impl CoherentStateSpec {
    pub fn validate(&self) -> Result<()> {
        if self.quantum_mass <= 0.0
            || self.classical_mass <= 0.0
            || self.spring <= 0.0
            || self.width <= 0.0
            || self.hbar <= 0.0
        {
            return Err(CoreError::Oracle(
                "coherent-state parameters must be positive".into(),
            ));
        }
        if self.center.len() != self.displacement.len() || self.center.is_empty() {
            return Err(CoreError::Oracle(
                "center and displacement must have the same nonzero dimension".into(),
            ));
        }
        Ok(())
    }

    pub fn n_dims(&self) -> usize {
        self.center.len()
    }

    /// `μ = mM/(m+M)`.
    pub fn reduced_mass(&self) -> f64 {
        self.quantum_mass * self.classical_mass / (self.quantum_mass + self.classical_mass)
    }

    /// The relative-motion frequency `ω_μ = √(k/μ)` of the centroids.
    pub fn omega_relative(&self) -> f64 {
        (self.spring / self.reduced_mass()).sqrt()
    }

    /// The zero-point frequency `ω_m = √(k/m)` of the quantum factor.
    pub fn omega_quantum(&self) -> f64 {
        (self.spring / self.quantum_mass).sqrt()
    }

    /// Variance of the quantum factor in each direction:
    /// `ħ / (2√(km))`.
    pub fn quantum_variance(&self) -> f64 {
        self.hbar / (2.0 * (self.spring * self.quantum_mass).sqrt())
    }

    /// The matching oscillator Hamiltonian on named axes.
    pub fn oscillator(&self, q_axes: &[&str], x_axes: &[&str]) -> HamiltonianSpec {
        HamiltonianSpec::HybridOscillator {
            quantum_mass: self.quantum_mass,
            classical_mass: self.classical_mass,
            spring: self.spring,
            q_axes: q_axes.iter().map(|s| s.to_string()).collect(),
            x_axes: x_axes.iter().map(|s| s.to_string()).collect(),
            hbar: self.hbar,
        }
    }
}

/// Centroid trajectories
/// `q_t = c + (μ/m) d cos(ω_μ t + φ)`, `x_t = c - (μ/M) d cos(ω_μ t + φ)`.
pub fn coherent_centroids(spec: &CoherentStateSpec, t: f64) -> (Vec<f64>, Vec<f64>) {
    let mu = spec.reduced_mass();
    let c = (spec.omega_relative() * t + spec.phase).cos();
    let q: Vec<f64> = spec
        .center
        .iter()
        .zip(&spec.displacement)
        .map(|(&ci, &di)| ci + mu / spec.quantum_mass * di * c)
        .collect();
    let x: Vec<f64> = spec
        .center
        .iter()
        .zip(&spec.displacement)
        .map(|(&ci, &di)| ci - mu / spec.classical_mass * di * c)
        .collect();
    (q, x)
}

/// Sample the regularized coherent state at time `t`:
/// the quantum factor is a fixed-width Gaussian centred on `q_t`, the
/// classical factor a width-`s` Gaussian centred on `x_t`, and the phase is
/// linear in `q - x` with the two-frequency time dependence.
pub fn coherent_state(
    spec: &CoherentStateSpec,
    grid: &Arc<Grid>,
    q_axes: &[&str],
    x_axes: &[&str],
    t: f64,
) -> Result<EnsembleState> {
    spec.validate()?;
    let n = spec.n_dims();
    if q_axes.len() != n || x_axes.len() != n {
        return Err(CoreError::Oracle(format!(
            "spec has {n} dimensions; got {} quantum and {} classical axes",
            q_axes.len(),
            x_axes.len()
        )));
    }
    let qi: Vec<usize> = q_axes
        .iter()
        .map(|a| grid.axis_index(a))
        .collect::<Result<_>>()?;
    let xi: Vec<usize> = x_axes
        .iter()
        .map(|a| grid.axis_index(a))
        .collect::<Result<_>>()?;
    let (qt, xt) = coherent_centroids(spec, t);
    let sigma_q = spec.quantum_variance().sqrt();
    // Coverage pre-check: six standard deviations around each centroid.
    for (j, &a) in qi.iter().enumerate() {
        check_coverage(grid, a, qt[j], 6.0 * sigma_q)?;
    }
    for (j, &a) in xi.iter().enumerate() {
        check_coverage(grid, a, xt[j], 6.0 * spec.width)?;
    }

    let mu = spec.reduced_mass();
    let k = spec.spring;
    let sqrt_k_mu = (k * mu).sqrt();
    let omega_rel = spec.omega_relative();
    let omega_q = spec.omega_quantum();
    let d2: f64 = spec.displacement.iter().map(|d| d * d).sum();
    let phase_arg = omega_rel * t + spec.phase;
    let s_const = -0.5 * n as f64 * spec.hbar * omega_q * t
        + 0.25 * d2 * sqrt_k_mu * (2.0 * phase_arg).sin();
    let s_slope = -sqrt_k_mu * phase_arg.sin();

    let inv_2sq = 1.0 / (2.0 * sigma_q * sigma_q);
    let inv_2sw = 1.0 / (2.0 * spec.width * spec.width);
    let mut p = Vec::with_capacity(grid.cell_count());
    let mut s = Vec::with_capacity(grid.cell_count());
    for cell in 0..grid.cell_count() {
        let coords = grid.coords(cell);
        let mut expo = 0.0;
        let mut rel = 0.0;
        for j in 0..n {
            let dq = coords[qi[j]] - qt[j];
            let dx = coords[xi[j]] - xt[j];
            expo += dq * dq * inv_2sq + dx * dx * inv_2sw;
            rel += spec.displacement[j] * (coords[qi[j]] - coords[xi[j]]);
        }
        p.push((-expo).exp());
        s.push(s_const + s_slope * rel);
    }
    let p = ScalarField::from_raw(grid.clone(), p);
    let s = ScalarField::from_raw(grid.clone(), s);
    EnsembleState::from_parts_unchecked(p, s, t).normalized()
}

fn check_coverage(grid: &Grid, axis: usize, center: f64, margin: f64) -> Result<()> {
    let (min, max) = match &grid.axis(axis).kind {
        crate::axis::AxisKind::Continuous { min, max, .. } => (*min, *max),
        _ => {
            return Err(CoreError::UnsupportedAxis(grid.axis(axis).name.clone()));
        }
    };
    if center - margin < min || center + margin > max {
        return Err(CoreError::Oracle(format!(
            "axis `{}` covers [{min}, {max}] but the state needs [{:.3}, {:.3}]",
            grid.axis(axis).name,
            center - margin,
            center + margin
        )));
    }
    Ok(())
}
