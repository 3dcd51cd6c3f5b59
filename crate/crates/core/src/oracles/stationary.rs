//! Stationary states of hybrid pairs with translation-invariant potentials:
//! `P(q,x) = P₀(x) φ_n(q-x)²`, `S = -E_n t`, built from the discrete
//! relative-coordinate eigenproblem at the grid's own spacing so that the
//! stationarity conditions hold at machine level on that grid.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::state::EnsembleState;
use crate::tridiag::schrodinger_operator;

/// One relative-motion eigenmode bound to a `(q, x)` grid layout.
#[derive(Debug, Clone)]
pub struct StationaryHybridSpec {
    pub mode_index: usize,
    /// Eigenvalue of the discrete relative-coordinate Schrödinger operator.
    pub energy: f64,
    /// First relative-lattice coordinate `q_min - x_max`.
    r_first: f64,
    spacing: f64,
    /// Mode samples on the relative lattice, normalized to `Σ φ² h = 1`.
    mode: Vec<f64>,
    /// Classical marginal at the x-axis nodes, normalized.
    classical_density: Vec<f64>,
}

impl StationaryHybridSpec {
    /// Mode value at relative coordinate `r` (must lie on the lattice).
    pub fn mode_at(&self, r: f64) -> f64 {
        let k = ((r - self.r_first) / self.spacing).round() as isize;
        if k < 0 || k as usize >= self.mode.len() {
            0.0
        } else {
            self.mode[k as usize]
        }
    }

    pub fn mode_samples(&self) -> (&[f64], f64, f64) {
        (&self.mode, self.r_first, self.spacing)
    }

    pub fn classical_density(&self) -> &[f64] {
        &self.classical_density
    }
}

/// Solve the relative-coordinate eigenproblem for the spring potential
/// `½ k r²` on the lattice induced by the `(q, x)` axes (which must share
/// their spacing), and package mode `n` with the given classical marginal.
pub fn stationary_spring_mode(
    grid: &Arc<Grid>,
    q_axis: &str,
    x_axis: &str,
    quantum_mass: f64,
    spring: f64,
    hbar: f64,
    mode_index: usize,
    classical_density: impl Fn(f64) -> f64,
) -> Result<StationaryHybridSpec> {
    let qa = grid.axis_index(q_axis)?;
    let xa = grid.axis_index(x_axis)?;
    let (hq, hx) = match (grid.axis(qa).spacing(), grid.axis(xa).spacing()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CoreError::IncompatibleAxes(
                "stationary modes need continuous axes".into(),
            ))
        }
    };
    if ((hq - hx) / hq).abs() > 1e-12 {
        return Err(CoreError::IncompatibleAxes(format!(
            "q and x axes must share their spacing ({hq} vs {hx})"
        )));
    }
    let h = hq;
    let (qmin, _qmax) = axis_range(grid, qa);
    let (xmin, xmax) = axis_range(grid, xa);
    let nq = grid.axis(qa).len();
    let nx = grid.axis(xa).len();
    let r_first = qmin - xmax;
    let nr = nq + nx - 1;
    let potential: Vec<f64> = (0..nr)
        .map(|k| {
            let r = r_first + k as f64 * h;
            0.5 * spring * r * r
        })
        .collect();
    let op = schrodinger_operator(&potential, h, hbar * hbar / (2.0 * quantum_mass));
    let (energy, mut mode) = op.eigenpair(mode_index)?;
    // 2-norm -> L² norm on the lattice.
    let inv_sqrt_h = 1.0 / h.sqrt();
    for v in mode.iter_mut() {
        *v *= inv_sqrt_h;
    }
    // Sample and normalize the classical marginal on the x nodes.
    let mut p0: Vec<f64> = (0..nx).map(|j| classical_density(xmin + j as f64 * h)).collect();
    if p0.iter().any(|&v| v < 0.0) {
        return Err(CoreError::Oracle("classical marginal must be nonnegative".into()));
    }
    let norm: f64 = (0..nx).map(|j| grid.axis(xa).weight(j) * p0[j]).sum();
    if norm <= 0.0 {
        return Err(CoreError::Oracle("classical marginal vanishes".into()));
    }
    for v in p0.iter_mut() {
        *v /= norm;
    }
    Ok(StationaryHybridSpec {
        mode_index,
        energy,
        r_first,
        spacing: h,
        mode,
        classical_density: p0,
    })
}

/// The displaced-eigenstate ensemble at time `t`:
/// `P(q,x) = P₀(x) φ_n(q-x)²`, `S = -E_n t`.
pub fn stationary_hybrid_state(
    spec: &StationaryHybridSpec,
    grid: &Arc<Grid>,
    q_axis: &str,
    x_axis: &str,
    t: f64,
) -> Result<EnsembleState> {
    let qa = grid.axis_index(q_axis)?;
    let xa = grid.axis_index(x_axis)?;
    let nq = grid.axis(qa).len();
    let nx = grid.axis(xa).len();
    if nq + nx - 1 != spec.mode.len() || nx != spec.classical_density.len() {
        return Err(CoreError::IncompatibleAxes(
            "grid layout does not match the one the mode was built on".into(),
        ));
    }
    let sq = grid.strides()[qa];
    let sx = grid.strides()[xa];
    let mut p = vec![0.0f64; grid.cell_count()];
    for i in 0..nq {
        for j in 0..nx {
            let phi = spec.mode[i + (nx - 1) - j];
            p[i * sq + j * sx] = spec.classical_density[j] * phi * phi;
        }
    }
    let p = ScalarField::from_raw(grid.clone(), p);
    let s = ScalarField::constant(grid.clone(), -spec.energy * t);
    EnsembleState::from_parts_unchecked(p, s, t).normalized()
}

fn axis_range(grid: &Grid, a: usize) -> (f64, f64) {
    match &grid.axis(a).kind {
        crate::axis::AxisKind::Continuous { min, max, .. } => (*min, *max),
        _ => unreachable!(),
    }
}
