//! The canonical ensemble pair: a probability density and its conjugate
//! phase on a shared grid.

use std::collections::VecDeque;
use std::sync::Arc;

use num_complex::Complex64;

use crate::axis::Boundary;
use crate::diffops::integrate;
use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;

/// Relative density floor: cells with density below `DEFAULT_FLOOR_REL * max`
/// are treated as unoccupied by diagnostics, and guard denominators in the
/// singular quotient terms.
pub const DEFAULT_FLOOR_REL: f64 = 1e-12;

/// Default tolerance on `∫P = 1` when validating user-constructed states.
pub const DEFAULT_NORM_TOL: f64 = 1e-6;

/// Probability density `P` and conjugate phase `S` at a common time.
///
/// `P` is nonnegative and integrates to one; `S` carries physical meaning
/// only through differences and derivatives, so a global additive constant is
/// gauge.
#[derive(Debug, Clone)]
pub struct EnsembleState {
    density: ScalarField,
    phase: ScalarField,
    time: f64,
}

impl EnsembleState {
    /// Validating constructor: checks grids agree, `P >= 0`, and `∫P = 1`
    /// within `norm_tol`.
    pub fn new(density: ScalarField, phase: ScalarField, time: f64) -> Result<Self> {
        Self::with_norm_tol(density, phase, time, DEFAULT_NORM_TOL)
    }

    pub fn with_norm_tol(
        density: ScalarField,
        phase: ScalarField,
        time: f64,
        norm_tol: f64,
    ) -> Result<Self> {
        if !density.grid().same_layout(phase.grid()) {
            return Err(CoreError::GridMismatch);
        }
        for (cell, &v) in density.values().iter().enumerate() {
            if v < 0.0 {
                return Err(CoreError::NegativeDensity { cell, value: v });
            }
        }
        let norm = integrate(&density)?;
        if (norm - 1.0).abs() > norm_tol {
            return Err(CoreError::NotNormalized {
                norm,
                tol: norm_tol,
            });
        }
        Ok(EnsembleState {
            density,
            phase,
            time,
        })
    }

    /// Internal constructor for intermediates produced by the integrator;
    /// monitors enforce the invariants instead.
    pub(crate) fn from_parts_unchecked(
        density: ScalarField,
        phase: ScalarField,
        time: f64,
    ) -> Self {
        EnsembleState {
            density,
            phase,
            time,
        }
    }

    pub fn density(&self) -> &ScalarField {
        &self.density
    }

    pub fn phase(&self) -> &ScalarField {
        &self.phase
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.density.grid()
    }

    /// Absolute density floor for this state.
    pub fn floor(&self) -> f64 {
        DEFAULT_FLOOR_REL * self.density.max_value()
    }

    /// Same density, phase shifted by a global constant (gauge copy).
    pub fn with_phase_offset(&self, c: f64) -> EnsembleState {
        EnsembleState {
            density: self.density.clone(),
            phase: self.phase.shifted(c),
            time: self.time,
        }
    }

    /// Normalize the density exactly with the grid quadrature.
    pub fn normalized(&self) -> Result<EnsembleState> {
        let norm = integrate(&self.density)?;
        if norm <= 0.0 {
            return Err(CoreError::DegenerateState);
        }
        Ok(EnsembleState {
            density: self.density.scaled(1.0 / norm),
            phase: self.phase.clone(),
            time: self.time,
        })
    }
}

/// Joint state of two independent ensembles on disjoint axes:
/// `P = P_a P_b`, `S = S_a + S_b` on the product grid.
pub fn product_state(a: &EnsembleState, b: &EnsembleState) -> Result<EnsembleState> {
    for ax in a.grid().axes() {
        if b.grid().axes().iter().any(|bx| bx.name == ax.name) {
            return Err(CoreError::AxisCollision(ax.name.clone()));
        }
    }
    let mut axes = a.grid().axes().to_vec();
    axes.extend_from_slice(b.grid().axes());
    let grid = Grid::new(axes)?;
    let nb = b.grid().cell_count();
    let mut p = Vec::with_capacity(grid.cell_count());
    let mut s = Vec::with_capacity(grid.cell_count());
    for ia in 0..a.grid().cell_count() {
        let (pa, sa) = (a.density().values()[ia], a.phase().values()[ia]);
        for ib in 0..nb {
            p.push(pa * b.density().values()[ib]);
            s.push(sa + b.phase().values()[ib]);
        }
    }
    Ok(EnsembleState {
        density: ScalarField::from_raw(grid.clone(), p),
        phase: ScalarField::from_raw(grid, s),
        time: a.time(),
    })
}

/// Complex wavefunction samples on a grid.
#[derive(Debug, Clone)]
pub struct ComplexField {
    pub grid: Arc<Grid>,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(CoreError::LengthMismatch {
                got: values.len(),
                expected: grid.cell_count(),
            });
        }
        Ok(ComplexField { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.cell_count()).map(|c| f(&grid.coords(c))).collect();
        ComplexField { grid, values }
    }

    pub fn density(&self) -> ScalarField {
        ScalarField::from_raw(
            self.grid.clone(),
            self.values.iter().map(|z| z.norm_sqr()).collect(),
        )
    }
}

/// Map a wavefunction to its canonical pair: `P = |ψ|²`,
/// `S = ħ·arg ψ` unwrapped by flood fill from the most probable cell.
///
/// Cells whose density falls below the floor get `S = 0`; the phase is not
/// defined there and such cells are excluded from diagnostics.
pub fn polar_from_wavefunction(
    re: &ScalarField,
    im: &ScalarField,
    hbar: f64,
    time: f64,
) -> Result<EnsembleState> {
    if !re.grid().same_layout(im.grid()) {
        return Err(CoreError::GridMismatch);
    }
    let grid = re.grid().clone();
    let n = grid.cell_count();
    let p: Vec<f64> = re
        .values()
        .iter()
        .zip(im.values())
        .map(|(&a, &b)| a * a + b * b)
        .collect();
    let pmax = p.iter().cloned().fold(0.0f64, f64::max);
    if pmax <= 0.0 {
        return Err(CoreError::DegenerateState);
    }
    let floor = DEFAULT_FLOOR_REL * pmax;

    let theta: Vec<f64> = re
        .values()
        .iter()
        .zip(im.values())
        .map(|(&a, &b)| b.atan2(a))
        .collect();

    // Breadth-first unwrap along continuous axes, seeded at argmax P, with
    // each neighbour's branch chosen by nearest-value continuation.
    let seed = p
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let tau = std::f64::consts::TAU;
    let mut s = vec![0.0f64; n];
    let mut visited = vec![false; n];
    let mut queue = VecDeque::new();
    s[seed] = theta[seed];
    visited[seed] = true;
    queue.push_back(seed);
    while let Some(cell) = queue.pop_front() {
        let idx = grid.unravel(cell);
        for (a, axis) in grid.axes().iter().enumerate() {
            if !axis.is_continuous() {
                continue;
            }
            let len = axis.len();
            let stride = grid.strides()[a];
            let periodic = axis.boundary() == Some(Boundary::Periodic);
            for dir in [-1isize, 1isize] {
                let k = idx[a] as isize + dir;
                let k = if periodic {
                    (k + len as isize) as usize % len
                } else if k < 0 || k >= len as isize {
                    continue;
                } else {
                    k as usize
                };
                let ncell = cell + k * stride - idx[a] * stride;
                if visited[ncell] || p[ncell] <= floor {
                    continue;
                }
                let winds = ((s[cell] - theta[ncell]) / tau).round();
                s[ncell] = theta[ncell] + tau * winds;
                visited[ncell] = true;
                queue.push_back(ncell);
            }
        }
    }
    // Discrete axes carry no continuity constraint: their phases keep the
    // principal branch (visited stays false only where P <= floor or the
    // region is disconnected from the seed; leave S = theta there too when
    // occupied).
    for cell in 0..n {
        if !visited[cell] {
            s[cell] = if p[cell] > floor { theta[cell] } else { 0.0 };
        }
        s[cell] *= hbar;
    }
    Ok(EnsembleState {
        density: ScalarField::from_raw(grid.clone(), p),
        phase: ScalarField::from_raw(grid, s),
        time,
    })
}

/// Inverse of [`polar_from_wavefunction`]: `ψ = √P e^{iS/ħ}`.
pub fn wavefunction_from_polar(state: &EnsembleState, hbar: f64) -> ComplexField {
    let values = state
        .density()
        .values()
        .iter()
        .zip(state.phase().values())
        .map(|(&p, &s)| Complex64::from_polar(p.max(0.0).sqrt(), s / hbar))
        .collect();
    ComplexField {
        grid: state.grid().clone(),
        values,
    }
}
