//! Conditional wavefunctions and the conditional density operator of the
//! quantum sector relative to the classical configuration.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::state::{ComplexField, EnsembleState};

use super::subgrid;

/// Classical cells with marginal probability below this are excluded from
/// conditional objects (their mass is renormalized away and reported).
pub const CONDITIONING_THRESHOLD: f64 = 1e-10;

/// Dense conditional density matrices are capped at this basis size; larger
/// quantum grids require a user-chosen coarse conditioning basis.
pub const MAX_CONDITIONAL_BASIS: usize = 2048;

/// `ψ(q|x) = √(P(q,x)/P(x)) e^{iS(q,x)/ħ}` on the quantum sub-grid, for the
/// classical cell fixed by `(classical_axes, classical_index)`.
pub fn conditional_wavefunction(
    state: &EnsembleState,
    classical_axes: &[&str],
    classical_index: &[usize],
    hbar: f64,
) -> Result<ComplexField> {
    let grid = state.grid();
    if classical_axes.len() != classical_index.len() || classical_axes.is_empty() {
        return Err(CoreError::Observable(
            "need one index per classical axis".into(),
        ));
    }
    let cls: Vec<usize> = classical_axes
        .iter()
        .map(|a| grid.axis_index(a))
        .collect::<Result<_>>()?;
    let quantum: Vec<usize> = (0..grid.axes().len())
        .filter(|a| !cls.contains(a))
        .collect();
    if quantum.is_empty() {
        return Err(CoreError::Observable(
            "conditioning on every axis leaves no quantum sector".into(),
        ));
    }
    let qgrid = subgrid(grid, &quantum)?;
    let mut base_idx = vec![0usize; grid.axes().len()];
    for (slot, &a) in cls.iter().enumerate() {
        if classical_index[slot] >= grid.axis(a).len() {
            return Err(CoreError::Observable(format!(
                "index {} out of range on `{}`",
                classical_index[slot],
                grid.axis(a).name
            )));
        }
        base_idx[a] = classical_index[slot];
    }
    // Conditional marginal at the fixed classical cell.
    let mut mass = 0.0;
    let mut values = Vec::with_capacity(qgrid.cell_count());
    for qc in 0..qgrid.cell_count() {
        let qidx = qgrid.unravel(qc);
        for (slot, &a) in quantum.iter().enumerate() {
            base_idx[a] = qidx[slot];
        }
        let cell = grid.ravel(&base_idx);
        mass += qgrid.weight(qc) * state.density().values()[cell];
        values.push(cell);
    }
    if mass <= CONDITIONING_THRESHOLD {
        return Err(CoreError::ConditioningOnNull(mass));
    }
    let psi: Vec<Complex64> = values
        .iter()
        .map(|&cell| {
            let p = state.density().values()[cell].max(0.0);
            Complex64::from_polar((p / mass).sqrt(), state.phase().values()[cell] / hbar)
        })
        .collect();
    ComplexField::new(qgrid, psi)
}

/// Quadrature-weighted mixture of conditional projectors:
/// `ρ = Σ_x w_x P(x) |ψ_x⟩⟨ψ_x| / (included mass)`.
#[derive(Debug, Clone)]
pub struct ConditionalDensityOperator {
    pub basis_grid: Arc<Grid>,
    /// Row-major `dim × dim` Hermitian matrix.
    pub matrix: Vec<Complex64>,
    /// Quadrature weight of each basis cell.
    pub basis_weights: Vec<f64>,
    /// Classical probability mass excluded by the conditioning threshold.
    pub excluded_mass: f64,
}

pub fn conditional_density_operator(
    state: &EnsembleState,
    classical_axes: &[&str],
    hbar: f64,
) -> Result<ConditionalDensityOperator> {
    let grid = state.grid();
    let cls: Vec<usize> = classical_axes
        .iter()
        .map(|a| grid.axis_index(a))
        .collect::<Result<_>>()?;
    let quantum: Vec<usize> = (0..grid.axes().len())
        .filter(|a| !cls.contains(a))
        .collect();
    if cls.is_empty() || quantum.is_empty() {
        return Err(CoreError::Observable(
            "conditioning needs nonempty classical and quantum sectors".into(),
        ));
    }
    let qgrid = subgrid(grid, &quantum)?;
    let cgrid = subgrid(grid, &cls)?;
    let dim = qgrid.cell_count();
    if dim > MAX_CONDITIONAL_BASIS {
        return Err(CoreError::Observable(format!(
            "quantum basis has {dim} cells; the dense matrix is capped at \
             {MAX_CONDITIONAL_BASIS} — condition on a coarser basis"
        )));
    }
    let qweights: Vec<f64> = (0..dim).map(|c| qgrid.weight(c)).collect();

    let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut included = 0.0;
    let mut excluded = 0.0;
    let mut base_idx = vec![0usize; grid.axes().len()];
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    for cc in 0..cgrid.cell_count() {
        let cidx = cgrid.unravel(cc);
        for (slot, &a) in cls.iter().enumerate() {
            base_idx[a] = cidx[slot];
        }
        // Marginal mass of this classical cell.
        let mut mass = 0.0;
        for qc in 0..dim {
            let qidx = qgrid.unravel(qc);
            for (slot, &a) in quantum.iter().enumerate() {
                base_idx[a] = qidx[slot];
            }
            mass += qweights[qc] * state.density().values()[grid.ravel(&base_idx)];
        }
        let wc = cgrid.weight(cc);
        if mass <= CONDITIONING_THRESHOLD {
            excluded += wc * mass;
            continue;
        }
        included += wc * mass;
        for qc in 0..dim {
            let qidx = qgrid.unravel(qc);
            for (slot, &a) in quantum.iter().enumerate() {
                base_idx[a] = qidx[slot];
            }
            let cell = grid.ravel(&base_idx);
            let p = state.density().values()[cell].max(0.0);
            psi[qc] =
                Complex64::from_polar((p / mass).sqrt(), state.phase().values()[cell] / hbar);
        }
        // ρ += w_c · mass · |ψ⟩⟨ψ| (upper triangle, mirrored below).
        let scale = wc * mass;
        for i in 0..dim {
            let pi = psi[i] * scale;
            for j in i..dim {
                matrix[i * dim + j] += pi * psi[j].conj();
            }
        }
    }
    if included <= 0.0 {
        return Err(CoreError::ConditioningOnNull(included));
    }
    let inv = 1.0 / included;
    for i in 0..dim {
        // Diagonal imaginary parts are pure rounding noise; drop them so the
        // operator is Hermitian exactly.
        matrix[i * dim + i] = Complex64::new(matrix[i * dim + i].re * inv, 0.0);
        for j in i + 1..dim {
            matrix[i * dim + j] *= inv;
            matrix[j * dim + i] = matrix[i * dim + j].conj();
        }
    }
    Ok(ConditionalDensityOperator {
        basis_grid: qgrid,
        matrix,
        basis_weights: qweights,
        excluded_mass: excluded,
    })
}

impl ConditionalDensityOperator {
    pub fn dim(&self) -> usize {
        self.basis_weights.len()
    }

    /// `tr ρ = Σ_a ρ_aa w_a`; equals 1 by construction up to rounding.
    pub fn trace(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.matrix[a * self.dim() + a].re * self.basis_weights[a])
            .sum()
    }

    /// `tr ρ² = Σ_ab |ρ_ab|² w_a w_b`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                acc += self.matrix[a * d + b].norm_sqr()
                    * self.basis_weights[a]
                    * self.basis_weights[b];
            }
        }
        acc
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                worst = worst.max((self.matrix[a * d + b] - self.matrix[b * d + a].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the weighted matrix (power iteration on the
    /// shifted operator); used to check positive semidefiniteness for small
    /// bases.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.matrix[a * self.dim() + a].re)
            .collect()
    }

    /// Eigen-decomposition for two-level quantum sectors:
    /// returns `(eigenvalue, eigenvector)` pairs sorted descending.
    pub fn eigen_two_level(&self) -> Result<[(f64, [Complex64; 2]); 2]> {
        if self.dim() != 2 {
            return Err(CoreError::Observable(
                "closed-form eigenbasis is for two-level sectors".into(),
            ));
        }
        let a = self.matrix[0].re;
        let b = self.matrix[3].re;
        let c = self.matrix[1];
        let mean = 0.5 * (a + b);
        let r = (0.25 * (a - b) * (a - b) + c.norm_sqr()).sqrt();
        let (l1, l2) = (mean + r, mean - r);
        // Two algebraically equivalent eigenvector forms; pick the one whose
        // leading entry is far from cancellation.
        let vec_for = |lambda: f64| -> [Complex64; 2] {
            let v = if (lambda - a).abs() > (lambda - b).abs() {
                [c, Complex64::new(lambda - a, 0.0)]
            } else {
                [Complex64::new(lambda - b, 0.0), c.conj()]
            };
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            if n < 1e-300 {
                // Degenerate multiple of the identity.
                return if lambda >= 0.5 * (a + b) {
                    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
                } else {
                    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
                };
            }
            [v[0] / n, v[1] / n]
        };
        Ok([(l1, vec_for(l1)), (l2, vec_for(l2))])
    }
}

/// Sum of absolute off-diagonal entries weighted by the basis measure:
/// zero iff the operator is diagonal in this basis.
pub fn coherence_norm(rho: &ConditionalDensityOperator) -> f64 {
    let d = rho.dim();
    let mut acc = 0.0;
    for a in 0..d {
        for b in 0..d {
            if a != b {
                acc += rho.matrix[a * d + b].norm() * rho.basis_weights[a] * rho.basis_weights[b];
            }
        }
    }
    acc
}
