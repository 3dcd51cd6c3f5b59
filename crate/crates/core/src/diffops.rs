//! Quadrature and finite-difference operators on scalar fields.
//!
//! All stencils are second order: central differences in the interior,
//! periodic wrap or one-sided second-order forms at clamped boundaries.

use crate::axis::Boundary;
use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;

/// Pairwise (cascade) summation: deterministic and more accurate than a
/// running sum on long arrays.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Integrate a field over the configuration space: weighted sum of cell
/// values (spacing weights on continuous axes, plain sums on discrete axes).
pub fn integrate(f: &ScalarField) -> Result<f64> {
    for (cell, &v) in f.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(CoreError::NonFinite { cell, value: v });
        }
    }
    let w = f.grid().weights();
    let terms: Vec<f64> = f.values().iter().zip(&w).map(|(&v, &wi)| v * wi).collect();
    Ok(pairwise_sum(&terms))
}

/// Quadrature inner product `∫ f g`.
pub fn inner(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    integrate(&f.zip_with(g, |a, b| a * b)?)
}

/// Central-difference gradient along a continuous axis.
pub fn gradient(f: &ScalarField, axis_name: &str) -> Result<ScalarField> {
    let grid = f.grid();
    let a = grid.axis_index(axis_name)?;
    let axis = grid.axis(a);
    if !axis.is_continuous() {
        return Err(CoreError::UnsupportedAxis(axis_name.to_string()));
    }
    let mut out = vec![0.0f64; f.len()];
    gradient_into(grid, f.values(), a, &mut out);
    Ok(ScalarField::from_raw(grid.clone(), out))
}

/// Gradient kernel writing into a caller-supplied buffer.
pub(crate) fn gradient_into(grid: &Grid, v: &[f64], axis: usize, out: &mut [f64]) {
    let n = grid.axis(axis).len();
    let h = grid.axis(axis).spacing().expect("continuous axis");
    let s = grid.strides()[axis];
    let inv2h = 0.5 / h;
    match grid.axis(axis).boundary().unwrap() {
        Boundary::Periodic => {
            for base in grid.lines(axis) {
                for k in 0..n {
                    let up = v[base + ((k + 1) % n) * s];
                    let dn = v[base + ((k + n - 1) % n) * s];
                    out[base + k * s] = (up - dn) * inv2h;
                }
            }
        }
        Boundary::Clamped => {
            for base in grid.lines(axis) {
                let at = |k: usize| v[base + k * s];
                out[base] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h;
                for k in 1..n - 1 {
                    out[base + k * s] = (at(k + 1) - at(k - 1)) * inv2h;
                }
                out[base + (n - 1) * s] =
                    (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h;
            }
        }
    }
}

/// Divergence of a vector field given one component per continuous axis, in
/// axis order: the sum of per-axis gradients of the components.
pub fn divergence(components: &[ScalarField]) -> Result<ScalarField> {
    if components.is_empty() {
        return Err(CoreError::GridMismatch);
    }
    let grid = components[0].grid();
    let cont: Vec<usize> = grid.continuous_axes().map(|(i, _)| i).collect();
    if components.len() != cont.len() {
        return Err(CoreError::GridMismatch);
    }
    for c in components {
        if !grid.same_layout(c.grid()) {
            return Err(CoreError::GridMismatch);
        }
    }
    let mut acc = vec![0.0f64; grid.cell_count()];
    let mut buf = vec![0.0f64; grid.cell_count()];
    for (comp, &a) in components.iter().zip(&cont) {
        gradient_into(grid, comp.values(), a, &mut buf);
        for (acc_v, &b) in acc.iter_mut().zip(&buf) {
            *acc_v += b;
        }
    }
    Ok(ScalarField::from_raw(grid.clone(), acc))
}

/// Compact three-point Laplacian along one axis (Neumann-consistent one-sided
/// form at clamped edges: the exact gradient of the face-difference energy).
pub(crate) fn laplacian_axis_into(grid: &Grid, v: &[f64], axis: usize, out: &mut [f64]) {
    let n = grid.axis(axis).len();
    let h = grid.axis(axis).spacing().expect("continuous axis");
    let s = grid.strides()[axis];
    let inv_h2 = 1.0 / (h * h);
    match grid.axis(axis).boundary().unwrap() {
        Boundary::Periodic => {
            for base in grid.lines(axis) {
                for k in 0..n {
                    let up = v[base + ((k + 1) % n) * s];
                    let dn = v[base + ((k + n - 1) % n) * s];
                    let c = v[base + k * s];
                    out[base + k * s] = (up - 2.0 * c + dn) * inv_h2;
                }
            }
        }
        Boundary::Clamped => {
            // Edge rows take the one-sided form 2(u1-u0)/h^2: the exact
            // derivative of the face energy with trapezoid cell weights.
            for base in grid.lines(axis) {
                let at = |k: usize| v[base + k * s];
                out[base] = 2.0 * (at(1) - at(0)) * inv_h2;
                for k in 1..n - 1 {
                    out[base + k * s] = (at(k + 1) - 2.0 * at(k) + at(k - 1)) * inv_h2;
                }
                out[base + (n - 1) * s] = 2.0 * (at(n - 2) - at(n - 1)) * inv_h2;
            }
        }
    }
}
