//! Derived quantities and symmetry transforms: marginals, conditional
//! quantum objects, decoherence diagnostics, Fisher information, the
//! translation generators, and Galilean maps.

mod density;
mod galilean;

pub use density::{
    coherence_norm, conditional_density_operator, conditional_wavefunction,
    ConditionalDensityOperator, CONDITIONING_THRESHOLD, MAX_CONDITIONAL_BASIS,
};
pub use galilean::{galilean_transform, GalileanElement};

use std::sync::Arc;

use crate::diffops::{gradient_into, pairwise_sum};
use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::hamiltonian::SquareMatrix;
use crate::interp::{resample, InterpKind};
use crate::state::{EnsembleState, DEFAULT_FLOOR_REL};

/// Integrate the density over all axes not in `keep`, returning a field on
/// the sub-grid of the kept axes (in their original order).
pub fn marginal(state: &EnsembleState, keep: &[&str]) -> Result<ScalarField> {
    if keep.is_empty() {
        return Err(CoreError::Observable("keep at least one axis".into()));
    }
    let grid = state.grid();
    let mut kept: Vec<usize> = Vec::new();
    for name in keep {
        let a = grid.axis_index(name)?;
        if kept.contains(&a) {
            return Err(CoreError::Observable(format!("axis `{name}` repeated")));
        }
        kept.push(a);
    }
    kept.sort_unstable();
    let sub_axes: Vec<_> = kept.iter().map(|&a| grid.axis(a).clone()).collect();
    let sub = Grid::new(sub_axes)?;
    let dropped: Vec<usize> = (0..grid.axes().len())
        .filter(|a| !kept.contains(a))
        .collect();
    let mut out = vec![0.0f64; sub.cell_count()];
    for cell in 0..grid.cell_count() {
        let idx = grid.unravel(cell);
        let w: f64 = dropped
            .iter()
            .map(|&a| grid.axis(a).weight(idx[a]))
            .product();
        let sub_idx: Vec<usize> = kept.iter().map(|&a| idx[a]).collect();
        out[sub.ravel(&sub_idx)] += w * state.density().values()[cell];
    }
    Ok(ScalarField::from_raw(sub, out))
}

/// Fisher information matrix `⟨(∇log P)(∇log P)ᵀ⟩` over the named
/// continuous axes, with the standard density floor in the logarithm.
pub fn fisher_information(density: &ScalarField, axes: &[&str]) -> Result<SquareMatrix> {
    let grid = density.grid();
    let idx: Vec<usize> = axes
        .iter()
        .map(|a| grid.axis_index(a))
        .collect::<Result<_>>()?;
    for &a in &idx {
        if !grid.axis(a).is_continuous() {
            return Err(CoreError::UnsupportedAxis(grid.axis(a).name.clone()));
        }
    }
    let n = idx.len();
    let floor = DEFAULT_FLOOR_REL * density.max_value();
    let w = grid.weights();
    let mut grads = Vec::with_capacity(n);
    for &a in &idx {
        let mut g = vec![0.0f64; grid.cell_count()];
        gradient_into(grid, density.values(), a, &mut g);
        grads.push(g);
    }
    let mut out = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let terms: Vec<f64> = (0..grid.cell_count())
                .map(|c| {
                    let p = density.values()[c];
                    let pf = p.max(floor);
                    w[c] * p * (grads[i][c] / pf) * (grads[j][c] / pf)
                })
                .collect();
            let v = pairwise_sum(&terms);
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    Ok(out)
}

/// The ensemble momentum `Π = ⟨∇S⟩` and position `X = ⟨x⟩`, one component
/// per continuous axis in grid order.
pub fn ensemble_momentum_and_position(state: &EnsembleState) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = state.grid();
    let w = grid.weights();
    let p = state.density().values();
    let mut momentum = Vec::new();
    let mut position = Vec::new();
    let mut grad = vec![0.0f64; grid.cell_count()];
    for (a, axis) in grid.continuous_axes() {
        gradient_into(grid, state.phase().values(), a, &mut grad);
        let terms: Vec<f64> = p
            .iter()
            .zip(&w)
            .zip(&grad)
            .map(|((&pv, &wv), &g)| wv * pv * g)
            .collect();
        momentum.push(pairwise_sum(&terms));
        let stride = grid.strides()[a];
        let len = axis.len();
        let terms: Vec<f64> = p
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(cell, (&pv, &wv))| wv * pv * axis.coord((cell / stride) % len))
            .collect();
        position.push(pairwise_sum(&terms));
    }
    Ok((momentum, position))
}

/// The momentum generator `a·Π`: translate both fields,
/// `P(x), S(x) → P(x-a), S(x-a)`.
pub fn translate(state: &EnsembleState, shifts: &[f64]) -> Result<EnsembleState> {
    let grid = state.grid();
    let cont: Vec<usize> = grid.continuous_axes().map(|(i, _)| i).collect();
    if shifts.len() != cont.len() {
        return Err(CoreError::Observable(format!(
            "{} shifts for {} continuous axes",
            shifts.len(),
            cont.len()
        )));
    }
    let map = |c: &[f64]| {
        let mut src = c.to_vec();
        for (j, &a) in cont.iter().enumerate() {
            src[a] -= shifts[j];
        }
        src
    };
    let p = resample(state.density(), map, InterpKind::MonotoneCubic, 0.0);
    let s = resample(state.phase(), map, InterpKind::CatmullRom, 0.0);
    Ok(EnsembleState::from_parts_unchecked(p, s, state.time()))
}

/// The position generator `b·X`: `S → S - b·x` with `P` unchanged.
pub fn phase_tilt(state: &EnsembleState, tilt: &[f64]) -> Result<EnsembleState> {
    let grid = state.grid();
    let cont: Vec<usize> = grid.continuous_axes().map(|(i, _)| i).collect();
    if tilt.len() != cont.len() {
        return Err(CoreError::Observable(format!(
            "{} tilt components for {} continuous axes",
            tilt.len(),
            cont.len()
        )));
    }
    let s = ScalarField::from_raw(
        grid.clone(),
        (0..grid.cell_count())
            .map(|cell| {
                let coords = grid.coords(cell);
                let mut v = state.phase().values()[cell];
                for (j, &a) in cont.iter().enumerate() {
                    v -= tilt[j] * coords[a];
                }
                v
            })
            .collect(),
    );
    Ok(EnsembleState::from_parts_unchecked(
        state.density().clone(),
        s,
        state.time(),
    ))
}

/// Gibbs entropy `-∫ P log P` with `0 log 0 = 0`.
pub fn gibbs_entropy(density: &ScalarField) -> Result<f64> {
    let w = density.grid().weights();
    let terms: Vec<f64> = density
        .values()
        .iter()
        .zip(&w)
        .map(|(&p, &wv)| if p > 0.0 { -wv * p * p.ln() } else { 0.0 })
        .collect();
    Ok(pairwise_sum(&terms))
}

pub(crate) fn subgrid(grid: &Arc<Grid>, axes: &[usize]) -> Result<Arc<Grid>> {
    Grid::new(axes.iter().map(|&a| grid.axis(a).clone()).collect())
}
