//! Exact measurement shift maps: the closed-form end states of impulsive
//! readout couplings, with `K = ∫κ(t) dt`.

use crate::axis::Boundary;
use crate::diffops::pairwise_sum;
use crate::error::{CoreError, Result};
use crate::interp::{resample, InterpKind};
use crate::state::EnsembleState;

const LEAK_LIMIT: f64 = 1e-8;

/// `P(q,x,T) = P(q, x - Kq, 0)` and likewise for `S`: the pointer position
/// picks up `K` times the measured coordinate.
pub fn position_measurement_map(
    state: &EnsembleState,
    q_axis: &str,
    x_axis: &str,
    shift_strength: f64,
) -> Result<EnsembleState> {
    let grid = state.grid();
    let qa = grid.axis_index(q_axis)?;
    let xa = grid.axis_index(x_axis)?;
    for a in [qa, xa] {
        if !grid.axis(a).is_continuous() {
            return Err(CoreError::UnsupportedAxis(grid.axis(a).name.clone()));
        }
    }
    if grid.axis(xa).boundary() == Some(Boundary::Clamped) {
        let (min, max) = axis_range(grid, xa);
        let w = grid.weights();
        let leak_terms: Vec<f64> = (0..grid.cell_count())
            .map(|cell| {
                let c = grid.coords(cell);
                let image = c[xa] + shift_strength * c[qa];
                if image < min || image > max {
                    w[cell] * state.density().values()[cell]
                } else {
                    0.0
                }
            })
            .collect();
        let leak = pairwise_sum(&leak_terms);
        if leak > LEAK_LIMIT {
            return Err(CoreError::Oracle(format!(
                "shift map moves {leak:.3e} probability out of the domain (limit {LEAK_LIMIT:.0e})"
            )));
        }
    }
    let map = |c: &[f64]| {
        let mut src = c.to_vec();
        src[xa] -= shift_strength * c[qa];
        src
    };
    let p = resample(state.density(), map, InterpKind::MonotoneCubic, 0.0);
    let s = resample(state.phase(), map, InterpKind::CatmullRom, 0.0);
    Ok(EnsembleState::from_parts_unchecked(p, s, state.time()))
}

/// `P(x,α,T) = P(x - αK, α, 0)`: each spin branch's pointer density is
/// displaced by `±K`.
pub fn spin_measurement_map(
    state: &EnsembleState,
    x_axis: &str,
    spin_axis: &str,
    shift: f64,
) -> Result<EnsembleState> {
    let grid = state.grid();
    let xa = grid.axis_index(x_axis)?;
    let sa = grid.axis_index(spin_axis)?;
    if !grid.axis(xa).is_continuous() {
        return Err(CoreError::UnsupportedAxis(grid.axis(xa).name.clone()));
    }
    if grid.axis(sa).is_continuous() || grid.axis(sa).len() != 2 {
        return Err(CoreError::IncompatibleAxes(
            "spin shift maps need a two-label spin axis".into(),
        ));
    }
    if grid.axis(xa).boundary() == Some(Boundary::Clamped) {
        let (min, max) = axis_range(grid, xa);
        let w = grid.weights();
        let leak_terms: Vec<f64> = (0..grid.cell_count())
            .map(|cell| {
                let c = grid.coords(cell);
                let alpha = if c[sa] == 0.0 { 1.0 } else { -1.0 };
                let image = c[xa] + alpha * shift;
                if image < min || image > max {
                    w[cell] * state.density().values()[cell]
                } else {
                    0.0
                }
            })
            .collect();
        let leak = pairwise_sum(&leak_terms);
        if leak > LEAK_LIMIT {
            return Err(CoreError::Oracle(format!(
                "shift map moves {leak:.3e} probability out of the domain (limit {LEAK_LIMIT:.0e})"
            )));
        }
    }
    let map = |c: &[f64]| {
        let alpha = if c[sa] == 0.0 { 1.0 } else { -1.0 };
        let mut src = c.to_vec();
        src[xa] -= alpha * shift;
        src
    };
    let p = resample(state.density(), map, InterpKind::MonotoneCubic, 0.0);
    let s = resample(state.phase(), map, InterpKind::CatmullRom, 0.0);
    Ok(EnsembleState::from_parts_unchecked(p, s, state.time()))
}

fn axis_range(grid: &crate::grid::Grid, a: usize) -> (f64, f64) {
    match &grid.axis(a).kind {
        crate::axis::AxisKind::Continuous { min, max, .. } => (*min, *max),
        _ => unreachable!(),
    }
}
