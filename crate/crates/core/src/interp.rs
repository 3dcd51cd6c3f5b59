//! Tensor-product cubic interpolation on grids.
//!
//! Densities use a monotonicity-limited Hermite kernel (no overshoot, keeps
//! interpolated probabilities nonnegative); phases use plain Catmull-Rom.
//! Both kernels reproduce nodal values exactly, so integer-cell shifts are
//! exact relabelings.

use crate::axis::Boundary;
use crate::field::ScalarField;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpKind {
    /// Fritsch-Carlson limited cubic Hermite: monotone between nodes.
    MonotoneCubic,
    /// Catmull-Rom cubic.
    CatmullRom,
}

fn hermite(f0: f64, f1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * f0
        + (t3 - 2.0 * t2 + t) * d0
        + (-2.0 * t3 + 3.0 * t2) * f1
        + (t3 - t2) * d1
}

fn kernel(kind: InterpKind, fm1: f64, f0: f64, f1: f64, f2: f64, t: f64) -> f64 {
    let mut d0 = 0.5 * (f1 - fm1);
    let mut d1 = 0.5 * (f2 - f0);
    if kind == InterpKind::MonotoneCubic {
        let delta = f1 - f0;
        if delta == 0.0 {
            d0 = 0.0;
            d1 = 0.0;
        } else {
            let alpha = d0 / delta;
            let beta = d1 / delta;
            if alpha < 0.0 {
                d0 = 0.0;
            } else if alpha > 3.0 {
                d0 = 3.0 * delta;
            }
            if beta < 0.0 {
                d1 = 0.0;
            } else if beta > 3.0 {
                d1 = 3.0 * delta;
            }
        }
    }
    hermite(f0, f1, d0, d1, t)
}

/// Per-axis stencil: the four node indices (or `None` past a clamped edge,
/// which replicates the edge value) and the fraction within the central
/// interval.
struct AxisStencil {
    idx: [usize; 4],
    frac: f64,
}

fn axis_stencil(grid: &Grid, axis: usize, coord: f64) -> Option<AxisStencil> {
    let ax = grid.axis(axis);
    match ax.boundary() {
        None => {
            // Discrete axes must land exactly on a label index.
            let i = coord.round();
            if (coord - i).abs() > 1e-9 || i < 0.0 || i as usize >= ax.len() {
                return None;
            }
            let i = i as usize;
            Some(AxisStencil {
                idx: [i; 4],
                frac: 0.0,
            })
        }
        Some(Boundary::Periodic) => {
            let h = ax.spacing().unwrap();
            let n = ax.len() as isize;
            let min = match &ax.kind {
                crate::axis::AxisKind::Continuous { min, .. } => *min,
                _ => unreachable!(),
            };
            let u = (coord - min) / h;
            let i0 = u.floor();
            let frac = u - i0;
            let wrap = |k: isize| -> usize { (k.rem_euclid(n)) as usize };
            let i0 = i0 as isize;
            Some(AxisStencil {
                idx: [wrap(i0 - 1), wrap(i0), wrap(i0 + 1), wrap(i0 + 2)],
                frac,
            })
        }
        Some(Boundary::Clamped) => {
            let h = ax.spacing().unwrap();
            let n = ax.len() as isize;
            let min = match &ax.kind {
                crate::axis::AxisKind::Continuous { min, .. } => *min,
                _ => unreachable!(),
            };
            let u = (coord - min) / h;
            if u < -1e-12 || u > (n - 1) as f64 + 1e-12 {
                return None;
            }
            let u = u.clamp(0.0, (n - 1) as f64);
            let mut i0 = u.floor() as isize;
            if i0 > n - 2 {
                i0 = n - 2;
            }
            let frac = u - i0 as f64;
            let edge = |k: isize| -> usize { k.clamp(0, n - 1) as usize };
            Some(AxisStencil {
                idx: [edge(i0 - 1), edge(i0), edge(i0 + 1), edge(i0 + 2)],
                frac,
            })
        }
    }
}

fn eval_recursive(
    values: &[f64],
    grid: &Grid,
    stencils: &[AxisStencil],
    axis: usize,
    offset: usize,
    kind: InterpKind,
) -> f64 {
    let st = &stencils[axis];
    let stride = grid.strides()[axis];
    let mut f = [0.0f64; 4];
    for (slot, &i) in st.idx.iter().enumerate() {
        let off = offset + i * stride;
        f[slot] = if axis + 1 == grid.axes().len() {
            values[off]
        } else {
            eval_recursive(values, grid, stencils, axis + 1, off, kind)
        };
    }
    if st.frac == 0.0 && st.idx[1] == st.idx[2] {
        // Discrete axis slot: all four indices coincide.
        f[1]
    } else {
        kernel(kind, f[0], f[1], f[2], f[3], st.frac)
    }
}

/// Interpolate a field at an arbitrary point. Returns `None` when the point
/// leaves the domain of a clamped axis or misses a discrete label.
pub fn sample(field: &ScalarField, coords: &[f64], kind: InterpKind) -> Option<f64> {
    let grid = field.grid();
    debug_assert_eq!(coords.len(), grid.axes().len());
    let mut stencils = Vec::with_capacity(coords.len());
    for (axis, &c) in coords.iter().enumerate() {
        stencils.push(axis_stencil(grid, axis, c)?);
    }
    let v = eval_recursive(field.values(), grid, &stencils, 0, 0, kind);
    Some(match kind {
        InterpKind::MonotoneCubic => v.max(0.0),
        InterpKind::CatmullRom => v,
    })
}

/// Resample a field through a target-to-source coordinate map: the output at
/// each cell is the input sampled at `map(cell coordinates)`; out-of-domain
/// points take `fill`.
pub fn resample(
    field: &ScalarField,
    map: impl Fn(&[f64]) -> Vec<f64>,
    kind: InterpKind,
    fill: f64,
) -> ScalarField {
    let grid = field.grid();
    let values: Vec<f64> = (0..grid.cell_count())
        .map(|cell| {
            let src = map(&grid.coords(cell));
            sample(field, &src, kind).unwrap_or(fill)
        })
        .collect();
    ScalarField::from_raw(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::AxisSpec;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn nodal_values_reproduced_exactly() {
        let g = Grid::new(vec![
            AxisSpec::continuous("x", -2.0, 2.0, 33, Boundary::Clamped).unwrap()
        ])
        .unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| (x[0] * 1.1).sin() + 1.5).unwrap();
        for cell in 0..g.cell_count() {
            let c = g.coords(cell);
            for kind in [InterpKind::MonotoneCubic, InterpKind::CatmullRom] {
                let v = sample(&f, &c, kind).unwrap();
                assert!((v - f.values()[cell]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cubic_accuracy_on_smooth_function() {
        let g = Grid::new(vec![
            AxisSpec::continuous("x", 0.0, 2.0 * PI, 128, Boundary::Periodic).unwrap()
        ])
        .unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| x[0].sin() + 2.0).unwrap();
        let h: f64 = 2.0 * PI / 128.0;
        for k in 0..256 {
            let x = 0.013 + k as f64 * 0.024;
            let v = sample(&f, &[x], InterpKind::CatmullRom).unwrap();
            assert!(
                (v - (x.sin() + 2.0)).abs() < 2.0 * h.powi(3),
                "x = {x}: {v}"
            );
        }
    }

    #[test]
    fn monotone_kernel_does_not_overshoot() {
        let g = Grid::new(vec![
            AxisSpec::continuous("x", 0.0, 1.0, 9, Boundary::Clamped).unwrap()
        ])
        .unwrap();
        // Step-like data: plain cubic overshoots, the limited kernel must not.
        let f = ScalarField::new(
            g.clone(),
            vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0],
        )
        .unwrap();
        for k in 0..200 {
            let x = k as f64 / 199.0;
            let v = sample(&f, &[x], InterpKind::MonotoneCubic).unwrap();
            assert!((-1e-15..=1.0 + 1e-15).contains(&v), "x = {x}: {v}");
        }
    }

    #[test]
    fn clamped_out_of_domain_is_none() {
        let g = Grid::new(vec![
            AxisSpec::continuous("x", 0.0, 1.0, 9, Boundary::Clamped).unwrap()
        ])
        .unwrap();
        let f = ScalarField::constant(g, 1.0);
        assert!(sample(&f, &[1.2], InterpKind::CatmullRom).is_none());
        assert!(sample(&f, &[-0.1], InterpKind::CatmullRom).is_none());
    }

    #[test]
    fn periodic_wraps() {
        let g = Grid::new(vec![
            AxisSpec::continuous("x", 0.0, 2.0 * PI, 64, Boundary::Periodic).unwrap()
        ])
        .unwrap();
        let f = ScalarField::from_fn(g, |x| x[0].cos()).unwrap();
        let a = sample(&f, &[0.1], InterpKind::CatmullRom).unwrap();
        let b = sample(&f, &[0.1 + 2.0 * PI], InterpKind::CatmullRom).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn integer_cell_shift_is_exact_relabeling() {
        let g = Grid::new(vec![
            AxisSpec::continuous("x", 0.0, 1.0, 16, Boundary::Periodic).unwrap()
        ])
        .unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| (x[0] * 9.0).sin().abs() + 0.1).unwrap();
        let h = 1.0 / 16.0;
        let shifted = resample(&f, |c| vec![c[0] - 3.0 * h], InterpKind::MonotoneCubic, 0.0);
        for j in 0..16 {
            assert!((shifted.values()[(j + 3) % 16] - f.values()[j]).abs() < 1e-14);
        }
    }
}
