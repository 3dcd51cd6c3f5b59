//! Tensor-product grids over mixed continuous/discrete axes.
//!
//! Cells are stored row-major in axis order; `strides[a]` converts an index
//! along axis `a` into a flat offset. Quadrature weights are the product of
//! per-axis weights, which keeps integration exact on constants and makes
//! face-based energy sums telescope.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::axis::{AxisSpec, Boundary};
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<AxisSpec>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    cells: usize,
}

impl Grid {
    pub fn new(axes: Vec<AxisSpec>) -> Result<Arc<Grid>> {
        if axes.is_empty() {
            return Err(CoreError::InvalidGrid("no axes".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            a.validate()?;
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(CoreError::InvalidGrid(format!(
                    "duplicate axis name `{}`",
                    a.name
                )));
            }
        }
        let mut grid = Grid {
            axes,
            strides: Vec::new(),
            cells: 0,
        };
        grid.rebuild_layout();
        Ok(Arc::new(grid))
    }

    /// Recompute strides/cell count (needed after deserialization).
    pub fn rebuild_layout(&mut self) {
        let n = self.axes.len();
        let mut strides = vec![0usize; n];
        let mut acc = 1usize;
        for a in (0..n).rev() {
            strides[a] = acc;
            acc *= self.axes[a].len();
        }
        self.strides = strides;
        self.cells = acc;
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &AxisSpec {
        &self.axes[a]
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| CoreError::NoSuchAxis(name.to_string()))
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Product of continuous spacings (discrete axes contribute a factor 1).
    pub fn cell_measure(&self) -> f64 {
        self.axes.iter().filter_map(|a| a.spacing()).product()
    }

    pub fn continuous_axes(&self) -> impl Iterator<Item = (usize, &AxisSpec)> {
        self.axes.iter().enumerate().filter(|(_, a)| a.is_continuous())
    }

    /// Flat index -> per-axis indices.
    pub fn unravel(&self, mut cell: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.axes.len()];
        for a in 0..self.axes.len() {
            idx[a] = cell / self.strides[a];
            cell %= self.strides[a];
        }
        idx
    }

    /// Per-axis indices -> flat index.
    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.strides)
            .map(|(i, s)| i * s)
            .sum()
    }

    /// Coordinates of a cell (continuous axes only keep physical meaning;
    /// discrete axes report the label index as a float).
    pub fn coords(&self, cell: usize) -> Vec<f64> {
        self.unravel(cell)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.coord(i))
            .collect()
    }

    /// Quadrature weight of a cell: product of per-axis weights.
    pub fn weight(&self, cell: usize) -> f64 {
        self.unravel(cell)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.weight(i))
            .product()
    }

    /// Precomputed per-cell quadrature weights.
    pub fn weights(&self) -> Vec<f64> {
        // Outer-product fill, cheaper than calling weight() per cell.
        let mut w = vec![1.0f64; self.cells];
        for (a, axis) in self.axes.iter().enumerate() {
            let stride = self.strides[a];
            let len = axis.len();
            let wa: Vec<f64> = (0..len).map(|i| axis.weight(i)).collect();
            for (cell, wv) in w.iter_mut().enumerate() {
                let i = (cell / stride) % len;
                *wv *= wa[i];
            }
        }
        w
    }

    /// True when every cell of the grid sits on the boundary-free interior of
    /// all clamped axes.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for cell in 0..self.cells {
            let idx = self.unravel(cell);
            for (a, axis) in self.axes.iter().enumerate() {
                if axis.boundary() == Some(Boundary::Clamped)
                    && (idx[a] == 0 || idx[a] + 1 == axis.len())
                {
                    out.push(cell);
                    break;
                }
            }
        }
        out
    }

    /// Iterate the 1-D lines of the grid along `axis`: yields the flat offset
    /// of the first cell of each line. Successive cells of the line are
    /// `offset + k*strides[axis]`.
    pub fn lines(&self, axis: usize) -> LineIter<'_> {
        LineIter {
            grid: self,
            axis,
            next: 0,
            remaining: self.cells / self.axes[axis].len(),
        }
    }

    /// Quadrature weight of a line transverse to `axis` (product of the other
    /// axes' weights at the line's fixed indices).
    pub fn transverse_weight(&self, axis: usize, line_offset: usize) -> f64 {
        let idx = self.unravel(line_offset);
        idx.iter()
            .zip(self.axes.iter())
            .enumerate()
            .filter(|(a, _)| *a != axis)
            .map(|(_, (&i, ax))| ax.weight(i))
            .product()
    }

    pub fn same_layout(&self, other: &Grid) -> bool {
        self.axes == other.axes
    }
}

pub struct LineIter<'g> {
    grid: &'g Grid,
    axis: usize,
    next: usize,
    remaining: usize,
}

impl Iterator for LineIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.remaining == 0 {
            return None;
        }
        let offset = self.next;
        self.remaining -= 1;
        // Advance to the next line: increment indices of all axes except
        // `self.axis` in row-major order.
        let mut idx = self.grid.unravel(offset);
        let n = idx.len();
        let mut a = n;
        while a > 0 {
            a -= 1;
            if a == self.axis {
                continue;
            }
            idx[a] += 1;
            if idx[a] < self.grid.axes[a].len() {
                break;
            }
            idx[a] = 0;
        }
        self.next = self.grid.ravel(&idx);
        Some(offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_2d() -> Arc<Grid> {
        Grid::new(vec![
            AxisSpec::continuous("q", -1.0, 1.0, 8, Boundary::Clamped).unwrap(),
            AxisSpec::continuous("x", 0.0, 2.0, 10, Boundary::Periodic).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn cell_count_is_product_of_axis_lengths() {
        let g = grid_2d();
        assert_eq!(g.cell_count(), 80);
        assert_eq!(g.strides(), &[10, 1]);
    }

    #[test]
    fn cell_measure_is_product_of_spacings() {
        let g = grid_2d();
        let hq = 2.0 / 7.0;
        let hx = 0.2;
        assert!((g.cell_measure() - hq * hx).abs() < 1e-15);
        assert!(g.cell_measure() > 0.0);
    }

    #[test]
    fn weights_sum_to_domain_volume() {
        let g = grid_2d();
        let vol: f64 = g.weights().iter().sum();
        assert!((vol - 2.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn discrete_axes_weight_one() {
        let g = Grid::new(vec![
            AxisSpec::discrete("spin", &["+", "-"]).unwrap(),
            AxisSpec::continuous("x", 0.0, 1.0, 8, Boundary::Clamped).unwrap(),
        ])
        .unwrap();
        let vol: f64 = g.weights().iter().sum();
        assert!((vol - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ravel_unravel_roundtrip() {
        let g = grid_2d();
        for cell in [0usize, 1, 9, 10, 79] {
            assert_eq!(g.ravel(&g.unravel(cell)), cell);
        }
    }

    #[test]
    fn line_iteration_covers_grid() {
        let g = grid_2d();
        for axis in 0..2 {
            let lines: Vec<usize> = g.lines(axis).collect();
            assert_eq!(lines.len(), g.cell_count() / g.axis(axis).len());
            let mut seen = vec![false; g.cell_count()];
            for off in lines {
                for k in 0..g.axis(axis).len() {
                    let c = off + k * g.strides()[axis];
                    assert!(!seen[c]);
                    seen[c] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn rejects_duplicate_axis_names() {
        let r = Grid::new(vec![
            AxisSpec::continuous("x", 0.0, 1.0, 8, Boundary::Clamped).unwrap(),
            AxisSpec::continuous("x", 0.0, 1.0, 8, Boundary::Clamped).unwrap(),
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn rejects_too_few_points() {
        assert!(AxisSpec::continuous("x", 0.0, 1.0, 4, Boundary::Clamped).is_err());
    }
}
