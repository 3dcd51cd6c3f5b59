//! Real scalar fields on a grid.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::grid::Grid;

/// A real value per grid cell. Immutable once constructed; cheap to clone the
/// grid handle, and safe to move between threads by value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    /// Construct from raw values, rejecting length mismatches and non-finite
    /// entries (with the offending cell index).
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(CoreError::LengthMismatch {
                got: values.len(),
                expected: grid.cell_count(),
            });
        }
        for (cell, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(CoreError::NonFinite { cell, value: v });
            }
        }
        Ok(ScalarField { grid, values })
    }

    /// Construct without the finiteness scan. For internal stepping buffers;
    /// monitors re-validate.
    pub(crate) fn from_raw(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cell_count());
        ScalarField { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Self {
        let n = grid.cell_count();
        ScalarField {
            grid,
            values: vec![value; n],
        }
    }

    /// Sample a function of the cell coordinates.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values: Vec<f64> = (0..grid.cell_count()).map(|c| f(&grid.coords(c))).collect();
        ScalarField::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && !self.grid.same_layout(&other.grid) {
            return Err(CoreError::GridMismatch);
        }
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    pub fn shifted(&self, c: f64) -> ScalarField {
        self.map(|v| v + c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::{AxisSpec, Boundary};

    fn grid() -> Arc<Grid> {
        Grid::new(vec![
            AxisSpec::continuous("x", 0.0, 1.0, 8, Boundary::Clamped).unwrap()
        ])
        .unwrap()
    }

    #[test]
    fn rejects_wrong_length() {
        let r = ScalarField::new(grid(), vec![0.0; 7]);
        assert!(matches!(r, Err(CoreError::LengthMismatch { .. })));
    }

    #[test]
    fn rejects_non_finite_with_cell_index() {
        let mut v = vec![0.0; 8];
        v[5] = f64::NAN;
        match ScalarField::new(grid(), v) {
            Err(CoreError::NonFinite { cell, .. }) => assert_eq!(cell, 5),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn from_fn_samples_coordinates() {
        let f = ScalarField::from_fn(grid(), |x| x[0] * 2.0).unwrap();
        assert!((f.values()[7] - 2.0).abs() < 1e-15);
    }
}
