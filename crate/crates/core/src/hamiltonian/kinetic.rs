//! Block kinetic matrices of the hybrid oscillator's quadratic-form
//! representation.

use crate::error::{CoreError, Result};

/// Small dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    a: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut a = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n);
            a.extend_from_slice(r);
        }
        SquareMatrix { n, a }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += aik * other.a[k * n + j];
                }
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> SquareMatrix {
        SquareMatrix {
            n: self.n,
            a: self.a.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        SquareMatrix {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in i + 1..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_idempotent(&self, tol: f64) -> bool {
        self.mul(self).max_abs_diff(self) <= tol
    }

    /// Quadratic form `vᵀ A v`.
    pub fn quad(&self, v: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.a[i * n + j] * v[j];
            }
            acc += v[i] * row;
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i * self.n + i]).sum()
    }
}

/// The (U, E, C) blocks of the hybrid oscillator in hybrid coordinates
/// `ξ = (q, x)`: U is the inverse-mass block diagonal, E projects onto the
/// quantum block, and C is the spring coupling.
#[derive(Debug, Clone)]
pub struct KineticMatrix {
    pub inverse_mass: SquareMatrix,
    pub quantum_projector: SquareMatrix,
    pub coupling: SquareMatrix,
}

impl KineticMatrix {
    pub fn hybrid_oscillator(
        quantum_mass: f64,
        classical_mass: f64,
        spring: f64,
        n_dims: usize,
    ) -> Result<KineticMatrix> {
        if quantum_mass <= 0.0 || classical_mass <= 0.0 {
            return Err(CoreError::InvalidHamiltonian("masses must be positive".into()));
        }
        let n = 2 * n_dims;
        let mut u = SquareMatrix::zeros(n);
        let mut e = SquareMatrix::zeros(n);
        let mut c = SquareMatrix::zeros(n);
        for i in 0..n_dims {
            u.set(i, i, 1.0 / quantum_mass);
            u.set(n_dims + i, n_dims + i, 1.0 / classical_mass);
            e.set(i, i, 1.0);
            c.set(i, i, spring);
            c.set(n_dims + i, n_dims + i, spring);
            c.set(i, n_dims + i, -spring);
            c.set(n_dims + i, i, -spring);
        }
        let km = KineticMatrix {
            inverse_mass: u,
            quantum_projector: e,
            coupling: c,
        };
        km.validate()?;
        Ok(km)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.inverse_mass.is_symmetric(1e-12)
            || (0..self.inverse_mass.dim()).any(|i| self.inverse_mass.get(i, i) <= 0.0)
        {
            return Err(CoreError::InvalidHamiltonian(
                "U must be symmetric positive definite".into(),
            ));
        }
        if !self.quantum_projector.is_idempotent(1e-12) {
            return Err(CoreError::InvalidHamiltonian("E must be idempotent".into()));
        }
        if !self.coupling.is_symmetric(1e-12) {
            return Err(CoreError::InvalidHamiltonian("C must be symmetric".into()));
        }
        Ok(())
    }

    /// `E U E`, the quantum-sector inverse mass.
    pub fn quantum_inverse_mass(&self) -> SquareMatrix {
        self.quantum_projector
            .mul(&self.inverse_mass)
            .mul(&self.quantum_projector)
    }
}
