//! Galilean transformations of hybrid ensembles:
//! `q → Rq - ut + a`, `x → Rx - ut + a`, `t → t + τ`, with
//! `P'(q',x',t') = P(q,x,t)` and
//! `S' = S + ½(m+M)|u|² t - u·R(mq + Mx) + const`.

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::hamiltonian::SquareMatrix;
use crate::interp::{resample, sample, InterpKind};
use crate::state::EnsembleState;

#[derive(Debug, Clone)]
pub struct GalileanElement {
    /// Orthogonal rotation acting on the n spatial dimensions of each block.
    pub rotation: SquareMatrix,
    pub boost: Vec<f64>,
    pub translation: Vec<f64>,
    pub time_shift: f64,
}

impl GalileanElement {
    pub fn identity(n: usize) -> Self {
        GalileanElement {
            rotation: SquareMatrix::identity(n),
            boost: vec![0.0; n],
            translation: vec![0.0; n],
            time_shift: 0.0,
        }
    }

    pub fn boost(u: &[f64]) -> Self {
        let mut g = Self::identity(u.len());
        g.boost = u.to_vec();
        g
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rotation.dim();
        if self.boost.len() != n || self.translation.len() != n {
            return Err(CoreError::Observable(
                "boost/translation dimension must match the rotation".into(),
            ));
        }
        // RᵀR = 1 within 1e-12.
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.rotation.get(k, i) * self.rotation.get(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                if (acc - expect).abs() > 1e-12 {
                    return Err(CoreError::Observable(
                        "rotation matrix is not orthogonal".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> GalileanElement {
        let n = self.rotation.dim();
        let mut rt = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                rt.set(i, j, self.rotation.get(j, i));
            }
        }
        let apply_rt = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| (0..n).map(|k| self.rotation.get(k, i) * v[k]).sum())
                .collect()
        };
        let rtu = apply_rt(&self.boost);
        let shifted: Vec<f64> = self
            .boost
            .iter()
            .zip(&self.translation)
            .map(|(&u, &a)| u * self.time_shift + a)
            .collect();
        let rts = apply_rt(&shifted);
        GalileanElement {
            rotation: rt,
            boost: rtu.iter().map(|v| -v).collect(),
            translation: rts.iter().map(|v| -v).collect(),
            time_shift: -self.time_shift,
        }
    }

    fn apply(&self, v: &[f64], t: f64) -> Vec<f64> {
        let n = self.rotation.dim();
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.rotation.get(i, k) * v[k];
                }
                acc - self.boost[i] * t + self.translation[i]
            })
            .collect()
    }

    fn apply_inverse(&self, v: &[f64], t: f64) -> Vec<f64> {
        // ξ = Rᵀ(ξ' + u t - a) with t the pre-transform time.
        let n = self.rotation.dim();
        let shifted: Vec<f64> = (0..n)
            .map(|i| v[i] + self.boost[i] * t - self.translation[i])
            .collect();
        (0..n)
            .map(|i| (0..n).map(|k| self.rotation.get(k, i) * shifted[k]).sum())
            .collect()
    }
}

/// Transform a hybrid state. The quantum and classical axis groups list the
/// n spatial dimensions of each particle; either group may be empty (purely
/// quantum or purely classical ensembles).
pub fn galilean_transform(
    state: &EnsembleState,
    element: &GalileanElement,
    quantum_mass: f64,
    classical_mass: f64,
    q_axes: &[&str],
    x_axes: &[&str],
) -> Result<EnsembleState> {
    element.validate()?;
    let grid = state.grid();
    let n = element.rotation.dim();
    if (!q_axes.is_empty() && q_axes.len() != n) || (!x_axes.is_empty() && x_axes.len() != n) {
        return Err(CoreError::Observable(format!(
            "axis groups must have the rotation's dimension {n}"
        )));
    }
    let qi: Vec<usize> = q_axes
        .iter()
        .map(|a| grid.axis_index(a))
        .collect::<Result<_>>()?;
    let xi: Vec<usize> = x_axes
        .iter()
        .map(|a| grid.axis_index(a))
        .collect::<Result<_>>()?;
    let t = state.time();
    let u2: f64 = element.boost.iter().map(|v| v * v).sum();
    let mq = if qi.is_empty() { 0.0 } else { quantum_mass };
    let mx = if xi.is_empty() { 0.0 } else { classical_mass };
    let total_mass = mq + mx;

    // Source coordinates for each target cell.
    let source = |coords: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let take = |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&a| coords[a]).collect() };
        let q_new = take(&qi);
        let x_new = take(&xi);
        let q_old = if qi.is_empty() {
            Vec::new()
        } else {
            element.apply_inverse(&q_new, t)
        };
        let x_old = if xi.is_empty() {
            Vec::new()
        } else {
            element.apply_inverse(&x_new, t)
        };
        let mut src = coords.to_vec();
        for (slot, &a) in qi.iter().enumerate() {
            src[a] = q_old[slot];
        }
        for (slot, &a) in xi.iter().enumerate() {
            src[a] = x_old[slot];
        }
        (src, q_old, x_old)
    };

    let p_new = resample(
        state.density(),
        |c| source(c).0,
        InterpKind::MonotoneCubic,
        0.0,
    );
    let grid2 = grid.clone();
    let s_values: Vec<f64> = (0..grid2.cell_count())
        .map(|cell| {
            let coords = grid2.coords(cell);
            let (src, q_old, x_old) = source(&coords);
            let s_old = sample(state.phase(), &src, InterpKind::CatmullRom).unwrap_or(0.0);
            // u·R(m q + M x) evaluated at the source configuration.
            let mut weighted = vec![0.0f64; n];
            for slot in 0..n {
                if !qi.is_empty() {
                    weighted[slot] += quantum_mass * q_old[slot];
                }
                if !xi.is_empty() {
                    weighted[slot] += classical_mass * x_old[slot];
                }
            }
            let mut coupling = 0.0;
            for i in 0..n {
                let mut rot = 0.0;
                for k in 0..n {
                    rot += element.rotation.get(i, k) * weighted[k];
                }
                coupling += element.boost[i] * rot;
            }
            s_old + 0.5 * total_mass * u2 * t - coupling
        })
        .collect();
    let s_new = ScalarField::from_raw(grid.clone(), s_values);
    Ok(EnsembleState::from_parts_unchecked(
        p_new,
        s_new,
        t + element.time_shift,
    ))
}
