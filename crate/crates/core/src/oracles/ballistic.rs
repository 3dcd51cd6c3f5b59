//! Ballistic transport of a well-localized classical density: the ensemble
//! rides the Newtonian trajectory of its centroid.

use crate::diffops::{integrate, pairwise_sum};
use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::hamiltonian::PotentialSpec;
use crate::interp::{resample, InterpKind};

/// Closed-form Newtonian trajectory from `(x0, v0)` under the supported
/// potentials. Returns `(x_t, v_t)`.
pub fn newtonian_trajectory(
    x0: &[f64],
    v0: &[f64],
    potential: &PotentialSpec,
    mass: f64,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match potential {
        PotentialSpec::Zero => Ok((
            x0.iter().zip(v0).map(|(&x, &v)| x + v * t).collect(),
            v0.to_vec(),
        )),
        PotentialSpec::Harmonic { spring, center } => {
            if center.len() != x0.len() {
                return Err(CoreError::Oracle(
                    "harmonic center dimension mismatch".into(),
                ));
            }
            let omega = (spring / mass).sqrt();
            let (c, s) = ((omega * t).cos(), (omega * t).sin());
            let mut x = Vec::with_capacity(x0.len());
            let mut v = Vec::with_capacity(x0.len());
            for i in 0..x0.len() {
                let dx = x0[i] - center[i];
                x.push(center[i] + dx * c + v0[i] / omega * s);
                v.push(-dx * omega * s + v0[i] * c);
            }
            Ok((x, v))
        }
        _ => Err(CoreError::Oracle(
            "ballistic transport supports free and harmonic potentials".into(),
        )),
    }
}

/// `P(x,t) ≈ P₀(x - (x_t - x₀))` with `x_t` the Newtonian trajectory from
/// the centroid of `P₀` with velocity `v`.
pub fn ballistic_transport(
    p0: &ScalarField,
    velocity: &[f64],
    potential: &PotentialSpec,
    mass: f64,
    t: f64,
) -> Result<ScalarField> {
    let grid = p0.grid();
    let cont: Vec<usize> = grid.continuous_axes().map(|(i, _)| i).collect();
    if velocity.len() != cont.len() {
        return Err(CoreError::Oracle(format!(
            "{} velocity components for {} continuous axes",
            velocity.len(),
            cont.len()
        )));
    }
    let norm = integrate(p0)?;
    let w = grid.weights();
    let mut centroid = Vec::with_capacity(cont.len());
    for &a in &cont {
        let stride = grid.strides()[a];
        let len = grid.axis(a).len();
        let terms: Vec<f64> = p0
            .values()
            .iter()
            .zip(&w)
            .enumerate()
            .map(|(cell, (&pv, &wv))| wv * pv * grid.axis(a).coord((cell / stride) % len))
            .collect();
        centroid.push(pairwise_sum(&terms) / norm);
    }
    let (xt, _) = newtonian_trajectory(&centroid, velocity, potential, mass, t)?;
    let shift: Vec<f64> = xt.iter().zip(&centroid).map(|(&a, &b)| a - b).collect();
    Ok(resample(
        p0,
        |c| {
            let mut src = c.to_vec();
            for (j, &a) in cont.iter().enumerate() {
                src[a] -= shift[j];
            }
            src
        },
        InterpKind::MonotoneCubic,
        0.0,
    ))
}
