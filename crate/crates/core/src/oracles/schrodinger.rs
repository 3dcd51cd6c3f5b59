//! Independent wavefunction reference: Strang split-step Fourier evolution
//! of `iħ ∂ψ/∂t = -(ħ²/2m)∇²ψ + Vψ` on a periodic 1-D grid. Shares no code
//! with the configuration-ensemble integrator.

use num_complex::Complex64;

use crate::axis::Boundary;
use crate::error::{CoreError, Result};
use crate::fftutil::{fft_inplace, wavenumber};
use crate::hamiltonian::PotentialSpec;
use crate::state::ComplexField;

pub fn split_step_reference(
    psi0: &ComplexField,
    potential: &PotentialSpec,
    mass: f64,
    hbar: f64,
    dt: f64,
    t_end: f64,
) -> Result<ComplexField> {
    let grid = &psi0.grid;
    if grid.axes().len() != 1 || grid.axis(0).boundary() != Some(Boundary::Periodic) {
        return Err(CoreError::Oracle(
            "the split-step reference runs on a single periodic axis".into(),
        ));
    }
    if !(dt > 0.0) || t_end < 0.0 {
        return Err(CoreError::Oracle("need dt > 0 and t_end >= 0".into()));
    }
    let (v, schedules) = potential.lower(grid)?;
    if !schedules.is_empty() {
        return Err(CoreError::Oracle(
            "the split-step reference supports time-independent potentials".into(),
        ));
    }
    let n = grid.cell_count();
    let length = grid.axis(0).spacing().unwrap() * n as f64;
    let steps = ((t_end / dt - 1e-9).ceil() as usize).max(1);
    let dt = t_end / steps as f64;

    let half_v: Vec<Complex64> = v
        .iter()
        .map(|&vv| Complex64::from_polar(1.0, -0.5 * vv * dt / hbar))
        .collect();
    let kinetic: Vec<Complex64> = (0..n)
        .map(|j| {
            let k = wavenumber(j, n, length);
            Complex64::from_polar(1.0, -hbar * k * k * dt / (2.0 * mass))
        })
        .collect();

    let mut psi = psi0.values.clone();
    for _ in 0..steps {
        for (z, f) in psi.iter_mut().zip(&half_v) {
            *z *= f;
        }
        fft_inplace(&mut psi, false);
        for (z, f) in psi.iter_mut().zip(&kinetic) {
            *z *= f;
        }
        fft_inplace(&mut psi, true);
        for (z, f) in psi.iter_mut().zip(&half_v) {
            *z *= f;
        }
    }
    Ok(ComplexField {
        grid: grid.clone(),
        values: psi,
    })
}
