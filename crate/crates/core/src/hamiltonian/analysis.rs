//! Structural operations on Hamiltonian specs: gradient verification,
//! classical limits, interaction tests, and the centre-of-mass/relative
//! split of hybrid pair Hamiltonians.

use crate::diffops::{gradient_into, inner, pairwise_sum};
use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::state::{product_state, EnsembleState};

use super::engine::face_quadratic;
use super::{AxisMass, HamiltonianSpec, PotentialSpec};

/// Relative residuals of the two variational derivatives against centred
/// finite differences of the energy functional.
#[derive(Debug, Clone, Copy)]
pub struct GradientCheck {
    /// Residual of `δH/δS` probed along the given direction.
    pub wrt_phase: f64,
    /// Residual of `δH/δP` probed along the given direction.
    pub wrt_density: f64,
}

/// Compare the analytic variational derivatives with centred finite
/// differences of `evaluate` under `S → S ± ε δ` and `P → P ± ε δ`.
pub fn functional_gradient_check(
    spec: &HamiltonianSpec,
    state: &EnsembleState,
    probe: &ScalarField,
    epsilon: f64,
) -> Result<GradientCheck> {
    if !probe.grid().same_layout(state.grid()) {
        return Err(CoreError::GridMismatch);
    }
    let e0 = spec.evaluate(state)?;
    let scale_floor = 1e-12 * (1.0 + e0.abs());

    let perturbed = |dp: f64, ds: f64| -> Result<f64> {
        let p = state
            .density()
            .zip_with(probe, |v, d| v + dp * d)?;
        let s = state.phase().zip_with(probe, |v, d| v + ds * d)?;
        let st = EnsembleState::from_parts_unchecked(p, s, state.time());
        spec.evaluate(&st)
    };

    let fd_s = (perturbed(0.0, epsilon)? - perturbed(0.0, -epsilon)?) / (2.0 * epsilon);
    let pred_s = inner(&spec.density_rate(state)?, probe)?;
    let wrt_phase = (fd_s - pred_s).abs() / fd_s.abs().max(pred_s.abs()).max(scale_floor);

    let fd_p = (perturbed(epsilon, 0.0)? - perturbed(-epsilon, 0.0)?) / (2.0 * epsilon);
    let dp_variation = spec.phase_rate(state)?.scaled(-1.0);
    let pred_p = inner(&dp_variation, probe)?;
    let wrt_density = (fd_p - pred_p).abs() / fd_p.abs().max(pred_p.abs()).max(scale_floor);

    Ok(GradientCheck {
        wrt_phase,
        wrt_density,
    })
}

/// Delete the Fisher kinetic term on the named axes. Returns the reduced
/// spec together with the names that carried no Fisher term (no-op warning
/// list).
pub fn classical_limit(
    spec: &HamiltonianSpec,
    axes: &[&str],
) -> Result<(HamiltonianSpec, Vec<String>)> {
    match spec {
        HamiltonianSpec::Classical { .. } => {
            Ok((spec.clone(), axes.iter().map(|s| s.to_string()).collect()))
        }
        HamiltonianSpec::FiniteQuantum { .. } => {
            Ok((spec.clone(), axes.iter().map(|s| s.to_string()).collect()))
        }
        HamiltonianSpec::Quantum {
            masses,
            potential,
            hbar,
        } => {
            let named: Vec<&str> = axes.to_vec();
            let unknown: Vec<String> = named
                .iter()
                .filter(|n| !masses.iter().any(|m| m.axis == **n))
                .map(|s| s.to_string())
                .collect();
            if !unknown.is_empty() {
                return Err(CoreError::InvalidHamiltonian(format!(
                    "axes not in spec: {unknown:?}"
                )));
            }
            let (removed, kept): (Vec<&AxisMass>, Vec<&AxisMass>) = masses
                .iter()
                .partition(|m| named.contains(&m.axis.as_str()));
            if kept.is_empty() {
                return Ok((
                    HamiltonianSpec::Classical {
                        masses: masses.clone(),
                        potential: potential.clone(),
                    },
                    Vec::new(),
                ));
            }
            // Partial limit: representable as a hybrid spec when each group
            // has a uniform mass.
            let uniform = |g: &[&AxisMass]| -> Option<f64> {
                let m0 = g[0].mass;
                g.iter().all(|m| m.mass == m0).then_some(m0)
            };
            match (uniform(&kept), uniform(&removed)) {
                (Some(mq), Some(mx)) => Ok((
                    HamiltonianSpec::HybridQC {
                        quantum_mass: mq,
                        classical_mass: mx,
                        q_axes: kept.iter().map(|m| m.axis.clone()).collect(),
                        x_axes: removed.iter().map(|m| m.axis.clone()).collect(),
                        potential: potential.clone(),
                        hbar: *hbar,
                    },
                    Vec::new(),
                )),
                _ => Err(CoreError::InvalidHamiltonian(
                    "partial classical limit needs a uniform mass per axis group".into(),
                )),
            }
        }
        HamiltonianSpec::HybridQC {
            quantum_mass,
            classical_mass,
            q_axes,
            x_axes,
            potential,
            hbar,
        } => {
            let noop: Vec<String> = axes
                .iter()
                .filter(|n| x_axes.iter().any(|x| x == *n))
                .map(|s| s.to_string())
                .collect();
            let named_q: Vec<&str> = axes
                .iter()
                .filter(|n| q_axes.iter().any(|q| q == *n))
                .cloned()
                .collect();
            if named_q.len() == q_axes.len() {
                let mut masses: Vec<AxisMass> = q_axes
                    .iter()
                    .map(|a| AxisMass::new(a, *quantum_mass))
                    .collect();
                masses.extend(x_axes.iter().map(|a| AxisMass::new(a, *classical_mass)));
                Ok((
                    HamiltonianSpec::Classical {
                        masses,
                        potential: potential.clone(),
                    },
                    noop,
                ))
            } else if named_q.is_empty() {
                Ok((spec.clone(), noop))
            } else if quantum_mass == classical_mass {
                let keep: Vec<String> = q_axes
                    .iter()
                    .filter(|q| !named_q.contains(&q.as_str()))
                    .cloned()
                    .collect();
                let mut moved = x_axes.clone();
                moved.extend(named_q.iter().map(|s| s.to_string()));
                Ok((
                    HamiltonianSpec::HybridQC {
                        quantum_mass: *quantum_mass,
                        classical_mass: *classical_mass,
                        q_axes: keep,
                        x_axes: moved,
                        potential: potential.clone(),
                        hbar: *hbar,
                    },
                    noop,
                ))
            } else {
                Err(CoreError::InvalidHamiltonian(
                    "partial classical limit of a hybrid spec needs equal group masses".into(),
                ))
            }
        }
        HamiltonianSpec::HybridOscillator {
            quantum_mass,
            classical_mass,
            spring,
            q_axes,
            x_axes,
            ..
        } => {
            let named_q: Vec<&str> = axes
                .iter()
                .filter(|n| q_axes.iter().any(|q| q == *n))
                .cloned()
                .collect();
            let noop: Vec<String> = axes
                .iter()
                .filter(|n| !q_axes.iter().any(|q| q == *n))
                .map(|s| s.to_string())
                .collect();
            if named_q.len() != q_axes.len() {
                if named_q.is_empty() {
                    return Ok((spec.clone(), noop));
                }
                return Err(CoreError::InvalidHamiltonian(
                    "partial classical limit of the oscillator is not representable".into(),
                ));
            }
            let mut masses: Vec<AxisMass> = q_axes
                .iter()
                .map(|a| AxisMass::new(a, *quantum_mass))
                .collect();
            masses.extend(x_axes.iter().map(|a| AxisMass::new(a, *classical_mass)));
            Ok((
                HamiltonianSpec::Classical {
                    masses,
                    potential: PotentialSpec::SpringPair {
                        spring: *spring,
                        q_axes: q_axes.clone(),
                        x_axes: x_axes.clone(),
                    },
                },
                noop,
            ))
        }
        HamiltonianSpec::SpinPointer {
            pointer_mass,
            potential,
            coupling,
            hbar,
            quantum_pointer,
        } => {
            if *quantum_pointer {
                Ok((
                    HamiltonianSpec::SpinPointer {
                        pointer_mass: *pointer_mass,
                        potential: potential.clone(),
                        coupling: coupling.clone(),
                        hbar: *hbar,
                        quantum_pointer: false,
                    },
                    Vec::new(),
                ))
            } else {
                Ok((spec.clone(), axes.iter().map(|s| s.to_string()).collect()))
            }
        }
        HamiltonianSpec::PositionMeasurement { base, coupling } => {
            let (reduced, noop) = classical_limit(base, axes)?;
            Ok((
                HamiltonianSpec::PositionMeasurement {
                    base: Box::new(reduced),
                    coupling: coupling.clone(),
                },
                noop,
            ))
        }
    }
}

/// `|H_joint[P_a P_b, S_a + S_b] - H_a[P_a,S_a] - H_b[P_b,S_b]|`: zero iff
/// initially independent ensembles stay independent under the joint spec.
pub fn noninteraction_residual(
    joint: &HamiltonianSpec,
    a: &EnsembleState,
    b: &EnsembleState,
    spec_a: &HamiltonianSpec,
    spec_b: &HamiltonianSpec,
) -> Result<f64> {
    let ab = product_state(a, b)?;
    let e_joint = joint.evaluate(&ab)?;
    let e_a = spec_a.evaluate(a)?;
    let e_b = spec_b.evaluate(b)?;
    Ok((e_joint - e_a - e_b).abs())
}

/// Energy of a hybrid pair spec split into centre-of-mass, relative, and
/// intrinsic cross contributions. Their sum reproduces `evaluate` exactly
/// because the diagonal blocks reuse its face-difference sums and the mixed
/// blocks cancel algebraically in the total.
#[derive(Debug, Clone, Copy)]
pub struct ComRelativeSplit {
    pub com: f64,
    pub relative: f64,
    pub cross: f64,
}

impl ComRelativeSplit {
    pub fn total(&self) -> f64 {
        self.com + self.relative + self.cross
    }
}

pub fn com_relative_split(
    spec: &HamiltonianSpec,
    state: &EnsembleState,
) -> Result<ComRelativeSplit> {
    let (m, mm, q_axes, x_axes, potential, hbar) = match spec {
        HamiltonianSpec::HybridQC {
            quantum_mass,
            classical_mass,
            q_axes,
            x_axes,
            potential,
            hbar,
        } => (
            *quantum_mass,
            *classical_mass,
            q_axes.clone(),
            x_axes.clone(),
            potential.clone(),
            *hbar,
        ),
        HamiltonianSpec::HybridOscillator {
            quantum_mass,
            classical_mass,
            spring,
            q_axes,
            x_axes,
            hbar,
        } => (
            *quantum_mass,
            *classical_mass,
            q_axes.clone(),
            x_axes.clone(),
            PotentialSpec::SpringPair {
                spring: *spring,
                q_axes: q_axes.clone(),
                x_axes: x_axes.clone(),
            },
            *hbar,
        ),
        _ => {
            return Err(CoreError::InvalidHamiltonian(
                "centre-of-mass split is defined for hybrid pair specs".into(),
            ))
        }
    };
    if !potential.is_translation_invariant() {
        return Err(CoreError::InvalidHamiltonian(
            "centre-of-mass split needs a translation-invariant potential".into(),
        ));
    }
    if q_axes.len() != x_axes.len() {
        return Err(CoreError::InvalidHamiltonian(
            "hybrid pair needs equally many quantum and classical axes".into(),
        ));
    }
    let grid = state.grid();
    let p = state.density().values();
    let s = state.phase().values();
    let u: Vec<f64> = p.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let weights = grid.weights();
    let mt = m + mm;
    let mu = m * mm / mt;
    let h2 = hbar * hbar;

    let mut com = 0.0;
    let mut rel = 0.0;
    let mut cross = 0.0;
    let mut ga = vec![0.0f64; grid.cell_count()];
    let mut gb = vec![0.0f64; grid.cell_count()];
    for (qn, xn) in q_axes.iter().zip(&x_axes) {
        let qa = grid.axis_index(qn)?;
        let xa = grid.axis_index(xn)?;
        // Face-difference diagonal blocks (identical to evaluate's sums).
        let ts_qq = face_quadratic(grid, qa, s, Some(p));
        let ts_xx = face_quadratic(grid, xa, s, Some(p));
        let f_qq = face_quadratic(grid, qa, &u, None);
        let f_xx = face_quadratic(grid, xa, &u, None);
        // Co-located mixed blocks (central differences at cells).
        gradient_into(grid, s, qa, &mut ga);
        gradient_into(grid, s, xa, &mut gb);
        let ts_qx = weighted_product_sum(&weights, Some(p), &ga, &gb);
        gradient_into(grid, &u, qa, &mut ga);
        gradient_into(grid, &u, xa, &mut gb);
        let f_qx = weighted_product_sum(&weights, None, &ga, &gb);

        com += (ts_qq + 2.0 * ts_qx + ts_xx) / (2.0 * mt)
            + h2 * m / (2.0 * mt * mt) * (f_qq + 2.0 * f_qx + f_xx);
        rel += (mm * mm * ts_qq - 2.0 * m * mm * ts_qx + m * m * ts_xx) / (2.0 * mu * mt * mt)
            + h2 / (2.0 * m * mt * mt)
                * (mm * mm * f_qq - 2.0 * m * mm * f_qx + m * m * f_xx);
        cross += h2 / (mt * mt) * (mm * f_qq + (mm - m) * f_qx - m * f_xx);
    }
    // The potential depends on q - x = r only: it belongs to the relative
    // term, summed exactly as evaluate does.
    let (vbase, schedules) = potential.lower(grid)?;
    let factor: f64 = schedules
        .iter()
        .map(|sch| sch.value(state.time()))
        .product();
    let terms: Vec<f64> = p
        .iter()
        .zip(&vbase)
        .zip(&weights)
        .map(|((&pv, &vv), &w)| w * pv * vv)
        .collect();
    rel += factor * pairwise_sum(&terms);

    Ok(ComRelativeSplit {
        com,
        relative: rel,
        cross,
    })
}

fn weighted_product_sum(w: &[f64], p: Option<&[f64]>, a: &[f64], b: &[f64]) -> f64 {
    let terms: Vec<f64> = match p {
        Some(p) => w
            .iter()
            .zip(p)
            .zip(a.iter().zip(b))
            .map(|((&w, &p), (&a, &b))| w * p * a * b)
            .collect(),
        None => w
            .iter()
            .zip(a.iter().zip(b))
            .map(|(&w, (&a, &b))| w * a * b)
            .collect(),
    };
    pairwise_sum(&terms)
}
