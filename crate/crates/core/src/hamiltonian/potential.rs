//! Potential terms and time schedules for ensemble Hamiltonians.

use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::Grid;

/// Time dependence of a coupling or a scaled potential. The integral of each
/// form is available in closed form because oracle comparisons need it
/// exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant { value: f64 },
    /// `value` on `[start, end)`, zero outside.
    TopHat { start: f64, end: f64, value: f64 },
    /// `amplitude * exp(-(t-center)^2 / (2 width^2))`.
    GaussianPulse {
        center: f64,
        width: f64,
        amplitude: f64,
    },
}

impl Schedule {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant { value } => *value,
            Schedule::TopHat { start, end, value } => {
                if t >= *start && t < *end {
                    *value
                } else {
                    0.0
                }
            }
            Schedule::GaussianPulse {
                center,
                width,
                amplitude,
            } => {
                let z = (t - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
        }
    }

    /// `∫_{t0}^{t1} value(t) dt`, analytic per form.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        match self {
            Schedule::Constant { value } => value * (t1 - t0),
            Schedule::TopHat { start, end, value } => {
                let lo = t0.max(*start);
                let hi = t1.min(*end);
                value * (hi - lo).max(0.0)
            }
            Schedule::GaussianPulse {
                center,
                width,
                amplitude,
            } => {
                let sqrt2 = std::f64::consts::SQRT_2;
                let z0 = (t0 - center) / (width * sqrt2);
                let z1 = (t1 - center) / (width * sqrt2);
                amplitude * width * (std::f64::consts::PI / 2.0).sqrt() * (erf(z1) - erf(z0))
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            Schedule::Constant { value } => value.abs(),
            Schedule::TopHat { value, .. } => value.abs(),
            Schedule::GaussianPulse { amplitude, .. } => amplitude.abs(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Schedule::Constant { .. })
    }
}

/// Error function, Abramowitz & Stegun 7.1.26 (|error| <= 1.5e-7). Only used
/// for Gaussian-pulse schedule integrals, whose downstream tolerances are
/// far looser.
pub fn erf(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Named radial profiles for translation-invariant pair potentials.
#[derive(Debug, Clone, PartialEq)]
pub enum PairProfile {
    /// `½ k r²`
    Spring { spring: f64 },
    /// `-depth * exp(-r² / (2 width²))`
    GaussianWell { depth: f64, width: f64 },
}

impl PairProfile {
    pub fn value(&self, r2: f64) -> f64 {
        match self {
            PairProfile::Spring { spring } => 0.5 * spring * r2,
            PairProfile::GaussianWell { depth, width } => {
                -depth * (-r2 / (2.0 * width * width)).exp()
            }
        }
    }
}

/// Potential energy densities available to the Hamiltonian catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    /// `½ k Σ_a (x_a - center_a)²` over the continuous axes.
    Harmonic { spring: f64, center: Vec<f64> },
    /// `½ k |q - x|²` over paired axis groups.
    SpringPair {
        spring: f64,
        q_axes: Vec<String>,
        x_axes: Vec<String>,
    },
    /// Named profile of `|q - x|`.
    TranslationInvariant {
        profile: PairProfile,
        q_axes: Vec<String>,
        x_axes: Vec<String>,
    },
    /// Arbitrary values sampled on the state grid.
    Tabulated { field: ScalarField },
    /// `κ(t) * base`.
    TimeScaled {
        base: Box<PotentialSpec>,
        schedule: Schedule,
    },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Harmonic { spring, .. } | PotentialSpec::SpringPair { spring, .. } => {
                if *spring < 0.0 {
                    return Err(CoreError::InvalidHamiltonian(
                        "spring constants must be nonnegative".into(),
                    ));
                }
            }
            PotentialSpec::TimeScaled { base, .. } => base.validate()?,
            _ => {}
        }
        Ok(())
    }

    /// True when the potential depends on the configuration only through
    /// `q - x` of the given axis pairing.
    pub fn is_translation_invariant(&self) -> bool {
        matches!(
            self,
            PotentialSpec::Zero
                | PotentialSpec::SpringPair { .. }
                | PotentialSpec::TranslationInvariant { .. }
        )
    }

    /// Sample the time-independent base values on a grid and collect the
    /// multiplicative schedules.
    pub fn lower(&self, grid: &Arc<Grid>) -> Result<(Vec<f64>, Vec<Schedule>)> {
        self.validate()?;
        match self {
            PotentialSpec::Zero => Ok((vec![0.0; grid.cell_count()], Vec::new())),
            PotentialSpec::Harmonic { spring, center } => {
                let cont: Vec<usize> = grid.continuous_axes().map(|(i, _)| i).collect();
                if center.len() != cont.len() {
                    return Err(CoreError::InvalidHamiltonian(format!(
                        "harmonic center has {} entries for {} continuous axes",
                        center.len(),
                        cont.len()
                    )));
                }
                let k = *spring;
                let mut v = vec![0.0f64; grid.cell_count()];
                for (cell, val) in v.iter_mut().enumerate() {
                    let coords = grid.coords(cell);
                    let mut r2 = 0.0;
                    for (j, &a) in cont.iter().enumerate() {
                        let d = coords[a] - center[j];
                        r2 += d * d;
                    }
                    *val = 0.5 * k * r2;
                }
                Ok((v, Vec::new()))
            }
            PotentialSpec::SpringPair {
                spring,
                q_axes,
                x_axes,
            } => {
                let profile = PairProfile::Spring { spring: *spring };
                pair_values(grid, &profile, q_axes, x_axes).map(|v| (v, Vec::new()))
            }
            PotentialSpec::TranslationInvariant {
                profile,
                q_axes,
                x_axes,
            } => pair_values(grid, profile, q_axes, x_axes).map(|v| (v, Vec::new())),
            PotentialSpec::Tabulated { field } => {
                if !field.grid().same_layout(grid) {
                    return Err(CoreError::GridMismatch);
                }
                Ok((field.values().to_vec(), Vec::new()))
            }
            PotentialSpec::TimeScaled { base, schedule } => {
                let (v, mut scheds) = base.lower(grid)?;
                scheds.push(schedule.clone());
                Ok((v, scheds))
            }
        }
    }
}

fn pair_values(
    grid: &Arc<Grid>,
    profile: &PairProfile,
    q_axes: &[String],
    x_axes: &[String],
) -> Result<Vec<f64>> {
    if q_axes.len() != x_axes.len() || q_axes.is_empty() {
        return Err(CoreError::InvalidHamiltonian(
            "pair potentials need equally many q and x axes".into(),
        ));
    }
    let qi: Vec<usize> = q_axes
        .iter()
        .map(|n| grid.axis_index(n))
        .collect::<Result<_>>()?;
    let xi: Vec<usize> = x_axes
        .iter()
        .map(|n| grid.axis_index(n))
        .collect::<Result<_>>()?;
    let mut v = vec![0.0f64; grid.cell_count()];
    for (cell, val) in v.iter_mut().enumerate() {
        let coords = grid.coords(cell);
        let mut r2 = 0.0;
        for (&a, &b) in qi.iter().zip(&xi) {
            let d = coords[a] - coords[b];
            r2 += d * d;
        }
        *val = profile.value(r2);
    }
    Ok(v)
}
