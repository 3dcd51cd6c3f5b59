//! Minisuperspace cosmology: a closed Robertson-Walker universe coupled to a
//! massive scalar field, in units where 2G/3π = 1.
//!
//! With the stationary ansatz the constraint reduces to a 1-D eigenproblem
//! in the field coordinate whose normalizable solutions exist only for
//! quantized scale factors `a_n - Λa_n³/3 = 2ħm(n + ½)`. The scale factor is
//! a sharp label (never gridded): each mode carries its radius symbolically
//! next to its field-space density.

use crate::diffops::pairwise_sum;
use crate::error::{CoreError, Result};
use crate::fftutil::spectral_second_derivative;
use crate::hermite::hermite_functions;
use crate::state::DEFAULT_FLOOR_REL;
use crate::tridiag::schrodinger_operator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinisuperspaceParams {
    pub hbar: f64,
    /// Mass of the scalar field.
    pub field_mass: f64,
    /// Cosmological constant.
    pub lambda: f64,
}

impl MinisuperspaceParams {
    pub fn validate(&self) -> Result<()> {
        if self.hbar <= 0.0 || self.field_mass <= 0.0 {
            return Err(CoreError::Cosmology(
                "hbar and the field mass must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One sharply-defined-radius solution: the label `a_n` together with its
/// field-space profile.
#[derive(Debug, Clone)]
pub struct CosmologyMode {
    pub index: usize,
    pub radius: f64,
    /// `λ_n = √(a_n³ m / ħ)`, the inverse width of the mode.
    pub scale: f64,
    pub spacing: f64,
    pub phi_first: f64,
    /// Signed eigenfunction `ψ_n(φ)`; the density is its square.
    pub wavefunction: Vec<f64>,
    /// Normalized field-space density `P_n(φ)`.
    pub density: Vec<f64>,
}

impl CosmologyMode {
    pub fn phi(&self, i: usize) -> f64 {
        self.phi_first + i as f64 * self.spacing
    }

    pub fn node_count(&self) -> usize {
        count_nodes(&self.wavefunction)
    }

    /// Entropy of the profile in the mode's intrinsic coordinate `z = λφ`:
    /// `entropy() + ln λ_n`. Invariant under the level-dependent width
    /// rescaling, it measures the structure of the shape alone and grows
    /// with the node count.
    pub fn shape_entropy(&self) -> f64 {
        self.entropy() + self.scale.ln()
    }

    /// `-∫ P log P` over the field coordinate.
    pub fn entropy(&self) -> f64 {
        let terms: Vec<f64> = self
            .density
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let w = self.weight(i);
                if p > 0.0 {
                    -w * p * p.ln()
                } else {
                    0.0
                }
            })
            .collect();
        pairwise_sum(&terms)
    }

    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.density.len() {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }
}

pub fn count_nodes(wavefunction: &[f64]) -> usize {
    let scale = wavefunction.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let mut last_sign = 0i8;
    let mut nodes = 0;
    for &v in wavefunction {
        if v.abs() <= tol {
            continue;
        }
        let s = if v > 0.0 { 1 } else { -1 };
        if last_sign != 0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }
    nodes
}

/// All positive roots of `a - Λa³/3 = 2ħm(n + ½)` for each `n ≤ n_max`,
/// ascending; an empty entry means no sharply-defined radius exists for that
/// level.
pub fn quantized_radii(params: &MinisuperspaceParams, n_max: usize) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let rhs = 2.0 * params.hbar * params.field_mass * (n as f64 + 0.5);
        out.push(positive_roots(params.lambda, rhs));
    }
    Ok(out)
}

/// The smallest positive root per level (the branch continuously connected
/// to the Λ = 0 spectrum); `None` when the level has no root.
pub fn smallest_radii(params: &MinisuperspaceParams, n_max: usize) -> Result<Vec<Option<f64>>> {
    Ok(quantized_radii(params, n_max)?
        .into_iter()
        .map(|roots| roots.first().copied())
        .collect())
}

fn cubic(lambda: f64, a: f64, rhs: f64) -> f64 {
    a - lambda * a * a * a / 3.0 - rhs
}

fn bisect(lambda: f64, rhs: f64, mut lo: f64, mut hi: f64) -> f64 {
    // Invariant: sign change across [lo, hi].
    let flo = cubic(lambda, lo, rhs);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = cubic(lambda, mid, rhs);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn positive_roots(lambda: f64, rhs: f64) -> Vec<f64> {
    if lambda == 0.0 {
        return vec![rhs];
    }
    if lambda < 0.0 {
        // Strictly increasing; a single positive root.
        let mut hi = rhs.max(1.0);
        while cubic(lambda, hi, rhs) < 0.0 {
            hi *= 2.0;
        }
        return vec![bisect(lambda, rhs, 0.0, hi)];
    }
    // lambda > 0: the cubic rises to its maximum at a* = 1/√Λ then falls.
    let a_star = 1.0 / lambda.sqrt();
    let peak = cubic(lambda, a_star, rhs);
    if peak < 0.0 {
        return Vec::new();
    }
    if peak == 0.0 {
        return vec![a_star];
    }
    let lower = bisect(lambda, rhs, 0.0, a_star);
    let mut hi = 2.0 * a_star;
    while cubic(lambda, hi, rhs) > 0.0 {
        hi *= 2.0;
    }
    let upper = bisect(lambda, rhs, a_star, hi);
    vec![lower, upper]
}

/// Sample mode `n` on a symmetric φ lattice sized in units of the mode's
/// own width: the half-width is `scaled_half_width / λ_n` and must cover at
/// least `8/λ_n`.
pub fn mode_density(
    params: &MinisuperspaceParams,
    n: usize,
    scaled_half_width: f64,
    points: usize,
) -> Result<CosmologyMode> {
    params.validate()?;
    if points < 16 || points % 2 == 0 {
        return Err(CoreError::Cosmology(
            "mode sampling needs an odd point count >= 17 (symmetric lattice)".into(),
        ));
    }
    if scaled_half_width < 8.0 {
        return Err(CoreError::Cosmology(format!(
            "grid half-width must cover at least 8/λ_n; got {scaled_half_width}/λ_n"
        )));
    }
    let radius = smallest_radii(params, n)?[n].ok_or_else(|| {
        CoreError::Cosmology(format!("no sharply-defined radius exists for level {n}"))
    })?;
    let scale = (radius.powi(3) * params.field_mass / params.hbar).sqrt();
    let half_width = scaled_half_width / scale;
    let spacing = 2.0 * half_width / (points as f64 - 1.0);
    let mut wavefunction = Vec::with_capacity(points);
    for i in 0..points {
        let phi = -half_width + i as f64 * spacing;
        wavefunction.push(scale.sqrt() * hermite_functions(n, scale * phi)[n]);
    }
    let mut density: Vec<f64> = wavefunction.iter().map(|&v| v * v).collect();
    let norm: f64 = density
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let w = if i == 0 || i + 1 == points {
                0.5 * spacing
            } else {
                spacing
            };
            w * p
        })
        .sum();
    let inv = 1.0 / norm;
    for (p, w) in density.iter_mut().zip(wavefunction.iter_mut()) {
        *p *= inv;
        *w *= inv.sqrt();
    }
    Ok(CosmologyMode {
        index: n,
        radius,
        scale,
        spacing,
        phi_first: -half_width,
        wavefunction,
        density,
    })
}

/// Maximum over occupied cells of the stationary-constraint defect
/// `|-(ħ²/a³) ψ''/ψ - a + Λa³/3 + a³m²φ²|`, with the second derivative
/// taken spectrally, together with the magnitude of the potential term over
/// the same window (the natural scale for a relative reading).
pub fn constraint_residual(mode: &CosmologyMode, params: &MinisuperspaceParams) -> (f64, f64) {
    constraint_residual_signed(
        &mode.wavefunction,
        &mode.density,
        mode.spacing,
        mode.phi_first,
        mode.radius,
        params,
    )
}

/// Constraint residual of the mode's profile evaluated against a different
/// radius label (sensitivity probe).
pub fn constraint_residual_at(
    mode: &CosmologyMode,
    params: &MinisuperspaceParams,
    radius: f64,
) -> (f64, f64) {
    constraint_residual_signed(
        &mode.wavefunction,
        &mode.density,
        mode.spacing,
        mode.phi_first,
        radius,
        params,
    )
}

/// Constraint residual for an arbitrary strictly-positive field density
/// (e.g. a mixture of modes) at the given radius, using `ψ = √P`.
pub fn density_constraint_residual(
    density: &[f64],
    spacing: f64,
    phi_first: f64,
    radius: f64,
    params: &MinisuperspaceParams,
) -> (f64, f64) {
    let psi: Vec<f64> = density.iter().map(|&p| p.max(0.0).sqrt()).collect();
    constraint_residual_signed(&psi, density, spacing, phi_first, radius, params)
}

fn constraint_residual_signed(
    psi: &[f64],
    density: &[f64],
    spacing: f64,
    phi_first: f64,
    radius: f64,
    params: &MinisuperspaceParams,
) -> (f64, f64) {
    let n = psi.len();
    let length = spacing * n as f64;
    let d2 = spectral_second_derivative(psi, length);
    let floor = DEFAULT_FLOOR_REL * density.iter().cloned().fold(0.0, f64::max);
    let a = radius;
    let a3 = a * a * a;
    let m2 = params.field_mass * params.field_mass;
    let mut residual = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        if density[i] <= floor {
            continue;
        }
        let phi = phi_first + i as f64 * spacing;
        let potential = a3 * m2 * phi * phi;
        let lhs = -params.hbar * params.hbar / a3 * d2[i] / psi[i] - a
            + params.lambda * a3 / 3.0
            + potential;
        residual = residual.max(lhs.abs());
        scale = scale.max(potential.abs());
    }
    (residual, scale.max(a))
}

/// One level of the generic-potential pipeline.
#[derive(Debug, Clone)]
pub struct GenericMode {
    pub index: usize,
    pub energy: f64,
    /// Smallest positive radius solving `a - Λa³/3 = E_n(a)`; `None` when no
    /// positive root exists.
    pub radius: Option<f64>,
    pub spacing: f64,
    pub phi_first: f64,
    pub wavefunction: Vec<f64>,
}

impl GenericMode {
    pub fn node_count(&self) -> usize {
        count_nodes(&self.wavefunction)
    }
}

pub const DEFAULT_GENERIC_POINTS: usize = 4097;

/// Solve the effective field-space eigenproblem
/// `-(ħ²/a³) ψ'' + a³ (m²φ² + V_extra(φ)) ψ = E ψ` self-consistently with
/// the radius condition `a - Λa³/3 = E_n(a)` for each level.
///
/// The eigenvalue generally depends on the radius through the kinetic and
/// potential prefactors (it is radius-free exactly for the pure quadratic
/// potential), so each level is located by bisection on
/// `F(a) = a - Λa³/3 - E_n(a)`.
pub fn generic_potential_modes(
    extra_potential: impl Fn(f64) -> f64,
    params: &MinisuperspaceParams,
    n_max: usize,
    points: usize,
) -> Result<Vec<GenericMode>> {
    params.validate()?;
    if points < 129 {
        return Err(CoreError::Cosmology("need at least 129 grid points".into()));
    }
    let m2 = params.field_mass * params.field_mass;
    let solve_at = |a: f64, n: usize, pts: usize| -> Result<(f64, f64, f64)> {
        // Domain auto-sized to 10/λ_est on each side.
        let lambda_est = (a.powi(3) * params.field_mass / params.hbar).sqrt();
        let half_width = 10.0 / lambda_est;
        let spacing = 2.0 * half_width / (pts as f64 - 1.0);
        let a3 = a * a * a;
        let potential: Vec<f64> = (0..pts)
            .map(|i| {
                let phi = -half_width + i as f64 * spacing;
                a3 * (m2 * phi * phi + extra_potential(phi))
            })
            .collect();
        let op = schrodinger_operator(&potential, spacing, params.hbar * params.hbar / a3);
        Ok((op.eigenvalue(n)?, half_width, spacing))
    };
    // Second-order stencil + Richardson step: O(h⁴) eigenvalues.
    let eigenvalue = |a: f64, n: usize| -> Result<(f64, f64, f64)> {
        let (e_h, half_width, spacing) = solve_at(a, n, points)?;
        let (e_h2, _, _) = solve_at(a, n, 2 * points - 1)?;
        Ok(((4.0 * e_h2 - e_h) / 3.0, half_width, spacing))
    };

    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let f = |a: f64| -> Result<f64> {
            Ok(a - params.lambda * a * a * a / 3.0 - eigenvalue(a, n)?.0)
        };
        // Bracket the smallest positive root: F < 0 for a -> 0+ (the kinetic
        // prefactor diverges); scan upward for the first sign change.
        let a_seed = 2.0 * params.hbar * params.field_mass * (n as f64 + 0.5);
        let mut lo = 0.05 * a_seed.max(0.1);
        while f(lo)? > 0.0 && lo > 1e-6 {
            lo *= 0.5;
        }
        let mut hi = lo;
        let mut found = false;
        for _ in 0..60 {
            hi *= 1.5;
            if f(hi)? > 0.0 {
                found = true;
                break;
            }
            if params.lambda > 0.0 && hi > 2.0 / params.lambda.sqrt() {
                break;
            }
        }
        if !found || f(lo)? > 0.0 {
            out.push(GenericMode {
                index: n,
                energy: f64::NAN,
                radius: None,
                spacing: 0.0,
                phi_first: 0.0,
                wavefunction: Vec::new(),
            });
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * hi {
                break;
            }
        }
        let a = 0.5 * (lo + hi);
        let (_, half_width, spacing) = eigenvalue(a, n)?;
        let a3 = a * a * a;
        let potential: Vec<f64> = (0..points)
            .map(|i| {
                let phi = -half_width + i as f64 * spacing;
                a3 * (m2 * phi * phi + extra_potential(phi))
            })
            .collect();
        let op = schrodinger_operator(&potential, spacing, params.hbar * params.hbar / a3);
        let (_, mut vec) = op.eigenpair(n)?;
        let inv_sqrt_h = 1.0 / spacing.sqrt();
        for v in vec.iter_mut() {
            *v *= inv_sqrt_h;
        }
        // The level energy carried out is the extrapolated eigenvalue at the
        // self-consistent radius, which the root condition ties to
        // a - Λa³/3 to the bisection tolerance.
        let energy = eigenvalue(a, n)?.0;
        out.push(GenericMode {
            index: n,
            energy,
            radius: Some(a),
            spacing,
            phi_first: -half_width,
            wavefunction: vec,
        });
    }
    Ok(out)
}

/// Per-level structure table with the orderings that define the intrinsic
/// arrow of time.
#[derive(Debug, Clone)]
pub struct ArrowRow {
    pub index: usize,
    pub radius: f64,
    pub nodes: usize,
    /// Literal field-coordinate entropy `-∫ P log P dφ`. Dominated by the
    /// shrinking mode width `1/λ_n`, it decreases with `n`.
    pub entropy: f64,
    /// Scale-free entropy of the shape; increases with the structure.
    pub shape_entropy: f64,
}

#[derive(Debug, Clone)]
pub struct ArrowReport {
    pub rows: Vec<ArrowRow>,
    /// Monotone growth of the scale-free (structural) entropy.
    pub entropy_increasing: bool,
    /// Radius ordering; meaningful as an arrow only when the cubic term is
    /// negligible.
    pub radius_increasing: bool,
    /// True when `|Λ a²/3| < 1%` for every returned radius.
    pub lambda_term_negligible: bool,
}

pub fn arrow_of_time_report(
    modes: &[CosmologyMode],
    params: &MinisuperspaceParams,
) -> Result<ArrowReport> {
    if modes.len() < 2 {
        return Err(CoreError::Cosmology(
            "the ordering needs at least two modes".into(),
        ));
    }
    let rows: Vec<ArrowRow> = modes
        .iter()
        .map(|m| ArrowRow {
            index: m.index,
            radius: m.radius,
            nodes: m.node_count(),
            entropy: m.entropy(),
            shape_entropy: m.shape_entropy(),
        })
        .collect();
    let entropy_increasing = rows
        .windows(2)
        .all(|w| w[1].shape_entropy > w[0].shape_entropy);
    let radius_increasing = rows.windows(2).all(|w| w[1].radius > w[0].radius);
    let lambda_term_negligible = rows
        .iter()
        .all(|r| (params.lambda * r.radius * r.radius / 3.0).abs() < 0.01);
    Ok(ArrowReport {
        rows,
        entropy_increasing,
        radius_increasing,
        lambda_term_negligible,
    })
}
