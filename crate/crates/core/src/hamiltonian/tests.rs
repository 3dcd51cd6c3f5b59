use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::axis::{AxisSpec, Boundary};
use crate::diffops::{gradient, integrate};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::state::{product_state, EnsembleState};

use super::*;

fn line_grid(name: &str, lo: f64, hi: f64, n: usize, b: Boundary) -> Arc<Grid> {
    Grid::new(vec![AxisSpec::continuous(name, lo, hi, n, b).unwrap()]).unwrap()
}

fn grid_qx(l: f64, n: usize) -> Arc<Grid> {
    Grid::new(vec![
        AxisSpec::continuous("q", -l, l, n, Boundary::Clamped).unwrap(),
        AxisSpec::continuous("x", -l, l, n, Boundary::Clamped).unwrap(),
    ])
    .unwrap()
}

fn gaussian_1d(grid: &Arc<Grid>, mean: f64, sigma: f64, tilt: f64) -> EnsembleState {
    let p = ScalarField::from_fn(grid.clone(), |x| {
        let z = (x[0] - mean) / sigma;
        (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sigma)
    })
    .unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let s = ScalarField::from_fn(grid.clone(), |x| tilt * x[0]).unwrap();
    EnsembleState::new(p, s, 0.0).unwrap()
}

fn smooth_probe(grid: &Arc<Grid>, width: f64) -> ScalarField {
    ScalarField::from_fn(grid.clone(), |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-0.5 * r2 / (width * width)).exp()
    })
    .unwrap()
}

fn quantum_1d(mass: f64, hbar: f64, potential: PotentialSpec) -> HamiltonianSpec {
    HamiltonianSpec::Quantum {
        masses: vec![AxisMass::new("x", mass)],
        potential,
        hbar,
    }
}

fn classical_1d(mass: f64, potential: PotentialSpec) -> HamiltonianSpec {
    HamiltonianSpec::Classical {
        masses: vec![AxisMass::new("x", mass)],
        potential,
    }
}

fn hybrid_spring(m: f64, mm: f64, k: f64, hbar: f64) -> HamiltonianSpec {
    HamiltonianSpec::HybridQC {
        quantum_mass: m,
        classical_mass: mm,
        q_axes: vec!["q".into()],
        x_axes: vec!["x".into()],
        potential: PotentialSpec::SpringPair {
            spring: k,
            q_axes: vec!["q".into()],
            x_axes: vec!["x".into()],
        },
        hbar,
    }
}

// ---------------------------------------------------------------- evaluate

#[test]
fn classical_zero_potential_zero_phase_has_zero_energy() {
    let g = line_grid("x", -8.0, 8.0, 128, Boundary::Clamped);
    let st = gaussian_1d(&g, 0.0, 1.0, 0.0);
    let spec = classical_1d(1.0, PotentialSpec::Zero);
    assert_eq!(spec.evaluate(&st).unwrap(), 0.0);
}

#[test]
fn quantum_harmonic_ground_state_energy() {
    // Oracle: Gaussian integrals give Fisher term m ω² σ²/2 -> ħω/4 and
    // potential term ħω/4 at σ² = ħ/(2mω); total ħω/2.
    let (mass, omega, hbar): (f64, f64, f64) = (1.3, 0.9, 0.7);
    let sigma = (hbar / (2.0 * mass * omega)).sqrt();
    let g = line_grid("x", -8.0, 8.0, 4096, Boundary::Clamped);
    let st = gaussian_1d(&g, 0.0, sigma, 0.0);
    let spec = quantum_1d(
        mass,
        hbar,
        PotentialSpec::Harmonic {
            spring: mass * omega * omega,
            center: vec![0.0],
        },
    );
    let e = spec.evaluate(&st).unwrap();
    assert!(
        (e - 0.5 * hbar * omega).abs() < 2e-6,
        "E = {e}, expected {}",
        0.5 * hbar * omega
    );
}

#[test]
fn oscillator_regularized_stationary_energy_has_spring_width_offset() {
    // Oracle: product Gaussians with q-width σ_q² = ħ/(2√(km)) and
    // pointer width s give E = ħω_m/2 + k s²/2 exactly.
    let (m, mm, k, hbar) = (1.0, 1.0, 1.0, 1.0);
    let omega_m = (k / m as f64).sqrt();
    let sq = (hbar / (2.0 * (k * m as f64).sqrt())).sqrt();
    let s_width = 0.5;
    let g = grid_qx(6.0, 384);
    let p = ScalarField::from_fn(g.clone(), |c| {
        let zq = c[0] / sq;
        let zx = c[1] / s_width;
        (-0.5 * zq * zq).exp() / ((2.0 * PI).sqrt() * sq) * (-0.5 * zx * zx).exp()
            / ((2.0 * PI).sqrt() * s_width)
    })
    .unwrap();
    let st = EnsembleState::new(p, ScalarField::constant(g, 0.0), 0.0)
        .unwrap()
        .normalized()
        .unwrap();
    let spec = HamiltonianSpec::HybridOscillator {
        quantum_mass: m,
        classical_mass: mm,
        spring: k,
        q_axes: vec!["q".into()],
        x_axes: vec!["x".into()],
        hbar,
    };
    let e = spec.evaluate(&st).unwrap();
    let expected = 0.5 * hbar * omega_m + 0.5 * k * s_width * s_width;
    assert!(
        (e - expected).abs() < 1e-3 * expected,
        "E = {e}, expected {expected}"
    );
}

#[test]
fn oscillator_quadratic_form_route_agrees() {
    // Dual-route check: the face-based energy against the (U,E,C)
    // quadratic-form evaluation with central differences. They are distinct
    // discretizations of the same functional, so agreement is O(h²).
    let spec = HamiltonianSpec::HybridOscillator {
        quantum_mass: 1.4,
        classical_mass: 0.8,
        spring: 0.9,
        q_axes: vec!["q".into()],
        x_axes: vec!["x".into()],
        hbar: 1.0,
    };
    let g = grid_qx(7.0, 256);
    let p = ScalarField::from_fn(g.clone(), |c| {
        ((-0.5 * (c[0] * c[0] + 1.3 * c[1] * c[1] + 0.4 * c[0] * c[1])).exp())
    })
    .unwrap();
    let s = ScalarField::from_fn(g.clone(), |c| 0.3 * c[0] - 0.2 * c[1]).unwrap();
    let st = EnsembleState::new(p.scaled(1.0 / integrate(&p).unwrap()), s, 0.0).unwrap();

    let km = spec.kinetic_matrix().unwrap();
    let gs_q = gradient(st.phase(), "q").unwrap();
    let gs_x = gradient(st.phase(), "x").unwrap();
    let floor = st.floor();
    let logp: ScalarField = st.density().map(|v| v.max(floor).ln());
    let gl_q = gradient(&logp, "q").unwrap();
    let gl_x = gradient(&logp, "x").unwrap();
    let w = g.weights();
    let mut e_alt = 0.0;
    let hbar2_over8 = 0.125;
    for cell in 0..g.cell_count() {
        let coords = g.coords(cell);
        let xi = [coords[0], coords[1]];
        let gs = [gs_q.values()[cell], gs_x.values()[cell]];
        let gl = [gl_q.values()[cell], gl_x.values()[cell]];
        let pv = st.density().values()[cell];
        e_alt += w[cell]
            * pv
            * (0.5 * km.inverse_mass.quad(&gs)
                + 0.5 * km.coupling.quad(&xi)
                + hbar2_over8 * km.quantum_inverse_mass().quad(&gl));
    }
    let e = spec.evaluate(&st).unwrap();
    assert!(
        (e - e_alt).abs() < 2e-2 * e.abs(),
        "face route {e} vs quadratic-form route {e_alt}"
    );
}

#[test]
fn evaluate_rejects_incompatible_axes() {
    let g = grid_qx(4.0, 16);
    let p = ScalarField::constant(g.clone(), 1.0 / 64.0);
    let st = EnsembleState::new(p, ScalarField::constant(g, 0.0), 0.0).unwrap();
    let spec = classical_1d(1.0, PotentialSpec::Zero);
    assert!(matches!(
        spec.evaluate(&st),
        Err(CoreError::IncompatibleAxes(_))
    ));
}

// ------------------------------------------------------------ density_rate

#[test]
fn density_rate_vanishes_for_uniform_phase() {
    let g = grid_qx(5.0, 48);
    let p = ScalarField::from_fn(g.clone(), |c| {
        (-0.5 * (c[0] * c[0] + c[1] * c[1])).exp()
    })
    .unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let st = EnsembleState::new(p, ScalarField::constant(g, 7.7), 0.0).unwrap();
    for spec in [
        hybrid_spring(1.0, 2.0, 1.0, 1.0),
        HamiltonianSpec::Classical {
            masses: vec![AxisMass::new("q", 1.0), AxisMass::new("x", 2.0)],
            potential: PotentialSpec::Zero,
        },
        HamiltonianSpec::Quantum {
            masses: vec![AxisMass::new("q", 1.0), AxisMass::new("x", 2.0)],
            potential: PotentialSpec::Zero,
            hbar: 0.5,
        },
    ] {
        let rate = spec.density_rate(&st).unwrap();
        let max = rate.values().iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        assert!(max < 1e-14, "max rate {max}");
    }
}

#[test]
fn density_rate_classical_drift_matches_central_difference() {
    let mass = 1.7;
    let tilt = 0.9;
    let g = line_grid("x", -8.0, 8.0, 512, Boundary::Clamped);
    let st = gaussian_1d(&g, 0.3, 1.0, tilt);
    let rate = classical_1d(mass, PotentialSpec::Zero)
        .density_rate(&st)
        .unwrap();
    // With linear S the flux form reduces to the central difference of P
    // exactly on occupied faces; both are O(h²) from the analytic drift.
    let dp = gradient(st.density(), "x").unwrap();
    let floor = st.floor();
    for cell in 1..g.cell_count() - 1 {
        if st.density().values()[cell - 1].min(st.density().values()[cell + 1]) < 2.0 * floor {
            continue;
        }
        let expected = -tilt / mass * dp.values()[cell];
        assert!(
            (rate.values()[cell] - expected).abs() < 1e-12,
            "cell {cell}"
        );
    }
}

#[test]
fn density_rate_position_readout_is_advective() {
    // Heavy masses suppress the base terms; the readout alone gives
    // ∂P/∂t = -κ q ∂P/∂x in central-difference form.
    let kappa = 0.8;
    let g = grid_qx(4.0, 64);
    let p = ScalarField::from_fn(g.clone(), |c| {
        (-(c[0] * c[0]) - 0.7 * c[1] * c[1]).exp()
    })
    .unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let st = EnsembleState::new(p, ScalarField::constant(g.clone(), 0.0), 0.0).unwrap();
    let spec = HamiltonianSpec::PositionMeasurement {
        base: Box::new(HamiltonianSpec::HybridQC {
            quantum_mass: 1e12,
            classical_mass: 1e12,
            q_axes: vec!["q".into()],
            x_axes: vec!["x".into()],
            potential: PotentialSpec::Zero,
            hbar: 1.0,
        }),
        coupling: Schedule::Constant { value: kappa },
    };
    let rate = spec.density_rate(&st).unwrap();
    let dpx = gradient(st.density(), "x").unwrap();
    let nx = g.axis(1).len();
    for cell in 0..g.cell_count() {
        // Clamped edges use the zero-flux form rather than the one-sided
        // stencil; compare in the interior.
        let ix = cell % nx;
        if ix == 0 || ix + 1 == nx {
            continue;
        }
        let q = g.coords(cell)[0];
        let expected = -kappa * q * dpx.values()[cell];
        assert!(
            (rate.values()[cell] - expected).abs() < 1e-10,
            "cell {cell}: {} vs {expected}",
            rate.values()[cell]
        );
    }
}

#[test]
fn density_rate_integrates_to_zero_all_variants() {
    let g2 = grid_qx(5.0, 48);
    let p2 = ScalarField::from_fn(g2.clone(), |c| {
        (-0.4 * (c[0] - 0.3).powi(2) - 0.6 * (c[1] + 0.2).powi(2) - 0.1 * c[0] * c[1]).exp()
    })
    .unwrap();
    let p2 = p2.scaled(1.0 / integrate(&p2).unwrap());
    let s2 = ScalarField::from_fn(g2.clone(), |c| {
        0.4 * c[0] - 0.3 * c[1] + 0.2 * (c[0] * 0.7).sin() * (c[1] * 0.5).cos()
    })
    .unwrap();
    let st2 = EnsembleState::new(p2, s2, 0.0).unwrap();
    let specs2 = vec![
        hybrid_spring(1.0, 2.0, 0.7, 0.9),
        HamiltonianSpec::PositionMeasurement {
            base: Box::new(hybrid_spring(1.0, 2.0, 0.0, 0.9)),
            coupling: Schedule::Constant { value: 0.6 },
        },
        HamiltonianSpec::HybridOscillator {
            quantum_mass: 1.0,
            classical_mass: 2.0,
            spring: 1.1,
            q_axes: vec!["q".into()],
            x_axes: vec!["x".into()],
            hbar: 0.9,
        },
    ];
    for spec in specs2 {
        let rate = spec.density_rate(&st2).unwrap();
        let total = integrate(&rate).unwrap();
        assert!(total.abs() < 1e-10, "{total} for {spec:?}");
    }
}

#[test]
fn density_rate_zero_where_density_locally_zero() {
    // Positivity constraint: where P vanishes on a neighbourhood, δH/δS
    // must vanish too.
    let g = line_grid("x", -4.0, 4.0, 128, Boundary::Clamped);
    let p = ScalarField::from_fn(g.clone(), |x| {
        let v: f64 = 1.0 - (x[0] / 2.0) * (x[0] / 2.0);
        if v > 0.0 { v * v } else { 0.0 }
    })
    .unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let s = ScalarField::from_fn(g.clone(), |x| (x[0] * 1.3).sin()).unwrap();
    let st = EnsembleState::new(p.clone(), s, 0.0).unwrap();
    for spec in [
        classical_1d(1.0, PotentialSpec::Zero),
        quantum_1d(1.0, 1.0, PotentialSpec::Zero),
    ] {
        let rate = spec.density_rate(&st).unwrap();
        for cell in 1..g.cell_count() - 1 {
            let zero_nbhd = p.values()[cell] == 0.0
                && p.values()[cell - 1] == 0.0
                && p.values()[cell + 1] == 0.0;
            if zero_nbhd {
                assert_eq!(rate.values()[cell], 0.0, "cell {cell}");
            }
        }
    }
}

// -------------------------------------------------------------- phase_rate

#[test]
fn phase_rate_classical_zero_phase_is_minus_potential() {
    let g = line_grid("x", -3.0, 3.0, 64, Boundary::Clamped);
    let st = gaussian_1d(&g, 0.0, 0.7, 0.0);
    let spec = classical_1d(
        2.0,
        PotentialSpec::Harmonic {
            spring: 1.8,
            center: vec![0.4],
        },
    );
    let rate = spec.phase_rate(&st).unwrap();
    for cell in 0..g.cell_count() {
        let x = g.coords(cell)[0];
        let v = 0.5 * 1.8 * (x - 0.4) * (x - 0.4);
        assert!((rate.values()[cell] + v).abs() < 1e-13);
    }
}

#[test]
fn phase_rate_quantum_ground_state_is_constant_eigenvalue() {
    // Eigenstate condition: δH/δP = ħω/2 wherever P is supported; checked
    // on the bulk window |x| <= 1 where the O(h²) truncation is smallest.
    let (mass, omega, hbar): (f64, f64, f64) = (1.0, 1.0, 1.0);
    let sigma = (hbar / (2.0 * mass * omega)).sqrt();
    let g = line_grid("x", -8.0, 8.0, 8192, Boundary::Clamped);
    let st = gaussian_1d(&g, 0.0, sigma, 0.0);
    let spec = quantum_1d(
        mass,
        hbar,
        PotentialSpec::Harmonic {
            spring: mass * omega * omega,
            center: vec![0.0],
        },
    );
    let rate = spec.phase_rate(&st).unwrap();
    let e0 = 0.5 * hbar * omega;
    for cell in 0..g.cell_count() {
        let x = g.coords(cell)[0];
        if x.abs() <= 1.0 {
            assert!(
                (rate.values()[cell] + e0).abs() < 1e-6,
                "cell {cell}: {} vs {}",
                rate.values()[cell],
                -e0
            );
        }
    }
}

#[test]
fn finite_quantum_diagonal_levels() {
    let g = Grid::new(vec![AxisSpec::discrete("level", &["a", "b"]).unwrap()]).unwrap();
    let levels = [0.4, 1.9];
    let spec = HamiltonianSpec::FiniteQuantum {
        matrix: HermitianMatrix::diagonal(&levels),
        hbar: 1.0,
    };
    let p = ScalarField::new(g.clone(), vec![0.7, 0.3]).unwrap();
    let s = ScalarField::new(g.clone(), vec![0.2, -0.4]).unwrap();
    let st = EnsembleState::new(p, s, 0.0).unwrap();
    // dH/dP_j = E_j, so phase_rate = -E_j; density rate vanishes.
    let pr = spec.phase_rate(&st).unwrap();
    let dr = spec.density_rate(&st).unwrap();
    for j in 0..2 {
        assert!((pr.values()[j] + levels[j]).abs() < 1e-12);
        assert!(dr.values()[j].abs() < 1e-12);
    }
    let e = spec.evaluate(&st).unwrap();
    assert!((e - (0.7 * 0.4 + 0.3 * 1.9)).abs() < 1e-12);
}

#[test]
fn finite_quantum_mixing_matrix_energy() {
    // σ_x coupling: ⟨ψ|H|ψ⟩ = 2 g √(P₀P₁) cos((S₀-S₁)/ħ).
    let g = Grid::new(vec![AxisSpec::discrete("spin", &["+", "-"]).unwrap()]).unwrap();
    let coupling = 0.8;
    let hbar = 0.6;
    let m = HermitianMatrix::new(
        2,
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(coupling, 0.0),
            Complex64::new(coupling, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
    .unwrap();
    let spec = HamiltonianSpec::FiniteQuantum { matrix: m, hbar };
    let (p0, p1, s0, s1) = (0.65, 0.35, 0.3, -0.5);
    let st = EnsembleState::new(
        ScalarField::new(g.clone(), vec![p0, p1]).unwrap(),
        ScalarField::new(g.clone(), vec![s0, s1]).unwrap(),
        0.0,
    )
    .unwrap();
    let expected = 2.0 * coupling * (p0 * p1).sqrt() * ((s0 - s1) / hbar).cos();
    assert!((spec.evaluate(&st).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn hermitian_matrix_rejects_non_hermitian() {
    let r = HermitianMatrix::new(
        2,
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.5),
            Complex64::new(1.0, 0.5),
            Complex64::new(0.0, 0.0),
        ],
    );
    assert!(r.is_err());
}

// ----------------------------------------------------------- gauge + order

#[test]
fn gauge_invariance_under_constant_phase_shift() {
    let g = grid_qx(5.0, 64);
    let p = ScalarField::from_fn(g.clone(), |c| {
        (-0.5 * (c[0] * c[0] + c[1] * c[1]) - 0.2 * c[0] * c[1]).exp()
    })
    .unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let s = ScalarField::from_fn(g.clone(), |c| 0.7 * c[0] + 0.1 * (c[1] * 2.0).sin()).unwrap();
    let st = EnsembleState::new(p, s, 0.0).unwrap();
    for spec in [
        hybrid_spring(1.3, 0.6, 0.8, 0.9),
        HamiltonianSpec::PositionMeasurement {
            base: Box::new(hybrid_spring(1.3, 0.6, 0.0, 0.9)),
            coupling: Schedule::Constant { value: 0.4 },
        },
    ] {
        let e0 = spec.evaluate(&st).unwrap();
        for c in [1.0, -17.5, 1e4] {
            let e1 = spec.evaluate(&st.with_phase_offset(c)).unwrap();
            assert!(
                (e1 - e0).abs() <= 1e-10 * (1.0 + e0.abs() + c.abs()),
                "offset {c}: {e1} vs {e0}"
            );
        }
    }
}

#[test]
fn quantum_energy_dominates_classical() {
    let g = line_grid("x", -8.0, 8.0, 256, Boundary::Clamped);
    let st = gaussian_1d(&g, 0.4, 0.8, 0.3);
    let pot = PotentialSpec::Harmonic {
        spring: 1.0,
        center: vec![0.0],
    };
    let eq = quantum_1d(1.0, 1.0, pot.clone()).evaluate(&st).unwrap();
    let ec = classical_1d(1.0, pot).evaluate(&st).unwrap();
    assert!(eq >= ec);
    assert!(eq > ec + 1e-3, "Fisher term should be strictly positive");
}

// ---------------------------------------------------------- gradient check

#[test]
fn gradient_check_trivial_quadratic_is_exact() {
    let g = line_grid("x", -6.0, 6.0, 96, Boundary::Clamped);
    let st = gaussian_1d(&g, 0.0, 1.0, 0.0);
    let probe = smooth_probe(&g, 0.6);
    let spec = classical_1d(1.0, PotentialSpec::Zero);
    let r = functional_gradient_check(&spec, &st, &probe, 1e-4).unwrap();
    assert!(r.wrt_phase < 1e-10, "{:?}", r);
    assert!(r.wrt_density < 1e-10, "{:?}", r);
}

#[test]
fn gradient_check_residual_shrinks_quadratically() {
    let g = line_grid("x", -6.0, 6.0, 96, Boundary::Clamped);
    let st = gaussian_1d(&g, 0.1, 0.9, 0.5);
    let probe = smooth_probe(&g, 0.5);
    let spec = quantum_1d(
        1.0,
        1.0,
        PotentialSpec::Harmonic {
            spring: 1.0,
            center: vec![0.0],
        },
    );
    let r3 = functional_gradient_check(&spec, &st, &probe, 1e-3).unwrap();
    let r4 = functional_gradient_check(&spec, &st, &probe, 1e-4).unwrap();
    // Centred differences: truncation O(ε²) until the rounding floor.
    assert!(
        r4.wrt_density < r3.wrt_density / 20.0,
        "eps 1e-3: {:?}, eps 1e-4: {:?}",
        r3,
        r4
    );
    assert!(r4.wrt_density < 1e-6);
    assert!(r4.wrt_phase < 1e-8);
}

#[test]
fn gradient_check_all_variants_pass() {
    // Every catalog variant on a smooth state: residual < 1e-6 at a good ε.
    let eps = 1e-4;
    let tol = 1e-6;

    let g1 = line_grid("x", -6.0, 6.0, 96, Boundary::Clamped);
    let st1 = gaussian_1d(&g1, 0.1, 0.9, 0.4);
    let probe1 = smooth_probe(&g1, 0.5);
    for spec in [
        classical_1d(
            1.2,
            PotentialSpec::Harmonic {
                spring: 0.8,
                center: vec![0.2],
            },
        ),
        quantum_1d(
            1.2,
            0.9,
            PotentialSpec::Harmonic {
                spring: 0.8,
                center: vec![0.2],
            },
        ),
    ] {
        let r = functional_gradient_check(&spec, &st1, &probe1, eps).unwrap();
        assert!(r.wrt_phase < tol && r.wrt_density < tol, "{spec:?}: {r:?}");
    }

    let g2 = grid_qx(5.0, 48);
    let p2 = ScalarField::from_fn(g2.clone(), |c| {
        (-0.6 * (c[0] - 0.2).powi(2) - 0.8 * (c[1] + 0.1).powi(2)).exp()
    })
    .unwrap();
    let p2 = p2.scaled(1.0 / integrate(&p2).unwrap());
    let s2 = ScalarField::from_fn(g2.clone(), |c| 0.3 * c[0] - 0.1 * c[1]).unwrap();
    let st2 = EnsembleState::new(p2, s2, 0.0).unwrap();
    let probe2 = smooth_probe(&g2, 0.7);
    for spec in [
        hybrid_spring(1.0, 2.0, 0.9, 0.8),
        HamiltonianSpec::PositionMeasurement {
            base: Box::new(hybrid_spring(1.0, 2.0, 0.0, 0.8)),
            coupling: Schedule::Constant { value: 0.7 },
        },
        HamiltonianSpec::HybridOscillator {
            quantum_mass: 1.0,
            classical_mass: 2.0,
            spring: 1.2,
            q_axes: vec!["q".into()],
            x_axes: vec!["x".into()],
            hbar: 0.8,
        },
    ] {
        let r = functional_gradient_check(&spec, &st2, &probe2, eps).unwrap();
        assert!(r.wrt_phase < tol && r.wrt_density < tol, "{spec:?}: {r:?}");
    }
}

// --------------------------------------------------------- classical limit

#[test]
fn classical_limit_of_quantum_is_classical() {
    let spec = quantum_1d(1.0, 1.0, PotentialSpec::Zero);
    let (lim, noop) = classical_limit(&spec, &["x"]).unwrap();
    assert!(noop.is_empty());
    assert!(matches!(lim, HamiltonianSpec::Classical { .. }));
}

#[test]
fn classical_limit_spin_pointer() {
    let quantized = HamiltonianSpec::SpinPointer {
        pointer_mass: 1.0,
        potential: PotentialSpec::Zero,
        coupling: Schedule::Constant { value: 0.5 },
        hbar: 1.0,
        quantum_pointer: true,
    };
    let (lim, noop) = classical_limit(&quantized, &["x"]).unwrap();
    assert!(noop.is_empty());
    match &lim {
        HamiltonianSpec::SpinPointer {
            quantum_pointer, ..
        } => assert!(!quantum_pointer),
        other => panic!("unexpected {other:?}"),
    }
    // A second application warns.
    let (_, noop2) = classical_limit(&lim, &["x"]).unwrap();
    assert_eq!(noop2, vec!["x".to_string()]);
}

#[test]
fn classical_limit_never_raises_energy() {
    let g = grid_qx(5.0, 64);
    let p = ScalarField::from_fn(g.clone(), |c| {
        (-0.5 * (c[0] * c[0] + 0.8 * c[1] * c[1])).exp()
    })
    .unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let s = ScalarField::from_fn(g.clone(), |c| 0.2 * c[0] + 0.3 * c[1]).unwrap();
    let st = EnsembleState::new(p, s, 0.0).unwrap();
    let spec = HamiltonianSpec::Quantum {
        masses: vec![AxisMass::new("q", 1.0), AxisMass::new("x", 1.0)],
        potential: PotentialSpec::Zero,
        hbar: 1.0,
    };
    let (lim, _) = classical_limit(&spec, &["q", "x"]).unwrap();
    assert!(lim.evaluate(&st).unwrap() <= spec.evaluate(&st).unwrap());
    // Partial limit drops only one axis's Fisher term.
    let (partial, _) = classical_limit(&spec, &["x"]).unwrap();
    let ep = partial.evaluate(&st).unwrap();
    assert!(ep <= spec.evaluate(&st).unwrap());
    assert!(ep >= lim.evaluate(&st).unwrap());
}

// ----------------------------------------------------------- interactions

fn gaussian_pair() -> (EnsembleState, EnsembleState) {
    let gq = line_grid("q", -8.0, 8.0, 256, Boundary::Clamped);
    let gx = line_grid("x", -8.0, 8.0, 256, Boundary::Clamped);
    (
        gaussian_1d(&gq, 0.4, 1.0, 0.0),
        gaussian_1d(&gx, -0.3, 0.7, 0.0),
    )
}

#[test]
fn noninteraction_zero_potential() {
    let (a, b) = gaussian_pair();
    let joint = hybrid_spring(1.0, 2.0, 0.0, 0.9);
    let qa = quantum_1d(1.0, 0.9, PotentialSpec::Zero);
    let qa = match qa {
        HamiltonianSpec::Quantum { potential, hbar, .. } => HamiltonianSpec::Quantum {
            masses: vec![AxisMass::new("q", 1.0)],
            potential,
            hbar,
        },
        _ => unreachable!(),
    };
    let cb = classical_1d(2.0, PotentialSpec::Zero);
    let r = noninteraction_residual(&joint, &a, &b, &qa, &cb).unwrap();
    assert!(r < 1e-9, "residual {r}");
}

#[test]
fn noninteraction_spring_coupling_matches_gaussian_oracle() {
    // Oracle: ⟨½k(q-x)²⟩ over independent Gaussians
    //       = ½k (σ_q² + σ_x² + (μ_q-μ_x)²).
    let (a, b) = gaussian_pair();
    let k = 1.3;
    let joint = hybrid_spring(1.0, 2.0, k, 0.9);
    let qa = HamiltonianSpec::Quantum {
        masses: vec![AxisMass::new("q", 1.0)],
        potential: PotentialSpec::Zero,
        hbar: 0.9,
    };
    let cb = classical_1d(2.0, PotentialSpec::Zero);
    let r = noninteraction_residual(&joint, &a, &b, &qa, &cb).unwrap();
    let expected = 0.5 * k * (1.0f64.powi(2) + 0.7f64.powi(2) + (0.4f64 + 0.3).powi(2));
    assert!(r > 1e-3);
    assert!(
        (r - expected).abs() < 1e-5 * expected,
        "residual {r} vs oracle {expected}"
    );
}

// ------------------------------------------------------- com/relative split

#[test]
fn com_relative_sum_matches_direct_energy() {
    let g = grid_qx(6.0, 192);
    let p = ScalarField::from_fn(g.clone(), |c| {
        (-0.5 * (0.9 * c[0] * c[0] + 1.2 * c[1] * c[1] + 0.5 * c[0] * c[1])).exp()
    })
    .unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let s = ScalarField::from_fn(g.clone(), |c| 0.4 * c[0] - 0.7 * c[1]).unwrap();
    let st = EnsembleState::new(p, s, 0.0).unwrap();
    let spec = hybrid_spring(1.7, 0.9, 1.1, 0.8);
    let split = com_relative_split(&spec, &st).unwrap();
    let direct = spec.evaluate(&st).unwrap();
    assert!(
        (split.total() - direct).abs() < 1e-12 * direct.abs().max(1.0),
        "{} vs {}",
        split.total(),
        direct
    );
}

#[test]
fn com_relative_cross_vanishes_for_separable_even_state() {
    // P = P(x̄) P(r) with even factors and equal masses: the lattice has the
    // q<->x swap symmetry, so the mixed sums cancel in pairs.
    let g = grid_qx(6.0, 128);
    let p = ScalarField::from_fn(g.clone(), |c| {
        let xb = 0.5 * (c[0] + c[1]);
        let r = c[0] - c[1];
        (-xb * xb / 1.8 - r * r / 0.9).exp()
    })
    .unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let st = EnsembleState::new(p, ScalarField::constant(g, 0.0), 0.0).unwrap();
    let spec = hybrid_spring(1.3, 1.3, 0.7, 1.0);
    let split = com_relative_split(&spec, &st).unwrap();
    assert!(split.cross.abs() < 1e-12, "cross {}", split.cross);
}

#[test]
fn com_relative_cross_matches_correlated_gaussian_oracle() {
    // Oracle: for a mean-zero Gaussian with covariance Σ in (q,x),
    // cross = (ħ²/(4 M_T²)) (1,1) Σ⁻¹ (M,-m)ᵀ.
    let (m, mm, hbar) = (1.7, 0.9, 0.8);
    let (s11, s12, s22) = (1.0, 0.3, 0.8);
    let det = s11 * s22 - s12 * s12;
    let (i11, i12, i22) = (s22 / det, -s12 / det, s11 / det);
    let g = grid_qx(7.0, 512);
    let p = ScalarField::from_fn(g.clone(), |c| {
        let (q, x) = (c[0], c[1]);
        (-0.5 * (i11 * q * q + 2.0 * i12 * q * x + i22 * x * x)).exp()
    })
    .unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let st = EnsembleState::new(p, ScalarField::constant(g, 0.0), 0.0).unwrap();
    let spec = hybrid_spring(m, mm, 0.4, hbar);
    let split = com_relative_split(&spec, &st).unwrap();
    let mt = m + mm;
    let oracle = hbar * hbar / (4.0 * mt * mt)
        * ((i11 + i12) * mm - (i12 + i22) * m);
    assert!(split.cross.abs() > 1e-3, "cross should be nonzero");
    assert!(
        (split.cross - oracle).abs() < 5e-4 * oracle.abs(),
        "cross {} vs oracle {}",
        split.cross,
        oracle
    );
}

#[test]
fn com_relative_rejects_non_invariant_potential() {
    let g = grid_qx(4.0, 32);
    let p = ScalarField::from_fn(g.clone(), |c| (-(c[0] * c[0] + c[1] * c[1])).exp()).unwrap();
    let p = p.scaled(1.0 / integrate(&p).unwrap());
    let st = EnsembleState::new(p, ScalarField::constant(g, 0.0), 0.0).unwrap();
    let spec = HamiltonianSpec::HybridQC {
        quantum_mass: 1.0,
        classical_mass: 1.0,
        q_axes: vec!["q".into()],
        x_axes: vec!["x".into()],
        potential: PotentialSpec::Harmonic {
            spring: 1.0,
            center: vec![0.0, 0.0],
        },
        hbar: 1.0,
    };
    assert!(com_relative_split(&spec, &st).is_err());
}

// ------------------------------------------------------------ spin pointer

#[test]
fn spin_pointer_energy_closed_form() {
    // Branch densities w± P_C(x) with S = λ x give
    // E = λ²/2M + κ λ (w₊ - w₋).
    let g = Grid::new(vec![
        AxisSpec::continuous("x", -8.0, 8.0, 512, Boundary::Clamped).unwrap(),
        AxisSpec::discrete("spin", &["+", "-"]).unwrap(),
    ])
    .unwrap();
    let (w_plus, w_minus) = (0.64, 0.36);
    let sigma = 0.7;
    let (mass, kappa, lambda) = (1.9, 0.8, 0.45);
    let p = ScalarField::from_fn(g.clone(), |c| {
        let w = if c[1] == 0.0 { w_plus } else { w_minus };
        w * (-0.5 * (c[0] / sigma) * (c[0] / sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
    })
    .unwrap();
    let s = ScalarField::from_fn(g.clone(), |c| lambda * c[0]).unwrap();
    let st = EnsembleState::new(p, s, 0.0).unwrap().normalized().unwrap();
    let spec = HamiltonianSpec::SpinPointer {
        pointer_mass: mass,
        potential: PotentialSpec::Zero,
        coupling: Schedule::Constant { value: kappa },
        hbar: 1.0,
        quantum_pointer: false,
    };
    let e = spec.evaluate(&st).unwrap();
    let expected = lambda * lambda / (2.0 * mass) + kappa * lambda * (w_plus - w_minus);
    assert!((e - expected).abs() < 1e-10, "E {e} vs {expected}");

    // Spin-readout advection: ∂P/∂t = -α κ ∂P/∂x per branch (plus the tiny
    // mass transport term).
    let heavy = HamiltonianSpec::SpinPointer {
        pointer_mass: 1e12,
        potential: PotentialSpec::Zero,
        coupling: Schedule::Constant { value: kappa },
        hbar: 1.0,
        quantum_pointer: false,
    };
    let rate = heavy.density_rate(&st).unwrap();
    let dpx = gradient(st.density(), "x").unwrap();
    for cell in 0..g.cell_count() {
        let alpha = if g.coords(cell)[1] == 0.0 { 1.0 } else { -1.0 };
        let expected = -alpha * kappa * dpx.values()[cell];
        assert!((rate.values()[cell] - expected).abs() < 1e-9);
    }
}

#[test]
fn stability_bounds_reported() {
    let g = line_grid("x", -8.0, 8.0, 256, Boundary::Periodic);
    let st = gaussian_1d(&g, 0.0, 1.0, 0.8);
    let spec = quantum_1d(1.0, 1.0, PotentialSpec::Zero);
    let b = spec.stability_bounds(&st).unwrap();
    let h = 16.0 / 256.0;
    assert!((b.dispersive - 0.25 * h * h).abs() < 1e-12);
    assert!(b.advective > 0.0 && b.advective.is_finite());
}
