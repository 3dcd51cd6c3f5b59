//! The individual check suites. Scenario parameters are fixed here; every
//! tolerance comes from the constants in the parent module.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;

use crate::axis::{AxisSpec, Boundary};
use crate::cosmology::{
    arrow_of_time_report, constraint_residual, generic_potential_modes, mode_density,
    quantized_radii, MinisuperspaceParams,
};
use crate::diffops::integrate;
use crate::dynamics::{evolve, stationary_residual, IntegratorConfig, ObservableSpec};
use crate::fftutil::dominant_angular_frequency;
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::hamiltonian::{
    com_relative_split, functional_gradient_check, noninteraction_residual, AxisMass,
    HamiltonianSpec, HermitianMatrix, PotentialSpec, Schedule,
};
use crate::observables::{
    coherence_norm, conditional_density_operator, galilean_transform, GalileanElement,
};
use crate::oracles::{
    ballistic_transport, coherent_centroids, coherent_state, position_measurement_map,
    spin_measurement_map, split_step_reference, stationary_spring_mode,
    stationary_hybrid_state, CoherentStateSpec,
};
use crate::state::{polar_from_wavefunction, ComplexField, EnsembleState};

use super::*;

// ───────────────────────────── helpers ────────────────────────────────

fn check(name: &str, value: f64, threshold: f64, detail: &str) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: value.is_finite() && value <= threshold,
        value,
        threshold,
        detail: detail.to_string(),
    }
}

/// For quantities that must exceed a floor (negative controls).
fn check_at_least(name: &str, value: f64, floor: f64, detail: &str) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: value.is_finite() && value >= floor,
        value,
        threshold: floor,
        detail: detail.to_string(),
    }
}

fn fail(name: &str, err: impl std::fmt::Display) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: false,
        value: f64::NAN,
        threshold: 0.0,
        detail: format!("error: {err}"),
    }
}

type SuiteResult = std::result::Result<Vec<CheckResult>, Box<dyn std::error::Error>>;

fn guarded(name: &'static str, out: &mut Vec<CheckResult>, body: impl FnOnce() -> SuiteResult) {
    match body() {
        Ok(mut results) => out.append(&mut results),
        Err(e) => out.push(fail(name, e)),
    }
}

fn periodic_line(name: &str, lo: f64, hi: f64, n: usize) -> Arc<Grid> {
    Grid::new(vec![
        AxisSpec::continuous(name, lo, hi, n, Boundary::Periodic).unwrap(),
    ])
    .unwrap()
}

fn clamped_square(l: f64, n: usize) -> Arc<Grid> {
    Grid::new(vec![
        AxisSpec::continuous("q", -l, l, n, Boundary::Clamped).unwrap(),
        AxisSpec::continuous("x", -l, l, n, Boundary::Clamped).unwrap(),
    ])
    .unwrap()
}

fn normalized_state(p: ScalarField, s: ScalarField, t: f64) -> EnsembleState {
    let norm = integrate(&p).unwrap();
    EnsembleState::from_parts_unchecked(p.scaled(1.0 / norm), s, t)
}

fn gaussian_1d(grid: &Arc<Grid>, mean: f64, sigma: f64, momentum: f64) -> EnsembleState {
    let p = ScalarField::from_fn(grid.clone(), |x| {
        let z = (x[0] - mean) / sigma;
        (-0.5 * z * z).exp()
    })
    .unwrap();
    let s = ScalarField::from_fn(grid.clone(), |x| momentum * x[0]).unwrap();
    normalized_state(p, s, 0.0)
}

fn l1_distance(a: &ScalarField, b: &ScalarField) -> f64 {
    let w = a.grid().weights();
    a.values()
        .iter()
        .zip(b.values())
        .zip(&w)
        .map(|((&x, &y), &wv)| wv * (x - y).abs())
        .sum()
}

fn spring_pair_potential(k: f64) -> PotentialSpec {
    PotentialSpec::SpringPair {
        spring: k,
        q_axes: vec!["q".into()],
        x_axes: vec!["x".into()],
    }
}

fn hybrid_qc(m: f64, mm: f64, k: f64, hbar: f64) -> HamiltonianSpec {
    HamiltonianSpec::HybridQC {
        quantum_mass: m,
        classical_mass: mm,
        q_axes: vec!["q".into()],
        x_axes: vec!["x".into()],
        potential: spring_pair_potential(k),
        hbar,
    }
}

// ─────────────────────────── criterion 1 ──────────────────────────────

pub fn gradients() -> Vec<CheckResult> {
    let start = Instant::now();
    let mut out = Vec::new();
    let eps = 1e-4;

    guarded("gradients", &mut out, || {
        let mut results = Vec::new();
        // 1-D variants on a smooth displaced Gaussian with a phase tilt.
        let g1 = Grid::new(vec![
            AxisSpec::continuous("x", -6.0, 6.0, 96, Boundary::Clamped).unwrap(),
        ])?;
        let st1 = gaussian_1d(&g1, 0.1, 0.9, 0.4);
        let probe1 = ScalarField::from_fn(g1.clone(), |x| (-2.0 * x[0] * x[0]).exp())?;
        let harmonic = PotentialSpec::Harmonic {
            spring: 0.8,
            center: vec![0.2],
        };
        for (label, spec) in [
            (
                "classical",
                HamiltonianSpec::Classical {
                    masses: vec![AxisMass::new("x", 1.2)],
                    potential: harmonic.clone(),
                },
            ),
            (
                "quantum",
                HamiltonianSpec::Quantum {
                    masses: vec![AxisMass::new("x", 1.2)],
                    potential: harmonic.clone(),
                    hbar: 0.9,
                },
            ),
        ] {
            let r = functional_gradient_check(&spec, &st1, &probe1, eps)?;
            results.push(check(
                &format!("gradient/{label}/phase"),
                r.wrt_phase,
                TOL_GRADIENT,
                "residual of the phase variation",
            ));
            results.push(check(
                &format!("gradient/{label}/density"),
                r.wrt_density,
                TOL_GRADIENT,
                "residual of the density variation",
            ));
        }
        // Hybrid variants on a 2-D smooth state.
        let g2 = clamped_square(5.0, 48);
        let p2 = ScalarField::from_fn(g2.clone(), |c| {
            (-0.6 * (c[0] - 0.2).powi(2) - 0.8 * (c[1] + 0.1).powi(2)).exp()
        })?;
        let s2 = ScalarField::from_fn(g2.clone(), |c| 0.3 * c[0] - 0.1 * c[1])?;
        let st2 = normalized_state(p2, s2, 0.0);
        let probe2 = ScalarField::from_fn(g2.clone(), |c| {
            (-1.5 * (c[0] * c[0] + c[1] * c[1])).exp()
        })?;
        for (label, spec) in [
            ("hybrid", hybrid_qc(1.0, 2.0, 0.9, 0.8)),
            (
                "position-measurement",
                HamiltonianSpec::PositionMeasurement {
                    base: Box::new(hybrid_qc(1.0, 2.0, 0.0, 0.8)),
                    coupling: Schedule::Constant { value: 0.7 },
                },
            ),
            (
                "hybrid-oscillator",
                HamiltonianSpec::HybridOscillator {
                    quantum_mass: 1.0,
                    classical_mass: 2.0,
                    spring: 1.2,
                    q_axes: vec!["q".into()],
                    x_axes: vec!["x".into()],
                    hbar: 0.8,
                },
            ),
        ] {
            let r = functional_gradient_check(&spec, &st2, &probe2, eps)?;
            results.push(check(
                &format!("gradient/{label}/phase"),
                r.wrt_phase,
                TOL_GRADIENT,
                "residual of the phase variation",
            ));
            results.push(check(
                &format!("gradient/{label}/density"),
                r.wrt_density,
                TOL_GRADIENT,
                "residual of the density variation",
            ));
        }
        // Spin pointer (continuous x discrete grid).
        let gs = Grid::new(vec![
            AxisSpec::continuous("x", -6.0, 6.0, 96, Boundary::Clamped).unwrap(),
            AxisSpec::discrete("spin", &["+", "-"]).unwrap(),
        ])?;
        // Displaced state and off-centre probe so no symmetry nulls the
        // inner products the relative residual divides by.
        let ps = ScalarField::from_fn(gs.clone(), |c| {
            let w = if c[1] == 0.0 { 0.6 } else { 0.4 };
            w * (-0.7 * (c[0] - 0.3) * (c[0] - 0.3)).exp()
        })?;
        let ss = ScalarField::from_fn(gs.clone(), |c| {
            0.2 * c[0] + 0.1 * c[1] + 0.05 * (0.8 * c[0]).sin()
        })?;
        let sts = normalized_state(ps, ss, 0.0);
        let probes = ScalarField::from_fn(gs.clone(), |c| {
            (1.0 + 0.3 * c[1]) * (-1.2 * (c[0] + 0.4) * (c[0] + 0.4)).exp()
        })?;
        let spin_spec = HamiltonianSpec::SpinPointer {
            pointer_mass: 1.4,
            potential: PotentialSpec::Zero,
            coupling: Schedule::Constant { value: 0.6 },
            hbar: 0.9,
            quantum_pointer: false,
        };
        let r = functional_gradient_check(&spin_spec, &sts, &probes, eps)?;
        results.push(check(
            "gradient/spin-pointer/phase",
            r.wrt_phase,
            TOL_GRADIENT,
            "residual of the phase variation",
        ));
        results.push(check(
            "gradient/spin-pointer/density",
            r.wrt_density,
            TOL_GRADIENT,
            "residual of the density variation",
        ));
        // Finite quantum ensemble.
        let gf = Grid::new(vec![AxisSpec::discrete("level", &["a", "b", "c"]).unwrap()])?;
        let matrix = HermitianMatrix::new(
            3,
            vec![
                Complex64::new(0.4, 0.0),
                Complex64::new(0.2, 0.1),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.2, -0.1),
                Complex64::new(1.1, 0.0),
                Complex64::new(0.3, -0.2),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.3, 0.2),
                Complex64::new(1.9, 0.0),
            ],
        )?;
        let stf = EnsembleState::new(
            ScalarField::new(gf.clone(), vec![0.5, 0.3, 0.2])?,
            ScalarField::new(gf.clone(), vec![0.1, -0.2, 0.4])?,
            0.0,
        )?;
        let probef = ScalarField::new(gf.clone(), vec![0.3, -0.1, 0.2])?;
        let spec = HamiltonianSpec::FiniteQuantum { matrix, hbar: 0.7 };
        let r = functional_gradient_check(&spec, &stf, &probef, eps)?;
        results.push(check(
            "gradient/finite-quantum/phase",
            r.wrt_phase,
            TOL_GRADIENT,
            "residual of the phase variation",
        ));
        results.push(check(
            "gradient/finite-quantum/density",
            r.wrt_density,
            TOL_GRADIENT,
            "residual of the density variation",
        ));
        // The residual shrinks quadratically with epsilon.
        let r3 = functional_gradient_check(&hybrid_qc(1.0, 2.0, 0.9, 0.8), &st2, &probe2, 1e-3)?;
        let ratio = r.wrt_density.max(1e-300); // keep r alive for clarity
        let _ = ratio;
        let r4 = functional_gradient_check(&hybrid_qc(1.0, 2.0, 0.9, 0.8), &st2, &probe2, 1e-4)?;
        results.push(check(
            "gradient/epsilon-sweep",
            r4.wrt_density / r3.wrt_density.max(1e-300),
            0.05,
            "residual(1e-4)/residual(1e-3): centred differences are O(eps^2)",
        ));
        Ok(results)
    });

    out.push(check(
        "gradient/runtime",
        start.elapsed().as_secs_f64(),
        BUDGET_GRADIENTS_S,
        "seconds for the whole gradient suite",
    ));
    out
}

// ─────────────────────────── criterion 2 ──────────────────────────────

pub fn conservation() -> Vec<CheckResult> {
    let mut out = Vec::new();
    guarded("conservation/free-quantum", &mut out, || {
        // 256 cells, dt = 1e-3. A clamped box keeps the spreading packet's
        // quadratic phase seam-free, and is wide enough that the density
        // floor never crosses into the domain: the run then never clamps a
        // cell and conservation is pure telescoping. The size also honours
        // the dispersive pre-check at dt = 1e-3.
        let g = Grid::new(vec![
            AxisSpec::continuous("x", -9.75, 9.75, 256, Boundary::Clamped).unwrap(),
        ])?;
        let st = gaussian_1d(&g, 0.0, 1.0, 0.0);
        let spec = HamiltonianSpec::Quantum {
            masses: vec![AxisMass::new("x", 1.0)],
            potential: PotentialSpec::Zero,
            hbar: 1.0,
        };
        let mut cfg = IntegratorConfig::new(1e-3, 1.0);
        cfg.monitor_every = 25;
        cfg.norm_tol = 1e-6;
        let (_, log) = evolve(&spec, &st, &cfg)?;
        Ok(vec![
            check(
                "conservation/free-quantum/norm",
                log.max_norm_error(),
                TOL_NORM_DRIFT,
                "max |∫P - 1| over t in [0,1], dt = 1e-3, 256 cells",
            ),
            check(
                "conservation/free-quantum/energy",
                log.max_relative_energy_drift(),
                TOL_ENERGY_DRIFT,
                "max relative energy drift",
            ),
        ])
    });
    guarded("conservation/hybrid-oscillator", &mut out, || {
        let g = clamped_square(9.0, 256);
        let spec = CoherentStateSpec {
            quantum_mass: 1.0,
            classical_mass: 1.0,
            spring: 1.0,
            center: vec![0.0],
            displacement: vec![0.5],
            phase: 0.0,
            width: 0.6,
            hbar: 1.0,
        };
        let st = coherent_state(&spec, &g, &["q"], &["x"], 0.0)?;
        let h = spec.oscillator(&["q"], &["x"]);
        let mut cfg = IntegratorConfig::new(1e-3, 1.0);
        cfg.monitor_every = 25;
        cfg.norm_tol = 1e-6;
        let (_, log) = evolve(&h, &st, &cfg)?;
        Ok(vec![
            check(
                "conservation/hybrid-oscillator/norm",
                log.max_norm_error(),
                TOL_NORM_DRIFT,
                "max |∫P - 1| over t in [0,1], dt = 1e-3, 256^2 cells",
            ),
            check(
                "conservation/hybrid-oscillator/energy",
                log.max_relative_energy_drift(),
                TOL_ENERGY_DRIFT,
                "max relative energy drift",
            ),
        ])
    });
    out
}

// ─────────────────────────── criterion 3 ──────────────────────────────

pub fn schrodinger() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let n = 2048usize;
    let l = 20.0;
    let (mass, hbar) = (1.0, 1.0);
    let g = periodic_line("x", -l / 2.0, l / 2.0, n);
    let h = l / n as f64;
    let dt = 0.8 * 0.25 * h * h * mass / hbar;

    let mut scenario = |label: &str,
                        potential: PotentialSpec,
                        sigma0: f64,
                        mean: f64,
                        momentum: f64,
                        ss_dt: f64|
     -> SuiteResult {
        let start = Instant::now();
        let norm_factor = 1.0; // ψ normalized on the grid below
        let psi0 = ComplexField::from_fn(g.clone(), |c| {
            Complex64::from_polar(
                norm_factor * (-(c[0] - mean) * (c[0] - mean) / (4.0 * sigma0 * sigma0)).exp(),
                momentum * c[0] / hbar,
            )
        });
        let nrm: f64 = psi0
            .values
            .iter()
            .map(|z| z.norm_sqr() * h)
            .sum::<f64>()
            .sqrt();
        let psi0 = ComplexField {
            grid: psi0.grid.clone(),
            values: psi0.values.iter().map(|z| z / nrm).collect(),
        };
        // Configuration-ensemble route.
        let re = ScalarField::new(g.clone(), psi0.values.iter().map(|z| z.re).collect())?;
        let im = ScalarField::new(g.clone(), psi0.values.iter().map(|z| z.im).collect())?;
        let st0 = polar_from_wavefunction(&re, &im, hbar, 0.0)?;
        let spec = HamiltonianSpec::Quantum {
            masses: vec![AxisMass::new("x", mass)],
            potential: potential.clone(),
            hbar,
        };
        let mut cfg = IntegratorConfig::new(dt, 1.0);
        cfg.monitor_every = 2000;
        cfg.norm_tol = 1e-6;
        let (fin, _) = evolve(&spec, &st0, &cfg)?;
        // Independent split-step route.
        let psi_ref = split_step_reference(&psi0, &potential, mass, hbar, ss_dt, 1.0)?;
        let p_ref = psi_ref.density();
        let l1 = l1_distance(fin.density(), &p_ref);
        Ok(vec![
            check(
                &format!("schrodinger/{label}/l1"),
                l1,
                TOL_SCHRODINGER_L1,
                "L1(P) against the split-step reference at t = 1",
            ),
            check(
                &format!("schrodinger/{label}/runtime"),
                start.elapsed().as_secs_f64(),
                BUDGET_SCHRODINGER_S,
                "seconds for this scenario",
            ),
        ])
    };

    guarded("schrodinger/free", &mut out, || {
        scenario("free", PotentialSpec::Zero, 1.0, 0.0, 0.0, 1e-2)
    });
    guarded("schrodinger/harmonic", &mut out, || {
        // Exactly harmonic where the packet lives (|x| <= 6), with a C1
        // cubic-Hermite taper to a flat top so the periodic continuation has
        // no seam. Both solvers sample the identical tabulated values.
        let omega: f64 = 1.0;
        let x_cut = 6.0;
        let v_cut = 0.5 * omega * omega * x_cut * x_cut;
        let slope = omega * omega * x_cut;
        let delta = l / 2.0 - x_cut;
        let v_top = v_cut + 0.5 * slope * delta;
        let trap = ScalarField::from_fn(g.clone(), |c| {
            let ax = c[0].abs();
            if ax <= x_cut {
                0.5 * omega * omega * c[0] * c[0]
            } else {
                let t = (ax - x_cut) / delta;
                let h00 = 2.0 * t * t * t - 3.0 * t * t + 1.0;
                let h10 = t * t * t - 2.0 * t * t + t;
                let h01 = -2.0 * t * t * t + 3.0 * t * t;
                h00 * v_cut + h10 * delta * slope + h01 * v_top
            }
        })?;
        scenario(
            "harmonic",
            PotentialSpec::Tabulated { field: trap },
            (hbar / (2.0 * mass * omega)).sqrt(),
            1.0,
            0.0,
            1e-4,
        )
    });
    out
}

// ─────────────────────────── criterion 4 ──────────────────────────────

pub fn measurement() -> Vec<CheckResult> {
    let mut out = Vec::new();
    guarded("measurement/position", &mut out, || {
        let g = Grid::new(vec![
            AxisSpec::continuous("q", -3.2, 3.2, 96, Boundary::Periodic).unwrap(),
            AxisSpec::continuous("x", -8.0, 8.0, 1024, Boundary::Periodic).unwrap(),
        ])?;
        let p = ScalarField::from_fn(g.clone(), |c| {
            let zq = c[0] / 0.8;
            let zx = c[1] / 0.5;
            (-0.5 * (zq * zq + zx * zx)).exp()
        })?;
        let st = normalized_state(p, ScalarField::constant(g.clone(), 0.0), 0.0);
        let coupling = Schedule::TopHat {
            start: 0.0,
            end: 1.0,
            value: 2.0,
        };
        let t_end = 0.5;
        let shift = coupling.integral(0.0, t_end);
        let spec = HamiltonianSpec::PositionMeasurement {
            base: Box::new(HamiltonianSpec::HybridQC {
                quantum_mass: 1e9,
                classical_mass: 1e9,
                q_axes: vec!["q".into()],
                x_axes: vec!["x".into()],
                potential: PotentialSpec::Zero,
                hbar: 1.0,
            }),
            coupling,
        };
        let mut cfg = IntegratorConfig::new(1e-3, t_end);
        cfg.monitor_every = 100;
        let (fin, _) = evolve(&spec, &st, &cfg)?;
        let oracle = position_measurement_map(&st, "q", "x", shift)?;
        Ok(vec![check(
            "measurement/position/l1",
            l1_distance(fin.density(), oracle.density()),
            TOL_MEASUREMENT_L1,
            "interaction-only evolution vs the exact shift map",
        )])
    });
    guarded("measurement/spin", &mut out, || {
        let g = Grid::new(vec![
            AxisSpec::continuous("x", -8.0, 8.0, 1024, Boundary::Periodic).unwrap(),
            AxisSpec::discrete("spin", &["+", "-"]).unwrap(),
        ])?;
        let (w_plus, sigma) = (0.64, 0.5);
        let p = ScalarField::from_fn(g.clone(), |c| {
            let w = if c[1] == 0.0 { w_plus } else { 1.0 - w_plus };
            w * (-0.5 * (c[0] / sigma) * (c[0] / sigma)).exp()
        })?;
        let s = ScalarField::from_fn(g.clone(), |c| if c[1] == 0.0 { 0.3 } else { -0.2 })?;
        let st = normalized_state(p, s, 0.0);
        let coupling = Schedule::TopHat {
            start: 0.0,
            end: 1.0,
            value: 1.2,
        };
        let t_end = 0.5;
        let shift = coupling.integral(0.0, t_end);
        let spec = HamiltonianSpec::SpinPointer {
            pointer_mass: 1e9,
            potential: PotentialSpec::Zero,
            coupling,
            hbar: 1.0,
            quantum_pointer: false,
        };
        let mut cfg = IntegratorConfig::new(2e-3, t_end);
        cfg.monitor_every = 50;
        let (fin, _) = evolve(&spec, &st, &cfg)?;
        let oracle = spin_measurement_map(&st, "x", "spin", shift)?;
        // Per-branch L1 and the displaced-mixture marginal.
        let n = 1024;
        let h = 16.0 / n as f64;
        let mut l1_branch = [0.0f64; 2];
        let mut l1_marginal = 0.0f64;
        for xi in 0..n {
            for b in 0..2 {
                l1_branch[b] += h
                    * (fin.density().values()[xi * 2 + b]
                        - oracle.density().values()[xi * 2 + b])
                        .abs();
            }
            let x = fin.grid().coords(xi * 2)[0];
            let gaussian = |c: f64| {
                (-0.5 * ((x - c) / sigma) * ((x - c) / sigma)).exp()
                    / ((2.0 * PI).sqrt() * sigma)
            };
            let marg = fin.density().values()[xi * 2] + fin.density().values()[xi * 2 + 1];
            let expected = w_plus * gaussian(shift) + (1.0 - w_plus) * gaussian(-shift);
            l1_marginal += h * (marg - expected).abs();
        }
        Ok(vec![
            check(
                "measurement/spin/plus-branch-l1",
                l1_branch[0],
                TOL_MEASUREMENT_L1,
                "evolved + branch vs its shift map",
            ),
            check(
                "measurement/spin/minus-branch-l1",
                l1_branch[1],
                TOL_MEASUREMENT_L1,
                "evolved - branch vs its shift map",
            ),
            check(
                "measurement/spin/marginal-mixture",
                l1_marginal,
                TOL_MEASUREMENT_L1,
                "pointer marginal vs the displaced two-branch mixture",
            ),
        ])
    });
    out
}

// ─────────────────────────── criterion 5 ──────────────────────────────

pub fn decoherence() -> Vec<CheckResult> {
    let mut out = Vec::new();
    guarded("decoherence", &mut out, || {
        let n = 2561usize;
        let g = Grid::new(vec![
            AxisSpec::continuous("x", -16.0, 16.0, n, Boundary::Clamped).unwrap(),
            AxisSpec::discrete("spin", &["+", "-"]).unwrap(),
        ])?;
        let (w_plus, sigma) = (0.64, 0.5);
        let shift = 10.0 * sigma; // an integer number of cells: h = 0.0125
        let p = ScalarField::from_fn(g.clone(), |c| {
            let w = if c[1] == 0.0 { w_plus } else { 1.0 - w_plus };
            w * (-0.5 * (c[0] / sigma) * (c[0] / sigma)).exp()
        })?;
        let s = ScalarField::from_fn(g.clone(), |c| if c[1] == 0.0 { 0.4 } else { -0.1 })?;
        let st = normalized_state(p, s, 0.0);
        let post = spin_measurement_map(&st, "x", "spin", shift)?;
        let rho = conditional_density_operator(&post, &["x"], 1.0)?;
        let diag = rho.diagonal();
        let eig = rho.eigen_two_level()?;
        let angle = eig[0].1[1].norm().atan2(eig[0].1[0].norm());
        Ok(vec![
            check(
                "decoherence/coherence-norm",
                coherence_norm(&rho),
                TOL_COHERENCE,
                "off-diagonal weight at K = 10 sigma",
            ),
            check(
                "decoherence/diagonal-weights",
                (diag[0] - w_plus).abs().max((diag[1] - (1.0 - w_plus)).abs()),
                TOL_DIAGONAL,
                "diagonal vs the initial branch weights",
            ),
            check(
                "decoherence/eigenbasis-angle",
                angle,
                TOL_EIGEN_ANGLE,
                "angle between the eigenbasis and the coupling basis",
            ),
            check(
                "decoherence/trace",
                (rho.trace() - 1.0).abs(),
                1e-8,
                "trace of the conditional density operator",
            ),
        ])
    });
    out
}

// ─────────────────────────── criterion 6 ──────────────────────────────

pub fn coherent() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let spec = CoherentStateSpec {
        quantum_mass: 1.0,
        classical_mass: 1.0,
        spring: 1.0,
        center: vec![0.0],
        displacement: vec![1.0],
        phase: 0.0,
        width: 0.6,
        hbar: 1.0,
    };
    guarded("coherent/tracking", &mut out, || {
        let g = clamped_square(7.0, 160);
        let st = coherent_state(&spec, &g, &["q"], &["x"], 0.0)?;
        let h = spec.oscillator(&["q"], &["x"]);
        let period = 2.0 * PI / spec.omega_relative();
        let dt = 1.25e-3;
        let mut cfg = IntegratorConfig::new(dt, 2.0 * period);
        cfg.monitor_every = 4;
        cfg.norm_tol = 1e-6;
        cfg.observables = vec![
            ObservableSpec::MeanCoordinate { axis: "q".into() },
            ObservableSpec::MeanCoordinate { axis: "x".into() },
        ];
        let (_, log) = evolve(&h, &st, &cfg)?;
        let times = log.times();
        let mean_q = log.observable("mean_q").unwrap();
        let mean_x = log.observable("mean_x").unwrap();
        let amplitude = 0.5 * spec.displacement[0];
        let mut worst = 0.0f64;
        for (i, &t) in times.iter().enumerate() {
            if t > period {
                break;
            }
            let (qt, xt) = coherent_centroids(&spec, t);
            worst = worst
                .max((mean_q[i] - qt[0]).abs())
                .max((mean_x[i] - xt[0]).abs());
        }
        // FFT frequency of the relative coordinate over two periods.
        let rel: Vec<f64> = mean_q.iter().zip(&mean_x).map(|(q, x)| q - x).collect();
        let sample_dt = times[1] - times[0];
        let omega_measured = dominant_angular_frequency(&rel, sample_dt);
        Ok(vec![
            check(
                "coherent/centroid-deviation",
                worst / amplitude,
                TOL_CENTROID_REL,
                "max centroid deviation over one period / amplitude",
            ),
            check(
                "coherent/frequency",
                (omega_measured - spec.omega_relative()).abs() / spec.omega_relative(),
                TOL_FREQUENCY_REL,
                "FFT-measured relative-motion frequency",
            ),
        ])
    });
    guarded("coherent/zero-point-energy", &mut out, || {
        // d = 0: evaluated energy converges to ħω_m/2 with an O(s²) offset.
        let stationary = CoherentStateSpec {
            displacement: vec![0.0],
            ..spec.clone()
        };
        let g = clamped_square(7.0, 512);
        let e0 = 0.5 * stationary.hbar * stationary.omega_quantum();
        let widths = [0.4, 0.3, 0.2];
        let mut offsets = Vec::new();
        for &w in &widths {
            let s = CoherentStateSpec {
                width: w,
                ..stationary.clone()
            };
            let st = coherent_state(&s, &g, &["q"], &["x"], 0.0)?;
            let e = s.oscillator(&["q"], &["x"]).evaluate(&st)?;
            offsets.push(e - e0);
        }
        // Least-squares slope of offset vs s²: the spring-width law k s²/2.
        let xs: Vec<f64> = widths.iter().map(|w| w * w).collect();
        let xbar = xs.iter().sum::<f64>() / 3.0;
        let ybar = offsets.iter().sum::<f64>() / 3.0;
        let slope: f64 = xs
            .iter()
            .zip(&offsets)
            .map(|(x, y)| (x - xbar) * (y - ybar))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xbar) * (x - xbar)).sum::<f64>();
        let expected_slope = 0.5 * stationary.spring;
        Ok(vec![
            check(
                "coherent/offset-slope",
                (slope - expected_slope).abs() / expected_slope,
                0.05,
                "offset/s^2 slope vs the spring-width law k/2",
            ),
            check(
                "coherent/offset-smallest-width",
                offsets[2].abs(),
                1.2 * 0.5 * stationary.spring * widths[2] * widths[2],
                "energy offset at the smallest width is O(k s^2)",
            ),
        ])
    });
    out
}

// ─────────────────────────── criterion 7 ──────────────────────────────

pub fn stationary() -> Vec<CheckResult> {
    let mut out = Vec::new();
    guarded("stationary", &mut out, || {
        let mut results = Vec::new();
        let (mass, spring, hbar) = (1.0, 1.0, 1.0);
        let g = clamped_square(10.0, 256);
        let spec = hybrid_qc(mass, 1.7, spring, hbar);
        for n in [0usize, 1] {
            let mode = stationary_spring_mode(&g, "q", "x", mass, spring, hbar, n, |x| {
                (-0.5 * (x / 0.8) * (x / 0.8)).exp()
            })?;
            let st = stationary_hybrid_state(&mode, &g, "q", "x", 0.2)?;
            let (flux, eig) = stationary_residual(&spec, &st, mode.energy)?;
            results.push(check(
                &format!("stationary/n{n}/flux"),
                flux,
                TOL_STATIONARY,
                "max |dP/dt| over the grid",
            ));
            results.push(check(
                &format!("stationary/n{n}/eigen"),
                eig,
                TOL_STATIONARY,
                "max |dS/dt + E_n| over occupied cells",
            ));
            let e = spec.evaluate(&st)?;
            results.push(check(
                &format!("stationary/n{n}/energy"),
                (e - mode.energy).abs(),
                TOL_STATIONARY_ENERGY,
                "ensemble energy vs the mode eigenvalue",
            ));
        }
        Ok(results)
    });
    out
}

// ─────────────────────────── criterion 8 ──────────────────────────────

pub fn galilean() -> Vec<CheckResult> {
    let mut out = Vec::new();
    guarded("galilean", &mut out, || {
        let n = 129usize;
        let g = clamped_square(8.0, n);
        let (m, mm, k, hbar) = (1.0, 1.0, 1.0, 1.0);
        let spec = hybrid_qc(m, mm, k, hbar);
        let p = ScalarField::from_fn(g.clone(), |c| {
            (-0.5 * ((c[0] - 0.5) * (c[0] - 0.5) + (c[1] + 0.5) * (c[1] + 0.5))).exp()
        })?;
        let st = normalized_state(p, ScalarField::constant(g.clone(), 0.0), 0.0);
        let t_end = 1.0;
        let u = 0.5; // u * t_end = 4 grid cells: the inverse map is exact
        let mut cfg = IntegratorConfig::new(2e-3, t_end);
        cfg.monitor_every = 100;
        cfg.norm_tol = 1e-5;
        // Direct evolution.
        let (direct, _) = evolve(&spec, &st, &cfg)?;
        // Transform, evolve, transform back.
        let boost = GalileanElement::boost(&[u]);
        let boosted = galilean_transform(&st, &boost, m, mm, &["q"], &["x"])?;
        let (evolved, _) = evolve(&spec, &boosted, &cfg)?;
        let restored = galilean_transform(&evolved, &boost.inverse(), m, mm, &["q"], &["x"])?;
        Ok(vec![check(
            "galilean/covariance-l1",
            l1_distance(restored.density(), direct.density()),
            TOL_GALILEAN_L1,
            "L1(P): transform-evolve-invert vs direct evolution",
        )])
    });
    out
}

// ─────────────────────────── criterion 9 ──────────────────────────────

pub fn com_relative() -> Vec<CheckResult> {
    let mut out = Vec::new();
    guarded("com-relative/sum", &mut out, || {
        let g = clamped_square(6.0, 384);
        let spec = hybrid_qc(1.7, 0.9, 1.1, 0.8);
        let p = ScalarField::from_fn(g.clone(), |c| {
            (-0.5 * (0.9 * c[0] * c[0] + 1.2 * c[1] * c[1] + 0.5 * c[0] * c[1])).exp()
        })?;
        let s = ScalarField::from_fn(g.clone(), |c| 0.4 * c[0] - 0.7 * c[1])?;
        let st = normalized_state(p, s, 0.0);
        let split = com_relative_split(&spec, &st)?;
        let direct = spec.evaluate(&st)?;
        Ok(vec![check(
            "com-relative/sum",
            (split.total() - direct).abs(),
            TOL_SPLIT_SUM,
            "three-term sum vs the direct energy",
        )])
    });
    guarded("com-relative/separable", &mut out, || {
        let g = clamped_square(6.0, 256);
        let spec = hybrid_qc(1.3, 1.3, 0.7, 1.0);
        let p = ScalarField::from_fn(g.clone(), |c| {
            let com = 0.5 * (c[0] + c[1]);
            let rel = c[0] - c[1];
            (-com * com / 1.8 - rel * rel / 0.9).exp()
        })?;
        let st = normalized_state(p, ScalarField::constant(g.clone(), 0.0), 0.0);
        let split = com_relative_split(&spec, &st)?;
        Ok(vec![check(
            "com-relative/separable-cross",
            split.cross.abs(),
            TOL_SPLIT_CROSS_ZERO,
            "cross term for a density separable in (com, rel)",
        )])
    });
    guarded("com-relative/correlated", &mut out, || {
        // Closed-form Gaussian oracle:
        // cross = (ħ²/4M_T²)(1,1)Σ⁻¹(M,-m)ᵀ. The diagnostic converges at
        // O(h²); a two-grid Richardson step removes that bias.
        let (m, mm, hbar) = (1.7, 0.9, 0.8);
        let (s11, s12, s22) = (0.8, 0.25, 0.6);
        let det = s11 * s22 - s12 * s12;
        let (i11, i12, i22) = (s22 / det, -s12 / det, s11 / det);
        let mt = m + mm;
        let oracle =
            hbar * hbar / (4.0 * mt * mt) * ((i11 + i12) * mm - (i12 + i22) * m);
        let spec = hybrid_qc(m, mm, 0.4, hbar);
        let cross_at = |n: usize| -> std::result::Result<f64, Box<dyn std::error::Error>> {
            let g = clamped_square(6.5, n);
            let p = ScalarField::from_fn(g.clone(), |c| {
                let (q, x) = (c[0], c[1]);
                (-0.5 * (i11 * q * q + 2.0 * i12 * q * x + i22 * x * x)).exp()
            })?;
            let st = normalized_state(p, ScalarField::constant(g.clone(), 0.0), 0.0);
            Ok(com_relative_split(&spec, &st)?.cross)
        };
        let coarse = cross_at(512)?;
        let fine = cross_at(1024)?;
        let extrapolated = (4.0 * fine - coarse) / 3.0;
        Ok(vec![
            check(
                "com-relative/correlated-cross",
                (extrapolated - oracle).abs(),
                TOL_SPLIT_CROSS_ORACLE,
                "cross term vs the closed-form Gaussian oracle",
            ),
            check_at_least(
                "com-relative/correlated-nonzero",
                extrapolated.abs(),
                1e-3,
                "the cross term is genuinely nonzero",
            ),
        ])
    });
    out
}

// ─────────────────────────── criterion 10 ─────────────────────────────

pub fn cosmology() -> Vec<CheckResult> {
    let start = Instant::now();
    let mut out = Vec::new();
    let params = MinisuperspaceParams {
        hbar: 1.0,
        field_mass: 1.0,
        lambda: 0.0,
    };
    guarded("cosmology/radii", &mut out, || {
        let radii = quantized_radii(&params, 10)?;
        let mut worst = 0.0f64;
        for (n, roots) in radii.iter().enumerate() {
            let a = roots[0];
            worst = worst
                .max((a - (2.0 * n as f64 + 1.0)).abs())
                .max((a - params.lambda * a * a * a / 3.0 - (2.0 * n as f64 + 1.0)).abs());
        }
        Ok(vec![check(
            "cosmology/radii",
            worst,
            TOL_RADIUS_RESIDUAL,
            "a_n = 2n+1 for n <= 10 at lambda = 0, and root consistency",
        )])
    });
    guarded("cosmology/modes", &mut out, || {
        let mut results = Vec::new();
        let modes: Vec<_> = (0..=6)
            .map(|n| mode_density(&params, n, 12.0, 512))
            .collect::<crate::error::Result<_>>()?;
        let mut worst_rel = 0.0f64;
        let mut nodes_ok = true;
        for mode in &modes {
            let (residual, scale) = constraint_residual(mode, &params);
            worst_rel = worst_rel.max(residual / scale);
            nodes_ok &= mode.node_count() == mode.index;
        }
        results.push(check(
            "cosmology/constraint-residual",
            worst_rel,
            TOL_CONSTRAINT_REL,
            "relative constraint residual, 512-point grids, n = 0..6",
        ));
        results.push(check(
            "cosmology/node-counts",
            if nodes_ok { 0.0 } else { 1.0 },
            0.5,
            "node count of psi_n equals n",
        ));
        let report = arrow_of_time_report(&modes, &params)?;
        results.push(check(
            "cosmology/entropy-ordering",
            if report.entropy_increasing { 0.0 } else { 1.0 },
            0.5,
            "scale-free entropy strictly increasing over n = 0..6",
        ));
        results.push(check(
            "cosmology/radius-ordering",
            if report.radius_increasing { 0.0 } else { 1.0 },
            0.5,
            "radii strictly increasing at lambda = 0",
        ));
        Ok(results)
    });
    guarded("cosmology/quartic", &mut out, || {
        let quadratic = generic_potential_modes(|_| 0.0, &params, 0, 2049)?;
        let quartic = generic_potential_modes(|phi| 0.01 * phi.powi(4), &params, 0, 2049)?;
        Ok(vec![check_at_least(
            "cosmology/quartic-ground-shift",
            quartic[0].energy - quadratic[0].energy,
            1e-4,
            "quartic perturbation raises the ground level",
        )])
    });
    out.push(check(
        "cosmology/runtime",
        start.elapsed().as_secs_f64(),
        BUDGET_COSMOLOGY_S,
        "seconds for the cosmology suite",
    ));
    out
}

// ─────────────────────────── criterion 11 ─────────────────────────────

pub fn noninteraction() -> Vec<CheckResult> {
    let mut out = Vec::new();
    guarded("noninteraction", &mut out, || {
        let gq = Grid::new(vec![
            AxisSpec::continuous("q", -8.0, 8.0, 256, Boundary::Clamped).unwrap(),
        ])?;
        let gx = Grid::new(vec![
            AxisSpec::continuous("x", -8.0, 8.0, 256, Boundary::Clamped).unwrap(),
        ])?;
        let a = gaussian_1d(&gq, 0.4, 1.0, 0.0);
        let b = gaussian_1d(&gx, -0.3, 0.7, 0.0);
        let part_a = HamiltonianSpec::Quantum {
            masses: vec![AxisMass::new("q", 1.0)],
            potential: PotentialSpec::Zero,
            hbar: 0.9,
        };
        let part_b = HamiltonianSpec::Classical {
            masses: vec![AxisMass::new("x", 2.0)],
            potential: PotentialSpec::Zero,
        };
        let free = hybrid_qc(1.0, 2.0, 0.0, 0.9);
        let coupled = hybrid_qc(1.0, 2.0, 1.3, 0.9);
        let r_free = noninteraction_residual(&free, &a, &b, &part_a, &part_b)?;
        let r_spring = noninteraction_residual(&coupled, &a, &b, &part_a, &part_b)?;
        // Gaussian oracle for the spring term.
        let expected = 0.5 * 1.3 * (1.0 + 0.49 + 0.49);
        Ok(vec![
            check(
                "noninteraction/free",
                r_free,
                TOL_NONINTERACTION,
                "additivity residual with V = 0",
            ),
            check_at_least(
                "noninteraction/spring",
                r_spring,
                MIN_INTERACTION,
                "spring coupling breaks additivity",
            ),
            check(
                "noninteraction/spring-oracle",
                (r_spring - expected).abs() / expected,
                1e-4,
                "spring residual vs the Gaussian moment oracle",
            ),
        ])
    });
    out
}

// ──────────────────────── extra oracle checks ─────────────────────────

pub fn oracle_extras() -> Vec<CheckResult> {
    let mut out = Vec::new();
    guarded("oracles/ballistic", &mut out, || {
        // Well-localized classical ensemble in a harmonic well: the centroid
        // of the full evolution follows Newton within 1% of the amplitude.
        let n = 2048usize;
        let g = periodic_line("x", -3.0, 3.0, n);
        let (amplitude, sigma, omega) = (2.0, 0.04, 1.0);
        let p0 = ScalarField::from_fn(g.clone(), |c| {
            let z = (c[0] + amplitude) / sigma;
            (-0.5 * z * z).exp()
        })?;
        let st = normalized_state(p0, ScalarField::constant(g.clone(), 0.0), 0.0);
        let spec = HamiltonianSpec::Classical {
            masses: vec![AxisMass::new("x", 1.0)],
            potential: PotentialSpec::Harmonic {
                spring: omega * omega,
                center: vec![0.0],
            },
        };
        let t_end = 0.3;
        let mut cfg = IntegratorConfig::new(4e-4, t_end);
        cfg.monitor_every = 50;
        cfg.observables = vec![ObservableSpec::MeanCoordinate { axis: "x".into() }];
        let (fin, log) = evolve(&spec, &st, &cfg)?;
        let moved = ballistic_transport(
            st.density(),
            &[0.0],
            &PotentialSpec::Harmonic {
                spring: omega * omega,
                center: vec![0.0],
            },
            1.0,
            t_end,
        )?;
        let centroid = log.rows.last().unwrap().observables[0];
        let expected = -amplitude * (omega * t_end).cos();
        Ok(vec![
            check(
                "oracles/ballistic-centroid",
                (centroid - expected).abs() / amplitude,
                0.01,
                "full-evolution centroid vs the Newtonian trajectory",
            ),
            check(
                "oracles/ballistic-l1",
                l1_distance(fin.density(), &moved),
                0.1,
                "transported profile stays close pre-caustic",
            ),
        ])
    });
    out
}
