//! Lowered form of a Hamiltonian spec bound to a grid, with the energy and
//! rate kernels.

use std::sync::Arc;

use num_complex::Complex64;

use crate::axis::Boundary;
use crate::diffops::{gradient_into, pairwise_sum};
use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::state::{EnsembleState, DEFAULT_FLOOR_REL};

use super::{HamiltonianSpec, HermitianMatrix, PotentialSpec, Schedule, StabilityBounds};

/// Kinetic structure on one continuous axis.
#[derive(Debug, Clone)]
struct AxisTerm {
    axis: usize,
    inv_mass: f64,
    fisher: bool,
}

#[derive(Debug, Clone)]
enum CouplingTerm {
    /// `κ(t) Σ_pairs ∫ P q ∂S/∂x`
    PositionReadout {
        schedule: Schedule,
        pairs: Vec<(usize, usize)>,
    },
    /// `κ(t) Σ_α α ∫ P ∂S/∂x`
    SpinReadout {
        schedule: Schedule,
        spin_axis: usize,
        x_axis: usize,
    },
}

#[derive(Debug, Clone)]
struct PotentialTerm {
    base: Vec<f64>,
    schedules: Vec<Schedule>,
}

impl PotentialTerm {
    fn factor(&self, t: f64) -> f64 {
        self.schedules.iter().map(|s| s.value(t)).product()
    }
}

/// `Σ_faces τ (δv/h)² [P̄]` along one axis: the staggered quadratic form
/// behind every kinetic term. With `pbar` the face value is the arithmetic
/// mean of the adjacent cells.
pub(crate) fn face_quadratic(grid: &Grid, axis: usize, v: &[f64], pbar: Option<&[f64]>) -> f64 {
    let n = grid.axis(axis).len();
    let st = grid.strides()[axis];
    let h = grid.axis(axis).spacing().expect("continuous axis");
    let faces = grid.axis(axis).face_count();
    let wrap = grid.axis(axis).boundary() == Some(Boundary::Periodic);
    let mut line_sums = Vec::with_capacity(grid.cell_count() / n);
    for base in grid.lines(axis) {
        let tw = grid.transverse_weight(axis, base);
        let mut acc = 0.0;
        for k in 0..faces {
            let c0 = base + k * st;
            let c1 = if wrap && k + 1 == n {
                base
            } else {
                base + (k + 1) * st
            };
            let dv = v[c1] - v[c0];
            let w = match pbar {
                Some(p) => 0.5 * (p[c0] + p[c1]),
                None => 1.0,
            };
            acc += w * dv * dv;
        }
        line_sums.push(tw * acc);
    }
    pairwise_sum(&line_sums) / h
}

pub(crate) struct Engine {
    grid: Arc<Grid>,
    weights: Vec<f64>,
    axis_terms: Vec<AxisTerm>,
    hbar: f64,
    potential: Option<PotentialTerm>,
    couplings: Vec<CouplingTerm>,
    matrix: Option<HermitianMatrix>,
    u: Vec<f64>,
    du: Vec<f64>,
    psi: Vec<Complex64>,
    hpsi: Vec<Complex64>,
}

fn require_all_continuous(grid: &Grid) -> Result<()> {
    if grid.axes().iter().all(|a| a.is_continuous()) {
        Ok(())
    } else {
        Err(CoreError::IncompatibleAxes(
            "this spec supports continuous axes only".into(),
        ))
    }
}

fn axis_groups(
    grid: &Grid,
    q_axes: &[String],
    x_axes: &[String],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let qi: Vec<usize> = q_axes
        .iter()
        .map(|n| grid.axis_index(n))
        .collect::<Result<_>>()?;
    let xi: Vec<usize> = x_axes
        .iter()
        .map(|n| grid.axis_index(n))
        .collect::<Result<_>>()?;
    for &i in qi.iter().chain(&xi) {
        if !grid.axis(i).is_continuous() {
            return Err(CoreError::IncompatibleAxes(format!(
                "axis `{}` must be continuous",
                grid.axis(i).name
            )));
        }
    }
    let mut all: Vec<usize> = qi.iter().chain(&xi).cloned().collect();
    all.sort_unstable();
    all.dedup();
    if all.len() != qi.len() + xi.len() {
        return Err(CoreError::IncompatibleAxes(
            "quantum and classical axis groups overlap".into(),
        ));
    }
    let n_cont = grid.continuous_axes().count();
    if all.len() != n_cont || grid.axes().len() != n_cont {
        return Err(CoreError::IncompatibleAxes(
            "axis groups must cover exactly the grid's continuous axes".into(),
        ));
    }
    Ok((qi, xi))
}

impl Engine {
    pub fn new(spec: &HamiltonianSpec, grid: &Arc<Grid>) -> Result<Engine> {
        spec.validate()?;
        let mut axis_terms = Vec::new();
        let mut couplings = Vec::new();
        let mut matrix = None;
        let mut hbar = 0.0;
        let mut potential_spec: Option<&PotentialSpec> = None;

        match spec {
            HamiltonianSpec::Classical { masses, potential } => {
                require_all_continuous(grid)?;
                Self::per_axis_masses(grid, masses, false, &mut axis_terms)?;
                potential_spec = Some(potential);
            }
            HamiltonianSpec::Quantum {
                masses,
                potential,
                hbar: hb,
            } => {
                require_all_continuous(grid)?;
                Self::per_axis_masses(grid, masses, true, &mut axis_terms)?;
                potential_spec = Some(potential);
                hbar = *hb;
            }
            HamiltonianSpec::HybridQC {
                quantum_mass,
                classical_mass,
                q_axes,
                x_axes,
                potential,
                hbar: hb,
            } => {
                let (qi, xi) = axis_groups(grid, q_axes, x_axes)?;
                for a in qi {
                    axis_terms.push(AxisTerm {
                        axis: a,
                        inv_mass: 1.0 / quantum_mass,
                        fisher: true,
                    });
                }
                for a in xi {
                    axis_terms.push(AxisTerm {
                        axis: a,
                        inv_mass: 1.0 / classical_mass,
                        fisher: false,
                    });
                }
                potential_spec = Some(potential);
                hbar = *hb;
            }
            HamiltonianSpec::SpinPointer {
                pointer_mass,
                potential,
                coupling,
                hbar: hb,
                quantum_pointer,
            } => {
                let cont: Vec<usize> = grid.continuous_axes().map(|(i, _)| i).collect();
                let disc: Vec<usize> = (0..grid.axes().len())
                    .filter(|&i| !grid.axis(i).is_continuous())
                    .collect();
                if cont.len() != 1 || disc.len() != 1 || grid.axis(disc[0]).len() != 2 {
                    return Err(CoreError::IncompatibleAxes(
                        "spin-pointer specs need one continuous axis and one two-label axis"
                            .into(),
                    ));
                }
                axis_terms.push(AxisTerm {
                    axis: cont[0],
                    inv_mass: 1.0 / pointer_mass,
                    fisher: *quantum_pointer,
                });
                couplings.push(CouplingTerm::SpinReadout {
                    schedule: coupling.clone(),
                    spin_axis: disc[0],
                    x_axis: cont[0],
                });
                potential_spec = Some(potential);
                hbar = *hb;
            }
            HamiltonianSpec::PositionMeasurement { base, coupling } => {
                let inner = Engine::new(base, grid)?;
                let (q_axes, x_axes) = match &**base {
                    HamiltonianSpec::HybridQC { q_axes, x_axes, .. } => (q_axes, x_axes),
                    _ => unreachable!("validated"),
                };
                if q_axes.len() != x_axes.len() {
                    return Err(CoreError::IncompatibleAxes(
                        "position readout needs paired quantum/classical axes".into(),
                    ));
                }
                let pairs: Vec<(usize, usize)> = q_axes
                    .iter()
                    .zip(x_axes)
                    .map(|(q, x)| Ok((grid.axis_index(q)?, grid.axis_index(x)?)))
                    .collect::<Result<_>>()?;
                let mut engine = inner;
                engine.couplings.push(CouplingTerm::PositionReadout {
                    schedule: coupling.clone(),
                    pairs,
                });
                return Ok(engine);
            }
            HamiltonianSpec::HybridOscillator {
                quantum_mass,
                classical_mass,
                spring,
                q_axes,
                x_axes,
                hbar: hb,
            } => {
                let (qi, xi) = axis_groups(grid, q_axes, x_axes)?;
                for a in qi {
                    axis_terms.push(AxisTerm {
                        axis: a,
                        inv_mass: 1.0 / quantum_mass,
                        fisher: true,
                    });
                }
                for a in xi {
                    axis_terms.push(AxisTerm {
                        axis: a,
                        inv_mass: 1.0 / classical_mass,
                        fisher: false,
                    });
                }
                let spring_potential = PotentialSpec::SpringPair {
                    spring: *spring,
                    q_axes: q_axes.clone(),
                    x_axes: x_axes.clone(),
                };
                let (base, schedules) = spring_potential.lower(grid)?;
                hbar = *hb;
                let n = grid.cell_count();
                return Ok(Engine {
                    grid: grid.clone(),
                    weights: grid.weights(),
                    axis_terms,
                    hbar,
                    potential: Some(PotentialTerm { base, schedules }),
                    couplings,
                    matrix,
                    u: vec![0.0; n],
                    du: vec![0.0; n],
                    psi: Vec::new(),
                    hpsi: Vec::new(),
                });
            }
            HamiltonianSpec::FiniteQuantum { matrix: m, hbar: hb } => {
                if grid.axes().iter().any(|a| a.is_continuous()) {
                    return Err(CoreError::IncompatibleAxes(
                        "finite quantum specs act on purely discrete grids".into(),
                    ));
                }
                if m.dim() != grid.cell_count() {
                    return Err(CoreError::IncompatibleAxes(format!(
                        "matrix dimension {} vs {} discrete configurations",
                        m.dim(),
                        grid.cell_count()
                    )));
                }
                matrix = Some(m.clone());
                hbar = *hb;
            }
        }

        let potential = match potential_spec {
            Some(p) => {
                let (base, schedules) = p.lower(grid)?;
                Some(PotentialTerm { base, schedules })
            }
            None => None,
        };
        let n = grid.cell_count();
        let needs_psi = matrix.is_some();
        Ok(Engine {
            grid: grid.clone(),
            weights: grid.weights(),
            axis_terms,
            hbar,
            potential,
            couplings,
            matrix,
            u: vec![0.0; n],
            du: vec![0.0; n],
            psi: if needs_psi {
                vec![Complex64::new(0.0, 0.0); n]
            } else {
                Vec::new()
            },
            hpsi: if needs_psi {
                vec![Complex64::new(0.0, 0.0); n]
            } else {
                Vec::new()
            },
        })
    }

    fn per_axis_masses(
        grid: &Grid,
        masses: &[super::AxisMass],
        fisher: bool,
        out: &mut Vec<AxisTerm>,
    ) -> Result<()> {
        if masses.len() != grid.axes().len() {
            return Err(CoreError::IncompatibleAxes(format!(
                "{} masses for {} axes",
                masses.len(),
                grid.axes().len()
            )));
        }
        for m in masses {
            let a = grid.axis_index(&m.axis)?;
            if out.iter().any(|t| t.axis == a) {
                return Err(CoreError::IncompatibleAxes(format!(
                    "axis `{}` has two masses",
                    m.axis
                )));
            }
            out.push(AxisTerm {
                axis: a,
                inv_mass: 1.0 / m.mass,
                fisher,
            });
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn has_fisher_term(&self) -> bool {
        self.axis_terms.iter().any(|t| t.fisher)
    }

    fn fill_u(&mut self, p: &[f64]) {
        for (u, &pv) in self.u.iter_mut().zip(p) {
            *u = pv.max(0.0).sqrt();
        }
    }

    fn fill_psi(&mut self, p: &[f64], s: &[f64]) {
        let hbar = self.hbar;
        for ((psi, &pv), &sv) in self.psi.iter_mut().zip(p).zip(s) {
            *psi = Complex64::from_polar(pv.max(0.0).sqrt(), sv / hbar);
        }
    }

    fn face_energy(&self, axis: usize, v: &[f64], pbar: Option<&[f64]>) -> f64 {
        face_quadratic(&self.grid, axis, v, pbar)
    }

    pub fn energy(&mut self, p: &[f64], s: &[f64], t: f64) -> Result<f64> {
        for (cell, v) in p.iter().chain(s.iter()).enumerate() {
            if !v.is_finite() {
                return Err(CoreError::NonFinite {
                    cell: cell % p.len(),
                    value: *v,
                });
            }
        }
        let needs_u = self.axis_terms.iter().any(|a| a.fisher);
        if needs_u {
            self.fill_u(p);
        }
        let mut e = 0.0;
        for term in &self.axis_terms {
            e += 0.5 * term.inv_mass * self.face_energy(term.axis, s, Some(p));
            if term.fisher {
                e += 0.5 * self.hbar * self.hbar * term.inv_mass
                    * self.face_energy(term.axis, &self.u, None);
            }
        }
        if let Some(pot) = &self.potential {
            let f = pot.factor(t);
            if f != 0.0 {
                let terms: Vec<f64> = p
                    .iter()
                    .zip(&pot.base)
                    .zip(&self.weights)
                    .map(|((&pv, &v), &w)| w * pv * v)
                    .collect();
                e += f * pairwise_sum(&terms);
            }
        }
        for c in &self.couplings {
            e += self.coupling_energy(c, p, s, t);
        }
        if self.matrix.is_some() {
            self.fill_psi(p, s);
            let m = self.matrix.as_ref().unwrap();
            m.apply(&self.psi, &mut self.hpsi);
            let acc: f64 = self
                .psi
                .iter()
                .zip(&self.hpsi)
                .map(|(a, b)| (a.conj() * b).re)
                .sum();
            e += acc;
        }
        Ok(e)
    }

    fn coupling_energy(&self, c: &CouplingTerm, p: &[f64], s: &[f64], t: f64) -> f64 {
        let g = &self.grid;
        match c {
            CouplingTerm::PositionReadout { schedule, pairs } => {
                let kappa = schedule.value(t);
                if kappa == 0.0 {
                    return 0.0;
                }
                let mut e = 0.0;
                for &(qa, xa) in pairs {
                    let n = g.axis(xa).len();
                    let st = g.strides()[xa];
                    let faces = g.axis(xa).face_count();
                    let wrap = g.axis(xa).boundary() == Some(Boundary::Periodic);
                    for base in g.lines(xa) {
                        let tw = g.transverse_weight(xa, base);
                        let q = g.coords(base)[qa];
                        let mut acc = 0.0;
                        for k in 0..faces {
                            let c0 = base + k * st;
                            let c1 = if wrap && k + 1 == n { base } else { base + (k + 1) * st };
                            acc += 0.5 * (p[c0] + p[c1]) * (s[c1] - s[c0]);
                        }
                        e += tw * q * acc;
                    }
                }
                kappa * e
            }
            CouplingTerm::SpinReadout {
                schedule,
                spin_axis,
                x_axis,
            } => {
                let kappa = schedule.value(t);
                if kappa == 0.0 {
                    return 0.0;
                }
                let n = g.axis(*x_axis).len();
                let st = g.strides()[*x_axis];
                let faces = g.axis(*x_axis).face_count();
                let wrap = g.axis(*x_axis).boundary() == Some(Boundary::Periodic);
                let mut e = 0.0;
                for base in g.lines(*x_axis) {
                    let tw = g.transverse_weight(*x_axis, base);
                    let sign = if g.unravel(base)[*spin_axis] == 0 { 1.0 } else { -1.0 };
                    let mut acc = 0.0;
                    for k in 0..faces {
                        let c0 = base + k * st;
                        let c1 = if wrap && k + 1 == n { base } else { base + (k + 1) * st };
                        acc += 0.5 * (p[c0] + p[c1]) * (s[c1] - s[c0]);
                    }
                    e += tw * sign * acc;
                }
                kappa * e
            }
        }
    }

    /// `out = δH/δS` with respect to the quadrature inner product.
    pub fn density_rate(&mut self, p: &[f64], s: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        let g = self.grid.clone();
        for term in &self.axis_terms {
            let axis = term.axis;
            let n = g.axis(axis).len();
            let st = g.strides()[axis];
            let h = g.axis(axis).spacing().unwrap();
            let faces = g.axis(axis).face_count();
            let wrap = g.axis(axis).boundary() == Some(Boundary::Periodic);
            let scale = term.inv_mass / h;
            for base in g.lines(axis) {
                let tw = g.transverse_weight(axis, base) * scale;
                for k in 0..faces {
                    let c0 = base + k * st;
                    let c1 = if wrap && k + 1 == n { base } else { base + (k + 1) * st };
                    let flux = tw * 0.5 * (p[c0] + p[c1]) * (s[c1] - s[c0]);
                    out[c1] += flux;
                    out[c0] -= flux;
                }
            }
        }
        for c in &self.couplings {
            self.coupling_density_rate(c, p, t, out);
        }
        if self.matrix.is_some() {
            self.fill_psi(p, s);
            let m = self.matrix.as_ref().unwrap();
            m.apply(&self.psi, &mut self.hpsi);
            let two_over_hbar = 2.0 / self.hbar;
            for ((o, psi), hpsi) in out.iter_mut().zip(&self.psi).zip(&self.hpsi) {
                *o += two_over_hbar * (psi.conj() * hpsi).im;
            }
        }
        for (o, &w) in out.iter_mut().zip(&self.weights) {
            *o /= w;
        }
        Ok(())
    }

    fn coupling_density_rate(&self, c: &CouplingTerm, p: &[f64], t: f64, out: &mut [f64]) {
        let g = &self.grid;
        match c {
            CouplingTerm::PositionReadout { schedule, pairs } => {
                let kappa = schedule.value(t);
                if kappa == 0.0 {
                    return;
                }
                for &(qa, xa) in pairs {
                    let n = g.axis(xa).len();
                    let st = g.strides()[xa];
                    let faces = g.axis(xa).face_count();
                    let wrap = g.axis(xa).boundary() == Some(Boundary::Periodic);
                    for base in g.lines(xa) {
                        let tw = g.transverse_weight(xa, base);
                        let kq = kappa * tw * g.coords(base)[qa];
                        for k in 0..faces {
                            let c0 = base + k * st;
                            let c1 = if wrap && k + 1 == n { base } else { base + (k + 1) * st };
                            let flux = kq * 0.5 * (p[c0] + p[c1]);
                            out[c1] += flux;
                            out[c0] -= flux;
                        }
                    }
                }
            }
            CouplingTerm::SpinReadout {
                schedule,
                spin_axis,
                x_axis,
            } => {
                let kappa = schedule.value(t);
                if kappa == 0.0 {
                    return;
                }
                let n = g.axis(*x_axis).len();
                let st = g.strides()[*x_axis];
                let faces = g.axis(*x_axis).face_count();
                let wrap = g.axis(*x_axis).boundary() == Some(Boundary::Periodic);
                for base in g.lines(*x_axis) {
                    let tw = g.transverse_weight(*x_axis, base);
                    let sign = if g.unravel(base)[*spin_axis] == 0 { 1.0 } else { -1.0 };
                    let ka = kappa * tw * sign;
                    for k in 0..faces {
                        let c0 = base + k * st;
                        let c1 = if wrap && k + 1 == n { base } else { base + (k + 1) * st };
                        let flux = ka * 0.5 * (p[c0] + p[c1]);
                        out[c1] += flux;
                        out[c0] -= flux;
                    }
                }
            }
        }
    }

    /// `out = -δH/δP` with respect to the quadrature inner product.
    ///
    /// The quotient terms floor only their denominators: exact zeros of `P`
    /// stay exact in the numerator stencils, occupied neighbours of a node
    /// are unperturbed, and the floored quotient decays smoothly to zero in
    /// underflowed tails instead of amplifying rounding noise.
    pub fn phase_rate(&mut self, p: &[f64], s: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        self.phase_rate_impl(p, s, t, out, false)
    }

    /// Variant for time stepping: the quotient denominators use the smooth
    /// regularization `√(P + ε)` instead of `√(max(P, ε))`. The hard floor
    /// is exact wherever `P > ε` (what the diagnostics need), but its kink
    /// at the crossing imprints a growing phase crease under evolution; the
    /// soft form is C¹ in space at the cost of an O(ε/P) relative error that
    /// dies out three-hundred-fold above the floor.
    pub fn phase_rate_smoothed(
        &mut self,
        p: &[f64],
        s: &[f64],
        t: f64,
        out: &mut [f64],
    ) -> Result<()> {
        self.phase_rate_impl(p, s, t, out, true)
    }

    fn phase_rate_impl(
        &mut self,
        p: &[f64],
        s: &[f64],
        t: f64,
        out: &mut [f64],
        soft: bool,
    ) -> Result<()> {
        out.fill(0.0);
        let g = self.grid.clone();
        let pmax = p.iter().cloned().fold(0.0f64, f64::max);
        let floor = DEFAULT_FLOOR_REL * pmax;
        let needs_u = self.axis_terms.iter().any(|a| a.fisher);
        if needs_u {
            self.fill_u(p);
            self.du.fill(0.0);
        }
        for term in &self.axis_terms {
            let axis = term.axis;
            let n = g.axis(axis).len();
            let st = g.strides()[axis];
            let h = g.axis(axis).spacing().unwrap();
            let faces = g.axis(axis).face_count();
            let wrap = g.axis(axis).boundary() == Some(Boundary::Periodic);
            let tscale = term.inv_mass / (4.0 * h);
            let fscale = self.hbar * self.hbar * term.inv_mass / h;
            for base in g.lines(axis) {
                let tw = g.transverse_weight(axis, base);
                let tws = tw * tscale;
                for k in 0..faces {
                    let c0 = base + k * st;
                    let c1 = if wrap && k + 1 == n { base } else { base + (k + 1) * st };
                    let ds = s[c1] - s[c0];
                    let gph = tws * ds * ds;
                    out[c0] += gph;
                    out[c1] += gph;
                }
                if term.fisher {
                    let twf = tw * fscale;
                    for k in 0..faces {
                        let c0 = base + k * st;
                        let c1 = if wrap && k + 1 == n { base } else { base + (k + 1) * st };
                        let dflux = twf * (self.u[c1] - self.u[c0]);
                        self.du[c1] += dflux;
                        self.du[c0] -= dflux;
                    }
                }
            }
        }
        if needs_u {
            for ((o, &du), &pv) in out.iter_mut().zip(&self.du).zip(p.iter()) {
                let reg = if soft {
                    pv.max(0.0) + floor
                } else {
                    pv.max(floor)
                };
                let denom = 2.0 * reg.max(f64::MIN_POSITIVE).sqrt();
                *o += du / denom;
            }
        }
        if let Some(pot) = &self.potential {
            let f = pot.factor(t);
            if f != 0.0 {
                for ((o, &v), &w) in out.iter_mut().zip(&pot.base).zip(&self.weights) {
                    *o += f * w * v;
                }
            }
        }
        for c in &self.couplings {
            self.coupling_phase_rate(c, s, t, out);
        }
        if self.matrix.is_some() {
            self.fill_psi(p, s);
            let m = self.matrix.as_ref().unwrap();
            m.apply(&self.psi, &mut self.hpsi);
            for ((o, (psi, hpsi)), &pv) in out
                .iter_mut()
                .zip(self.psi.iter().zip(&self.hpsi))
                .zip(p.iter())
            {
                let reg = if soft { pv.max(0.0) + floor } else { pv.max(floor) };
                *o += (hpsi * psi.conj()).re / reg.max(f64::MIN_POSITIVE);
            }
        }
        for (o, &w) in out.iter_mut().zip(&self.weights) {
            *o = -*o / w;
        }
        Ok(())
    }

    fn coupling_phase_rate(&self, c: &CouplingTerm, s: &[f64], t: f64, out: &mut [f64]) {
        let g = &self.grid;
        match c {
            CouplingTerm::PositionReadout { schedule, pairs } => {
                let kappa = schedule.value(t);
                if kappa == 0.0 {
                    return;
                }
                for &(qa, xa) in pairs {
                    let n = g.axis(xa).len();
                    let st = g.strides()[xa];
                    let faces = g.axis(xa).face_count();
                    let wrap = g.axis(xa).boundary() == Some(Boundary::Periodic);
                    for base in g.lines(xa) {
                        let tw = g.transverse_weight(xa, base);
                        let kq = 0.5 * kappa * tw * g.coords(base)[qa];
                        for k in 0..faces {
                            let c0 = base + k * st;
                            let c1 = if wrap && k + 1 == n { base } else { base + (k + 1) * st };
                            let gph = kq * (s[c1] - s[c0]);
                            out[c0] += gph;
                            out[c1] += gph;
                        }
                    }
                }
            }
            CouplingTerm::SpinReadout {
                schedule,
                spin_axis,
                x_axis,
            } => {
                let kappa = schedule.value(t);
                if kappa == 0.0 {
                    return;
                }
                let n = g.axis(*x_axis).len();
                let st = g.strides()[*x_axis];
                let faces = g.axis(*x_axis).face_count();
                let wrap = g.axis(*x_axis).boundary() == Some(Boundary::Periodic);
                for base in g.lines(*x_axis) {
                    let tw = g.transverse_weight(*x_axis, base);
                    let sign = if g.unravel(base)[*spin_axis] == 0 { 1.0 } else { -1.0 };
                    let ka = 0.5 * kappa * tw * sign;
                    for k in 0..faces {
                        let c0 = base + k * st;
                        let c1 = if wrap && k + 1 == n { base } else { base + (k + 1) * st };
                        let gph = ka * (s[c1] - s[c0]);
                        out[c0] += gph;
                        out[c1] += gph;
                    }
                }
            }
        }
    }

    /// Advective and dispersive time-step bounds on an initial state. The
    /// phase-gradient speed is scanned over occupied cells only: where the
    /// density vanishes the flux form transports nothing, and unoccupied
    /// phase values (periodic winding seams, padding regions) carry no
    /// physical velocity.
    pub fn stability_bounds(&self, state: &EnsembleState) -> StabilityBounds {
        let g = &self.grid;
        let floor = state.floor();
        let p = state.density().values();
        let mut advective = f64::INFINITY;
        let mut grad = vec![0.0f64; g.cell_count()];
        for term in &self.axis_terms {
            let h = g.axis(term.axis).spacing().unwrap();
            gradient_into(g, state.phase().values(), term.axis, &mut grad);
            let mut speed = grad
                .iter()
                .zip(p)
                .filter(|(_, &pv)| pv > floor)
                .fold(0.0f64, |m, (&v, _)| m.max(v.abs()))
                * term.inv_mass;
            for c in &self.couplings {
                speed += match c {
                    CouplingTerm::PositionReadout { schedule, pairs } => {
                        let mut extra: f64 = 0.0;
                        for &(qa, xa) in pairs {
                            if xa == term.axis {
                                let ax = g.axis(qa);
                                let qmax = (0..ax.len())
                                    .map(|i| ax.coord(i).abs())
                                    .fold(0.0f64, f64::max);
                                extra = extra.max(schedule.max_abs() * qmax);
                            }
                        }
                        extra
                    }
                    CouplingTerm::SpinReadout { schedule, x_axis, .. } => {
                        if *x_axis == term.axis {
                            schedule.max_abs()
                        } else {
                            0.0
                        }
                    }
                };
            }
            if speed > 0.0 {
                advective = advective.min(0.5 * h / speed);
            }
            if term.fisher {
                // handled below
            }
        }
        let mut dispersive = f64::INFINITY;
        for term in &self.axis_terms {
            if term.fisher {
                let h = g.axis(term.axis).spacing().unwrap();
                dispersive = dispersive.min(0.25 * h * h / (term.inv_mass * self.hbar));
            }
        }
        if let Some(m) = &self.matrix {
            // Gershgorin bound on the spectral radius.
            let mut lmax: f64 = 0.0;
            for i in 0..m.dim() {
                let row: f64 = (0..m.dim()).map(|j| m.entries()[i * m.dim() + j].norm()).sum();
                lmax = lmax.max(row);
            }
            if lmax > 0.0 {
                dispersive = dispersive.min(0.5 * self.hbar / lmax);
            }
        }
        StabilityBounds {
            advective,
            dispersive,
        }
    }
}
