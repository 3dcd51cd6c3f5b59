//! The verification battery: every acceptance-grade claim as an executable
//! check with its tolerance pinned here. The `check` command and the
//! acceptance test target both run these suites.

mod suites;

use std::time::Instant;

// ───────────────────────── pinned tolerances ──────────────────────────
// One constant per contract; suites must not invent ad-hoc numbers.

/// Functional-gradient residual for every Hamiltonian variant (criterion 1).
pub const TOL_GRADIENT: f64 = 1e-6;
/// Wall budget for the whole gradient suite, seconds (criterion 1).
pub const BUDGET_GRADIENTS_S: f64 = 10.0;
/// `|∫P - 1|` throughout reference runs (criterion 2).
pub const TOL_NORM_DRIFT: f64 = 1e-8;
/// Relative energy drift for time-independent specs (criterion 2).
pub const TOL_ENERGY_DRIFT: f64 = 1e-6;
/// L1 distance of the density against the split-step reference (criterion 3).
pub const TOL_SCHRODINGER_L1: f64 = 1e-4;
/// Wall budget per wavefunction-reference scenario, seconds (criterion 3).
pub const BUDGET_SCHRODINGER_S: f64 = 60.0;
/// L1 agreement of evolved measurement couplings with the exact shift maps
/// (criterion 4).
pub const TOL_MEASUREMENT_L1: f64 = 1e-3;
/// Off-diagonal coherence after a strong spin measurement (criterion 5).
pub const TOL_COHERENCE: f64 = 1e-6;
/// Branch-weight agreement of the decohered diagonal (criterion 5).
pub const TOL_DIAGONAL: f64 = 1e-6;
/// Angle between the decohered eigenbasis and the coupling basis
/// (criterion 5).
pub const TOL_EIGEN_ANGLE: f64 = 1e-4;
/// Centroid deviation from the closed-form trajectories, relative to the
/// oscillation amplitude (criterion 6).
pub const TOL_CENTROID_REL: f64 = 1e-3;
/// Relative error of the FFT-measured centroid frequency (criterion 6).
pub const TOL_FREQUENCY_REL: f64 = 1e-2;
/// Stationarity residuals of the spring modes (criterion 7).
pub const TOL_STATIONARY: f64 = 1e-5;
/// Energy agreement of stationary modes with their eigenvalue (criterion 7).
pub const TOL_STATIONARY_ENERGY: f64 = 1e-5;
/// L1 agreement of transform–evolve–invert with direct evolution
/// (criterion 8).
pub const TOL_GALILEAN_L1: f64 = 1e-3;
/// Sum of the three-term split against the direct energy (criterion 9).
pub const TOL_SPLIT_SUM: f64 = 1e-8;
/// Cross term on a separable state (criterion 9).
pub const TOL_SPLIT_CROSS_ZERO: f64 = 1e-9;
/// Cross term against the closed-form Gaussian oracle (criterion 9).
pub const TOL_SPLIT_CROSS_ORACLE: f64 = 1e-6;
/// Quantization-condition residual of returned radii (criterion 10).
pub const TOL_RADIUS_RESIDUAL: f64 = 1e-10;
/// Constraint residual of Hermite modes, relative to the potential-term
/// scale (criterion 10).
pub const TOL_CONSTRAINT_REL: f64 = 1e-6;
/// Wall budget for the cosmology suite, seconds (criterion 10).
pub const BUDGET_COSMOLOGY_S: f64 = 30.0;
/// Additivity residual without coupling (criterion 11).
pub const TOL_NONINTERACTION: f64 = 1e-9;
/// Minimum residual the spring coupling must produce (criterion 11).
pub const MIN_INTERACTION: f64 = 1e-3;
/// Wall budget for the whole battery, seconds (criterion 12).
pub const BUDGET_TOTAL_S: f64 = 600.0;

// ─────────────────────────── report types ─────────────────────────────

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Measured value and the bound it was held against.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} {:<44} value {:>12.4e}  bound {:>9.1e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.threshold,
            self.detail
        )
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub results: Vec<CheckResult>,
    pub wall_seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

#[derive(Debug, Clone)]
pub struct BatteryReport {
    pub suites: Vec<SuiteReport>,
    pub wall_seconds: f64,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed())
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == name)
    }
}

pub const SUITE_NAMES: &[&str] = &[
    "gradients",
    "conservation",
    "schrodinger",
    "measurement",
    "decoherence",
    "coherent",
    "stationary",
    "galilean",
    "com_relative",
    "cosmology",
    "noninteraction",
    "oracles",
];

pub fn run_suite(name: &str) -> Option<SuiteReport> {
    let start = Instant::now();
    let results = match name {
        "gradients" => suites::gradients(),
        "conservation" => suites::conservation(),
        "schrodinger" => suites::schrodinger(),
        "measurement" => suites::measurement(),
        "decoherence" => suites::decoherence(),
        "coherent" => suites::coherent(),
        "stationary" => suites::stationary(),
        "galilean" => suites::galilean(),
        "com_relative" => suites::com_relative(),
        "cosmology" => suites::cosmology(),
        "noninteraction" => suites::noninteraction(),
        "oracles" => suites::oracle_extras(),
        _ => return None,
    };
    Some(SuiteReport {
        suite: name.to_string(),
        results,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run every suite. With `parallel` the suites execute on worker threads
/// (each suite is internally deterministic, so the report content does not
/// depend on scheduling).
pub fn run_all(parallel: bool) -> BatteryReport {
    let start = Instant::now();
    let mut suites: Vec<SuiteReport> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = SUITE_NAMES
                .iter()
                .map(|&name| scope.spawn(move || run_suite(name).unwrap()))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("suite thread panicked"))
                .collect()
        })
    } else {
        SUITE_NAMES
            .iter()
            .map(|name| run_suite(name).unwrap())
            .collect()
    };
    // Keep the canonical order regardless of scheduling.
    suites.sort_by_key(|s| {
        SUITE_NAMES
            .iter()
            .position(|n| *n == s.suite)
            .unwrap_or(usize::MAX)
    });
    BatteryReport {
        suites,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}
