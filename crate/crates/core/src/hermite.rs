//! Orthonormal Hermite functions `ψ_n(z) = H_n(z) e^{-z²/2} / √(√π 2ⁿ n!)`.
//!
//! The Gaussian factor is folded into the three-term recurrence so that the
//! magnitudes stay bounded; naive polynomial evaluation overflows long
//! before n = 64.

/// Values `ψ_0(z) ... ψ_{n_max}(z)`.
pub fn hermite_functions(n_max: usize, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * z * z).exp();
    out.push(psi0);
    if n_max == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * z * psi0);
    for n in 2..=n_max {
        let v = (2.0 / n as f64).sqrt() * z * out[n - 1]
            - ((n as f64 - 1.0) / n as f64).sqrt() * out[n - 2];
        out.push(v);
    }
    out
}

pub fn hermite_function(n: usize, z: f64) -> f64 {
    *hermite_functions(n, z).last().unwrap()
}
