//! Thin FFT helpers: in-place transforms, spectral differentiation of
//! periodic samples, and peak-frequency extraction from time series.

use num_complex::Complex64;
use rustfft::FftPlanner;

pub fn fft_inplace(v: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(v.len())
    } else {
        planner.plan_fft_forward(v.len())
    };
    fft.process(v);
    if inverse {
        let scale = 1.0 / v.len() as f64;
        for z in v.iter_mut() {
            *z *= scale;
        }
    }
}

/// Signed wavenumber of FFT bin `j` for `n` samples over period `length`.
pub fn wavenumber(j: usize, n: usize, length: f64) -> f64 {
    let k = if j <= n / 2 { j as isize } else { j as isize - n as isize };
    2.0 * std::f64::consts::PI * k as f64 / length
}

/// Second derivative of periodic samples by spectral differentiation. Exact
/// to rounding for band-limited (or effectively compactly supported smooth)
/// data.
pub fn spectral_second_derivative(values: &[f64], length: f64) -> Vec<f64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_inplace(&mut buf, false);
    for (j, z) in buf.iter_mut().enumerate() {
        let k = wavenumber(j, n, length);
        *z *= -k * k;
    }
    fft_inplace(&mut buf, true);
    buf.iter().map(|z| z.re).collect()
}

/// Dominant angular frequency of a real time series sampled at `dt`:
/// mean-subtracted, Hann-windowed, zero-padded 8x, magnitude peak refined by
/// parabolic interpolation on the log spectrum.
pub fn dominant_angular_frequency(samples: &[f64], dt: f64) -> f64 {
    let n = samples.len();
    assert!(n >= 8, "need at least 8 samples");
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut padded = (8 * n).next_power_of_two();
    if padded < 64 {
        padded = 64;
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); padded];
    for (i, &s) in samples.iter().enumerate() {
        let w = 0.5
            * (1.0
                - (2.0 * std::f64::consts::PI * i as f64 / (n as f64 - 1.0)).cos());
        buf[i] = Complex64::new((s - mean) * w, 0.0);
    }
    fft_inplace(&mut buf, false);
    let half = padded / 2;
    let mags: Vec<f64> = buf[..half].iter().map(|z| z.norm()).collect();
    let mut peak = 1;
    for j in 2..half - 1 {
        if mags[j] > mags[peak] {
            peak = j;
        }
    }
    let delta = if peak > 0 && peak + 1 < half && mags[peak] > 0.0 {
        let lm = mags[peak - 1].max(1e-300).ln();
        let lc = mags[peak].max(1e-300).ln();
        let lp = mags[peak + 1].max(1e-300).ln();
        let denom = lm - 2.0 * lc + lp;
        if denom.abs() > 1e-12 {
            0.5 * (lm - lp) / denom
        } else {
            0.0
        }
    } else {
        0.0
    };
    2.0 * std::f64::consts::PI * (peak as f64 + delta) / (padded as f64 * dt)
}
