//! Helpers shared by the integration targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use biphoton::amplitude::{amplitude, PumpProfile, ScenarioConfig};
use biphoton::distributions::{fwhm, validity_check, Normalization, PeakSelection, SampledCurve};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// LiIO3 ordinary index at 650 nm, from the bundled data.
pub const N_O_LIIO3: f64 = 1.878_57;

pub fn reference(np_eff: f64) -> ScenarioConfig {
    ScenarioConfig::new(1.5, 325.0, N_O_LIIO3, np_eff, PumpProfile::gaussian(4.114e-3).unwrap()).unwrap()
}

/// Wide pump, crystal length chosen so the validity ratio is exactly `ratio`.
pub fn reduced(alpha: f64, np_eff: f64, ratio: f64) -> ScenarioConfig {
    let base = ScenarioConfig::new(1.0, 325.0, N_O_LIIO3, np_eff, PumpProfile::gaussian(alpha).unwrap()).unwrap();
    let v = validity_check(&base);
    base.with_length(ratio * v.rhs / v.lhs).unwrap()
}

/// Coordinate widths from a dense 2-D FFT of the full momentum amplitude.
#[derive(Debug, Clone, Copy)]
pub struct FftWidths {
    pub coincidence: f64,
    pub xi_plus: f64,
    pub xi_minus: f64,
    /// `|sum |psi(theta)|^2 N^2 - sum |psi(xi)|^2| / sum |psi(xi)|^2`.
    pub parseval: f64,
}

/// `n x n` grid with spacing `d_theta`; `exp(-i theta xi)` kernel, so
/// `d_xi = 2 pi / (n d_theta)`.
pub fn fft_oracle(cfg: &ScenarioConfig, n: usize, d_theta: f64) -> FftWidths {
    let theta = |j: usize| (j as f64 - (n / 2) as f64) * d_theta;
    let mut data: Vec<Complex64> = (0..n * n)
        .map(|k| Complex64::new(amplitude(cfg, theta(k / n), theta(k % n)), 0.0))
        .collect();
    let energy_in: f64 = data.iter().map(|z| z.norm_sqr()).sum::<f64>() * (n * n) as f64;

    let fft = FftPlanner::new().plan_fft_forward(n);
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            column[i] = data[i * n + j];
        }
        fft.process(&mut column);
        for i in 0..n {
            data[i * n + j] = column[i];
        }
    }
    let energy_out: f64 = data.iter().map(|z| z.norm_sqr()).sum();

    let d_xi = 2.0 * PI / (n as f64 * d_theta);
    // index of xi = m d_xi, m in [-n/2, n/2)
    let idx = |m: i64| m.rem_euclid(n as i64) as usize;
    let ms: Vec<i64> = (-(n as i64) / 2..(n as i64) / 2).collect();
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64 * d_xi).collect();
    let width = |f: &dyn Fn(i64) -> f64| {
        let ys: Vec<f64> = ms.iter().map(|&m| f(m)).collect();
        let curve = SampledCurve::new(xs.clone(), ys, Normalization::PeakOne, "fft", "xi").unwrap();
        fwhm(&curve, PeakSelection::NearestZero).unwrap().fwhm
    };
    FftWidths {
        coincidence: width(&|m| data[idx(m) * n].norm_sqr()),
        // xi1 = xi2 = s gives xi_+ = 2 s
        xi_plus: 2.0 * width(&|m| data[idx(m) * n + idx(m)].norm_sqr()),
        xi_minus: 2.0 * width(&|m| data[idx(m) * n + idx(-m)].norm_sqr()),
        parseval: (energy_in - energy_out).abs() / energy_out,
    }
}
