//! Coordinate-space amplitude in the delta-function regime.
//!
//! With `xi = x kp0 / 2` the double Fourier transform of the momentum
//! amplitude reduces to one oscillatory integral over the sum angle,
//!
//! `Psi(xi1, xi2) = 2 int_0^inf exp(-c t^4) exp(i a t^2) cos(b t) dt`
//!
//! with `c = ln2 / (2 alpha^2 np^2)`, `a = -(xi1 + xi2) / (2 np)` and
//! `b = xi1 - xi2`. The result does not depend on the crystal length.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require_validity, Normalization, SampledCurve};
use crate::amplitude::{AmplitudeGrid, AxisSpec, Domain, ScenarioConfig};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Gamma(5/4).
const GAMMA_5_4: f64 = 0.906_402_477_055_477;

/// Envelope level where the integration domain is truncated.
pub const ENVELOPE_CUTOFF: f64 = 1e-10;

/// Precomputed constants of the coordinate integral for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateIntegral {
    pub np_eff: f64,
    /// Quartic envelope rate `c`.
    pub c: f64,
    pub theta_max: f64,
    pub rel_tol: f64,
}

impl CoordinateIntegral {
    /// Fails unless the delta-function approximation is valid for `cfg`.
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        require_validity(cfg)?;
        let np = cfg.np_eff;
        let c = LN_2 / (2.0 * cfg.pump.alpha.powi(2) * np * np);
        Ok(Self {
            np_eff: np,
            c,
            theta_max: ((1.0 / ENVELOPE_CUTOFF).ln() / c).powf(0.25),
            rel_tol: 1e-7,
        })
    }

    /// Largest rate of phase change of the integrand per unit `xi`; sampling
    /// the result needs `d_xi * bandwidth <= pi`.
    pub fn bandwidth(&self) -> f64 {
        self.theta_max + self.theta_max * self.theta_max / (2.0 * self.np_eff.abs())
    }

    /// `|Psi(0, 0)|`, the scale for absolute tolerances.
    pub fn peak_magnitude(&self) -> f64 {
        2.0 * GAMMA_5_4 * self.c.powf(-0.25)
    }

    /// Panel edges on `[0, theta_max]`, each panel spanning at most about pi
    /// of phase.
    fn panels(&self, a: f64, b: f64) -> Vec<f64> {
        let hmax = self.theta_max / 8.0;
        let grad = |t: f64| 2.0 * a.abs() * t + b.abs();
        let mut edges = vec![0.0];
        let mut t = 0.0;
        while t < self.theta_max {
            let mut h = hmax.min(PI / grad(t).max(f64::MIN_POSITIVE));
            h = h.min(PI / grad(t + h).max(f64::MIN_POSITIVE));
            t = (t + h).min(self.theta_max);
            edges.push(t);
        }
        edges
    }

    pub fn evaluate(&self, xi1: f64, xi2: f64) -> Result<Complex64> {
        let a = -(xi1 + xi2) / (2.0 * self.np_eff);
        let b = xi1 - xi2;
        let edges = self.panels(a, b);
        let tol = Tolerance {
            rel: self.rel_tol,
            abs: self.rel_tol * self.peak_magnitude(),
            max_intervals: 64 * edges.len() + 1000,
        };
        let c = self.c;
        let f = |t: f64| {
            let t2 = t * t;
            Complex64::from_polar((-c * t2 * t2).exp() * (b * t).cos(), a * t2)
        };
        let inner = &edges[1..edges.len() - 1];
        Ok(integrate(f, 0.0, self.theta_max, inner, tol)?.value * 2.0)
    }
}

/// Coordinate amplitude at `(xi1, xi2)`.
pub fn coordinate_amplitude(cfg: &ScenarioConfig, xi1: f64, xi2: f64) -> Result<Complex64> {
    CoordinateIntegral::new(cfg)?.evaluate(xi1, xi2)
}

fn check_resolution(axis: &AxisSpec, spacing_scale: f64, bandwidth: f64) -> Result<()> {
    let spacing = axis.step() * spacing_scale;
    if spacing * bandwidth > PI {
        return Err(Error::Resolution { spacing, bandwidth });
    }
    Ok(())
}

/// Tabulates the coordinate amplitude on `xi1 x xi2`.
pub fn coordinate_wavefunction(cfg: &ScenarioConfig, xi1: &AxisSpec, xi2: &AxisSpec) -> Result<AmplitudeGrid> {
    let integral = CoordinateIntegral::new(cfg)?;
    for axis in [xi1, xi2] {
        axis.validate()?;
        check_resolution(axis, 1.0, integral.bandwidth())?;
    }
    let a1 = xi1.samples();
    let a2 = xi2.samples();
    let rows = a1
        .par_iter()
        .map(|&x1| a2.iter().map(|&x2| integral.evaluate(x1, x2)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    AmplitudeGrid::new(a1, a2, rows.concat(), Domain::Coordinate)
}

/// One-dimensional cuts through the coordinate density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateSlice {
    /// `xi1` varies, `xi2 = 0`.
    Coincidence,
    /// `xi_+ = xi1 + xi2` varies, `xi_- = 0`.
    Sum,
    /// `xi_- = xi1 - xi2` varies, `xi_+ = 0`.
    Difference,
}

impl CoordinateSlice {
    pub fn name(&self) -> &'static str {
        match self {
            CoordinateSlice::Coincidence => "coordinate coincidence",
            CoordinateSlice::Sum => "coordinate xi_plus",
            CoordinateSlice::Difference => "coordinate xi_minus",
        }
    }

    fn point(&self, v: f64) -> (f64, f64) {
        match self {
            CoordinateSlice::Coincidence => (v, 0.0),
            CoordinateSlice::Sum => (0.5 * v, 0.5 * v),
            CoordinateSlice::Difference => (0.5 * v, -0.5 * v),
        }
    }
}

/// `|Psi|^2` along `slice`, peak-normalized, axis in units of `xi`.
pub fn coordinate_slice(cfg: &ScenarioConfig, slice: CoordinateSlice, axis: &AxisSpec) -> Result<SampledCurve> {
    let integral = CoordinateIntegral::new(cfg)?;
    axis.validate()?;
    check_resolution(axis, 1.0, integral.bandwidth())?;
    let xs = axis.samples();
    let ys = xs
        .par_iter()
        .map(|&v| {
            let (x1, x2) = slice.point(v);
            Ok(integral.evaluate(x1, x2)?.norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    SampledCurve::new(xs, ys, Normalization::PeakOne, slice.name(), "xi")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::PumpProfile;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::new(1.5, 325.0, 1.87857, -0.1436, PumpProfile::gaussian(0.004114).unwrap()).unwrap()
    }

    #[test]
    fn origin_value_is_closed_form() {
        let i = CoordinateIntegral::new(&cfg()).unwrap();
        let v = i.evaluate(0.0, 0.0).unwrap();
        assert!((v.re - i.peak_magnitude()).abs() < 1e-8 * i.peak_magnitude());
        assert!(v.im.abs() < 1e-12 * i.peak_magnitude());
        assert!(((-i.c * i.theta_max.powi(4)).exp() - ENVELOPE_CUTOFF).abs() < 1e-20);
    }

    #[test]
    fn exchange_symmetry_and_length_independence() {
        let c = cfg();
        let a = coordinate_amplitude(&c, 37.0, -12.0).unwrap();
        let b = coordinate_amplitude(&c, -12.0, 37.0).unwrap();
        assert!((a - b).norm() < 1e-12);
        let long = c.with_length(3.0).unwrap();
        assert_eq!(coordinate_amplitude(&long, 37.0, -12.0).unwrap(), a);
    }

    #[test]
    fn requires_validity() {
        let perp = cfg().with_np_eff(0.0).unwrap();
        assert!(matches!(coordinate_amplitude(&perp, 0.0, 0.0), Err(Error::Validity { .. })));
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let c = cfg();
        let bw = CoordinateIntegral::new(&c).unwrap().bandwidth();
        let coarse = AxisSpec::symmetric(100.0 * PI / bw, 11).unwrap();
        assert!(matches!(
            coordinate_wavefunction(&c, &coarse, &coarse),
            Err(Error::Resolution { .. })
        ));
        let fine = AxisSpec::symmetric(50.0, 5).unwrap();
        let g = coordinate_wavefunction(&c, &fine, &fine).unwrap();
        assert_eq!(g.domain, Domain::Coordinate);
        assert_eq!(g.dims(), (5, 5));
    }
}
