//! Momentum-space biphoton amplitude with the linear anisotropy term.
//!
//! Scattering angles `theta1`, `theta2` are measured outside the crystal and
//! relate to transverse wavenumbers by `theta = 2 k_xi / kp0`. The pump
//! direction is `theta_p = (theta1 + theta2) / 2`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sin(u)/u` with `sinc(0) = 1`.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpShape {
    Gaussian,
}

/// Angular profile of the pump outside the crystal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpProfile {
    /// Intensity FWHM in rad.
    pub alpha: f64,
    pub shape: PumpShape,
}

impl PumpProfile {
    pub fn gaussian(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pump FWHM must be positive, got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            shape: PumpShape::Gaussian,
        })
    }

    /// Field amplitude at pump angle `theta_p`, normalised to 1 on axis.
    pub fn amplitude(&self, theta_p: f64) -> f64 {
        match self.shape {
            PumpShape::Gaussian => (-2.0 * LN_2 * theta_p * theta_p / (self.alpha * self.alpha)).exp(),
        }
    }

    pub fn intensity(&self, theta_p: f64) -> f64 {
        self.amplitude(theta_p).powi(2)
    }
}

/// Free-function form of [`PumpProfile::amplitude`].
pub fn pump_amplitude(pump: &PumpProfile, theta_p: f64) -> f64 {
    pump.amplitude(theta_p)
}

/// Detection-plane orientation relative to the plane of the optical and
/// laser axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Scan plane perpendicular: the pump index does not vary, `np_eff = 0`.
    Perp,
    /// Scan plane containing the optical axis: `np_eff = n_p'`.
    Parallel,
    /// Any intermediate orientation with an explicit `np_eff`.
    Custom(f64),
}

impl Geometry {
    pub fn np_eff(&self, crystal_np_prime: f64) -> f64 {
        match *self {
            Geometry::Perp => 0.0,
            Geometry::Parallel => crystal_np_prime,
            Geometry::Custom(v) => v,
        }
    }
}

/// One simulation setup. Units: cm, nm, rad, cm^-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub length_cm: f64,
    pub lambda_p_nm: f64,
    /// Vacuum pump wavenumber `2 pi / lambda_p` in cm^-1.
    pub kp0: f64,
    /// Ordinary index of the signal/idler photons.
    pub n_o: f64,
    /// Effective anisotropy derivative for the chosen detection plane.
    pub np_eff: f64,
    pub pump: PumpProfile,
}

impl ScenarioConfig {
    pub fn new(length_cm: f64, lambda_p_nm: f64, n_o: f64, np_eff: f64, pump: PumpProfile) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("crystal length", length_cm)?;
        positive("pump wavelength", lambda_p_nm)?;
        positive("ordinary index", n_o)?;
        if !np_eff.is_finite() {
            return Err(Error::InvalidParameter(format!("np_eff must be finite, got {np_eff}")));
        }
        Ok(Self {
            length_cm,
            lambda_p_nm,
            kp0: 2.0 * PI / (lambda_p_nm * 1e-7),
            n_o,
            np_eff,
            pump,
        })
    }

    pub fn with_np_eff(self, np_eff: f64) -> Result<Self> {
        Self::new(self.length_cm, self.lambda_p_nm, self.n_o, np_eff, self.pump)
    }

    pub fn with_length(self, length_cm: f64) -> Result<Self> {
        Self::new(length_cm, self.lambda_p_nm, self.n_o, self.np_eff, self.pump)
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.length_cm, self.lambda_p_nm, self.n_o, self.np_eff, PumpProfile::gaussian(alpha)?)
    }

    /// `L kp0 / (16 n_o)`, the prefactor of the sinc argument.
    pub fn sinc_scale(&self) -> f64 {
        self.length_cm * self.kp0 / (16.0 * self.n_o)
    }

    /// `4 np_eff (theta1 + theta2) + (theta1 - theta2)^2`.
    pub fn mismatch_polynomial(&self, theta1: f64, theta2: f64) -> f64 {
        let d = theta1 - theta2;
        4.0 * self.np_eff * (theta1 + theta2) + d * d
    }
}

/// Exact longitudinal detuning `sqrt(kp^2 - (k1x+k2x)^2) - sqrt(k1^2 - k1x^2) - sqrt(k2^2 - k2x^2)`
/// with transverse momentum conservation.
pub fn detuning_exact(k1x: f64, k2x: f64, k1: f64, k2: f64, kp: f64) -> Result<f64> {
    let kpx = k1x + k2x;
    if !(k1x.abs() < k1 && k2x.abs() < k2 && kpx.abs() < kp) {
        return Err(Error::Evanescent(format!(
            "transverse components ({k1x}, {k2x}, {kpx}) must be below ({k1}, {k2}, {kp})"
        )));
    }
    Ok((kp * kp - kpx * kpx).sqrt() - (k1 * k1 - k1x * k1x).sqrt() - (k2 * k2 - k2x * k2x).sqrt())
}

/// Second-order expansion of [`detuning_exact`] taking `kp ~ 2 k1 ~ 2 k2`
/// in the transverse term.
pub fn detuning_near_axis(k1x: f64, k2x: f64, k1: f64, k2: f64, kp: f64) -> f64 {
    let d = k1x - k2x;
    kp - k1 - k2 + d * d / (2.0 * kp)
}

/// Detuning in scattering angles, `(kp0/8) [4 np_eff (theta1+theta2) + (theta1-theta2)^2]`.
///
/// Written with the vacuum wavenumber; the in-crystal detuning is this
/// value divided by `n_o`, which is what enters the sinc in [`amplitude`].
pub fn detuning_angles(cfg: &ScenarioConfig, theta1: f64, theta2: f64) -> f64 {
    cfg.kp0 / 8.0 * cfg.mismatch_polynomial(theta1, theta2)
}

/// Biphoton amplitude `E_p((theta1+theta2)/2) sinc{L kp0/(16 n_o) [4 np_eff (theta1+theta2) + (theta1-theta2)^2]}`.
pub fn amplitude(cfg: &ScenarioConfig, theta1: f64, theta2: f64) -> f64 {
    let pump = cfg.pump.amplitude(0.5 * (theta1 + theta2));
    pump * sinc(cfg.sinc_scale() * cfg.mismatch_polynomial(theta1, theta2))
}

/// Uniformly sampled axis, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        let spec = Self { start, end, points };
        spec.validate()?;
        Ok(spec)
    }

    /// Axis symmetric about zero.
    pub fn symmetric(half_width: f64, points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, points)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::InvalidAxis(format!(
                "non-finite bounds [{}, {}]",
                self.start, self.end
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidAxis(format!("need >= 2 points, got {}", self.points)));
        }
        if !(self.end > self.start) {
            return Err(Error::InvalidAxis(format!(
                "bounds must increase, got [{}, {}]",
                self.start, self.end
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.points - 1) as f64
    }

    pub fn samples(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.end } else { self.start + h * i as f64 })
            .collect()
    }

    /// Same range with `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            points: (self.points - 1) * factor + 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Momentum,
    Coordinate,
}

/// Complex bipartite amplitude tabulated on a tensor grid, row-major with
/// `values[i * axis2.len() + j]` at `(axis1[i], axis2[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeGrid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub values: Vec<Complex64>,
    pub domain: Domain,
}

impl AmplitudeGrid {
    pub fn new(axis1: Vec<f64>, axis2: Vec<f64>, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        for (name, axis) in [("axis1", &axis1), ("axis2", &axis2)] {
            if axis.len() < 2 || axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidAxis(format!("{name} must be strictly increasing with >= 2 points")));
            }
        }
        if values.len() != axis1.len() * axis2.len() {
            return Err(Error::InvalidAxis(format!(
                "{} values for a {}x{} grid",
                values.len(),
                axis1.len(),
                axis2.len()
            )));
        }
        Ok(Self {
            axis1,
            axis2,
            values,
            domain,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.axis1.len(), self.axis2.len())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.axis2.len() + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.axis2.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.axis1.len()).map(|i| self.get(i, j)).collect()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }
}

/// Tabulates [`amplitude`] on `axis1 x axis2`, rows in parallel.
pub fn amplitude_grid(cfg: &ScenarioConfig, axis1: &AxisSpec, axis2: &AxisSpec) -> Result<AmplitudeGrid> {
    axis1.validate()?;
    axis2.validate()?;
    let a1 = axis1.samples();
    let a2 = axis2.samples();
    let values: Vec<Complex64> = a1
        .par_iter()
        .flat_map_iter(|&t1| a2.iter().map(move |&t2| Complex64::new(amplitude(cfg, t1, t2), 0.0)))
        .collect();
    AmplitudeGrid::new(a1, a2, values, Domain::Momentum)
}
