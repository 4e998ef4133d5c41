//! Observable densities derived from the biphoton amplitude.

mod coordinate;
mod csv;
mod width;

pub use coordinate::{
    coordinate_amplitude, coordinate_slice, coordinate_wavefunction, CoordinateIntegral, CoordinateSlice,
};
pub use csv::{read_curve_csv, write_curve_csv, CURVE_CSV_DIGITS};
pub use width::{fwhm, fwhm_all, PeakSelection, WidthReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{amplitude, sinc, AxisSpec, ScenarioConfig};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    PeakOne,
    UnitArea,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::PeakOne => "peak_one",
            Normalization::UnitArea => "unit_area",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "peak_one" => Some(Normalization::PeakOne),
            "unit_area" => Some(Normalization::UnitArea),
            _ => None,
        }
    }
}

/// A sampled one-dimensional probability density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub axis: Vec<f64>,
    pub density: Vec<f64>,
    pub normalization: Normalization,
    pub label: String,
    /// Axis units, e.g. `rad` or `xi`.
    pub units: String,
}

impl SampledCurve {
    /// Builds a curve from raw non-negative samples and applies `normalization`.
    pub fn new(
        axis: Vec<f64>,
        density: Vec<f64>,
        normalization: Normalization,
        label: impl Into<String>,
        units: impl Into<String>,
    ) -> Result<Self> {
        let label = label.into();
        if axis.len() != density.len() {
            return Err(Error::InvalidAxis(format!(
                "curve `{label}`: {} axis points for {} samples",
                axis.len(),
                density.len()
            )));
        }
        if axis.len() < 2 || axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidAxis(format!("curve `{label}`: axis must be strictly increasing")));
        }
        if let Some(bad) = density.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "curve `{label}`: density sample {bad} is not a finite non-negative value"
            )));
        }
        let mut curve = Self {
            axis,
            density,
            normalization,
            label,
            units: units.into(),
        };
        curve.normalize()?;
        Ok(curve)
    }

    /// Wraps already-normalized samples without rescaling (CSV reader path).
    pub(crate) fn from_parts(
        axis: Vec<f64>,
        density: Vec<f64>,
        normalization: Normalization,
        label: String,
        units: String,
    ) -> Self {
        Self {
            axis,
            density,
            normalization,
            label,
            units,
        }
    }

    fn normalize(&mut self) -> Result<()> {
        let scale = match self.normalization {
            Normalization::PeakOne => self.density.iter().copied().fold(0.0, f64::max),
            Normalization::UnitArea => self.trapezoid_area(),
        };
        if !(scale > 0.0) {
            return Err(Error::NoPeak(self.label.clone()));
        }
        for v in &mut self.density {
            *v /= scale;
        }
        Ok(())
    }

    pub fn trapezoid_area(&self) -> f64 {
        self.axis
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    pub fn max(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }

    pub fn renormalized(&self, normalization: Normalization) -> Result<Self> {
        Self::new(self.axis.clone(), self.density.clone(), normalization, self.label.clone(), self.units.clone())
    }

    /// Linear interpolation; zero outside the axis.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.axis.len();
        if x < self.axis[0] || x > self.axis[n - 1] {
            return 0.0;
        }
        let i = self.axis.partition_point(|&a| a <= x).clamp(1, n - 1);
        let (x0, x1) = (self.axis[i - 1], self.axis[i]);
        let (y0, y1) = (self.density[i - 1], self.density[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

fn sample_parallel(axis: &AxisSpec, f: impl Fn(f64) -> Result<f64> + Sync) -> Result<(Vec<f64>, Vec<f64>)> {
    axis.validate()?;
    let xs = axis.samples();
    let ys = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    Ok((xs, ys))
}

/// `|amplitude(theta1, fixed_theta2)|^2` over `theta1`, peak-normalized.
pub fn coincidence_curve(cfg: &ScenarioConfig, fixed_theta2: f64, axis: &AxisSpec) -> Result<SampledCurve> {
    let (xs, ys) = sample_parallel(axis, |t1| Ok(amplitude(cfg, t1, fixed_theta2).powi(2)))?;
    SampledCurve::new(
        xs,
        ys,
        Normalization::PeakOne,
        format!("coincidence theta2={fixed_theta2}"),
        "rad",
    )
}

/// Phase-matching factor alone, `sinc^2(L kp0 / (16 n_o) * mismatch)` at
/// fixed `theta2`, without the pump envelope.
pub fn phase_matching_curve(cfg: &ScenarioConfig, fixed_theta2: f64, axis: &AxisSpec) -> Result<SampledCurve> {
    let scale = cfg.sinc_scale();
    let (xs, ys) = sample_parallel(axis, |t1| Ok(sinc(scale * cfg.mismatch_polynomial(t1, fixed_theta2)).powi(2)))?;
    SampledCurve::new(
        xs,
        ys,
        Normalization::PeakOne,
        format!("phase matching theta2={fixed_theta2}"),
        "rad",
    )
}

/// Controls for [`single_particle_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    /// Relative tolerance between successive quadrature estimates.
    pub rel_tol: f64,
    /// Pump intensity level where the partner-angle window is cut.
    pub envelope_cutoff: f64,
    pub max_intervals: usize,
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-5,
            envelope_cutoff: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl IntegrationSpec {
    /// Half-width of the window in `theta1 + theta2` outside which the pump
    /// intensity is below `envelope_cutoff`.
    pub fn pump_window(&self, cfg: &ScenarioConfig) -> f64 {
        cfg.pump.alpha * ((1.0 / self.envelope_cutoff).ln() / std::f64::consts::LN_2).sqrt()
    }
}

/// Partner angles `theta2` where the sinc argument vanishes for a given `theta1`.
fn partner_zeros(cfg: &ScenarioConfig, theta1: f64) -> Vec<f64> {
    let np = cfg.np_eff;
    if np == 0.0 {
        return vec![theta1];
    }
    let disc = np * np - 2.0 * np * theta1;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    // roots are in theta = theta1 + theta2
    [2.0 * (theta1 - np - s), 2.0 * (theta1 - np + s)]
        .iter()
        .map(|t| t - theta1)
        .collect()
}

/// `rho(theta1) ~ integral over theta2 of |amplitude(theta1, theta2)|^2`, peak-normalized.
pub fn single_particle_quadrature(cfg: &ScenarioConfig, axis: &AxisSpec, spec: &IntegrationSpec) -> Result<SampledCurve> {
    let window = spec.pump_window(cfg);
    let scale = cfg.sinc_scale();
    let tol = Tolerance {
        rel: spec.rel_tol,
        abs: 0.0,
        max_intervals: spec.max_intervals,
    };
    let (xs, ys) = sample_parallel(axis, |t1| {
        let (lo, hi) = (-window - t1, window - t1);
        let mut breaks = Vec::new();
        for z in partner_zeros(cfg, t1) {
            let slope = (4.0 * cfg.np_eff - 2.0 * (t1 - z)).abs();
            let w = f64::min(std::f64::consts::PI / (scale * slope), (std::f64::consts::PI / scale).sqrt());
            breaks.extend([-8.0, -2.0, -0.5, 0.0, 0.5, 2.0, 8.0].iter().map(|k| z + k * w));
        }
        Ok(integrate(|t2| amplitude(cfg, t1, t2).powi(2), lo, hi, &breaks, tol)?.value)
    })?;
    SampledCurve::new(xs, ys, Normalization::PeakOne, "single quadrature", "rad")
}

/// The two sum-angle roots `(theta_a, theta_b)` of the phase-matching
/// condition at fixed `theta1`, `theta_a` the one through `theta1 = 0`.
pub fn pm_roots(cfg: &ScenarioConfig, theta1: f64) -> Result<(f64, f64)> {
    let np = cfg.np_eff;
    if np == 0.0 {
        return Err(Error::DegenerateRoots);
    }
    let disc = np * np - 2.0 * np * theta1;
    if disc < 0.0 {
        return Err(Error::NoRealRoot {
            theta1,
            discriminant: disc,
        });
    }
    let s = disc.sqrt() * np.signum();
    Ok((2.0 * (theta1 - np + s), 2.0 * (theta1 - np - s)))
}

/// Left- and right-hand sides of the delta-function validity condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub required: f64,
    pub valid: bool,
}

pub const VALIDITY_RATIO: f64 = 10.0;

/// `L kp0 |np_eff| / (2 n_o)` against `2 / alpha`.
pub fn validity_check(cfg: &ScenarioConfig) -> ValidityReport {
    let lhs = cfg.length_cm * cfg.kp0 * cfg.np_eff.abs() / (2.0 * cfg.n_o);
    let rhs = 2.0 / cfg.pump.alpha;
    let ratio = lhs / rhs;
    ValidityReport {
        lhs,
        rhs,
        ratio,
        required: VALIDITY_RATIO,
        valid: ratio >= VALIDITY_RATIO,
    }
}

pub(crate) fn require_validity(cfg: &ScenarioConfig) -> Result<ValidityReport> {
    let v = validity_check(cfg);
    if v.valid {
        Ok(v)
    } else {
        Err(Error::Validity {
            lhs: v.lhs,
            rhs: v.rhs,
            ratio: v.ratio,
            required: v.required,
        })
    }
}

/// Unnormalized delta-approximation singles density at `theta1`.
pub fn single_particle_analytic_density(cfg: &ScenarioConfig, theta1: f64) -> f64 {
    match pm_roots(cfg, theta1) {
        Ok((theta_a, _)) => {
            let disc = cfg.np_eff * cfg.np_eff - 2.0 * cfg.np_eff * theta1;
            if disc > 0.0 {
                cfg.pump.intensity(theta_a / 2.0) / disc.sqrt()
            } else {
                0.0
            }
        }
        Err(_) => 0.0,
    }
}

/// Delta-approximation singles `|E_p(theta_a/2)|^2 / sqrt(np^2 - 2 np theta1)`,
/// zero on the side without real roots, peak-normalized.
pub fn single_particle_analytic(cfg: &ScenarioConfig, axis: &AxisSpec) -> Result<SampledCurve> {
    require_validity(cfg)?;
    let (xs, ys) = sample_parallel(axis, |t1| Ok(single_particle_analytic_density(cfg, t1)))?;
    SampledCurve::new(xs, ys, Normalization::PeakOne, "single analytic", "rad")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::PumpProfile;

    fn cfg(np_eff: f64) -> ScenarioConfig {
        ScenarioConfig::new(1.5, 325.0, 1.87857, np_eff, PumpProfile::gaussian(0.004114).unwrap()).unwrap()
    }

    #[test]
    fn curve_validation() {
        assert!(SampledCurve::new(vec![0.0, 1.0], vec![1.0], Normalization::PeakOne, "x", "rad").is_err());
        assert!(SampledCurve::new(vec![1.0, 0.0], vec![1.0, 1.0], Normalization::PeakOne, "x", "rad").is_err());
        assert!(SampledCurve::new(vec![0.0, 1.0], vec![-1.0, 1.0], Normalization::PeakOne, "x", "rad").is_err());
        assert!(matches!(
            SampledCurve::new(vec![0.0, 1.0], vec![0.0, 0.0], Normalization::PeakOne, "x", "rad"),
            Err(Error::NoPeak(_))
        ));
        let c = SampledCurve::new(vec![0.0, 1.0, 2.0], vec![1.0, 4.0, 2.0], Normalization::PeakOne, "x", "rad").unwrap();
        assert_eq!(c.max(), 1.0);
        let u = c.renormalized(Normalization::UnitArea).unwrap();
        assert!((u.trapezoid_area() - 1.0).abs() < 1e-15);
        assert_eq!(c.interpolate(0.5), 0.625);
        assert_eq!(c.interpolate(3.0), 0.0);
    }

    #[test]
    fn pm_roots_properties() {
        let c = cfg(-0.1436);
        assert_eq!(pm_roots(&c, 0.0).unwrap().0, 0.0);
        for t1 in [1e-3, 5e-3, 2e-2] {
            let (a, b) = pm_roots(&c, t1).unwrap();
            for root in [a, b] {
                let t2 = root - t1;
                let delta = crate::amplitude::detuning_angles(&c, t1, t2) / c.n_o;
                assert!((delta * c.length_cm).abs() < 1e-8, "{t1}: {delta}");
            }
            let series = t1 * t1 / c.np_eff.abs();
            assert!((a - series).abs() < 3.0 * t1.powi(3) / c.np_eff.powi(2), "{t1}: {a} vs {series}");
        }
        assert!(matches!(pm_roots(&c, -0.1), Err(Error::NoRealRoot { .. })));
        assert!(matches!(pm_roots(&cfg(0.0), 0.0), Err(Error::DegenerateRoots)));
        let pos = cfg(0.1436);
        assert_eq!(pm_roots(&pos, 0.0).unwrap().0, 0.0);
    }

    #[test]
    fn validity_numbers() {
        let v = validity_check(&cfg(-0.1436));
        assert!((v.lhs - 1.1e4).abs() / 1.1e4 < 0.03);
        assert!((v.rhs - 486.1).abs() < 0.05);
        assert!(v.valid);
        let v = validity_check(&cfg(0.0));
        assert_eq!(v.lhs, 0.0);
        assert!(!v.valid);
        assert!(matches!(
            single_particle_analytic(&cfg(0.0), &AxisSpec::symmetric(0.01, 11).unwrap()),
            Err(Error::Validity { .. })
        ));
    }

    #[test]
    fn analytic_singles_vanish_without_roots() {
        let c = cfg(-0.1436);
        let curve = single_particle_analytic(&c, &AxisSpec::new(-0.1, 0.1, 2001).unwrap()).unwrap();
        for (x, y) in curve.axis.iter().zip(&curve.density) {
            if *x < c.np_eff / 2.0 {
                assert_eq!(*y, 0.0);
            }
        }
        assert!((single_particle_analytic_density(&c, 0.0) - 1.0 / c.np_eff.abs()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_window_covers_envelope() {
        let c = cfg(0.0);
        let w = IntegrationSpec::default().pump_window(&c);
        assert!((c.pump.intensity(w / 2.0) - 1e-10).abs() < 1e-15);
    }

    #[test]
    fn phase_matching_peaks() {
        let perp = phase_matching_curve(&cfg(0.0), 0.0, &AxisSpec::symmetric(0.05, 2001).unwrap()).unwrap();
        let w = fwhm(&perp, PeakSelection::NearestZero).unwrap();
        assert!((w.fwhm - 0.024019).abs() < 2e-5);
        let par = phase_matching_curve(&cfg(-0.1436), 0.0, &AxisSpec::new(-0.05, 0.62, 67001).unwrap()).unwrap();
        let all = fwhm_all(&par).unwrap();
        assert_eq!(all.len(), 2);
        assert!(all[0].peak_location.abs() < 1e-5);
        assert!((all[0].fwhm - 0.0005022).abs() < 2e-6);
        assert!((all[1].peak_location - 4.0 * 0.1436).abs() < 1e-5);
    }
}
