//! Entanglement quantifiers: width ratios, the EPR parameter and the
//! Schmidt number.

mod gaussian;
mod schmidt;

pub use gaussian::{double_gaussian_eval, DoubleGaussianModel};
pub use schmidt::{schmidt_convergence, schmidt_from_grid, SchmidtDecomposition, SchmidtStudy};

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::amplitude::ScenarioConfig;
use crate::distributions::{SampledCurve, WidthReport};
use crate::error::{Error, Result};

/// Spectrum entries at or below this value are dropped from reports.
pub const SPECTRUM_CUTOFF: f64 = 1e-6;

/// `single.fwhm / coincidence.fwhm`.
pub fn ratio_r(single: &WidthReport, coincidence: &WidthReport) -> Result<f64> {
    if single.units != coincidence.units {
        return Err(Error::UnitMismatch(single.units.clone(), coincidence.units.clone()));
    }
    if !(single.fwhm > 0.0 && coincidence.fwhm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "widths must be positive, got {} and {}",
            single.fwhm, coincidence.fwhm
        )));
    }
    Ok(single.fwhm / coincidence.fwhm)
}

/// Width convention behind an EPR parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EprConvention {
    /// Full widths at half maximum; product states give `(4 ln 2)^-1`.
    HalfMax,
    /// Root-mean-square widths; product states give 2.
    Variance,
}

impl EprConvention {
    pub fn baseline(&self) -> f64 {
        match self {
            EprConvention::HalfMax => 1.0 / (4.0 * LN_2),
            EprConvention::Variance => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EprParameter {
    pub convention: EprConvention,
    /// `dk * dx`.
    pub product: f64,
    /// `1 / (dk * dx)`.
    pub c_epr: f64,
    /// `c_epr` over its product-state baseline.
    pub ratio: f64,
}

/// EPR parameter from conjugate conditional widths. Pass `dk` as
/// `dtheta kp0 / 2` and `dx` as `xi 2 / kp0` (or both dimensionless).
pub fn c_epr(k_width: f64, x_width: f64, convention: EprConvention) -> Result<EprParameter> {
    if !(k_width > 0.0 && x_width > 0.0 && k_width.is_finite() && x_width.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "EPR widths must be positive and finite, got {k_width} and {x_width}"
        )));
    }
    let product = k_width * x_width;
    let c = 1.0 / product;
    Ok(EprParameter {
        convention,
        product,
        c_epr: c,
        ratio: c / convention.baseline(),
    })
}

/// Standard deviation of the density along the axis (trapezoid rule).
pub fn rms_width(curve: &SampledCurve) -> f64 {
    let moment = |p: i32| -> f64 {
        curve
            .axis
            .windows(2)
            .zip(curve.density.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] * x[0].powi(p) + y[1] * x[1].powi(p)))
            .sum()
    };
    let m0 = moment(0);
    let mean = moment(1) / m0;
    (moment(2) / m0 - mean * mean).max(0.0).sqrt()
}

/// Deterministic block identifying what produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub scenario_hash: String,
    pub grid_dims: (usize, usize),
    pub convergence_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub r_k: f64,
    /// Needs single-particle coordinate widths, which are not computed.
    pub r_x: Option<f64>,
    /// Absent when the coordinate amplitude is unavailable (delta
    /// approximation invalid).
    pub c_epr_halfmax: Option<f64>,
    pub c_epr_ratio: Option<f64>,
    pub c_epr_variance: Option<f64>,
    pub c_epr_variance_ratio: Option<f64>,
    pub schmidt_k: f64,
    pub schmidt_spectrum: Vec<f64>,
    pub provenance: ReportProvenance,
}

impl EntanglementReport {
    /// Checks the stated invariants of the fields.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.r_k >= 0.0) {
            return bad(format!("r_k = {}", self.r_k));
        }
        if !(self.schmidt_k >= 1.0 - 1e-9) {
            return bad(format!("schmidt_k = {}", self.schmidt_k));
        }
        if self.schmidt_spectrum.windows(2).any(|w| w[1] > w[0]) || self.schmidt_spectrum.iter().any(|&l| l < 0.0) {
            return bad("schmidt spectrum not non-increasing and non-negative".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// SHA-256 of the canonical JSON form of `cfg`, hex encoded.
pub fn scenario_hash(cfg: &ScenarioConfig) -> String {
    let json = serde_json::to_string(cfg).expect("scenario serializes");
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{fwhm, Normalization, PeakSelection};

    fn width(w: f64, units: &str) -> WidthReport {
        WidthReport {
            fwhm: w,
            peak_location: 0.0,
            peak_value: 1.0,
            n_peaks_detected: 1,
            selected_peak_index: 0,
            left: -w / 2.0,
            right: w / 2.0,
            units: units.into(),
        }
    }

    #[test]
    fn ratio_examples() {
        assert!((ratio_r(&width(47.3, "mrad"), &width(0.5, "mrad")).unwrap() - 94.6).abs() < 1e-12);
        assert!((ratio_r(&width(12.0, "mrad"), &width(8.0, "mrad")).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(ratio_r(&width(3.0, "rad"), &width(3.0, "rad")).unwrap(), 1.0);
        assert!(matches!(
            ratio_r(&width(3.0, "rad"), &width(3.0, "xi")),
            Err(Error::UnitMismatch(_, _))
        ));
    }

    #[test]
    fn epr_examples() {
        let kp0 = 2.0 * std::f64::consts::PI / 325e-7;
        let e = c_epr(0.0005 * kp0 / 2.0, 88.0 * 2.0 / kp0, EprConvention::HalfMax).unwrap();
        assert!((e.product - 0.044).abs() < 1e-12);
        assert!((e.c_epr - 22.727).abs() < 1e-3);
        assert!((e.ratio - 63.0).abs() < 0.1);
        let base = c_epr(4.0 * LN_2, 1.0, EprConvention::HalfMax).unwrap();
        assert!((base.ratio - 1.0).abs() < 1e-15);
        let twice = c_epr(2.0 * 0.3, 2.0 * 0.7, EprConvention::HalfMax).unwrap();
        let once = c_epr(0.3, 0.7, EprConvention::HalfMax).unwrap();
        assert!((twice.c_epr * 4.0 - once.c_epr).abs() < 1e-12);
        assert!(c_epr(0.0, 1.0, EprConvention::Variance).is_err());
    }

    #[test]
    fn gaussian_pair_hits_both_baselines() {
        // |psi(x)|^2 with sigma_x = s, its transform has sigma_k = 1/(2s)
        let s = 0.7;
        let xs: Vec<f64> = (0..4001).map(|i| -10.0 + 20.0 * i as f64 / 4000.0).collect();
        let ks: Vec<f64> = (0..4001).map(|i| -5.0 + 10.0 * i as f64 / 4000.0).collect();
        let gx: Vec<f64> = xs.iter().map(|x| (-x * x / (2.0 * s * s)).exp()).collect();
        let gk: Vec<f64> = ks.iter().map(|k| (-2.0 * k * k * s * s).exp()).collect();
        let cx = SampledCurve::new(xs, gx, Normalization::PeakOne, "x", "x").unwrap();
        let ck = SampledCurve::new(ks, gk, Normalization::PeakOne, "k", "k").unwrap();
        let half = c_epr(
            fwhm(&ck, PeakSelection::NearestZero).unwrap().fwhm,
            fwhm(&cx, PeakSelection::NearestZero).unwrap().fwhm,
            EprConvention::HalfMax,
        )
        .unwrap();
        let var = c_epr(rms_width(&ck), rms_width(&cx), EprConvention::Variance).unwrap();
        assert!((half.ratio - 1.0).abs() < 1e-4);
        assert!((var.ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let p = crate::amplitude::PumpProfile::gaussian(0.004114).unwrap();
        let a = ScenarioConfig::new(1.5, 325.0, 1.87857, -0.1436, p).unwrap();
        assert_eq!(scenario_hash(&a), scenario_hash(&a));
        assert_eq!(scenario_hash(&a).len(), 64);
        assert_ne!(scenario_hash(&a), scenario_hash(&a.with_length(3.0).unwrap()));
    }
}
