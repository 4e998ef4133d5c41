//! Uniaxial crystal dispersion and the collinear degenerate type-I
//! phase-matching geometry.
//!
//! Angles `phi` are measured from the optical axis. The pump is the
//! extraordinary wave, signal and idler are ordinary waves at twice the pump
//! wavelength. The anisotropy derivative `np_prime = dn_e/dphi` at the
//! phase-matching angle is what couples the pump direction to the
//! longitudinal detuning.

mod data;

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};

pub use data::{bundled, crystal, list_crystals, parse_dispersion, BUNDLED_DATA};

/// Functional forms of the Sellmeier equation, wavelength in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SellmeierForm {
    /// `c1 + c2/(l^2 - c3) - c4 l^2 + c5 l^4`
    Kato,
    /// `c1 + c2/(l^2 - c3) + c4 l^2/(l^2 - c5)`
    Zernike,
    /// `c1 + sum c_2i l^2/(l^2 - c_2i+1)`
    Resonance,
}

/// One Sellmeier fit for a single polarization axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sellmeier {
    pub form: SellmeierForm,
    pub coeffs: Vec<f64>,
}

impl Sellmeier {
    pub fn new(form: SellmeierForm, coeffs: Vec<f64>) -> Result<Self> {
        let n = coeffs.len();
        let ok = match form {
            SellmeierForm::Kato => (3..=5).contains(&n),
            SellmeierForm::Zernike => n == 5,
            SellmeierForm::Resonance => n >= 1 && n % 2 == 1,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "{form:?} form does not take {n} coefficients"
            )));
        }
        Ok(Self { form, coeffs })
    }

    /// Squared index at `lambda_um`.
    pub fn n_squared(&self, lambda_um: f64) -> f64 {
        let c = &self.coeffs;
        let l2 = lambda_um * lambda_um;
        let at = |i: usize| c.get(i).copied().unwrap_or(0.0);
        match self.form {
            SellmeierForm::Kato => at(0) + at(1) / (l2 - at(2)) - at(3) * l2 + at(4) * l2 * l2,
            SellmeierForm::Zernike => at(0) + at(1) / (l2 - at(2)) + at(3) * l2 / (l2 - at(4)),
            SellmeierForm::Resonance => {
                c[0] + c[1..]
                    .chunks_exact(2)
                    .map(|p| p[0] * l2 / (l2 - p[1]))
                    .sum::<f64>()
            }
        }
    }

    pub fn index(&self, lambda_um: f64) -> f64 {
        self.n_squared(lambda_um).sqrt()
    }
}

/// Dispersion model of one crystal as read from the data file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionModel {
    pub name: String,
    /// Ordinary index sphere.
    pub ordinary: Sellmeier,
    /// Principal extraordinary index (pump at `phi = pi/2`).
    pub extraordinary: Sellmeier,
    /// Pump index at `phi = 0` when it differs from the ordinary sphere.
    pub axial: Option<Sellmeier>,
    pub valid_range_um: (f64, f64),
    pub sources: Vec<String>,
}

impl DispersionModel {
    fn check_range(&self, lambda_nm: f64) -> Result<f64> {
        let lambda_um = lambda_nm * 1e-3;
        let (min_um, max_um) = self.valid_range_um;
        if !(lambda_um >= min_um && lambda_um <= max_um) {
            return Err(Error::WavelengthOutOfRange {
                crystal: self.name.clone(),
                lambda_um,
                min_um,
                max_um,
            });
        }
        Ok(lambda_um)
    }

    /// Ordinary index `n_o(lambda)`.
    pub fn index_ordinary(&self, lambda_nm: f64) -> Result<f64> {
        Ok(self.ordinary.index(self.check_range(lambda_nm)?))
    }

    /// Principal extraordinary index `n_e(lambda)`.
    pub fn index_extraordinary(&self, lambda_nm: f64) -> Result<f64> {
        Ok(self.extraordinary.index(self.check_range(lambda_nm)?))
    }

    fn axial_and_principal(&self, lambda_nm: f64) -> Result<(f64, f64)> {
        let lambda_um = self.check_range(lambda_nm)?;
        let axial = self.axial.as_ref().unwrap_or(&self.ordinary).index(lambda_um);
        Ok((axial, self.extraordinary.index(lambda_um)))
    }

    /// Extraordinary index at angle `phi` to the optical axis,
    /// `[cos^2 phi / n_o^2 + sin^2 phi / n_e^2]^(-1/2)`.
    pub fn index_extraordinary_angle(&self, lambda_nm: f64, phi: f64) -> Result<f64> {
        check_angle(phi)?;
        let (n_axis, n_e) = self.axial_and_principal(lambda_nm)?;
        Ok(ellipse_index(n_axis, n_e, phi))
    }

    /// Closed-form `d n_e(phi) / d phi`.
    pub fn index_extraordinary_derivative(&self, lambda_nm: f64, phi: f64) -> Result<f64> {
        check_angle(phi)?;
        let (n_axis, n_e) = self.axial_and_principal(lambda_nm)?;
        let n = ellipse_index(n_axis, n_e, phi);
        Ok(n.powi(3) * phi.sin() * phi.cos() * (n_axis.powi(-2) - n_e.powi(-2)))
    }
}

fn check_angle(phi: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&phi) {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange(phi))
    }
}

fn ellipse_index(n_axis: f64, n_e: f64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    (c * c / (n_axis * n_axis) + s * s / (n_e * n_e)).powf(-0.5)
}

/// Phase-matching solution for one crystal and pump wavelength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrystalOptics {
    pub crystal: String,
    pub lambda_p_nm: f64,
    /// Ordinary index at the pump wavelength.
    pub n_o_pump: f64,
    /// Ordinary index at the degenerate signal wavelength `2 lambda_p`.
    pub n_o_signal: f64,
    /// Phase-matching angle from the optical axis (rad).
    pub phi0: f64,
    /// `dn_e/dphi` at `phi0`.
    pub np_prime: f64,
}

impl CrystalOptics {
    pub fn phi0_degrees(&self) -> f64 {
        self.phi0.to_degrees()
    }
}

/// Solves `n_e(phi0; lambda_p) = n_o(2 lambda_p)` by bisection on `(0, pi/2)`.
pub fn solve_phase_matching(model: &DispersionModel, lambda_p_nm: f64) -> Result<CrystalOptics> {
    solve_phase_matching_in(model, lambda_p_nm, (0.0, FRAC_PI_2))
}

/// As [`solve_phase_matching`] with an explicit bracket (clamped to `[0, pi/2]`).
///
/// Bisection runs until the bracket collapses to adjacent floats. Rounding
/// noise in the mismatch near the root means two brackets can land a few
/// ulp apart.
pub fn solve_phase_matching_in(
    model: &DispersionModel,
    lambda_p_nm: f64,
    bracket: (f64, f64),
) -> Result<CrystalOptics> {
    let n_o_signal = model.index_ordinary(2.0 * lambda_p_nm)?;
    let n_o_pump = model.index_ordinary(lambda_p_nm)?;
    let (n_axis, n_e) = model.axial_and_principal(lambda_p_nm)?;
    let mismatch = |phi: f64| ellipse_index(n_axis, n_e, phi) - n_o_signal;

    let no_match = || Error::NoPhaseMatching {
        crystal: model.name.clone(),
        lambda_p_nm,
    };
    let mut lo = bracket.0.max(0.0);
    let mut hi = bracket.1.min(FRAC_PI_2);
    if !(lo < hi) {
        return Err(no_match());
    }
    let mut f_lo = mismatch(lo);
    let f_hi = mismatch(hi);
    if f_lo == 0.0 {
        hi = lo;
    } else if f_hi == 0.0 {
        lo = hi;
    } else if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(no_match());
    }

    while lo < hi {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = mismatch(mid);
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let phi0 = if mismatch(hi).abs() < mismatch(lo).abs() { hi } else { lo };
    let np_prime = model.index_extraordinary_derivative(lambda_p_nm, phi0)?;

    Ok(CrystalOptics {
        crystal: model.name.clone(),
        lambda_p_nm,
        n_o_pump,
        n_o_signal,
        phi0,
        np_prime,
    })
}
