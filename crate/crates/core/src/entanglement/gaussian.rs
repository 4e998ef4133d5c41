use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::{AmplitudeGrid, AxisSpec, Domain};
use crate::error::{Error, Result};

/// `exp{-(alpha x1 + beta x2)^2 / 2a^2} exp{-(gamma x1 + delta x2)^2 / 2b^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleGaussianModel {
    pub a: f64,
    pub b: f64,
    pub alpha_c: f64,
    pub beta_c: f64,
    pub gamma_c: f64,
    pub delta_c: f64,
}

impl DoubleGaussianModel {
    pub fn new(a: f64, b: f64, alpha_c: f64, beta_c: f64, gamma_c: f64, delta_c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(format!("widths must be positive, got a={a}, b={b}")));
        }
        if alpha_c * delta_c - beta_c * gamma_c == 0.0 {
            return Err(Error::InvalidParameter("linear forms are not independent".into()));
        }
        Ok(Self {
            a,
            b,
            alpha_c,
            beta_c,
            gamma_c,
            delta_c,
        })
    }

    /// Sum/difference model with `alpha = beta = delta = 1`, `gamma = -1`.
    pub fn symmetric(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 1.0, 1.0, -1.0, 1.0)
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        let u = self.alpha_c * x1 + self.beta_c * x2;
        let v = self.gamma_c * x1 + self.delta_c * x2;
        (-u * u / (2.0 * self.a * self.a)).exp() * (-v * v / (2.0 * self.b * self.b)).exp()
    }

    /// `(A, B, C)` with the amplitude written as `exp{-(A x1^2 + 2C x1 x2 + B x2^2)/2}`.
    pub fn quadratic_form(&self) -> (f64, f64, f64) {
        let (ia, ib) = (1.0 / (self.a * self.a), 1.0 / (self.b * self.b));
        let big_a = self.alpha_c * self.alpha_c * ia + self.gamma_c * self.gamma_c * ib;
        let big_b = self.beta_c * self.beta_c * ia + self.delta_c * self.delta_c * ib;
        let big_c = self.alpha_c * self.beta_c * ia + self.gamma_c * self.delta_c * ib;
        (big_a, big_b, big_c)
    }

    /// Closed-form Schmidt number `1 / sqrt(1 - C^2 / (A B))`.
    pub fn schmidt_number(&self) -> f64 {
        let (a, b, c) = self.quadratic_form();
        1.0 / (1.0 - c * c / (a * b)).sqrt()
    }

    /// Width ratio of the single-particle to the conditional density of
    /// either variable; equals [`Self::schmidt_number`].
    pub fn width_ratio(&self) -> f64 {
        let (a, b, c) = self.quadratic_form();
        (a / (a - c * c / b)).sqrt()
    }

    pub fn grid(&self, axis1: &AxisSpec, axis2: &AxisSpec) -> Result<AmplitudeGrid> {
        axis1.validate()?;
        axis2.validate()?;
        let a1 = axis1.samples();
        let a2 = axis2.samples();
        let values = a1
            .iter()
            .flat_map(|&x1| a2.iter().map(move |&x2| (x1, x2)))
            .map(|(x1, x2)| Complex64::new(self.eval(x1, x2), 0.0))
            .collect();
        AmplitudeGrid::new(a1, a2, values, Domain::Coordinate)
    }
}

/// Free-function form of [`DoubleGaussianModel::eval`].
pub fn double_gaussian_eval(model: &DoubleGaussianModel, x1: f64, x2: f64) -> f64 {
    model.eval(x1, x2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_values() {
        let m = DoubleGaussianModel::symmetric(0.3, 2.0).unwrap();
        assert_eq!(m.eval(0.0, 0.0), 1.0);
        assert_eq!(m.eval(0.4, -1.1), m.eval(-1.1, 0.4));
        let wide = DoubleGaussianModel::symmetric(0.3, 1e300).unwrap();
        assert_eq!(wide.eval(2.5, -2.5), 1.0);
    }

    #[test]
    fn closed_form_symmetric_case() {
        let m = DoubleGaussianModel::symmetric(0.2, 3.0).unwrap();
        assert!((m.schmidt_number() - 0.5 * (0.2 / 3.0 + 3.0 / 0.2)).abs() < 1e-12);
        assert!((m.width_ratio() - m.schmidt_number()).abs() < 1e-9);
        let eq = DoubleGaussianModel::symmetric(1.3, 1.3).unwrap();
        assert!((eq.schmidt_number() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dependent_forms_rejected() {
        assert!(DoubleGaussianModel::new(1.0, 2.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(DoubleGaussianModel::new(0.0, 2.0, 1.0, 1.0, -1.0, 1.0).is_err());
    }
}
