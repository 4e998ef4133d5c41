use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::{amplitude_grid, AmplitudeGrid, AxisSpec, ScenarioConfig};
use crate::error::{Error, Result};

/// Schmidt coefficients and number of a tabulated bipartite amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtDecomposition {
    /// `1 / sum(lambda_n^2)` over the full spectrum.
    pub k: f64,
    /// Non-increasing `lambda_n` above the cutoff.
    pub spectrum: Vec<f64>,
    /// Sum of the full spectrum before truncation (1 up to rounding).
    pub total: f64,
    pub rank: usize,
}

/// Cell widths of a strictly increasing axis; uniform axes give the spacing
/// at every point.
fn cell_widths(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    (0..n)
        .map(|i| match i {
            0 => axis[1] - axis[0],
            _ if i + 1 == n => axis[n - 1] - axis[n - 2],
            _ => 0.5 * (axis[i + 1] - axis[i - 1]),
        })
        .collect()
}

/// Singular values of the quadrature-weighted grid, squared and normalized.
pub fn schmidt_from_grid(grid: &AmplitudeGrid, cutoff: f64) -> Result<SchmidtDecomposition> {
    let (n1, n2) = grid.dims();
    if grid.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::DegenerateGrid("non-finite amplitude values".into()));
    }
    let w1: Vec<f64> = cell_widths(&grid.axis1).into_iter().map(f64::sqrt).collect();
    let w2: Vec<f64> = cell_widths(&grid.axis2).into_iter().map(f64::sqrt).collect();

    let mut sigma: Vec<f64> = if grid.is_real() {
        DMatrix::from_fn(n1, n2, |i, j| grid.get(i, j).re * w1[i] * w2[j])
            .singular_values()
            .iter()
            .copied()
            .collect()
    } else {
        DMatrix::<Complex64>::from_fn(n1, n2, |i, j| grid.get(i, j) * (w1[i] * w2[j]))
            .singular_values()
            .iter()
            .copied()
            .collect()
    };
    sigma.sort_by(|a, b| b.total_cmp(a));

    let power: f64 = sigma.iter().map(|s| s * s).sum();
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::DegenerateGrid(format!("total power {power}")));
    }
    let lambda: Vec<f64> = sigma.iter().map(|s| s * s / power).collect();
    let purity: f64 = lambda.iter().map(|l| l * l).sum();
    let total: f64 = lambda.iter().sum();
    let rank = lambda.iter().filter(|&&l| l > 0.0).count();
    Ok(SchmidtDecomposition {
        k: 1.0 / purity,
        spectrum: lambda.into_iter().take_while(|&l| l > cutoff).collect(),
        total,
        rank,
    })
}

/// Schmidt number at two resolutions of the same window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtStudy {
    pub coarse_points: usize,
    pub fine_points: usize,
    pub k_coarse: f64,
    pub k_fine: f64,
    /// `|k_fine - k_coarse| / k_fine`.
    pub convergence_delta: f64,
    pub fine: SchmidtDecomposition,
}

/// Computes K for the momentum amplitude on `axis x axis` and on the grid
/// refined by two.
pub fn schmidt_convergence(cfg: &ScenarioConfig, axis: &AxisSpec, cutoff: f64) -> Result<SchmidtStudy> {
    let fine_axis = axis.refined(2);
    let coarse = schmidt_from_grid(&amplitude_grid(cfg, axis, axis)?, cutoff)?;
    let fine = schmidt_from_grid(&amplitude_grid(cfg, &fine_axis, &fine_axis)?, cutoff)?;
    Ok(SchmidtStudy {
        coarse_points: axis.points,
        fine_points: fine_axis.points,
        k_coarse: coarse.k,
        k_fine: fine.k,
        convergence_delta: (fine.k - coarse.k).abs() / fine.k,
        fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::Domain;

    fn grid(n: usize, f: impl Fn(f64, f64) -> Complex64) -> AmplitudeGrid {
        let axis: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let values = axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).map(|(a, b)| f(a, b)).collect();
        AmplitudeGrid::new(axis.clone(), axis, values, Domain::Momentum).unwrap()
    }

    #[test]
    fn separable_grid_has_unit_k() {
        let g = grid(64, |a, b| Complex64::new((-a * a * 3.0).exp() * (1.0 + b * b), 0.0));
        let s = schmidt_from_grid(&g, 1e-12).unwrap();
        assert!((s.k - 1.0).abs() < 1e-6);
        assert_eq!(s.spectrum.len(), 1);
        assert!((s.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_path_matches_real_path() {
        let f = |a: f64, b: f64| (-(a - b).powi(2) * 20.0 - (a + b).powi(2)).exp();
        let real = schmidt_from_grid(&grid(48, |a, b| Complex64::new(f(a, b), 0.0)), 1e-9).unwrap();
        let phased = schmidt_from_grid(&grid(48, |a, b| Complex64::from_polar(f(a, b), 0.7)), 1e-9).unwrap();
        assert!((real.k - phased.k).abs() < 1e-9 * real.k);
    }

    #[test]
    fn zero_grid_is_degenerate() {
        let g = grid(8, |_, _| Complex64::new(0.0, 0.0));
        assert!(matches!(schmidt_from_grid(&g, 1e-6), Err(Error::DegenerateGrid(_))));
        let g = grid(8, |_, _| Complex64::new(f64::NAN, 0.0));
        assert!(matches!(schmidt_from_grid(&g, 1e-6), Err(Error::DegenerateGrid(_))));
    }

    #[test]
    fn widths_on_uniform_axis_are_equal() {
        assert_eq!(cell_widths(&[0.0, 0.5, 1.0, 1.5]), vec![0.5; 4]);
    }
}
