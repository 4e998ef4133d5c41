//! Peak detection and full width at half maximum.

use serde::{Deserialize, Serialize};

use super::SampledCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakSelection {
    /// The detected peak closest to the axis origin.
    NearestZero,
    GlobalMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub fwhm: f64,
    pub peak_location: f64,
    pub peak_value: f64,
    pub n_peaks_detected: usize,
    pub selected_peak_index: usize,
    /// Half-height crossings; `right - left == fwhm`.
    pub left: f64,
    pub right: f64,
    pub units: String,
}

/// Maximum of the parabola through three equally spaced samples.
fn parabolic_peak(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= y.len() {
        return (x[i], y[i]);
    }
    let (ym, y0, yp) = (y[i - 1], y[i], y[i + 1]);
    let denom = ym - 2.0 * y0 + yp;
    if denom >= 0.0 {
        return (x[i], y0);
    }
    let shift = (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5);
    let h = if shift >= 0.0 { x[i + 1] - x[i] } else { x[i] - x[i - 1] };
    (x[i] + shift * h, y0 - 0.25 * (ym - yp) * shift)
}

/// Runs of samples at or above half the global maximum; each run holds one peak.
fn peak_runs(y: &[f64], level: f64) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &v) in y.iter().enumerate() {
        match (v >= level, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, y.len() - 1));
    }
    runs
}

/// Finds the position where the linear interpolant between samples `i` and
/// `j` (adjacent) reaches `level`.
fn crossing(x: &[f64], y: &[f64], i: usize, j: usize, level: f64) -> f64 {
    let t = (level - y[i]) / (y[j] - y[i]);
    x[i] + t * (x[j] - x[i])
}

/// Locates peak maxima: one per contiguous run above half the global maximum.
fn detect_peaks(curve: &SampledCurve) -> Result<Vec<usize>> {
    let y = &curve.density;
    if y.len() < 3 {
        return Err(Error::NoPeak(curve.label.clone()));
    }
    let global = curve.max();
    if !(global > 0.0) {
        return Err(Error::NoPeak(curve.label.clone()));
    }
    Ok(peak_runs(y, 0.5 * global)
        .iter()
        .map(|&(s, e)| (s..=e).fold(s, |best, k| if y[k] > y[best] { k } else { best }))
        .collect())
}

fn width_of(curve: &SampledCurve, peaks: &[usize], selected: usize) -> Result<WidthReport> {
    let (x, y) = (&curve.axis, &curve.density);
    let p = peaks[selected];
    let (peak_location, peak_value) = parabolic_peak(x, y, p);
    let half = 0.5 * peak_value;

    let mut l = p;
    while y[l] >= half {
        if l == 0 {
            return Err(Error::Truncated(curve.label.clone()));
        }
        l -= 1;
    }
    let mut r = p;
    while y[r] >= half {
        if r + 1 == y.len() {
            return Err(Error::Truncated(curve.label.clone()));
        }
        r += 1;
    }
    let left = crossing(x, y, l, l + 1, half);
    let right = crossing(x, y, r - 1, r, half);
    Ok(WidthReport {
        fwhm: right - left,
        peak_location,
        peak_value,
        n_peaks_detected: peaks.len(),
        selected_peak_index: selected,
        left,
        right,
        units: curve.units.clone(),
    })
}

/// Full width at half maximum of one peak of `curve`.
///
/// Peaks are the maxima of contiguous runs above half the global maximum.
/// The half-height of the selected peak is taken from its own (parabolically
/// refined) maximum, and crossings are located on the linear interpolant.
pub fn fwhm(curve: &SampledCurve, selection: PeakSelection) -> Result<WidthReport> {
    let (x, y) = (&curve.axis, &curve.density);
    let peaks = detect_peaks(curve)?;
    let selected = match selection {
        PeakSelection::GlobalMax => peaks
            .iter()
            .enumerate()
            .fold(0, |best, (k, &p)| if y[p] > y[peaks[best]] { k } else { best }),
        PeakSelection::NearestZero => peaks
            .iter()
            .enumerate()
            .fold(0, |best, (k, &p)| if x[p].abs() < x[peaks[best]].abs() { k } else { best }),
    };
    width_of(curve, &peaks, selected)
}

/// Width reports for every detected peak, in axis order.
pub fn fwhm_all(curve: &SampledCurve) -> Result<Vec<WidthReport>> {
    let peaks = detect_peaks(curve)?;
    (0..peaks.len()).map(|k| width_of(curve, &peaks, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Normalization;

    fn curve(x: Vec<f64>, f: impl Fn(f64) -> f64) -> SampledCurve {
        let y = x.iter().map(|&v| f(v)).collect();
        SampledCurve::new(x, y, Normalization::PeakOne, "t", "rad").unwrap()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn gaussian_fwhm() {
        let alpha = 0.004114;
        let c = curve(linspace(-0.02, 0.02, 4001), |t| (-4.0 * std::f64::consts::LN_2 * t * t / (alpha * alpha)).exp());
        let w = fwhm(&c, PeakSelection::NearestZero).unwrap();
        assert!((w.fwhm - alpha).abs() / alpha < 1e-4);
        assert_eq!(w.n_peaks_detected, 1);
        assert!(w.peak_location.abs() < 1e-12);
        assert!((c.interpolate(w.peak_location + w.fwhm / 2.0) / w.peak_value - 0.5).abs() < 1e-4);
    }

    #[test]
    fn off_grid_peak_is_refined() {
        let f = |t: f64| (-(t - 0.1234) * (t - 0.1234) / 0.02).exp();
        let x = linspace(-1.0, 1.0, 200);
        let sampled_max = x.iter().map(|&t| f(t)).fold(0.0, f64::max);
        let c = curve(x, f);
        let w = fwhm(&c, PeakSelection::GlobalMax).unwrap();
        assert!((w.peak_location - 0.1234).abs() < 1e-4);
        assert!(w.peak_value > 1.0);
        assert!((w.peak_value * sampled_max - 1.0).abs() < 1e-5);
    }

    #[test]
    fn two_peaks_selection() {
        let g = |t: f64, c: f64, s: f64| (-(t - c) * (t - c) / (2.0 * s * s)).exp();
        let c = curve(linspace(-1.0, 5.0, 6001), |t| 0.7 * g(t, 0.2, 0.1) + g(t, 3.0, 0.3));
        let near = fwhm(&c, PeakSelection::NearestZero).unwrap();
        let global = fwhm(&c, PeakSelection::GlobalMax).unwrap();
        assert_eq!(near.n_peaks_detected, 2);
        assert_eq!(near.selected_peak_index, 0);
        assert_eq!(global.selected_peak_index, 1);
        assert!((near.fwhm - 2.0 * (2.0 * 2f64.ln()).sqrt() * 0.1).abs() < 1e-4);
        assert!((global.peak_location - 3.0).abs() < 1e-6);
        let all = fwhm_all(&c).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0], near);
        assert_eq!(all[1], global);
    }

    #[test]
    fn truncation_and_no_peak() {
        let c = curve(linspace(0.0, 1.0, 11), |t| 1.0 - 0.1 * t);
        assert!(matches!(fwhm(&c, PeakSelection::GlobalMax), Err(Error::Truncated(_))));
        let c = curve(linspace(-1.0, 1.0, 101), |t| (-t * t * 100.0).exp());
        assert!(fwhm(&c, PeakSelection::GlobalMax).is_ok());
        let tiny = SampledCurve::from_parts(vec![0.0, 1.0], vec![1.0, 0.0], Normalization::PeakOne, "s".into(), "rad".into());
        assert!(matches!(fwhm(&tiny, PeakSelection::GlobalMax), Err(Error::NoPeak(_))));
    }

    #[test]
    fn asymmetric_peak_reports_both_crossings() {
        let c = curve(linspace(-1.0, 3.0, 40001), |t| if t < 0.0 { (-t * t / 0.01).exp() } else { (-t * t / 0.25).exp() });
        let w = fwhm(&c, PeakSelection::NearestZero).unwrap();
        let k = 2f64.ln().sqrt();
        assert!((w.left + 0.1 * k).abs() < 1e-4);
        assert!((w.right - 0.5 * k).abs() < 1e-4);
        assert!((w.fwhm - (w.right - w.left)).abs() < 1e-15);
    }
}
