//! Single-scenario commands: curves, widths, schmidt and crystal.

use std::f64::consts::PI;
use std::time::SystemTime;

use serde::Serialize;

use super::{around, measure, with_workers, write_curve, write_json, write_provenance, RunConfig, Scenario};
use crate::amplitude::{AxisSpec, ScenarioConfig};
use crate::crystal::{self, CrystalOptics};
use crate::distributions::{
    coincidence_curve, coordinate_slice, single_particle_analytic, single_particle_quadrature, validity_check,
    CoordinateIntegral, CoordinateSlice, IntegrationSpec, SampledCurve, ValidityReport, WidthReport,
};
use crate::entanglement::{
    c_epr, ratio_r, rms_width, schmidt_convergence, scenario_hash, EntanglementReport, EprConvention, EprParameter,
    ReportProvenance, SchmidtStudy, SPECTRUM_CUTOFF,
};
use crate::error::{Error, Result};

pub const DEFAULT_MOMENTUM_POINTS: usize = 2001;
pub const DEFAULT_COORDINATE_POINTS: usize = 801;
/// Largest Schmidt grid side.
pub const MAX_SCHMIDT_POINTS: usize = 4097;
const MAX_COORDINATE_POINTS: usize = 200_001;

/// Raises the point count of `axis` until it satisfies the coordinate
/// sampling bound for `bandwidth`.
pub(crate) fn nyquist_axis(axis: &AxisSpec, bandwidth: f64) -> Result<AxisSpec> {
    let needed = ((axis.end - axis.start) * bandwidth / PI).ceil() as usize + 1;
    if needed <= axis.points {
        return Ok(*axis);
    }
    if needed > MAX_COORDINATE_POINTS {
        return Err(Error::Resolution {
            spacing: (axis.end - axis.start) / (MAX_COORDINATE_POINTS - 1) as f64,
            bandwidth,
        });
    }
    AxisSpec::new(axis.start, axis.end, needed)
}

/// Coordinate widths of the three standard slices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateWidths {
    pub coincidence: WidthReport,
    pub xi_plus: WidthReport,
    pub xi_minus: WidthReport,
}

/// Width measurements for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioWidths {
    pub np_eff: f64,
    pub validity: ValidityReport,
    pub coincidence: WidthReport,
    pub single_quadrature: WidthReport,
    pub single_analytic: Option<WidthReport>,
    /// Uses the analytic singles width when available.
    pub r_k: f64,
    pub coordinate: Option<CoordinateWidths>,
    pub c_epr_halfmax: Option<EprParameter>,
    pub c_epr_variance: Option<EprParameter>,
}

impl ScenarioWidths {
    pub fn single(&self) -> &WidthReport {
        self.single_analytic.as_ref().unwrap_or(&self.single_quadrature)
    }
}

/// Curves behind a [`ScenarioWidths`], keyed by file stem.
pub struct Measured {
    pub widths: ScenarioWidths,
    pub curves: Vec<(String, SampledCurve)>,
}

pub fn coordinate_measure(cfg: &ScenarioConfig, slice: CoordinateSlice, points: usize) -> Result<(SampledCurve, WidthReport)> {
    let bw = CoordinateIntegral::new(cfg)?.bandwidth();
    let guess = AxisSpec::symmetric(400.0, 401)?;
    measure(guess, points, |axis| coordinate_slice(cfg, slice, &nyquist_axis(axis, bw)?))
}

/// Momentum and, when valid, coordinate widths of `cfg` on automatically
/// chosen axes.
pub fn measure_scenario(cfg: &ScenarioConfig, momentum_points: usize, coordinate_points: usize) -> Result<Measured> {
    let alpha = cfg.pump.alpha;
    let guess = AxisSpec::symmetric(8.0 * alpha, 401)?;
    let spec = IntegrationSpec::default();
    let (cc, coincidence) = measure(guess, momentum_points, |a| coincidence_curve(cfg, 0.0, a))?;
    let (sq, single_quadrature) = measure(guess, momentum_points, |a| single_particle_quadrature(cfg, a, &spec))?;
    let validity = validity_check(cfg);
    let mut curves = vec![("coincidence".to_string(), cc), ("single_quadrature".to_string(), sq)];

    let mut single_analytic = None;
    let mut coordinate = None;
    let mut c_half = None;
    let mut c_var = None;
    if validity.valid {
        let (sa, w) = measure(guess, momentum_points, |a| single_particle_analytic(cfg, a))?;
        curves.push(("single_analytic".into(), sa));
        single_analytic = Some(w);
        let mut slices = Vec::new();
        for (name, slice) in [
            ("coordinate_coincidence", CoordinateSlice::Coincidence),
            ("coordinate_xi_plus", CoordinateSlice::Sum),
            ("coordinate_xi_minus", CoordinateSlice::Difference),
        ] {
            let (c, w) = coordinate_measure(cfg, slice, coordinate_points)?;
            curves.push((name.into(), c));
            slices.push(w);
        }
        let widths = CoordinateWidths {
            xi_minus: slices.pop().unwrap(),
            xi_plus: slices.pop().unwrap(),
            coincidence: slices.pop().unwrap(),
        };
        c_half = Some(c_epr(coincidence.fwhm, widths.coincidence.fwhm, EprConvention::HalfMax)?);
        c_var = Some(variance_epr(cfg, &coincidence, &widths.coincidence)?);
        coordinate = Some(widths);
    }
    let r_k = ratio_r(single_analytic.as_ref().unwrap_or(&single_quadrature), &coincidence)?;
    Ok(Measured {
        widths: ScenarioWidths {
            np_eff: cfg.np_eff,
            validity,
            coincidence,
            single_quadrature,
            single_analytic,
            r_k,
            coordinate,
            c_epr_halfmax: c_half,
            c_epr_variance: c_var,
        },
        curves,
    })
}

/// EPR parameter from root-mean-square conditional widths. The momentum
/// curve spans the whole pump window, since its sinc^2 tails only die off
/// under the pump envelope; the coordinate curve spans 20 FWHM.
pub fn variance_epr(cfg: &ScenarioConfig, coincidence: &WidthReport, coordinate: &WidthReport) -> Result<EprParameter> {
    let half = 2.0 * IntegrationSpec::default().pump_window(cfg);
    let n = ((2.0 * half / (coincidence.fwhm / 20.0)).ceil() as usize + 1).max(2001);
    let dk = rms_width(&coincidence_curve(cfg, 0.0, &AxisSpec::symmetric(half, n)?)?);
    let bw = CoordinateIntegral::new(cfg)?.bandwidth();
    let x_axis = nyquist_axis(&around(coordinate.peak_location, 10.0 * coordinate.fwhm, 2001)?, bw)?;
    let dx = rms_width(&coordinate_slice(cfg, CoordinateSlice::Coincidence, &x_axis)?);
    c_epr(dk, dx, EprConvention::Variance)
}

/// Square grid for the Schmidt study: `+-3.5` singles FWHM, spacing at most
/// `coincidence FWHM / 2.5`, odd so it halves exactly.
pub fn schmidt_axis(single: &WidthReport, coincidence: &WidthReport, points: Option<usize>) -> Result<AxisSpec> {
    let half = 3.5 * single.fwhm.max(coincidence.fwhm);
    let n = match points {
        Some(n) => n,
        None => {
            let n = ((2.0 * half / (coincidence.fwhm / 2.5)).ceil() as usize + 1).max(401);
            n + (n + 1) % 2
        }
    };
    if n > MAX_SCHMIDT_POINTS {
        return Err(Error::InvalidAxis(format!(
            "Schmidt grid would need {n} points per axis (limit {MAX_SCHMIDT_POINTS}); set schmidt_points"
        )));
    }
    AxisSpec::symmetric(half, n)
}

/// Schmidt study on `axis` (fine grid) and its half-resolution version.
pub fn schmidt_study(cfg: &ScenarioConfig, axis: &AxisSpec) -> Result<SchmidtStudy> {
    let coarse = AxisSpec::new(axis.start, axis.end, axis.points.div_ceil(2))?;
    schmidt_convergence(cfg, &coarse, SPECTRUM_CUTOFF)
}

pub fn entanglement_report(cfg: &ScenarioConfig, widths: &ScenarioWidths, study: &SchmidtStudy) -> EntanglementReport {
    EntanglementReport {
        r_k: widths.r_k,
        r_x: None,
        c_epr_halfmax: widths.c_epr_halfmax.map(|e| e.c_epr),
        c_epr_ratio: widths.c_epr_halfmax.map(|e| e.ratio),
        c_epr_variance: widths.c_epr_variance.map(|e| e.c_epr),
        c_epr_variance_ratio: widths.c_epr_variance.map(|e| e.ratio),
        schmidt_k: study.k_fine,
        schmidt_spectrum: study.fine.spectrum.clone(),
        provenance: ReportProvenance {
            scenario_hash: scenario_hash(cfg),
            grid_dims: (study.fine_points, study.fine_points),
            convergence_delta: Some(study.convergence_delta),
        },
    }
}

fn points(cfg: &RunConfig) -> (usize, usize) {
    (
        cfg.grid.momentum_points.unwrap_or(DEFAULT_MOMENTUM_POINTS),
        cfg.grid.coordinate_points.unwrap_or(DEFAULT_COORDINATE_POINTS),
    )
}

/// Writes `curves/*.csv` for the selected scenario.
pub fn run_curves(cfg: &RunConfig) -> Result<Vec<String>> {
    let started = SystemTime::now();
    let scenario = Scenario::from_config(cfg)?;
    let sc = scenario.selected(cfg);
    let (mp, cp) = points(cfg);
    let measured = with_workers(cfg.workers, || measure_scenario(&sc, mp, cp))??;
    let dir = cfg.output_dir.join("curves");
    let mut names = Vec::new();
    for (name, curve) in &measured.curves {
        write_curve(&dir, name, curve)?;
        names.push(name.clone());
    }
    write_provenance(cfg, &sc, started)?;
    Ok(names)
}

/// Writes `widths.json` for the selected scenario.
pub fn run_widths(cfg: &RunConfig) -> Result<ScenarioWidths> {
    let started = SystemTime::now();
    let scenario = Scenario::from_config(cfg)?;
    let sc = scenario.selected(cfg);
    let (mp, cp) = points(cfg);
    let measured = with_workers(cfg.workers, || measure_scenario(&sc, mp, cp))??;
    write_json(&cfg.output_dir.join("widths.json"), &measured.widths)?;
    write_provenance(cfg, &sc, started)?;
    Ok(measured.widths)
}

/// Writes `report.json` with the entanglement report of the selected scenario.
pub fn run_schmidt(cfg: &RunConfig) -> Result<EntanglementReport> {
    let started = SystemTime::now();
    let scenario = Scenario::from_config(cfg)?;
    let sc = scenario.selected(cfg);
    let (mp, cp) = points(cfg);
    let report = with_workers(cfg.workers, || -> Result<EntanglementReport> {
        let m = measure_scenario(&sc, mp, cp)?;
        let axis = schmidt_axis(m.widths.single(), &m.widths.coincidence, cfg.grid.schmidt_points)?;
        let study = schmidt_study(&sc, &axis)?;
        Ok(entanglement_report(&sc, &m.widths, &study))
    })??;
    report.validate()?;
    write_json(&cfg.output_dir.join("report.json"), &report)?;
    write_provenance(cfg, &sc, started)?;
    Ok(report)
}

/// Phase-matching solution of one bundled crystal, or why there is none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrystalRow {
    pub crystal: String,
    pub optics: Option<CrystalOptics>,
    pub phi0_degrees: Option<f64>,
    /// `|analytic - central difference| / |analytic|` for `dn_e/dphi` at `phi0`.
    pub derivative_check: Option<f64>,
    pub error: Option<String>,
}

/// Relative gap between the closed-form and finite-difference `dn_e/dphi`.
pub fn derivative_check(model: &crystal::DispersionModel, lambda_nm: f64, phi: f64) -> Result<f64> {
    let h = 1e-5;
    let fd = (model.index_extraordinary_angle(lambda_nm, phi + h)? - model.index_extraordinary_angle(lambda_nm, phi - h)?)
        / (2.0 * h);
    let exact = model.index_extraordinary_derivative(lambda_nm, phi)?;
    Ok((exact - fd).abs() / exact.abs())
}

/// Phase matching for every bundled crystal at the configured wavelength;
/// writes `crystal.json`.
pub fn run_crystal(cfg: &RunConfig) -> Result<Vec<CrystalRow>> {
    let started = SystemTime::now();
    let rows: Vec<CrystalRow> = crystal::bundled()
        .iter()
        .map(|model| match crystal::solve_phase_matching(model, cfg.lambda_nm) {
            Ok(o) => CrystalRow {
                crystal: model.name.clone(),
                phi0_degrees: Some(o.phi0_degrees()),
                derivative_check: derivative_check(model, cfg.lambda_nm, o.phi0).ok(),
                optics: Some(o),
                error: None,
            },
            Err(e) => CrystalRow {
                crystal: model.name.clone(),
                optics: None,
                phi0_degrees: None,
                derivative_check: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    write_json(&cfg.output_dir.join("crystal.json"), &rows)?;
    let scenario = Scenario::from_config(cfg)?;
    write_provenance(cfg, &scenario.selected(cfg), started)?;
    Ok(rows)
}
