//! One-command reproduction of the reference numbers.

use std::time::SystemTime;

use serde::Serialize;

use super::commands::{
    derivative_check, entanglement_report, schmidt_axis, schmidt_study, variance_epr, CoordinateWidths, ScenarioWidths,
};
use super::{with_workers, write_curve, write_json, write_provenance, GeometryPreset, NpSource, RunConfig, RunLabel, Scenario};
use crate::amplitude::{amplitude, AxisSpec, ScenarioConfig};
use crate::crystal;
use crate::distributions::{
    coincidence_curve, coordinate_slice, fwhm, fwhm_all, phase_matching_curve, pm_roots, single_particle_analytic,
    single_particle_quadrature, validity_check, CoordinateSlice, IntegrationSpec, Normalization, PeakSelection,
    SampledCurve, WidthReport,
};
use crate::entanglement::{
    c_epr, ratio_r, schmidt_from_grid, DoubleGaussianModel, EntanglementReport, EprConvention, SPECTRUM_CUTOFF,
};
use crate::error::Result;

/// How a computed value is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `|computed - target| <= tol |target|`.
    Relative(f64),
    /// `|computed - target| <= tol`.
    Absolute(f64),
    /// `computed <= bound`; there is no target.
    AtMost(f64),
    /// Reported next to a measured value, never judged.
    Context,
}

/// One row of the reproduction table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Criterion {
    pub criterion: u8,
    pub quantity: &'static str,
    pub target: Option<f64>,
    pub check: Check,
    /// Human-readable tolerance, identical to the README table.
    pub tolerance: &'static str,
}

const fn rel(criterion: u8, quantity: &'static str, target: f64, tol: f64, tolerance: &'static str) -> Criterion {
    Criterion {
        criterion,
        quantity,
        target: Some(target),
        check: Check::Relative(tol),
        tolerance,
    }
}

const fn abs(criterion: u8, quantity: &'static str, target: f64, tol: f64, tolerance: &'static str) -> Criterion {
    Criterion {
        criterion,
        quantity,
        target: Some(target),
        check: Check::Absolute(tol),
        tolerance,
    }
}

const fn at_most(criterion: u8, quantity: &'static str, bound: f64, tolerance: &'static str) -> Criterion {
    Criterion {
        criterion,
        quantity,
        target: None,
        check: Check::AtMost(bound),
        tolerance,
    }
}

const fn context(quantity: &'static str, measured: f64) -> Criterion {
    Criterion {
        criterion: 10,
        quantity,
        target: Some(measured),
        check: Check::Context,
        tolerance: "not a pass/fail target",
    }
}

pub const CRITERIA: &[Criterion] = &[
    rel(1, "sinc FWHM perp (mrad)", 24.0, 0.05, "± 5%"),
    rel(1, "sinc FWHM parallel (mrad)", 0.5, 0.05, "± 5%"),
    rel(1, "sinc width ratio", 48.0, 0.05, "± 5%"),
    rel(2, "second phase-matching root theta1 (rad)", 0.574, 0.02, "± 2%"),
    rel(2, "second sinc peak theta1 (rad)", 0.574, 0.02, "± 2%"),
    rel(3, "coincidence FWHM perp (mrad)", 8.0, 0.10, "± 10%"),
    rel(3, "coincidence FWHM perp / 2 pump FWHM", 1.0, 0.05, "± 5%"),
    rel(3, "single FWHM perp, quadrature (mrad)", 12.0, 0.10, "± 10%"),
    rel(3, "R_perp", 1.5, 0.10, "± 10%"),
    rel(4, "coincidence FWHM parallel (mrad)", 0.5, 0.05, "± 5%"),
    rel(4, "single FWHM parallel, analytic (mrad)", 47.3, 0.05, "± 5%"),
    rel(4, "R_parallel", 94.6, 0.05, "± 5%"),
    rel(5, "validity LHS", 1.1e4, 0.03, "± 3%"),
    rel(5, "validity RHS", 486.0, 0.005, "± 0.5%"),
    rel(6, "coordinate coincidence FWHM (xi)", 88.0, 0.05, "± 5%"),
    rel(6, "xi_plus FWHM", 356.4, 0.05, "± 5%"),
    rel(6, "xi_minus FWHM", 44.0, 0.05, "± 5%"),
    at_most(6, "largest coordinate width change under L -> 2L", 0.005, "< 0.5%"),
    rel(7, "dk dx product", 0.044, 0.07, "± 7%"),
    rel(7, "C_EPR", 22.7, 0.07, "± 7%"),
    rel(7, "C_EPR ratio", 63.0, 0.07, "± 7%"),
    at_most(8, "amplitude exchange asymmetry", 0.0, "exact"),
    at_most(8, "deviation from Monken form at np_eff = 0", 0.0, "exact"),
    at_most(8, "singles quadrature vs analytic FWHM, parallel", 0.03, "≤ 3%"),
    abs(8, "Schmidt K of a separable grid", 1.0, 1e-6, "± 1e-6"),
    at_most(8, "double-Gaussian grid K vs closed form", 0.01, "≤ 1%"),
    abs(8, "Schmidt spectrum sum, parallel", 1.0, 1e-9, "within 1e-9"),
    at_most(8, "Schmidt K change under grid refinement, parallel", 0.01, "< 1%"),
    at_most(8, "Schmidt K change under grid refinement, perp", 0.01, "< 1%"),
    rel(8, "Gaussian FWHM / alpha", 1.0, 1e-4, "± 1e-4"),
    abs(9, "n_p' LBO", -0.0270, 0.005, "± 0.005"),
    abs(9, "n_p' KDP", -0.0395, 0.005, "± 0.005"),
    abs(9, "n_p' BBO", -0.1175, 0.005, "± 0.005"),
    abs(9, "n_p' LiIO3", -0.1409, 0.005, "± 0.005"),
    at_most(9, "dn_e/dphi vs finite difference, largest", 1e-6, "≤ 1e-6"),
    context("coincidence width ratio perp / parallel", 11.0),
    context("single width ratio perp / parallel", 0.41),
    context("R_parallel, slit-broadened pump", 80.0),
    context("single FWHM parallel, experiment (mrad)", 60.0),
    context("coincidence FWHM parallel, experiment (mrad)", 0.75),
    context("R_perp, lens-broadened pump", 2.33),
    context("R_parallel, lens-broadened pump", 67.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
    Context,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproRow {
    pub criterion: u8,
    pub quantity: String,
    pub reference_value: Option<f64>,
    pub computed: Option<f64>,
    pub relative_deviation: Option<f64>,
    pub tolerance: String,
    pub status: RowStatus,
}

impl ReproRow {
    pub fn judge(c: &Criterion, computed: Option<f64>) -> Self {
        let deviation = match (c.target, computed) {
            (Some(t), Some(v)) if t != 0.0 => Some((v - t) / t.abs()),
            _ => None,
        };
        let status = match (c.check, computed) {
            (Check::Context, _) => RowStatus::Context,
            (_, None) => RowStatus::Fail,
            (check, Some(v)) => {
                let ok = match check {
                    Check::Relative(tol) => (v - c.target.unwrap()).abs() <= tol * c.target.unwrap().abs(),
                    Check::Absolute(tol) => (v - c.target.unwrap()).abs() <= tol,
                    Check::AtMost(bound) => v <= bound,
                    Check::Context => unreachable!(),
                };
                if ok {
                    RowStatus::Pass
                } else {
                    RowStatus::Fail
                }
            }
        };
        Self {
            criterion: c.criterion,
            quantity: c.quantity.to_string(),
            reference_value: c.target,
            computed,
            relative_deviation: deviation,
            tolerance: c.tolerance.to_string(),
            status,
        }
    }

    /// Fixed-width text line.
    pub fn line(&self) -> String {
        let status = match self.status {
            RowStatus::Pass => "PASS",
            RowStatus::Fail => "FAIL",
            RowStatus::Context => "info",
        };
        let num = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into());
        let dev = self
            .relative_deviation
            .map(|d| format!("{:+.2}%", 100.0 * d))
            .unwrap_or_else(|| "-".into());
        format!(
            "{status} [{:>2}] {:<52} ref {:>13}  got {:>13}  dev {:>9}  tol {}",
            self.criterion,
            self.quantity,
            num(self.reference_value),
            num(self.computed),
            dev,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryReports {
    pub perp: EntanglementReport,
    pub parallel: EntanglementReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproReport {
    pub mode: RunLabel,
    pub np_source: NpSource,
    pub scenario: ScenarioConfig,
    pub widths: GeometryWidths,
    pub entanglement: GeometryReports,
    pub rows: Vec<ReproRow>,
    pub overall_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryWidths {
    pub perp: ScenarioWidths,
    pub parallel: ScenarioWidths,
}

impl ReproReport {
    pub fn row(&self, quantity: &str) -> Option<&ReproRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn failed(&self) -> impl Iterator<Item = &ReproRow> {
        self.rows.iter().filter(|r| r.status == RowStatus::Fail)
    }
}

/// Markdown table of [`CRITERIA`], as embedded in the README.
pub fn criteria_markdown() -> String {
    let mut out = String::from("| # | quantity | reference | tolerance |\n|---|---|---|---|\n");
    for c in CRITERIA {
        let target = match c.target {
            Some(t) => format!("{t}"),
            None => "-".into(),
        };
        out.push_str(&format!("| {} | {} | {} | {} |\n", c.criterion, c.quantity, target, c.tolerance));
    }
    out
}

fn named<T>(quantity: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.context(quantity))
}

fn width(quantity: &str, curve: &SampledCurve) -> Result<WidthReport> {
    named(quantity, fwhm(curve, PeakSelection::NearestZero))
}

/// Every figure curve and number the table needs, on fixed axes.
struct Computation {
    values: Vec<(&'static str, Option<f64>)>,
    curves: Vec<(String, SampledCurve)>,
    widths: GeometryWidths,
    entanglement: GeometryReports,
}

fn compute(perp: &ScenarioConfig, par: &ScenarioConfig) -> Result<Computation> {
    let mut values: Vec<(&'static str, Option<f64>)> = Vec::new();
    let mut curves: Vec<(String, SampledCurve)> = Vec::new();
    let mrad = |w: &WidthReport| w.fwhm * 1e3;
    let spec = IntegrationSpec::default();

    // phase-matching factor alone
    let sinc_perp = named("sinc perp", phase_matching_curve(perp, 0.0, &AxisSpec::symmetric(0.05, 2001)?))?;
    let sinc_par = named("sinc parallel", phase_matching_curve(par, 0.0, &AxisSpec::new(-0.005, 0.005, 2001)?))?;
    let w_sp = width("sinc FWHM perp", &sinc_perp)?;
    let w_sa = width("sinc FWHM parallel", &sinc_par)?;
    values.push(("sinc FWHM perp (mrad)", Some(mrad(&w_sp))));
    values.push(("sinc FWHM parallel (mrad)", Some(mrad(&w_sa))));
    values.push(("sinc width ratio", Some(w_sp.fwhm / w_sa.fwhm)));

    let family_axis = AxisSpec::new(-0.05, 0.62, 33501)?;
    for (name, np) in [
        ("fig2_sinc_np_zero", 0.0),
        ("fig2_sinc_np_tenth", par.np_eff / 10.0),
        ("fig2_sinc_np_full", par.np_eff),
    ] {
        let sc = ScenarioConfig { np_eff: np, ..*par };
        curves.push((name.to_string(), named(name, phase_matching_curve(&sc, 0.0, &family_axis))?));
    }
    let (_, theta_b) = named("second phase-matching root", pm_roots(par, 0.0))?;
    values.push(("second phase-matching root theta1 (rad)", Some(theta_b)));
    let peaks = named("second sinc peak", fwhm_all(&curves[2].1))?;
    values.push(("second sinc peak theta1 (rad)", peaks.get(1).map(|w| w.peak_location)));
    curves.push(("sinc_perp".into(), sinc_perp));
    curves.push(("sinc_parallel".into(), sinc_par));

    // perpendicular geometry
    let cc_perp = named("coincidence perp", coincidence_curve(perp, 0.0, &AxisSpec::symmetric(0.03, 2001)?))?;
    let sq_perp = named(
        "single perp quadrature",
        single_particle_quadrature(perp, &AxisSpec::symmetric(0.03, 601)?, &spec),
    )?;
    let w_cp = width("coincidence FWHM perp", &cc_perp)?;
    let w_qp = width("single FWHM perp", &sq_perp)?;
    let r_perp = ratio_r(&w_qp, &w_cp)?;
    values.push(("coincidence FWHM perp (mrad)", Some(mrad(&w_cp))));
    values.push(("coincidence FWHM perp / 2 pump FWHM", Some(w_cp.fwhm / (2.0 * perp.pump.alpha))));
    values.push(("single FWHM perp, quadrature (mrad)", Some(mrad(&w_qp))));
    values.push(("R_perp", Some(r_perp)));

    // parallel geometry
    let cc_par = named("coincidence parallel", coincidence_curve(par, 0.0, &AxisSpec::symmetric(0.005, 2001)?))?;
    let sa_par = named(
        "single parallel analytic",
        single_particle_analytic(par, &AxisSpec::new(-0.06, 0.08, 2801)?),
    )?;
    let sq_par = named(
        "single parallel quadrature",
        single_particle_quadrature(par, &AxisSpec::new(-0.06, 0.08, 1401)?, &spec),
    )?;
    let w_cc = width("coincidence FWHM parallel", &cc_par)?;
    let w_sa = width("single FWHM parallel analytic", &sa_par)?;
    let w_sq = width("single FWHM parallel quadrature", &sq_par)?;
    let r_par = ratio_r(&w_sa, &w_cc)?;
    values.push(("coincidence FWHM parallel (mrad)", Some(mrad(&w_cc))));
    values.push(("single FWHM parallel, analytic (mrad)", Some(mrad(&w_sa))));
    values.push(("R_parallel", Some(r_par)));

    let v = validity_check(par);
    values.push(("validity LHS", Some(v.lhs)));
    values.push(("validity RHS", Some(v.rhs)));

    // coordinate space
    let slices = [
        ("coordinate_coincidence", CoordinateSlice::Coincidence, AxisSpec::symmetric(400.0, 801)?),
        ("coordinate_xi_plus", CoordinateSlice::Sum, AxisSpec::symmetric(6000.0, 1201)?),
        ("coordinate_xi_minus", CoordinateSlice::Difference, AxisSpec::symmetric(400.0, 801)?),
    ];
    let long = par.with_length(2.0 * par.length_cm)?;
    let mut coord = Vec::new();
    let mut change: f64 = 0.0;
    for (name, slice, axis) in &slices {
        let c = named(slice.name(), coordinate_slice(par, *slice, axis))?;
        let w = width(slice.name(), &c)?;
        let c2 = named(slice.name(), coordinate_slice(&long, *slice, axis))?;
        let w2 = width(slice.name(), &c2)?;
        change = change.max((w2.fwhm - w.fwhm).abs() / w.fwhm);
        curves.push((format!("fig5_{name}"), c));
        coord.push(w);
    }
    values.push(("coordinate coincidence FWHM (xi)", Some(coord[0].fwhm)));
    values.push(("xi_plus FWHM", Some(coord[1].fwhm)));
    values.push(("xi_minus FWHM", Some(coord[2].fwhm)));
    values.push(("largest coordinate width change under L -> 2L", Some(change)));

    let epr = c_epr(w_cc.fwhm, coord[0].fwhm, EprConvention::HalfMax)?;
    values.push(("dk dx product", Some(epr.product)));
    values.push(("C_EPR", Some(epr.c_epr)));
    values.push(("C_EPR ratio", Some(epr.ratio)));
    let epr_var = named("variance EPR", variance_epr(par, &w_cc, &coord[0]))?;

    // properties
    let mut asym: f64 = 0.0;
    let mut monken: f64 = 0.0;
    for i in -20..=20 {
        for j in -20..=20 {
            let (t1, t2) = (i as f64 * 7.3e-4, j as f64 * 1.1e-3);
            asym = asym.max((amplitude(par, t1, t2) - amplitude(par, t2, t1)).abs());
            let reference = perp.pump.amplitude(0.5 * (t1 + t2))
                * crate::amplitude::sinc(perp.sinc_scale() * (t1 - t2).powi(2));
            monken = monken.max((amplitude(perp, t1, t2) - reference).abs());
        }
    }
    values.push(("amplitude exchange asymmetry", Some(asym)));
    values.push(("deviation from Monken form at np_eff = 0", Some(monken)));
    values.push(("singles quadrature vs analytic FWHM, parallel", Some((w_sq.fwhm - w_sa.fwhm).abs() / w_sa.fwhm)));

    let dg_axis = AxisSpec::symmetric(40.0, 401)?;
    let sep = schmidt_from_grid(&DoubleGaussianModel::symmetric(2.0, 2.0)?.grid(&dg_axis, &dg_axis)?, SPECTRUM_CUTOFF)?;
    values.push(("Schmidt K of a separable grid", Some(sep.k)));
    let dg = DoubleGaussianModel::symmetric(1.0, 10.0)?;
    let dg_k = schmidt_from_grid(&dg.grid(&dg_axis, &dg_axis)?, SPECTRUM_CUTOFF)?.k;
    values.push(("double-Gaussian grid K vs closed form", Some((dg_k - dg.schmidt_number()).abs() / dg.schmidt_number())));

    let perp_widths = ScenarioWidths {
        np_eff: perp.np_eff,
        validity: validity_check(perp),
        coincidence: w_cp.clone(),
        single_quadrature: w_qp.clone(),
        single_analytic: None,
        r_k: r_perp,
        coordinate: None,
        c_epr_halfmax: None,
        c_epr_variance: None,
    };
    let par_widths = ScenarioWidths {
        np_eff: par.np_eff,
        validity: v,
        coincidence: w_cc.clone(),
        single_quadrature: w_sq.clone(),
        single_analytic: Some(w_sa.clone()),
        r_k: r_par,
        coordinate: Some(CoordinateWidths {
            coincidence: coord[0].clone(),
            xi_plus: coord[1].clone(),
            xi_minus: coord[2].clone(),
        }),
        c_epr_halfmax: Some(epr),
        c_epr_variance: Some(epr_var),
    };
    let study_par = named("Schmidt parallel", schmidt_study(par, &schmidt_axis(&w_sa, &w_cc, None)?))?;
    let study_perp = named("Schmidt perp", schmidt_study(perp, &schmidt_axis(&w_qp, &w_cp, None)?))?;
    values.push(("Schmidt spectrum sum, parallel", Some(study_par.fine.total)));
    values.push(("Schmidt K change under grid refinement, parallel", Some(study_par.convergence_delta)));
    values.push(("Schmidt K change under grid refinement, perp", Some(study_perp.convergence_delta)));

    let alpha = par.pump.alpha;
    let xs = AxisSpec::symmetric(5.0 * alpha, 4001)?.samples();
    let ys = xs.iter().map(|&t| par.pump.intensity(t)).collect();
    let gauss = SampledCurve::new(xs, ys, Normalization::PeakOne, "pump intensity", "rad")?;
    values.push(("Gaussian FWHM / alpha", Some(width("pump intensity", &gauss)?.fwhm / alpha)));

    // crystals
    let mut worst: f64 = 0.0;
    for name in ["LBO", "KDP", "BBO", "LiIO3"] {
        let model = crystal::crystal(name)?;
        let o = named(name, crystal::solve_phase_matching(model, 325.0))?;
        worst = worst.max(derivative_check(model, 325.0, o.phi0)?);
        let key = CRITERIA.iter().find(|c| c.quantity.ends_with(name) && c.criterion == 9).unwrap().quantity;
        values.push((key, Some(o.np_prime)));
    }
    values.push(("dn_e/dphi vs finite difference, largest", Some(worst)));

    // experimental context
    values.push(("coincidence width ratio perp / parallel", Some(w_cp.fwhm / w_cc.fwhm)));
    values.push(("single width ratio perp / parallel", Some(w_qp.fwhm / w_sa.fwhm)));
    values.push(("R_parallel, slit-broadened pump", Some(r_par)));
    values.push(("single FWHM parallel, experiment (mrad)", Some(mrad(&w_sa))));
    values.push(("coincidence FWHM parallel, experiment (mrad)", Some(mrad(&w_cc))));
    values.push(("R_perp, lens-broadened pump", None));
    values.push(("R_parallel, lens-broadened pump", None));

    curves.push(("fig3_perp_coincidence".into(), cc_perp));
    curves.push(("fig3_perp_single_quadrature".into(), sq_perp));
    curves.push(("fig3_parallel_coincidence".into(), cc_par));
    curves.push(("fig3_parallel_single_analytic".into(), sa_par));
    curves.push(("fig3_parallel_single_quadrature".into(), sq_par));

    let entanglement = GeometryReports {
        perp: entanglement_report(perp, &perp_widths, &study_perp),
        parallel: entanglement_report(par, &par_widths, &study_par),
    };
    entanglement.perp.validate()?;
    entanglement.parallel.validate()?;
    Ok(Computation {
        values,
        curves,
        widths: GeometryWidths {
            perp: perp_widths,
            parallel: par_widths,
        },
        entanglement,
    })
}

fn lookup(values: &[(&'static str, Option<f64>)], c: &Criterion) -> Option<f64> {
    values.iter().find(|(q, _)| *q == c.quantity).and_then(|(_, v)| *v)
}

/// Computes the full table, writes `curves/*.csv`, `report.json` and
/// `provenance.json` under the output directory.
pub fn run_reproduce(cfg: &RunConfig) -> Result<ReproReport> {
    let started = SystemTime::now();
    let scenario = Scenario::from_config(cfg)?;
    let perp = scenario.geometry(GeometryPreset::Perp);
    let par = ScenarioConfig {
        np_eff: scenario.np_parallel,
        ..scenario.base
    };
    let comp = with_workers(cfg.workers, || compute(&perp, &par))??;
    let rows: Vec<ReproRow> = CRITERIA.iter().map(|c| ReproRow::judge(c, lookup(&comp.values, c))).collect();
    let report = ReproReport {
        mode: scenario.label,
        np_source: scenario.np_source,
        scenario: par,
        widths: comp.widths,
        entanglement: comp.entanglement,
        overall_pass: rows.iter().all(|r| r.status != RowStatus::Fail),
        rows,
    };
    let dir = cfg.output_dir.join("curves");
    for (name, curve) in &comp.curves {
        write_curve(&dir, name, curve)?;
    }
    write_json(&cfg.output_dir.join("report.json"), &report)?;
    write_provenance(cfg, &par, started)?;
    Ok(report)
}
