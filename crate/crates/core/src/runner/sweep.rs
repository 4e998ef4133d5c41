//! Parameter sweeps over `np_eff`, the pump divergence or the crystal length.

use std::fmt::Write as _;
use std::fs;
use std::time::SystemTime;

use rayon::prelude::*;
use serde::Serialize;

use super::commands::{coordinate_measure, schmidt_axis, DEFAULT_COORDINATE_POINTS, DEFAULT_MOMENTUM_POINTS};
use super::{measure, with_workers, write_provenance, RunConfig, Scenario, SweepParameter};
use crate::amplitude::{amplitude_grid, AxisSpec, ScenarioConfig};
use crate::distributions::{
    coincidence_curve, single_particle_analytic, single_particle_quadrature, validity_check, CoordinateSlice,
    IntegrationSpec,
};
use crate::entanglement::{c_epr, schmidt_from_grid, EprConvention, SPECTRUM_CUTOFF};
use crate::error::Result;

/// One sweep step. Widths in rad (momentum) or `xi` (coordinate); failed
/// quantities are NaN and explained in `reason`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub coincidence_fwhm: f64,
    pub single_fwhm: f64,
    /// `analytic` when the delta approximation holds, else `quadrature`.
    pub single_method: &'static str,
    pub r_k: f64,
    pub c_epr_ratio: f64,
    pub schmidt_k: f64,
    pub xi_coincidence: f64,
    pub xi_plus: f64,
    pub xi_minus: f64,
    pub reason: String,
}

fn scenario_at(base: &ScenarioConfig, parameter: SweepParameter, value: f64) -> Result<ScenarioConfig> {
    match parameter {
        SweepParameter::NpEff => base.with_np_eff(value),
        SweepParameter::Alpha => base.with_alpha(value * 1e-3),
        SweepParameter::L => base.with_length(value),
    }
}

fn step(base: &ScenarioConfig, cfg: &RunConfig, value: f64) -> SweepRow {
    let nan = f64::NAN;
    let mut row = SweepRow {
        parameter: value,
        coincidence_fwhm: nan,
        single_fwhm: nan,
        single_method: "quadrature",
        r_k: nan,
        c_epr_ratio: nan,
        schmidt_k: nan,
        xi_coincidence: nan,
        xi_plus: nan,
        xi_minus: nan,
        reason: String::new(),
    };
    let mut reasons: Vec<String> = Vec::new();
    let sc = match scenario_at(base, cfg.sweep.parameter, value) {
        Ok(sc) => sc,
        Err(e) => {
            row.reason = format!("scenario: {e}");
            return row;
        }
    };
    let mp = cfg.grid.momentum_points.unwrap_or(DEFAULT_MOMENTUM_POINTS);
    let cp = cfg.grid.coordinate_points.unwrap_or(DEFAULT_COORDINATE_POINTS);
    let guess = match AxisSpec::symmetric(8.0 * sc.pump.alpha, 401) {
        Ok(a) => a,
        Err(e) => {
            row.reason = format!("axis: {e}");
            return row;
        }
    };
    let valid = validity_check(&sc).valid;

    let coinc = measure(guess, mp, |a| coincidence_curve(&sc, 0.0, a)).map(|(_, w)| w);
    let single = if valid {
        row.single_method = "analytic";
        measure(guess, mp, |a| single_particle_analytic(&sc, a))
    } else {
        measure(guess, mp, |a| single_particle_quadrature(&sc, a, &IntegrationSpec::default()))
    }
    .map(|(_, w)| w);

    match &coinc {
        Ok(w) => row.coincidence_fwhm = w.fwhm,
        Err(e) => reasons.push(format!("coincidence: {e}")),
    }
    match &single {
        Ok(w) => row.single_fwhm = w.fwhm,
        Err(e) => reasons.push(format!("single: {e}")),
    }
    if let (Ok(c), Ok(s)) = (&coinc, &single) {
        row.r_k = s.fwhm / c.fwhm;
        match schmidt_axis(s, c, cfg.grid.schmidt_points)
            .and_then(|axis| amplitude_grid(&sc, &axis, &axis))
            .and_then(|g| schmidt_from_grid(&g, SPECTRUM_CUTOFF))
        {
            Ok(d) => row.schmidt_k = d.k,
            Err(e) => reasons.push(format!("schmidt: {e}")),
        }
    }

    if valid {
        let mut xi = [nan; 3];
        for (k, slice) in [CoordinateSlice::Coincidence, CoordinateSlice::Sum, CoordinateSlice::Difference]
            .into_iter()
            .enumerate()
        {
            match coordinate_measure(&sc, slice, cp) {
                Ok((_, w)) => xi[k] = w.fwhm,
                Err(e) => reasons.push(format!("{}: {e}", slice.name())),
            }
        }
        [row.xi_coincidence, row.xi_plus, row.xi_minus] = xi;
        if let Ok(c) = &coinc {
            match c_epr(c.fwhm, row.xi_coincidence, EprConvention::HalfMax) {
                Ok(e) => row.c_epr_ratio = e.ratio,
                Err(e) => reasons.push(format!("C_EPR: {e}")),
            }
        }
    } else {
        reasons.push("coordinate widths and C_EPR: delta approximation invalid".into());
    }
    row.reason = reasons.join("; ").replace(',', ";");
    row
}

/// Runs every sweep step (in parallel, collected in order).
pub fn sweep_rows(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let base = Scenario::from_config(cfg)?.selected(cfg);
    let values = cfg.sweep.points();
    with_workers(cfg.workers, || values.par_iter().map(|&v| step(&base, cfg, v)).collect())
}

/// CSV text of a sweep; the first column is named after the parameter.
pub fn sweep_csv(parameter: SweepParameter, rows: &[SweepRow]) -> String {
    let mut out = format!(
        "{},coincidence_fwhm,single_fwhm,single_method,r_k,c_epr_ratio,schmidt_k,xi_coincidence,xi_plus,xi_minus,reason\n",
        parameter.as_str()
    );
    let f = |x: f64| if x.is_nan() { "NaN".to_string() } else { format!("{x:.16e}") };
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            f(r.parameter),
            f(r.coincidence_fwhm),
            f(r.single_fwhm),
            r.single_method,
            f(r.r_k),
            f(r.c_epr_ratio),
            f(r.schmidt_k),
            f(r.xi_coincidence),
            f(r.xi_plus),
            f(r.xi_minus),
            r.reason
        );
    }
    out
}

/// Runs the sweep and writes `sweep.csv` and `provenance.json`.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let started = SystemTime::now();
    let rows = sweep_rows(cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("sweep.csv"), sweep_csv(cfg.sweep.parameter, &rows))?;
    let base = Scenario::from_config(cfg)?.selected(cfg);
    write_provenance(cfg, &base, started)?;
    Ok(rows)
}
