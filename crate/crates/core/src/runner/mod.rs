//! Run harness: configuration, scenario assembly, commands and outputs.

pub mod commands;
pub mod config;
pub mod repro;
pub mod sweep;

pub use commands::{run_crystal, run_curves, run_schmidt, run_widths};
pub use config::{parse_config, parse_entries, resolve, Command, GeometryPreset, RunConfig, SweepParameter};
pub use repro::{run_reproduce, Check, Criterion, ReproReport, ReproRow, RowStatus, CRITERIA};
pub use sweep::{run_sweep, SweepRow};

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::amplitude::{AxisSpec, PumpProfile, ScenarioConfig};
use crate::crystal::{self, CrystalOptics};
use crate::distributions::{fwhm, write_curve_csv, PeakSelection, SampledCurve, WidthReport};
use crate::error::{Error, Result};

/// `n_p'` of LiIO3 at 325 nm used for every reference number.
pub const TEXT_NP_PRIME: f64 = -0.1436;

pub const REFERENCE_CRYSTAL: &str = "LiIO3";
pub const REFERENCE_LAMBDA_NM: f64 = 325.0;
pub const REFERENCE_L_CM: f64 = 1.5;
pub const REFERENCE_ALPHA_MRAD: f64 = 4.114;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ROW_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Config { .. }
        | Error::UnknownCrystal(_)
        | Error::InvalidParameter(_)
        | Error::InvalidAxis(_)
        | Error::DispersionData { .. }
        | Error::Csv { .. }
        | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Detector offset `F tan(theta)` in the focal plane of a lens.
pub fn detector_position(theta: f64, focal_length_cm: f64) -> f64 {
    focal_length_cm * theta.tan()
}

/// Inverse of [`detector_position`].
pub fn detector_angle(position_cm: f64, focal_length_cm: f64) -> f64 {
    (position_cm / focal_length_cm).atan()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunLabel {
    Reproduction,
    Prediction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NpSource {
    /// [`TEXT_NP_PRIME`].
    Pinned,
    Dispersion,
    Explicit,
}

/// Physical setup derived from a [`RunConfig`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub crystal: String,
    pub optics: Option<CrystalOptics>,
    pub n_o: f64,
    /// `np_eff` of the parallel geometry (or the explicit value).
    pub np_parallel: f64,
    pub np_source: NpSource,
    pub label: RunLabel,
    pub base: ScenarioConfig,
}

impl Scenario {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let model = crystal::crystal(&cfg.crystal)?;
        let n_o = model.index_ordinary(2.0 * cfg.lambda_nm)?;
        let pinnable = cfg.crystal == REFERENCE_CRYSTAL && cfg.lambda_nm == REFERENCE_LAMBDA_NM;
        let optics = crystal::solve_phase_matching(model, cfg.lambda_nm);
        let (np, source, optics) = match (cfg.np_eff, pinnable && !cfg.from_dispersion) {
            (Some(v), _) => (v, NpSource::Explicit, optics.ok()),
            (None, true) => (TEXT_NP_PRIME, NpSource::Pinned, optics.ok()),
            (None, false) => {
                let o = optics?;
                (o.np_prime, NpSource::Dispersion, Some(o))
            }
        };
        let label = if source == NpSource::Pinned
            && cfg.length_cm == REFERENCE_L_CM
            && cfg.alpha_mrad == REFERENCE_ALPHA_MRAD
        {
            RunLabel::Reproduction
        } else {
            RunLabel::Prediction
        };
        let base = ScenarioConfig::new(cfg.length_cm, cfg.lambda_nm, n_o, np, PumpProfile::gaussian(cfg.alpha_rad())?)?;
        Ok(Self {
            crystal: cfg.crystal.clone(),
            optics,
            n_o,
            np_parallel: np,
            np_source: source,
            label,
            base,
        })
    }

    pub fn geometry(&self, g: GeometryPreset) -> ScenarioConfig {
        let np = match g {
            GeometryPreset::Perp => 0.0,
            GeometryPreset::Parallel => self.np_parallel,
        };
        ScenarioConfig { np_eff: np, ..self.base }
    }

    /// The scenario a single-geometry command works on: the explicit
    /// `np_eff`, else the preset, else parallel.
    pub fn selected(&self, cfg: &RunConfig) -> ScenarioConfig {
        match (cfg.np_eff, cfg.geometry) {
            (Some(_), _) => self.base,
            (None, Some(g)) => self.geometry(g),
            (None, None) => self.geometry(GeometryPreset::Parallel),
        }
    }
}

/// Runs `f` on a pool with `workers` threads (0 = all cores).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Axis of `points` samples over `center +- half`.
pub(crate) fn around(center: f64, half: f64, points: usize) -> Result<AxisSpec> {
    AxisSpec::new(center - half, center + half, points)
}

/// Samples a curve on `axis`, widening on truncation and zooming in on
/// under-resolved peaks until the nearest-zero peak spans at least
/// `min_steps` samples; then resamples over `+-4 FWHM` with `points`.
pub(crate) fn measure(
    mut axis: AxisSpec,
    points: usize,
    build: impl Fn(&AxisSpec) -> Result<SampledCurve>,
) -> Result<(SampledCurve, WidthReport)> {
    const MIN_STEPS: f64 = 16.0;
    for _ in 0..16 {
        let curve = build(&axis)?;
        match fwhm(&curve, PeakSelection::NearestZero) {
            Ok(w) if w.fwhm >= MIN_STEPS * axis.step() => {
                let final_axis = around(w.peak_location, 4.0 * w.fwhm, points)?;
                let curve = build(&final_axis)?;
                let w = fwhm(&curve, PeakSelection::NearestZero)?;
                return Ok((curve, w));
            }
            // +-4 FWHM at MIN_STEPS samples per FWHM needs 8 MIN_STEPS + 1 points
            Ok(w) => axis = around(w.peak_location, 4.0 * w.fwhm, axis.points.max(129))?,
            Err(Error::Truncated(_)) => {
                let center = 0.5 * (axis.start + axis.end);
                axis = around(center, 2.0 * (axis.end - axis.start), axis.points)?;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidAxis("could not bracket the peak within 16 axis adjustments".into()))
}

pub(crate) fn write_curve(dir: &Path, name: &str, curve: &SampledCurve) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{name}.csv")), write_curve_csv(curve)?)?;
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Run-variant data, kept out of the deterministic outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: String,
    pub version: &'static str,
    pub workers: usize,
    pub threads_used: usize,
    pub started_unix_seconds: u64,
    pub elapsed_seconds: f64,
    pub scenario_hash: String,
}

pub(crate) fn write_provenance(cfg: &RunConfig, scenario: &ScenarioConfig, started: std::time::SystemTime) -> Result<()> {
    let threads_used = with_workers(cfg.workers, rayon::current_num_threads)?;
    let p = Provenance {
        command: cfg.command.as_str().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        workers: cfg.workers,
        threads_used,
        started_unix_seconds: started
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        elapsed_seconds: started.elapsed().map(|d| d.as_secs_f64()).unwrap_or(0.0),
        scenario_hash: crate::entanglement::scenario_hash(scenario),
    };
    write_json(&cfg.output_dir.join("provenance.json"), &p)
}
