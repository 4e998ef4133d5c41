use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use biphoton::error::{Error, Result};
use biphoton::runner::{
    self, exit_code, parse_entries, resolve, Command, RowStatus, RunConfig, EXIT_PASS, EXIT_ROW_FAILED,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Curves,
    Widths,
    Schmidt,
    Sweep,
    Crystal,
    Reproduce,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Geometry {
    Perp,
    Parallel,
}

/// Biphoton amplitudes, distributions and entanglement metrics for
/// type-I SPDC in uniaxial crystals.
#[derive(Debug, Parser)]
#[command(name = "biphoton", version, allow_negative_numbers = true)]
struct Cli {
    /// What to compute; may instead come from `command = ...` in the config file.
    command: Option<Cmd>,
    /// `key = value` config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    geometry: Option<Geometry>,
    /// Explicit anisotropy parameter (excludes --geometry).
    #[arg(long)]
    np_eff: Option<String>,
    /// Pump divergence FWHM in mrad.
    #[arg(long)]
    alpha_mrad: Option<String>,
    /// Crystal length in cm.
    #[arg(long = "L-cm")]
    l_cm: Option<String>,
    /// Pump wavelength in nm.
    #[arg(long)]
    lambda_nm: Option<String>,
    #[arg(long)]
    crystal: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<String>,
    /// Take n_p' from the dispersion data instead of the reference value.
    #[arg(long)]
    from_dispersion: bool,
    /// Any other config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Cli {
    fn flags(&self) -> Result<Vec<(&'static str, String, &'static str)>> {
        let mut flags = Vec::new();
        if let Some(c) = self.command {
            let name = match c {
                Cmd::Curves => Command::Curves,
                Cmd::Widths => Command::Widths,
                Cmd::Schmidt => Command::Schmidt,
                Cmd::Sweep => Command::Sweep,
                Cmd::Crystal => Command::Crystal,
                Cmd::Reproduce => Command::Reproduce,
            };
            flags.push(("command", name.as_str().to_string(), "command"));
        }
        if let Some(g) = self.geometry {
            let v = match g {
                Geometry::Perp => "perp",
                Geometry::Parallel => "parallel",
            };
            flags.push(("geometry", v.to_string(), "--geometry"));
        }
        for (key, value, flag) in [
            ("np_eff", &self.np_eff, "--np-eff"),
            ("alpha_mrad", &self.alpha_mrad, "--alpha-mrad"),
            ("L_cm", &self.l_cm, "--L-cm"),
            ("lambda_nm", &self.lambda_nm, "--lambda-nm"),
            ("crystal", &self.crystal, "--crystal"),
            ("out", &self.out, "--out"),
            ("workers", &self.workers, "--workers"),
        ] {
            if let Some(v) = value {
                flags.push((key, v.clone(), flag));
            }
        }
        if self.from_dispersion {
            flags.push(("from_dispersion", "true".to_string(), "--from-dispersion"));
        }
        for item in &self.set {
            let (k, v) = item.split_once('=').ok_or_else(|| Error::Config {
                location: "--set".into(),
                message: format!("expected KEY=VALUE, got `{item}`"),
            })?;
            let key = runner::config::KEYS
                .iter()
                .find(|known| **known == k.trim())
                .ok_or_else(|| Error::Config {
                    location: "--set".into(),
                    message: format!("unknown key `{}`", k.trim()),
                })?;
            flags.push((key, v.trim().to_string(), "--set"));
        }
        Ok(flags)
    }

    fn config(&self) -> Result<RunConfig> {
        let entries = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
                    location: path.display().to_string(),
                    message: e.to_string(),
                })?;
                parse_entries(&text).map_err(|e| match e {
                    Error::Config { location, message } => Error::Config {
                        location: format!("{}: {location}", path.display()),
                        message,
                    },
                    e => e,
                })?
            }
            None => Default::default(),
        };
        resolve(entries, &self.flags()?)
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable output"));
}

fn run(cfg: &RunConfig) -> Result<i32> {
    match cfg.command {
        Command::Curves => {
            for name in runner::run_curves(cfg)? {
                println!("{}", cfg.output_dir.join("curves").join(format!("{name}.csv")).display());
            }
        }
        Command::Widths => print_json(&runner::run_widths(cfg)?),
        Command::Schmidt => print_json(&runner::run_schmidt(cfg)?),
        Command::Crystal => {
            for row in runner::run_crystal(cfg)? {
                match (&row.optics, &row.error) {
                    (Some(o), _) => println!(
                        "{:<6} phi0 {:>8.4} deg  n_p' {:>+9.5}  n_o(2 lambda) {:.5}  derivative check {:.1e}",
                        row.crystal,
                        o.phi0_degrees(),
                        o.np_prime,
                        o.n_o_signal,
                        row.derivative_check.unwrap_or(f64::NAN)
                    ),
                    (None, Some(e)) => println!("{:<6} {e}", row.crystal),
                    (None, None) => {}
                }
            }
        }
        Command::Sweep => {
            let rows = runner::run_sweep(cfg)?;
            print!("{}", runner::sweep::sweep_csv(cfg.sweep.parameter, &rows));
        }
        Command::Reproduce => {
            let report = runner::run_reproduce(cfg)?;
            println!(
                "mode: {}",
                serde_json::to_string(&report.mode).expect("label").trim_matches('"')
            );
            for row in &report.rows {
                println!("{}", row.line());
            }
            let failed = report.rows.iter().filter(|r| r.status == RowStatus::Fail).count();
            println!("{failed} of {} judged rows failed", report.rows.iter().filter(|r| r.status != RowStatus::Context).count());
            if !report.overall_pass {
                return Ok(EXIT_ROW_FAILED);
            }
        }
    }
    Ok(EXIT_PASS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = cli.config().and_then(|cfg| run(&cfg));
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
