//! Line-oriented `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crystal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Curves,
    Widths,
    Schmidt,
    Sweep,
    Crystal,
    Reproduce,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Curves,
        Command::Widths,
        Command::Schmidt,
        Command::Sweep,
        Command::Crystal,
        Command::Reproduce,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Curves => "curves",
            Command::Widths => "widths",
            Command::Schmidt => "schmidt",
            Command::Sweep => "sweep",
            Command::Crystal => "crystal",
            Command::Reproduce => "reproduce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryPreset {
    Perp,
    Parallel,
}

impl GeometryPreset {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeometryPreset::Perp => "perp",
            GeometryPreset::Parallel => "parallel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    NpEff,
    Alpha,
    L,
}

impl SweepParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParameter::NpEff => "np_eff",
            SweepParameter::Alpha => "alpha",
            SweepParameter::L => "L",
        }
    }
}

fn parse_keyword<T: Copy>(options: &[(&str, T)], value: &str) -> Option<T> {
    options.iter().find(|(name, _)| *name == value).map(|&(_, v)| v)
}

impl FromStr for Command {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Command::ALL.iter().copied().find(|c| c.as_str() == s).ok_or(())
    }
}

impl FromStr for GeometryPreset {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        parse_keyword(&[("perp", GeometryPreset::Perp), ("parallel", GeometryPreset::Parallel)], s).ok_or(())
    }
}

impl FromStr for SweepParameter {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        parse_keyword(
            &[
                ("np_eff", SweepParameter::NpEff),
                ("alpha", SweepParameter::Alpha),
                ("L", SweepParameter::L),
            ],
            s,
        )
        .ok_or(())
    }
}

/// Parameter values visited by a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
    /// Explicit values; when set, replaces the linear range.
    pub values: Option<Vec<f64>>,
}

impl SweepSpec {
    /// Sweep values in the units of the config keys (`alpha` in mrad, `L` in cm).
    pub fn points(&self) -> Vec<f64> {
        match &self.values {
            Some(v) => v.clone(),
            None => (0..self.steps)
                .map(|i| self.start + (self.end - self.start) * i as f64 / (self.steps - 1) as f64)
                .collect(),
        }
    }
}

/// Optional grid sizes; `None` selects the automatic choice.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOverrides {
    pub momentum_points: Option<usize>,
    pub coordinate_points: Option<usize>,
    pub schmidt_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub length_cm: f64,
    pub lambda_nm: f64,
    pub alpha_mrad: f64,
    pub crystal: String,
    pub geometry: Option<GeometryPreset>,
    /// Explicit `np_eff`; excludes `geometry`.
    pub np_eff: Option<f64>,
    pub from_dispersion: bool,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub focal_length_cm: f64,
    pub grid: GridOverrides,
    pub sweep: SweepSpec,
}

/// Raw values with the place they came from (`line N` or `--flag`).
pub type Entries = BTreeMap<String, (String, String)>;

pub const KEYS: &[&str] = &[
    "command",
    "L_cm",
    "lambda_nm",
    "alpha_mrad",
    "crystal",
    "geometry",
    "np_eff",
    "from_dispersion",
    "out",
    "workers",
    "focal_length_cm",
    "momentum_points",
    "coordinate_points",
    "schmidt_points",
    "sweep_parameter",
    "sweep_start",
    "sweep_end",
    "sweep_steps",
    "sweep_values",
];

fn config_error(location: &str, message: impl Into<String>) -> Error {
    Error::Config {
        location: location.to_string(),
        message: message.into(),
    }
}

/// Splits config text into entries, rejecting unknown and repeated keys.
pub fn parse_entries(text: &str) -> Result<Entries> {
    let mut out = Entries::new();
    for (i, raw) in text.lines().enumerate() {
        let location = format!("line {}", i + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_error(&location, format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(config_error(&location, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(config_error(&location, format!("missing value for `{key}`")));
        }
        if let Some((_, first)) = out.get(key) {
            return Err(config_error(&location, format!("`{key}` already set on {first}")));
        }
        out.insert(key.to_string(), (value.to_string(), location));
    }
    Ok(out)
}

struct Reader {
    entries: Entries,
}

impl Reader {
    fn raw(&self, key: &str) -> Option<(&str, &str)> {
        self.entries.get(key).map(|(v, l)| (v.as_str(), l.as_str()))
    }

    fn parsed<T: FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, loc)) => v
                .parse()
                .map(Some)
                .map_err(|_| config_error(loc, format!("`{key}`: expected {what}, got `{v}`"))),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parsed(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(config_error(self.raw(key).unwrap().1, format!("`{key}` must be finite"))),
            _ => Ok(v),
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.number(key)?.unwrap_or(default);
        if v > 0.0 {
            Ok(v)
        } else {
            let loc = self.raw(key).map(|r| r.1).unwrap_or("default");
            Err(config_error(loc, format!("`{key}` must be positive, got {v}")))
        }
    }

    fn count(&self, key: &str, min: usize) -> Result<Option<usize>> {
        let v: Option<usize> = self.parsed(key, "a non-negative integer")?;
        match v {
            Some(n) if n < min => Err(config_error(
                self.raw(key).unwrap().1,
                format!("`{key}` must be at least {min}, got {n}"),
            )),
            _ => Ok(v),
        }
    }
}

/// Parses a config file with no command-line overrides.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    resolve(parse_entries(text)?, &[])
}

/// Merges file entries with flag overrides (flags win) and validates.
/// Each flag is `(key, value, flag name)`.
pub fn resolve(mut entries: Entries, flags: &[(&str, String, &str)]) -> Result<RunConfig> {
    for (key, value, flag) in flags {
        if !KEYS.contains(key) {
            return Err(config_error(flag, format!("unknown key `{key}`")));
        }
        entries.insert(key.to_string(), (value.clone(), flag.to_string()));
    }
    let r = Reader { entries };

    let command = r
        .parsed::<Command>("command", "one of curves, widths, schmidt, sweep, crystal, reproduce")?
        .ok_or_else(|| config_error("command", "missing required key `command`"))?;
    let crystal_name = r.raw("crystal").map(|(v, _)| v.to_string()).unwrap_or_else(|| "LiIO3".into());
    if crystal::crystal(&crystal_name).is_err() {
        return Err(config_error(
            r.raw("crystal").map(|x| x.1).unwrap_or("crystal"),
            format!("unknown crystal `{crystal_name}`; bundled: {}", crystal::list_crystals().join(", ")),
        ));
    }
    let geometry = r.parsed::<GeometryPreset>("geometry", "perp or parallel")?;
    let np_eff = r.number("np_eff")?;
    if geometry.is_some() && np_eff.is_some() {
        return Err(config_error(
            r.raw("np_eff").unwrap().1,
            "`geometry` and `np_eff` are mutually exclusive",
        ));
    }

    let parameter = r
        .parsed::<SweepParameter>("sweep_parameter", "np_eff, alpha or L")?
        .unwrap_or(SweepParameter::NpEff);
    let values = match r.raw("sweep_values") {
        None => None,
        Some((v, loc)) => {
            let xs = v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| config_error(loc, format!("`sweep_values`: expected comma-separated numbers, got `{v}`")))?;
            let increasing = xs.windows(2).all(|w| w[1] > w[0]);
            let decreasing = xs.windows(2).all(|w| w[1] < w[0]);
            if xs.len() < 2 || !(increasing || decreasing) || xs.iter().any(|x| !x.is_finite()) {
                return Err(config_error(loc, "`sweep_values` needs at least two finite, strictly monotone values"));
            }
            Some(xs)
        }
    };
    let sweep = SweepSpec {
        parameter,
        start: r.number("sweep_start")?.unwrap_or(0.0),
        end: r.number("sweep_end")?.unwrap_or(-0.1436),
        steps: r.count("sweep_steps", 2)?.unwrap_or(3),
        values,
    };
    if sweep.values.is_none() && sweep.start == sweep.end {
        return Err(config_error("sweep_start", "sweep range is empty"));
    }

    Ok(RunConfig {
        command,
        length_cm: r.positive("L_cm", 1.5)?,
        lambda_nm: r.positive("lambda_nm", 325.0)?,
        alpha_mrad: r.positive("alpha_mrad", 4.114)?,
        crystal: crystal_name,
        geometry,
        np_eff,
        from_dispersion: r.parsed("from_dispersion", "true or false")?.unwrap_or(false),
        output_dir: r.raw("out").map(|(v, _)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("out")),
        workers: r.count("workers", 0)?.unwrap_or(0),
        focal_length_cm: r.positive("focal_length_cm", 62.0)?,
        grid: GridOverrides {
            momentum_points: r.count("momentum_points", 3)?,
            coordinate_points: r.count("coordinate_points", 3)?,
            schmidt_points: r.count("schmidt_points", 3)?,
        },
        sweep,
    })
}

impl RunConfig {
    /// Config text that parses back to `self`.
    pub fn to_config_text(&self) -> String {
        let mut lines = vec![
            format!("command = {}", self.command.as_str()),
            format!("L_cm = {:?}", self.length_cm),
            format!("lambda_nm = {:?}", self.lambda_nm),
            format!("alpha_mrad = {:?}", self.alpha_mrad),
            format!("crystal = {}", self.crystal),
        ];
        if let Some(g) = self.geometry {
            lines.push(format!("geometry = {}", g.as_str()));
        }
        if let Some(np) = self.np_eff {
            lines.push(format!("np_eff = {np:?}"));
        }
        lines.push(format!("from_dispersion = {}", self.from_dispersion));
        lines.push(format!("out = {}", self.output_dir.display()));
        lines.push(format!("workers = {}", self.workers));
        lines.push(format!("focal_length_cm = {:?}", self.focal_length_cm));
        for (key, v) in [
            ("momentum_points", self.grid.momentum_points),
            ("coordinate_points", self.grid.coordinate_points),
            ("schmidt_points", self.grid.schmidt_points),
        ] {
            if let Some(n) = v {
                lines.push(format!("{key} = {n}"));
            }
        }
        lines.push(format!("sweep_parameter = {}", self.sweep.parameter.as_str()));
        lines.push(format!("sweep_start = {:?}", self.sweep.start));
        lines.push(format!("sweep_end = {:?}", self.sweep.end));
        lines.push(format!("sweep_steps = {}", self.sweep.steps));
        if let Some(v) = &self.sweep.values {
            let joined: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
            lines.push(format!("sweep_values = {}", joined.join(", ")));
        }
        lines.join("\n") + "\n"
    }

    pub fn alpha_rad(&self) -> f64 {
        self.alpha_mrad * 1e-3
    }
}
