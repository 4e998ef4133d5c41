//! Parser for the line-oriented dispersion data file.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::{DispersionModel, Sellmeier, SellmeierForm};
use crate::error::{Error, Result};

/// The dispersion file shipped with the crate.
pub const BUNDLED_DATA: &str = include_str!("../../data/dispersion.txt");

#[derive(Default)]
struct Partial {
    order: usize,
    range: Option<(f64, f64)>,
    ordinary: Option<Sellmeier>,
    extraordinary: Option<Sellmeier>,
    axial: Option<Sellmeier>,
    sources: Vec<String>,
    first_line: usize,
}

/// Parses dispersion records, keeping crystals in first-appearance order.
pub fn parse_dispersion(text: &str) -> Result<Vec<DispersionModel>> {
    let mut partials: BTreeMap<String, Partial> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(raw[pos + 1..].trim())),
            None => (raw, None),
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let err = |message: String| Error::DispersionData {
            line: line_no,
            message,
        };
        if tokens.len() < 3 {
            return Err(err(format!("expected `crystal axis ...`, got `{}`", body.trim())));
        }
        let next_order = partials.len();
        let entry = partials.entry(tokens[0].to_string()).or_insert_with(|| Partial {
            order: next_order,
            first_line: line_no,
            ..Default::default()
        });

        let numbers = |toks: &[&str]| -> Result<Vec<f64>> {
            toks.iter()
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(format!("malformed coefficient `{t}`")))
                })
                .collect()
        };

        match tokens[1] {
            "range" => {
                let vals = numbers(&tokens[2..])?;
                if vals.len() != 2 || !(vals[0] > 0.0 && vals[1] > vals[0]) {
                    return Err(err("range needs two increasing positive wavelengths".into()));
                }
                if entry.range.replace((vals[0], vals[1])).is_some() {
                    return Err(err("duplicate range record".into()));
                }
            }
            axis @ ("o" | "e" | "a") => {
                let form = match tokens[2] {
                    "kato" => SellmeierForm::Kato,
                    "zernike" => SellmeierForm::Zernike,
                    "resonance" => SellmeierForm::Resonance,
                    other => return Err(err(format!("unknown Sellmeier form `{other}`"))),
                };
                let coeffs = numbers(&tokens[3..])?;
                let sellmeier = Sellmeier::new(form, coeffs).map_err(|e| err(e.to_string()))?;
                let slot = match axis {
                    "o" => &mut entry.ordinary,
                    "e" => &mut entry.extraordinary,
                    _ => &mut entry.axial,
                };
                if slot.replace(sellmeier).is_some() {
                    return Err(err(format!("duplicate `{axis}` record")));
                }
                if let Some(c) = comment.filter(|c| !c.is_empty()) {
                    if !entry.sources.iter().any(|s| s == c) {
                        entry.sources.push(c.to_string());
                    }
                }
            }
            other => return Err(err(format!("unknown axis `{other}`"))),
        }
    }

    let mut out: Vec<(usize, DispersionModel)> = Vec::with_capacity(partials.len());
    for (name, p) in partials {
        let missing = |what: &str| Error::DispersionData {
            line: p.first_line,
            message: format!("crystal `{name}` has no {what} record"),
        };
        let (min_um, max_um) = p.range.ok_or_else(|| missing("range"))?;
        let model = DispersionModel {
            ordinary: p.ordinary.ok_or_else(|| missing("`o`"))?,
            extraordinary: p.extraordinary.ok_or_else(|| missing("`e`"))?,
            axial: p.axial,
            valid_range_um: (min_um, max_um),
            sources: p.sources,
            name,
        };
        out.push((p.order, model));
    }
    out.sort_by_key(|(order, _)| *order);
    Ok(out.into_iter().map(|(_, m)| m).collect())
}

/// Crystals parsed from [`BUNDLED_DATA`].
pub fn bundled() -> &'static [DispersionModel] {
    static CATALOG: OnceLock<Vec<DispersionModel>> = OnceLock::new();
    CATALOG.get_or_init(|| parse_dispersion(BUNDLED_DATA).expect("bundled dispersion data is valid"))
}

/// Names of all bundled crystals, in file order.
pub fn list_crystals() -> Vec<&'static str> {
    bundled().iter().map(|m| m.name.as_str()).collect()
}

/// Looks up a bundled crystal by name (case-insensitive).
pub fn crystal(name: &str) -> Result<&'static DispersionModel> {
    bundled()
        .iter()
        .find(|m| m.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownCrystal(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_has_table_crystals() {
        let names = list_crystals();
        for want in ["LiIO3", "BBO", "KDP", "LBO"] {
            assert!(names.contains(&want), "{want} missing from {names:?}");
        }
        assert_eq!(names, list_crystals());
    }

    #[test]
    fn lookup_is_case_insensitive() {
        assert_eq!(crystal("liio3").unwrap().name, "LiIO3");
        assert!(matches!(crystal("quartz"), Err(Error::UnknownCrystal(_))));
    }

    #[test]
    fn sources_are_recorded() {
        assert!(crystal("BBO").unwrap().sources[0].contains("Kato"));
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let text = "X range 0.2 2.0\nX o kato 2.0 0.01 0.01 0.0\nX e kato 2.0 abc\n";
        match parse_dispersion(text) {
            Err(Error::DispersionData { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "X range 0.2 2.0\nX q kato 2.0\n";
        assert!(matches!(
            parse_dispersion(text),
            Err(Error::DispersionData { line: 2, .. })
        ));
        let text = "X range 0.2\n";
        assert!(matches!(
            parse_dispersion(text),
            Err(Error::DispersionData { line: 1, .. })
        ));
    }

    #[test]
    fn missing_axis_is_rejected() {
        let text = "\n# c\nX range 0.2 2.0\nX o kato 2.0 0.01 0.01 0.0\n";
        match parse_dispersion(text) {
            Err(Error::DispersionData { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("`e`"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_records_are_rejected() {
        let text = "X range 0.2 2.0\nX o kato 2.0 0.01 0.01\nX o kato 2.0 0.01 0.01\n";
        assert!(matches!(
            parse_dispersion(text),
            Err(Error::DispersionData { line: 3, .. })
        ));
    }
}
