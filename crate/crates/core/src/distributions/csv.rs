//! Plain-text curve format.
//!
//! ```text
//! # <label>, <normalization>, <units>
//! axis,density
//! -1.0000000000000000e-2,3.1415926535897931e-1
//! ```

use std::fmt::Write as _;

use super::{Normalization, SampledCurve};
use crate::error::{Error, Result};

/// Significant digits written per value; enough for a bit-exact round trip.
pub const CURVE_CSV_DIGITS: usize = 17;

const COLUMNS: &str = "axis,density";

fn check_field(what: &str, value: &str) -> Result<()> {
    if value.contains([',', '\n', '\r']) {
        return Err(Error::InvalidParameter(format!(
            "curve {what} `{value}` may not contain commas or line breaks"
        )));
    }
    Ok(())
}

/// Serializes `curve`. Output depends only on the curve contents.
pub fn write_curve_csv(curve: &SampledCurve) -> Result<String> {
    check_field("label", &curve.label)?;
    check_field("units", &curve.units)?;
    let mut out = String::with_capacity(48 * curve.axis.len() + 64);
    let _ = writeln!(out, "# {}, {}, {}", curve.label, curve.normalization.as_str(), curve.units);
    out.push_str(COLUMNS);
    out.push('\n');
    for (x, y) in curve.axis.iter().zip(&curve.density) {
        let _ = writeln!(out, "{:.*e},{:.*e}", CURVE_CSV_DIGITS - 1, x, CURVE_CSV_DIGITS - 1, y);
    }
    Ok(out)
}

/// Parses the output of [`write_curve_csv`] without rescaling.
pub fn read_curve_csv(text: &str) -> Result<SampledCurve> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let err = |line: usize, message: String| Error::Csv { line, message };

    let (n, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let meta = header
        .strip_prefix("# ")
        .ok_or_else(|| err(n, "expected `# label, normalization, units`".into()))?;
    let fields: Vec<&str> = meta.split(", ").collect();
    if fields.len() != 3 {
        return Err(err(n, format!("expected 3 header fields, got {}", fields.len())));
    }
    let normalization =
        Normalization::parse(fields[1]).ok_or_else(|| err(n, format!("unknown normalization `{}`", fields[1])))?;

    match lines.next() {
        Some((_, COLUMNS)) => {}
        Some((n, other)) => return Err(err(n, format!("expected `{COLUMNS}`, got `{other}`"))),
        None => return Err(err(2, "missing column header".into())),
    }

    let mut axis = Vec::new();
    let mut density = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (a, d) = line.split_once(',').ok_or_else(|| err(n, format!("expected `x,y`, got `{line}`")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(n, format!("malformed number `{s}`")))
        };
        let (x, y) = (parse(a)?, parse(d)?);
        if y < 0.0 {
            return Err(err(n, format!("negative density {y}")));
        }
        if axis.last().is_some_and(|&prev| !(x > prev)) {
            return Err(err(n, "axis not strictly increasing".into()));
        }
        axis.push(x);
        density.push(y);
    }
    if axis.len() < 2 {
        return Err(err(2, "need at least two samples".into()));
    }
    Ok(SampledCurve::from_parts(
        axis,
        density,
        normalization,
        fields[0].to_string(),
        fields[2].to_string(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_rows() {
        let c = SampledCurve::new(vec![-1.0, 0.5], vec![0.25, 1.0], Normalization::PeakOne, "demo", "rad").unwrap();
        let text = write_curve_csv(&c).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# demo, peak_one, rad"));
        assert_eq!(lines.next(), Some("axis,density"));
        assert_eq!(lines.next(), Some("-1.0000000000000000e0,2.5000000000000000e-1"));
        assert_eq!(read_curve_csv(&text).unwrap(), c);
    }

    #[test]
    fn reader_reports_line_numbers() {
        let bad = "# a, peak_one, rad\naxis,density\n0,1\n1,x\n";
        assert!(matches!(read_curve_csv(bad), Err(Error::Csv { line: 4, .. })));
        let bad = "# a, weird, rad\naxis,density\n0,1\n1,2\n";
        assert!(matches!(read_curve_csv(bad), Err(Error::Csv { line: 1, .. })));
        let bad = "# a, peak_one, rad\naxis,density\n1,1\n0,2\n";
        assert!(matches!(read_curve_csv(bad), Err(Error::Csv { line: 4, .. })));
    }

    #[test]
    fn commas_in_label_are_rejected() {
        let c = SampledCurve::new(vec![0.0, 1.0], vec![1.0, 0.5], Normalization::PeakOne, "a,b", "rad").unwrap();
        assert!(write_curve_csv(&c).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            start in -1e3f64..1e3,
            steps in proptest::collection::vec(1e-12f64..10.0, 1..40),
            values in proptest::collection::vec(0.0f64..1e6, 40),
            unit_area in any::<bool>(),
        ) {
            let mut axis = vec![start];
            for s in &steps {
                let next = axis.last().unwrap() + s;
                prop_assume!(next > *axis.last().unwrap());
                axis.push(next);
            }
            let mut density: Vec<f64> = values[..axis.len()].to_vec();
            density[0] += 1.0;
            let norm = if unit_area { Normalization::UnitArea } else { Normalization::PeakOne };
            let c = SampledCurve::new(axis, density, norm, "prop", "xi").unwrap();
            let back = read_curve_csv(&write_curve_csv(&c).unwrap()).unwrap();
            prop_assert_eq!(back.axis.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), c.axis.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(back.density.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), c.density.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(back, c);
        }
    }
}
