//! Acceptance criteria 1-10, one PASS/FAIL line each.
//!
//! Rows listed in `KNOWN_FAILURES` are reported as FAIL and must keep
//! failing; everything else must pass. Criterion 8's FFT-oracle and
//! Parseval checks run here rather than in the report.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use biphoton::distributions::{validity_check, CoordinateSlice};
use biphoton::runner::commands::coordinate_measure;
use biphoton::runner::config::parse_config;
use biphoton::runner::{run_reproduce, ReproRow, RowStatus};

/// Rows the implementation does not reach; see README "Known deviations".
const KNOWN_FAILURES: &[&str] = &["xi_plus FWHM", "xi_minus FWHM", "n_p' BBO", "n_p' LiIO3"];

const FFT_TOLERANCE: f64 = 0.05;
const PARSEVAL_TOLERANCE: f64 = 1e-6;

struct Extra {
    name: String,
    value: f64,
    bound: f64,
}

fn criterion8_extras() -> Vec<Extra> {
    let cfg = common::reduced(0.05, -0.1436, 20.0);
    let lhs = validity_check(&cfg).lhs;
    let fft = common::fft_oracle(&cfg, 2048, 2.0 * PI / lhs / 4.0);
    let mut out = vec![Extra {
        name: "Parseval, 2048^2 FFT".into(),
        value: fft.parseval,
        bound: PARSEVAL_TOLERANCE,
    }];
    for (slice, oracle) in [
        (CoordinateSlice::Coincidence, fft.coincidence),
        (CoordinateSlice::Sum, fft.xi_plus),
        (CoordinateSlice::Difference, fft.xi_minus),
    ] {
        let quad = coordinate_measure(&cfg, slice, 801).unwrap().1.fwhm;
        out.push(Extra {
            name: format!("FFT oracle vs quadrature, {}", slice.name()),
            value: (quad - oracle).abs() / oracle,
            bound: FFT_TOLERANCE,
        });
    }
    out
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&format!("command = reproduce\nout = {}\n", dir.path().display())).unwrap();
    let report = run_reproduce(&cfg).unwrap();
    let extras = criterion8_extras();

    let mut by_criterion: BTreeMap<u8, Vec<&ReproRow>> = BTreeMap::new();
    for row in &report.rows {
        by_criterion.entry(row.criterion).or_default().push(row);
    }
    assert_eq!(by_criterion.keys().copied().collect::<Vec<_>>(), (1..=10).collect::<Vec<u8>>());

    let mut unexpected = Vec::new();
    for (criterion, rows) in &by_criterion {
        for row in rows {
            println!("    {}", row.line());
            let known = KNOWN_FAILURES.contains(&row.quantity.as_str());
            match row.status {
                RowStatus::Pass if known => unexpected.push(format!("{} now passes", row.quantity)),
                RowStatus::Fail if !known => unexpected.push(format!("{} fails", row.quantity)),
                _ => {}
            }
        }
        let mut pass = rows.iter().all(|r| r.status != RowStatus::Fail);
        if *criterion == 8 {
            for e in &extras {
                let ok = e.value <= e.bound;
                println!(
                    "    {} [ 8] {:<52} got {:.3e}  bound {:.0e}",
                    if ok { "PASS" } else { "FAIL" },
                    e.name,
                    e.value,
                    e.bound
                );
                if !ok {
                    unexpected.push(format!("{} = {}", e.name, e.value));
                }
                pass &= ok;
            }
        }
        let verdict = match (*criterion, pass) {
            (10, _) => "PASS (context rows only, not judged)".to_string(),
            (_, true) => "PASS".to_string(),
            (_, false) => {
                let failed: Vec<&str> =
                    rows.iter().filter(|r| r.status == RowStatus::Fail).map(|r| r.quantity.as_str()).collect();
                format!("FAIL ({})", failed.join(", "))
            }
        };
        println!("criterion {criterion:>2}: {verdict}");
    }
    assert!(unexpected.is_empty(), "unexpected acceptance results: {unexpected:?}");
}
