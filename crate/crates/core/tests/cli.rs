use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use biphoton::runner::config::parse_config;
use biphoton::runner::repro::criteria_markdown;
use biphoton::runner::{EXIT_CONFIG, EXIT_PASS, EXIT_ROW_FAILED};
use proptest::prelude::*;

fn biphoton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biphoton")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");

    fs::write(&cfg, "command = widths\nbogus = 1\n").unwrap();
    let out = biphoton(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_CONFIG);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let out = biphoton(&["--geometry", "perp"]);
    assert_eq!(code(&out), EXIT_CONFIG);
    assert!(stderr(&out).contains("command"));

    let out = biphoton(&["widths", "--geometry", "perp", "--np-eff", "-0.1"]);
    assert_eq!(code(&out), EXIT_CONFIG);

    let out = biphoton(&["widths", "--L-cm", "-1"]);
    assert_eq!(code(&out), EXIT_CONFIG);

    let out = biphoton(&["widths", "--crystal", "quartz"]);
    assert_eq!(code(&out), EXIT_CONFIG);

    let out = biphoton(&["widths", "--set", "nonsense=3"]);
    assert_eq!(code(&out), EXIT_CONFIG);
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "provenance.json" {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn outputs_are_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (k, workers) in ["1", "2", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        for cmd in ["curves", "widths", "crystal"] {
            let o = biphoton(&[cmd, "--geometry", "parallel", "--out", out.to_str().unwrap(), "--workers", workers]);
            assert_eq!(code(&o), EXIT_PASS, "{cmd}: {}", stderr(&o));
        }
        assert!(out.join("provenance.json").exists());
        runs.push(read_outputs(&out));
    }
    assert!(runs[0].len() >= 8, "{:?}", runs[0].iter().map(|f| &f.0).collect::<Vec<_>>());
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn sweep_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = biphoton(&[
        "sweep",
        "--geometry",
        "parallel",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "sweep_parameter=alpha",
        "--set",
        "sweep_values=2, 8",
        "--set",
        "schmidt_points=401",
    ]);
    assert_eq!(code(&out), EXIT_PASS, "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("alpha,coincidence_fwhm"));
    assert_eq!(String::from_utf8_lossy(&out.stdout), csv);
}

#[test]
fn reproduce_reports_failed_rows_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = biphoton(&["reproduce", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), EXIT_ROW_FAILED, "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("mode: reproduction"));
    assert!(stdout.contains("R_parallel"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["overall_pass"], false);
    assert!(dir.path().join("curves/fig2_sinc_np_full.csv").exists());
}

#[test]
fn readme_embeds_the_criteria_table() {
    let readme = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    let section = readme.split("## Acceptance criteria").nth(1).expect("acceptance section");
    assert!(section.contains(&criteria_markdown()), "README table is stale");
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![0.01f64..100.0, Just(1.5), Just(4.114), Just(0.1 + 0.2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(
        length in number(),
        lambda in 200.0f64..1200.0,
        alpha in number(),
        np in prop::option::of(-0.5f64..0.5),
        parallel in any::<bool>(),
        dispersion in any::<bool>(),
        workers in 0usize..16,
        points in prop::option::of(101usize..5000),
        values in prop::option::of(prop::collection::vec(0.001f64..1.0, 2..6)),
    ) {
        let mut text = format!("command = widths\nL_cm = {length}\nlambda_nm = {lambda}\nalpha_mrad = {alpha}\n");
        match np {
            Some(np) => text += &format!("np_eff = {np}\n"),
            None => text += if parallel { "geometry = parallel\n" } else { "geometry = perp\n" },
        }
        text += &format!("from_dispersion = {dispersion}\nworkers = {workers}\n");
        if let Some(n) = points {
            text += &format!("schmidt_points = {n}\nmomentum_points = {n}\n");
        }
        if let Some(mut v) = values {
            let mut acc = 0.0;
            for x in v.iter_mut() {
                acc += *x;
                *x = acc;
            }
            let joined: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            text += &format!("sweep_parameter = alpha\nsweep_values = {}\n", joined.join(", "));
        }
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_config_text()).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.to_config_text(), cfg.to_config_text());
    }
}
