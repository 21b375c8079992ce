use std::fs;
use std::process::Command;

use torus_cli::commands::{verify_exit_code, CheckResult};
use torus_cli::{run, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
use torus_spectral::sampling::{random_grid_field, rng};
use torus_spectral::transform::forward;
use torus_spectral::{GridField, SpectralField, TorusGrid};

fn torus(args: &[&str]) -> i32 {
    run(std::iter::once("torus").chain(args.iter().copied()))
}

fn output_of(args: &[&str]) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out");
    let path_str = path.to_str().unwrap().to_string();
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--output", &path_str]);
    let code = torus(&full);
    (code, fs::read_to_string(&path).unwrap_or_default())
}

#[test]
fn spectrum_rows_for_small_cap() {
    let (code, csv) = output_of(&["spectrum", "--dimension", "2", "--level-cap", "2"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "operator,eigenvalue,multiplicity");
    assert_eq!(&lines[1..4], ["laplacian,0,1", "laplacian,1,4", "laplacian,2,4"]);
    assert_eq!(lines[4], "resolvent,1,1");

    let (code, csv) = output_of(&["spectrum", "--level-cap", "0"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(csv.lines().nth(1), Some("laplacian,0,1"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn spectrum_json_parses() {
    let (code, text) = output_of(&["spectrum", "--level-cap", "5", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["laplacian"]["levels"][1]["multiplicity"], 4);
    assert_eq!(v["resolvent"]["operator"], "resolvent");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(torus(&["bench"]), EXIT_USAGE);
    assert_eq!(torus(&["verify", "--points", "8", "--seed", "1"]), EXIT_USAGE);
    assert_eq!(torus(&["verify", "--points", "1", "--seed", "1"]), EXIT_USAGE);
    assert_eq!(torus(&["spectrum", "--dimension", "4", "--level-cap", "2"]), EXIT_USAGE);
    assert_eq!(torus(&["spectrum"]), EXIT_USAGE);
    assert_eq!(torus(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(torus(&["truncate", "--seed", "1"]), EXIT_USAGE);
    assert_eq!(torus(&["embed-demo", "--seed", "1", "--epsilon", "-1"]), EXIT_USAGE);
    assert_eq!(torus(&["bench", "--seed", "1", "--repetitions", "0"]), EXIT_USAGE);
    assert_eq!(torus(&["solve", "--input", "/nonexistent/field.json"]), EXIT_USAGE);
}

#[test]
fn truncate_box_too_small_names_radius() {
    let exe = env!("CARGO_BIN_EXE_torus");
    let out = Command::new(exe)
        .args(["truncate", "--truncation", "3", "--points", "9", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("radius 5"), "{msg}");
}

#[test]
fn truncate_table_matches_closed_form() {
    let (code, csv) = output_of(&[
        "truncate", "--truncation", "3", "--points", "11", "--seed", "4",
    ]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][1], 0.5);
    assert!((rows[3][1] - 1.0 / 17.0).abs() < 1e-15);
    assert!(rows.iter().all(|r| r[3] <= 1e-8));
}

#[test]
fn truncate_euclidean_geometry() {
    let (code, text) = output_of(&[
        "truncate", "--truncation", "1", "--points", "7", "--seed", "4", "--norm", "euclidean",
        "--format", "json",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    // (1,1) lies outside the unit disc, so the gap is 1/(1+2)
    let exact = v["rows"][1]["exact_error"].as_f64().unwrap();
    assert!((exact - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(v["norm"], "euclidean");
}

#[test]
fn verify_defaults_pass() {
    assert_eq!(torus(&["verify", "--seed", "1"]), EXIT_OK);
    let exe = env!("CARGO_BIN_EXE_torus");
    let out = Command::new(exe).args(["verify", "--seed", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 4);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn failed_check_maps_to_exit_one() {
    let ok = CheckResult {
        name: "plancherel",
        passed: true,
        detail: String::new(),
    };
    let broken = CheckResult {
        name: "eigenpairs",
        passed: false,
        detail: "injected".into(),
    };
    assert_eq!(verify_exit_code(std::slice::from_ref(&ok)), EXIT_OK);
    assert_eq!(verify_exit_code(&[ok, broken.clone()]), EXIT_CHECK_FAILED);
    assert!(broken.line().starts_with("FAIL eigenpairs"));
}

#[test]
fn transform_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let grid = TorusGrid::new(2, 5).unwrap();
    let u = random_grid_field(grid, &mut rng(8));
    let grid_path = dir.path().join("u.json");
    let spec_path = dir.path().join("c.json");
    let back_path = dir.path().join("u2.json");
    fs::write(&grid_path, u.to_json()).unwrap();

    let p = |x: &std::path::Path| x.to_str().unwrap().to_string();
    let (g, s, b) = (p(&grid_path), p(&spec_path), p(&back_path));
    assert_eq!(torus(&["transform", "--input", &g, "--output", &s]), EXIT_OK);
    let c = SpectralField::from_json(&fs::read_to_string(&spec_path).unwrap()).unwrap();
    assert!(c.max_abs_diff(&forward(&u).unwrap()).unwrap() < 1e-14);

    assert_eq!(torus(&["transform", "--input", &s, "--output", &b]), EXIT_OK);
    let back = GridField::from_json(&fs::read_to_string(&back_path).unwrap()).unwrap();
    assert!(back.max_abs_diff(&u).unwrap() < 1e-12);
}

#[test]
fn transform_csv_has_frequency_columns() {
    let (code, csv) = output_of(&[
        "transform", "--dimension", "1", "--points", "5", "--seed", "2", "--format", "csv",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "xi_1,re,im");
    assert!(lines[1].starts_with("-2,"));
    assert_eq!(lines.len(), 6);
}

#[test]
fn solve_outputs() {
    let (code, text) = output_of(&["solve", "--seed", "3"]);
    assert_eq!(code, EXIT_OK);
    let u = GridField::from_json(&text).unwrap();
    assert_eq!(u.grid().len(), 81);

    let (code, csv) = output_of(&["solve", "--seed", "3", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(csv.lines().next(), Some("method,residual_l2,iterations,wall_time"));
    assert!(csv.lines().nth(2).unwrap().starts_with("cg,"));
}

#[test]
fn bench_csv_header() {
    let (code, csv) = output_of(&["bench", "--seed", "5", "--repetitions", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        csv.lines().next(),
        Some("method,n,M,seed,median_seconds,residual_l2,iterations")
    );
    assert!(csv.lines().nth(1).unwrap().starts_with("multiplier,2,9,5,"));
}

#[test]
fn embed_demo_needs_resolution() {
    // ε = 0.5 with H¹ bound 1 needs N = 7; M = 9 only reaches 4
    assert_eq!(torus(&["embed-demo", "--seed", "1"]), EXIT_USAGE);
    let (code, csv) = output_of(&["embed-demo", "--dimension", "1", "--points", "33", "--seed", "1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(csv.lines().next(), Some("N,tail_lhs,tail_rhs"));
    assert_eq!(csv.lines().count(), 1 + 17);
}

#[test]
fn identical_configs_give_identical_files() {
    let args = ["truncate", "--truncation", "2", "--seed", "11", "--format", "json"];
    let (c1, a) = output_of(&args);
    let (c2, b) = output_of(&args);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
}
