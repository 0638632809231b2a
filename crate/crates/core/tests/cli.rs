use std::fs;

use marketmap::cli::{run, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
use marketmap::output::{parse_orbit_csv, parse_scan_csv, parse_sweep_csv};
use marketmap::sweep::Regime;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn call(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("marketmap").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

const STABLE_MODEL: [&str; 12] = [
    "--alpha", "1", "--c0", "1.2", "--mu", "1", "--beta-x", "1", "--beta-y", "1", "--a", "1",
];

#[test]
fn no_arguments_is_a_usage_error() {
    let o = call(&[]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("Usage"), "{}", o.stderr);
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = call(&["stability", "--gamma-typo", "3"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("--gamma-typo"));
}

#[test]
fn help_exits_cleanly() {
    let o = call(&["--help"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("sweep"));
}

#[test]
fn stability_reports_stable_coexistence() {
    let mut args = vec!["stability"];
    args.extend(STABLE_MODEL);
    let o = call(&args);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("StableCoexistence"), "{}", o.stdout);

    args.extend(["--format", "csv"]);
    let o = call(&args);
    assert!(o.stdout.starts_with("field,value\n"));
    assert!(o.stdout.contains("regime,StableCoexistence\n"));
    assert!(o.stdout.contains("private_condition,Stable\n"));
    assert!(o.stdout.contains("price_bound_ok,true\n"));
}

#[test]
fn invalid_model_parameter_is_a_usage_error() {
    let o = call(&["stability", "--alpha=-1"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("alpha"));
}

#[test]
fn fixpoint_report() {
    let mut args = vec!["fixpoint", "--format", "csv"];
    args.extend(STABLE_MODEL);
    let o = call(&args);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("coexistence_status,Positive\n"));
    assert!(o.stdout.contains("coexistence_verified,true\n"));
    assert!(o.stdout.contains("trivial_y,1.2\n"));
}

#[test]
fn degenerate_fixpoint_is_a_numeric_failure() {
    // c = 2, δy/δx = 2 puts Y* at zero
    let o = call(&["fixpoint", "--c0", "2", "--beta-y", "2"]);
    assert_eq!(o.code, EXIT_NUMERIC, "{}", o.stdout);
    assert!(o.stderr.contains("degenerate"));
}

#[test]
fn iterate_writes_orbit_csv() {
    let o = call(&["iterate", "--c0", "2", "--x0", "0.5", "--y0", "1", "--steps", "3"]);
    assert_eq!(o.code, EXIT_OK);
    let states = parse_orbit_csv(&o.stdout).unwrap();
    assert_eq!(states.len(), 4);
    assert_eq!((states[1].x, states[1].y), (0.75, 1.5));
}

#[test]
fn lyapunov_prints_one_value() {
    let o = call(&["lyapunov", "--gamma", "0.7", "--steps", "100000"]);
    assert_eq!(o.code, EXIT_OK);
    let v: f64 = o.stdout.trim().parse().unwrap();
    assert!((v - 0.8f64.ln()).abs() < 1e-3);
    let o = call(&["lyapunov", "--gamma", "0.5", "--steps", "1000"]);
    assert_eq!(o.stdout, "-inf\n");
    let o = call(&["lyapunov", "--gamma", "0.7", "--seed-z", "1.5"]);
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn cascade_prints_first_doubling_first() {
    let o = call(&["cascade", "--gamma-min", "0.7", "--gamma-max", "0.9"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let first = o.stdout.lines().next().unwrap();
    let (key, value) = first.split_once(',').unwrap();
    assert_eq!(key, "gamma_1");
    assert!((value.parse::<f64>().unwrap() - 0.75).abs() < 1e-4);
    assert!(o.stdout.lines().any(|l| l.starts_with("feigenbaum,")));
}

#[test]
fn cascade_without_bracket_is_a_numeric_failure() {
    let o = call(&["cascade", "--gamma-min", "0.6", "--gamma-max", "0.74", "--doublings", "1"]);
    assert_eq!(o.code, EXIT_NUMERIC);
    assert!(o.stderr.contains("not bracketed"));
}

#[test]
fn bifurcate_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("scan.csv");
    let svg = dir.path().join("scan.svg");
    let o = call(&[
        "bifurcate",
        "--gamma-min", "0.6",
        "--gamma-max", "0.7",
        "--steps", "3",
        "--out", csv.to_str().unwrap(),
        "--svg", svg.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.is_empty());
    let rows = parse_scan_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    // three period-1 attractors
    assert_eq!(rows.len(), 3);
    for (gamma, z) in rows {
        assert!((z - (1.0 - 1.0 / (4.0 * gamma))).abs() < 1e-6);
    }
    let doc = fs::read_to_string(&svg).unwrap();
    assert_eq!(doc.matches("<circle").count(), 3);
}

#[test]
fn sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let pgm = dir.path().join("map.pgm");
    let o = call(&[
        "sweep",
        "--c-min", "1.2",
        "--c-max", "2.5",
        "--ratio-min", "1",
        "--ratio-max", "1.5",
        "--nc", "2",
        "--nr", "2",
        "--burn-in", "1000",
        "--pgm", pgm.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let grid = parse_sweep_csv(&o.stdout).unwrap();
    assert_eq!(grid.cells.len(), 4);
    assert_eq!(grid.cell(0, 0).analytic, Regime::StableCoexistence);
    assert_eq!(grid.cell(0, 0).empirical_period, Some(1));
    let map = fs::read_to_string(&pgm).unwrap();
    assert!(map.starts_with("P2\n2 2\n255\n"));
}

#[test]
fn sweep_rejects_single_point_axes() {
    let o = call(&["sweep", "--nc", "1"]);
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn config_file_overrides_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("run.conf");
    fs::write(&good, "# short run\nlyapunov_steps = 2000\nburn_in = 100\n").unwrap();
    let o = call(&["lyapunov", "--gamma", "0.7", "--config", good.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "burn_in = 100\nspeed = 3\n").unwrap();
    let o = call(&["lyapunov", "--gamma", "0.7", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("speed"), "{}", o.stderr);
}
