use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn selfaffine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfaffine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn classify_opposite_reals() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "d.cfg", "block real k=-9/10\nblock real k=9/10\n");
    let r = report(&selfaffine(&["--config", p(&cfg), "classify"]));
    assert_eq!(r["verdicts"]["uniqueness"], "FiniteNonEmpty");
    assert_eq!(r["results"]["beta"]["exact"], "100/81");
    let beta = r["results"]["beta"]["decimal"].as_f64().unwrap();
    assert!((beta - 1.2346).abs() < 1e-4);
    assert_eq!(r["mode"], "exact");
}

#[test]
fn classify_jordan_block() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "j.cfg", "block jordan k=1/2 size=2\n");
    let r = report(&selfaffine(&["--config", p(&cfg), "classify"]));
    assert_eq!(r["verdicts"]["uniqueness"], "PositiveHausdorffDim");
    assert_eq!(r["results"]["rule"], "Jordan");
}

#[test]
fn malformed_config_names_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "bad.cfg", "block real k=1/2\ncolour blue\n");
    let out = selfaffine(&["--config", p(&cfg), "classify"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`colour`") && err.contains("line 2"), "{err}");

    let cfg = config(&dir, "bad2.cfg", "block rotation r=1/2 angle=pi\n");
    let out = selfaffine(&["--config", p(&cfg), "classify"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`angle`"));
}

#[test]
fn missing_system_is_a_usage_error() {
    let out = selfaffine(&["classify"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn constants_meet_the_requested_width() {
    let r = report(&selfaffine(&["constants", "--precision", "1e-8"]));
    let lo = r["constants"]["beta_star"]["lo"].as_f64().unwrap();
    let hi = r["constants"]["beta_star"]["hi"].as_f64().unwrap();
    assert!(hi - lo <= 1e-8);
    assert!(lo <= 1.7872316501829 && 1.7872316501830 <= hi);
    assert!(r["constants"]["thue_morse_prefix"].as_str().unwrap().starts_with("01101001"));
}

#[test]
fn constants_below_float_floor_use_exact_text() {
    let r = report(&selfaffine(&["constants", "--precision", "1e-20"]));
    assert_eq!(r["mode"], "exact");
    let lo = r["constants"]["beta_star"]["lo"].as_str().unwrap();
    assert!(lo.starts_with("1.78723165018296"), "{lo}");
}

#[test]
fn unique_counts_for_four_fifths() {
    let out = selfaffine(&["--lambda", "4/5", "unique", "--length", "10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,N_n,undetermined"));
    let counts: Vec<(usize, u64)> = lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[0].parse().unwrap(), cells[1].parse().unwrap())
        })
        .collect();
    assert_eq!(counts, (1..=10).map(|n| (n, 2)).collect::<Vec<_>>());
}

#[test]
fn unique_address_certification() {
    let r = report(&selfaffine(&["--lambda", "2/5", "unique", "--address", "+-(+)"]));
    assert_eq!(r["verdicts"]["certification"], "unique_certified");

    let r = report(&selfaffine(&["--lambda", "1/2", "unique", "--address", "+(-)"]));
    assert_eq!(r["verdicts"]["certification"], "collision_found");
    assert!(r["results"]["witness"]["address"].is_string());
}

#[test]
fn render_depth_one_cylinders_lights_two_pixels() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "d.cfg", "block real k=-9/10\nblock real k=9/10\n");
    let img = dir.path().join("out.pgm");
    let r = report(&selfaffine(&[
        "--config", p(&cfg), "--depth", "1", "--output", p(&img), "render", "--method", "cylinders",
    ]));
    let bytes = std::fs::read(&img).unwrap();
    let header = b"P5\n512 512\n255\n";
    assert!(bytes.starts_with(header));
    let lit = bytes[header.len()..].iter().filter(|&&b| b == 255).count();
    assert_eq!(lit, 2);
    assert_eq!(r["artifacts"][0]["bytes"].as_u64().unwrap() as usize, bytes.len());
}

#[test]
fn pgm_needs_an_output_file() {
    let out = selfaffine(&["--lambda", "1/2", "render"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn chaos_csv_is_deterministic() {
    let args = ["--lambda", "3/5", "--seed", "7", "--format", "csv", "render", "--points", "500"];
    let a = selfaffine(&args);
    let b = selfaffine(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 500);
}

#[test]
fn strict_turns_unknown_into_exit_two() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "s.cfg", "block real k=-3/5\nblock real k=3/5\n");
    let out = selfaffine(&["--config", p(&cfg), "connectivity"]);
    assert_eq!(out.status.code(), Some(0));
    let out = selfaffine(&["--config", p(&cfg), "--strict", "connectivity"]);
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["undecided"][0], "connectivity");
}

#[test]
fn echoed_config_reproduces_the_verdicts() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "r.cfg",
        "# two blocks\nblock rotation r=0.9 angle=1/3pi\nblock real k=-4/5\n",
    );
    let first = report(&selfaffine(&["--config", p(&cfg), "classify"]));
    let echoed = config(&dir, "echo.cfg", first["echo"]["config"].as_str().unwrap());
    let second = report(&selfaffine(&["--config", p(&echoed), "classify"]));
    assert_eq!(first["verdicts"], second["verdicts"]);
    assert_eq!(first["results"], second["results"]);
}

#[test]
fn json_report_goes_to_the_output_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("report.json");
    let out = selfaffine(&["--lambda", "2/3", "--output", p(&path), "interior"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(r["verdicts"]["interior"], "NonEmptyByTheorem");
}

#[test]
fn decompose_check_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "m.cfg", "row 0 -1/2\nrow 1/2 0\nu 1 0\n");
    let r = report(&selfaffine(&["--config", p(&cfg), "decompose-check"]));
    assert_eq!(r["verdicts"]["decomposition"], "Equal");
    assert_eq!(r["results"]["check"]["exact"], true);
}

#[test]
fn projection_of_a_periodic_address() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "m.cfg", "row 0 -1/2\nrow 1/2 0\nu 1 0\n");
    let r = report(&selfaffine(&["--config", p(&cfg), "project", "--address", "(+-)"]));
    assert_eq!(r["results"]["limit"]["exact"], serde_json::json!(["4/5", "-2/5"]));
}
