use std::fs;
use std::path::Path;

use roughwave::cli::{main_with_args, selfcheck, EXIT_OK, EXIT_VALIDATION};

const CONFIG: &str = "\
# small Burgers study
equation = burgers
numflux = godunov
hurst = 0.5
resolutions = 4, 5, 6
reference_exponent = 8
samples = 3
base_seed = 42
snapshot_times = 0.5, 1.0
";

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["roughwave"];
    full.extend_from_slice(args);
    main_with_args(full)
}

fn setup(dir: &Path, text: &str) -> String {
    let path = dir.join("study.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn selfcheck_passes() {
    let lines = selfcheck().unwrap();
    assert!(lines[0].contains("0xE220A8397B1DCDAF"));
    assert!(lines[1].contains("0x6E789E6AA1B965F4"));
    assert_eq!(run(&["selfcheck"]), EXIT_OK);
}

#[test]
fn fbm_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &CONFIG.replace("resolutions = 4, 5, 6", "resolutions = 8").replace("reference_exponent = 8", "reference_exponent = 9"));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&["fbm", "--config", &cfg, "--out", a.to_str().unwrap()]), EXIT_OK);
    assert_eq!(run(&["fbm", "--config", &cfg, "--out", b.to_str().unwrap(), "--workers", "3"]), EXIT_OK);
    let bytes = fs::read(a.join("fbm.csv")).unwrap();
    assert_eq!(bytes, fs::read(b.join("fbm.csv")).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().next().unwrap(), "study,hurst,sample,seed,k,j,x,value");
    // 3 samples × 257 points
    assert_eq!(text.lines().count(), 1 + 3 * 257);
}

#[test]
fn converge_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), CONFIG);
    let out = dir.path().join("out");
    assert_eq!(
        run(&["converge", "--config", &cfg, "--out", out.to_str().unwrap(), "--samples", "2", "--seed", "7"]),
        EXIT_OK
    );
    let text = fs::read_to_string(out.join("converge.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let rate_rows = rows.iter().filter(|r| r[2].parse::<usize>().is_ok() && r[4].is_empty()).count();
    assert_eq!(rate_rows, 2);
    assert!(rows.iter().any(|r| r[2] == "MEAN"));
    assert!(rows.iter().any(|r| r[2] == "STD"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("converge.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "converge");
    assert_eq!(manifest["base_seed"], 7);
    assert_eq!(manifest["config"]["n_samples"], 2);
    assert_eq!(manifest["sample_seeds"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn every_study_command_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), CONFIG);
    let out = dir.path().join("out");
    for cmd in ["solve", "fbm", "converge", "tvscale", "lipscale", "tvdecay", "sharpness"] {
        assert_eq!(run(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]), EXIT_OK, "{cmd}");
        assert!(out.join(format!("{cmd}.csv")).exists());
        assert!(out.join(format!("{cmd}.manifest.json")).exists());
    }
}

#[test]
fn invalid_input_exits_one_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    let bad = setup(dir.path(), &CONFIG.replace("godunov", "upwind"));
    assert_eq!(run(&["converge", "--config", &bad, "--out", o]), EXIT_VALIDATION);
    let cfg = setup(dir.path(), CONFIG);
    assert_eq!(run(&["converge", "--config", &cfg, "--out", o, "--samples", "0"]), EXIT_VALIDATION);
    assert_eq!(run(&["tvdecay", "--config", &setup(dir.path(), &CONFIG.replace("snapshot_times = 0.5, 1.0\n", "")), "--out", o]), EXIT_VALIDATION);
    assert_eq!(run(&["converge", "--config", "/nonexistent/file.cfg", "--out", o]), EXIT_VALIDATION);
    assert_eq!(run(&["frobnicate"]), EXIT_VALIDATION);
    assert!(!out.exists());
}

#[test]
fn sharpness_without_known_beta_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = setup(dir.path(), &CONFIG.replace("godunov", "rusanov"));
    assert_eq!(run(&["sharpness", "--config", &cfg, "--out", out.to_str().unwrap()]), EXIT_VALIDATION);
    assert!(!out.exists());
    let cfg = setup(dir.path(), &format!("{}beta = 0.1\n", CONFIG.replace("godunov", "rusanov")));
    assert_eq!(run(&["sharpness", "--config", &cfg, "--out", out.to_str().unwrap()]), EXIT_OK);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        roughwave::cli::parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 7);
}
