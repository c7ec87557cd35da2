use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn busrmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_busrmt")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("busrmt-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

const SMALL_LINE: [&str; 12] = [
    "--route-len", "40", "--buses", "10", "--site", "15", "--replicates", "30", "--s-grid", "0.5,1", "--checks", "false",
];

#[test]
fn missing_seed_fails_at_config_stage() {
    let dir = scratch("noseed");
    let o = busrmt(&["simulate-line", "--out", dir.to_str().unwrap(), "--replicates", "2"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("stage `config`"), "{}", stderr(&o));
    assert!(!dir.exists());
}

#[test]
fn invalid_site_names_the_constraint() {
    let dir = scratch("badsite");
    let o = busrmt(&[
        "simulate-line", "--seed", "1", "--route-len", "10", "--buses", "3", "--site", "20", "--out", dir.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("stage `config`") && err.contains("1 <= x <= N - n + 1"), "{err}");
    assert_eq!(err.matches("site x must satisfy").count(), 1, "{err}");
}

#[test]
fn same_seed_gives_identical_csv_bodies() {
    let runs: Vec<Vec<(String, Vec<u8>)>> = [("a", false), ("b", false), ("c", true)]
        .iter()
        .map(|&(name, sequential)| {
            let dir = scratch(&format!("det-{name}"));
            let mut args = vec!["simulate-line", "--seed", "17", "--out", dir.to_str().unwrap(), "--trajectories"];
            args.extend(SMALL_LINE);
            if sequential {
                args.push("--sequential");
            }
            let o = busrmt(&args);
            assert!(o.status.success(), "{}", stderr(&o));
            let files = csv_files(&dir);
            let _ = fs::remove_dir_all(&dir);
            files
        })
        .collect();
    assert_eq!(runs[0].len(), 4);
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn circle_command_is_deterministic() {
    let runs: Vec<Vec<(String, Vec<u8>)>> = ["a", "b"]
        .iter()
        .map(|name| {
            let dir = scratch(&format!("circle-{name}"));
            let o = busrmt(&[
                "simulate-circle", "--seed", "4", "--circle-sites", "6", "--time", "0.7", "--replicates", "20000", "--out",
                dir.to_str().unwrap(),
            ]);
            assert!(o.status.success(), "{}", stderr(&o));
            assert!(stdout(&o).contains("circle_tv"));
            let files = csv_files(&dir);
            let _ = fs::remove_dir_all(&dir);
            files
        })
        .collect();
    assert_eq!(runs[0].len(), 2);
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn spacing_command_writes_only_spacing() {
    let dir = scratch("spacing");
    let mut args = vec!["spacing", "--seed", "2", "--out", dir.to_str().unwrap()];
    args.extend(SMALL_LINE);
    let o = busrmt(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.join("spacing.csv").exists());
    assert!(!dir.join("number_variance.csv").exists());
    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("input_hash="));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn gap_prob_prints_a_probability() {
    let o = busrmt(&["gap-prob", "--route-len", "12", "--buses", "3", "--site", "6", "--from", "0.375", "--to", "0.625"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p: f64 = stdout(&o).trim().parse().unwrap();
    assert!((p - 0.168_958_778_692_091_8).abs() < 1e-12, "{p}");
    let o = busrmt(&["gap-prob", "--route-len", "12", "--buses", "3", "--site", "6", "--from", "0.7", "--to", "0.2"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("stage `config`"));
}

#[test]
fn reference_writes_csv() {
    let o = busrmt(&["reference", "--method", "surmise", "--points", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,value,method");
    assert_eq!(lines.len(), 4);
    let value: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    let s: f64 = 1.5;
    let want = 32.0 / std::f64::consts::PI.powi(2) * s * s * (-4.0 * s * s / std::f64::consts::PI).exp();
    assert!((value - want).abs() < 1e-14);
    assert!(!busrmt(&["reference", "--method", "nope"]).status.success());
}

#[test]
fn equilibrium_reports_symmetric_endpoints() {
    let o = busrmt(&["equilibrium", "--nu", "0.3333333333333333", "--eta", "0.3333333333333333"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let get = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("{key}=")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("b") - 3f64.sqrt() / 2.0).abs() < 1e-10);
    assert!((get("mass") - 1.0).abs() < 1e-8);
    assert!(!busrmt(&["equilibrium", "--nu", "0.6", "--eta", "0.6"]).status.success());
}

#[test]
fn multitime_check_passes() {
    let o = busrmt(&["multitime-check"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("max_abs_deviation="));
}
