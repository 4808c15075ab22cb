use std::path::Path;
use std::process::Command;

fn hunt_lab(cfg: &str, dir: &Path, extra: &[&str]) -> (i32, String) {
    let path = dir.join("run.cfg");
    std::fs::write(&path, cfg).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hunt-lab"))
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .env("HUNT_LAB_THREADS", "2")
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

const STABLE: &str = "[process]\nform = drift\n[measure]\nfamily = stable-tail\nalpha = 0.5\n[task]\nkind = eval\n";

#[test]
fn stable_eval_csv() {
    let d = tempfile::tempdir().unwrap();
    let (code, err) = hunt_lab(STABLE, d.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(d.path().join("out/eval.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("z,re_psi,im_psi,A,B,margin"));
    let mut n = 0;
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        let re: f64 = f[1].parse().unwrap();
        let im: f64 = f[2].parse().unwrap();
        assert!((im / re - 1.0).abs() < 1e-6, "{l}");
        assert_eq!(f[5], "");
        n += 1;
    }
    assert_eq!(n, 121);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(rep["task"], "eval");
    assert_eq!(rep["exit_code"], 0);
}

#[test]
fn grid_scale_refines() {
    let d = tempfile::tempdir().unwrap();
    let (code, _) = hunt_lab(STABLE, d.path(), &["--grid-scale", "2", "--seed", "7"]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(d.path().join("out/eval.csv")).unwrap();
    assert_eq!(csv.lines().count(), 242);
    let rep = std::fs::read_to_string(d.path().join("out/report.json")).unwrap();
    assert!(rep.contains("\"seed\": 7"));
}

#[test]
fn verify_cx_toy() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "[counterexample]\nalpha = 0.75\nlevels = 3\nmode = toy\nn1 = 64\n[task]\nkind = verify-cx\n";
    let (code, err) = hunt_lab(cfg, d.path(), &[]);
    assert_eq!(code, 0, "{err}");
    for k in 1..=3 {
        let csv = std::fs::read_to_string(d.path().join(format!("out/window-{k}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 34);
        for l in csv.lines().skip(1) {
            let m: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
            assert!(m > 0.0, "{l}");
        }
    }
}

#[test]
fn rao_on_counterexample_is_violated() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "[counterexample]\nalpha = 0.75\nlevels = 3\nmode = toy\n[task]\nkind = check-rao\ngauge = log\n";
    assert_eq!(hunt_lab(cfg, d.path(), &[]).0, 1);
}

#[test]
fn full_scale_construct() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "[counterexample]\nalpha = 0.75\nlevels = 5\nmode = paper-log\n[task]\nkind = construct\n";
    let (code, err) = hunt_lab(cfg, d.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("out/report.json")).unwrap()).unwrap();
    let masses = rep["details"]["band_masses"].as_array().unwrap();
    assert_eq!(masses.len(), 5);
    // huge masses are written as strings
    assert!(masses[4].is_string());
}

#[test]
fn input_errors_exit_3_and_leave_nothing() {
    let d = tempfile::tempdir().unwrap();
    let (code, err) = hunt_lab("[task]\nkind = eval\nbogus = 1\n", d.path(), &[]);
    assert_eq!(code, 3);
    assert!(err.contains("bogus") && err.contains("line 3"), "{err}");

    // valid syntax, but the first level is too small for the energy construction
    let cfg = "[counterexample]\nalpha = 0.75\nlevels = 2\nmode = toy\nn1 = 16\n[task]\nkind = energy\n";
    let (code, _) = hunt_lab(cfg, d.path(), &[]);
    assert_eq!(code, 3);
    let out = d.path().join("out");
    assert!(!out.exists() || std::fs::read_dir(&out).unwrap().next().is_none());

    let status = Command::new(env!("CARGO_BIN_EXE_hunt-lab")).output().unwrap().status;
    assert_eq!(status.code(), Some(3));
    let status = Command::new(env!("CARGO_BIN_EXE_hunt-lab")).arg("--help").output().unwrap().status;
    assert_eq!(status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = "[counterexample]\nalpha = 0.75\nlevels = 3\nmode = toy\ntheta_toy = 11\n[task]\nkind = energy\n";
    assert_eq!(hunt_lab(cfg, a.path(), &[]).0, 0);
    assert_eq!(hunt_lab(cfg, b.path(), &[]).0, 0);
    let names = ["report.json"];
    for n in names {
        assert_eq!(
            std::fs::read(a.path().join("out").join(n)).unwrap(),
            std::fs::read(b.path().join("out").join(n)).unwrap()
        );
    }
}
