use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_fractal-spectra");

fn run(args: &[&str]) -> i32 {
    let out = Command::new(BIN).args(args).output().unwrap();
    out.status.code().unwrap()
}

fn snowflake(dir: &Path) -> i32 {
    run(&["snowflake", "--level", "2", "--refine", "1", "-k", "6", "--out", dir.to_str().unwrap()])
}

fn check_csv(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'), "{path:?} has CR");
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.chars().next().unwrap().is_ascii_alphabetic(), "{path:?} header {header}");
    let cols = header.split(',').count();
    for l in lines {
        assert_eq!(l.split(',').count(), cols, "{path:?}: {l}");
    }
}

#[test]
fn snowflake_runs_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(snowflake(&a), 0);
    assert_eq!(snowflake(&b), 0);
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "spectrum.csv"));
    for n in &names {
        if n == "metadata.json" {
            continue;
        }
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n:?}");
        if n.to_str().unwrap().ends_with(".csv") {
            check_csv(&a.join(n));
        }
    }
    // rerun into the same directory
    let meta = fs::read(a.join("metadata.json")).unwrap();
    assert_eq!(snowflake(&a), 0);
    assert_eq!(meta, fs::read(a.join("metadata.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&meta).unwrap();
    assert_eq!(v["config"]["command"], "snowflake");
    assert!(v["outputs"].as_array().unwrap().iter().any(|f| f == "counting.csv"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(run(&["snowflake", "--level", "99", "--out", out]), 2);
    assert_eq!(run(&["snowflake", "--bogus"]), 2);
    assert_eq!(run(&["julia", "--c", "1+nan", "--out", out]), 2);
    assert_eq!(run(&["snowflake", "--level", "8", "--refine", "4", "--out", out]), 4);
    assert_eq!(run(&["--help"]), 0);
}

#[test]
fn julia_area_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    let code = run(&["julia", "--c", "0.2", "--area-only", "--resolution", "64", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    check_csv(&out.join("area.csv"));
    assert!(out.join("filled.pgm").exists());
    assert!(!out.join("spectrum.csv").exists());
}

#[test]
fn boxdim_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = tmp.path().join("sweep");
    let code = run(&[
        "boxdim", "--julia-sweep", "--re=-1.0:0.5:0", "--im", "0", "--resolutions", "160",
        "--out", sweep.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    check_csv(&sweep.join("sweep.csv"));
    assert_eq!(fs::read_to_string(sweep.join("sweep.csv")).unwrap().lines().count(), 4);

    let seg = tmp.path().join("seg");
    assert_eq!(run(&["boxdim", "--segment", "--out", seg.to_str().unwrap()]), 0);
    let fit = fs::read_to_string(seg.join("fit.csv")).unwrap();
    let d: f64 = fit.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((d - 1.0).abs() < 0.05, "{d}");
}
