//! End-to-end checks of the command-line surface: flag parsing, file
//! formats, exit codes, and byte-level reproducibility of reports.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pathvar")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn pathvar")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pathvar-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn make_bm(path: &Path, steps: u32, seed: u32) {
    let out = run(&[
        "fbm",
        "--hurst",
        "0.5",
        "--steps",
        &steps.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn fbm_writes_expected_row_count() {
    let csv = tmp("fbm.csv");
    make_bm(&csv, 256, 7);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x1");
    assert_eq!(lines.len(), 1 + 257, "header plus steps+1 samples");
    // deterministic for a fixed seed
    let csv2 = tmp("fbm2.csv");
    make_bm(&csv2, 256, 7);
    assert_eq!(text, std::fs::read_to_string(&csv2).unwrap());
}

#[test]
fn variation_report_is_reproducible_modulo_timestamp() {
    let csv = tmp("var-in.csv");
    make_bm(&csv, 4096, 3);
    let out1 = tmp("var1.json");
    let out2 = tmp("var2.json");
    for out in [&out1, &out2] {
        let r = run(&[
            "variation",
            "--path",
            csv.to_str().unwrap(),
            "--p",
            "2",
            "--scheme",
            "uniform",
            "--levels",
            "3:8",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let mut a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out1).unwrap()).unwrap();
    let mut b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out2).unwrap()).unwrap();
    assert_eq!(a["content_hash"], b["content_hash"]);
    a.as_object_mut().unwrap().remove("generated_unix_ms");
    b.as_object_mut().unwrap().remove("generated_unix_ms");
    assert_eq!(a.to_string(), b.to_string());
    // report shape
    assert_eq!(a["config"]["command"], "variation");
    assert_eq!(a["body"]["p"], 2);
    assert_eq!(a["body"]["levels"].as_array().unwrap().len(), 6);
    assert!(a["body"]["diagnostics"]["cauchy"].is_array());
}

#[test]
fn tanaka_residual_is_machine_zero() {
    let csv = tmp("tanaka-in.csv");
    make_bm(&csv, 16384, 11);
    let out = run(&[
        "tanaka",
        "--path",
        csv.to_str().unwrap(),
        "--p",
        "2",
        "--f",
        "ramp:a=0",
        "--level",
        "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value: f64 = stdout
        .split(':')
        .next_back()
        .unwrap()
        .trim()
        .parse()
        .unwrap_or_else(|_| panic!("unparseable residual in `{stdout}`"));
    assert!(value.abs() < 1e-9, "residual {value}");
}

#[test]
fn localtime_csv_and_json_outputs() {
    let csv = tmp("lt-in.csv");
    make_bm(&csv, 8192, 5);
    let grid_csv = tmp("lt.csv");
    let r = run(&[
        "localtime",
        "--path",
        csv.to_str().unwrap(),
        "--p",
        "2",
        "--level",
        "3",
        "--flavor",
        "occupation",
        "--out",
        grid_csv.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let text = std::fs::read_to_string(&grid_csv).unwrap();
    assert!(text.starts_with("x,L\n"));

    let grid_json = tmp("lt.json");
    let r = run(&[
        "localtime",
        "--path",
        csv.to_str().unwrap(),
        "--p",
        "2",
        "--level",
        "3",
        "--flavor",
        "upcrossing",
        "--relaxed",
        "--out",
        grid_json.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&grid_json).unwrap()).unwrap();
    assert_eq!(v["body"]["pairings"].as_array().unwrap().len(), 5);
}

#[test]
fn oddp_and_roughpath_reports() {
    let csv = tmp("mix-in.csv");
    make_bm(&csv, 8192, 9);
    let o = tmp("odd.json");
    let r = run(&[
        "oddp", "--path", csv.to_str().unwrap(), "--p", "3", "--levels", "2:4", "--out",
        o.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&o).unwrap()).unwrap();
    assert_eq!(v["body"]["diagnostics"].as_array().unwrap().len(), 3);

    let c = tmp("chen.json");
    let r = run(&[
        "roughpath-chen",
        "--path",
        csv.to_str().unwrap(),
        "--p",
        "2",
        "--level",
        "8",
        "--triples",
        "32",
        "--out",
        c.to_str().unwrap(),
    ]);
    assert!(r.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&c).unwrap()).unwrap();
    assert_eq!(v["body"]["pass"], true);

    let e = tmp("equiv.json");
    let r = run(&[
        "equivalence",
        "--path",
        csv.to_str().unwrap(),
        "--f",
        "monomial:m=2",
        "--p",
        "2",
        "--levels",
        "4:8",
        "--lift-level",
        "10",
        "--out",
        e.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&e).unwrap()).unwrap();
    let gaps = v["body"]["gaps"].as_array().unwrap();
    assert_eq!(gaps.len(), 5);
}

#[test]
fn exit_codes_classify_failures() {
    // unknown flag: clap validation, exit 2
    let r = run(&["variation", "--nope"]);
    assert_eq!(r.status.code(), Some(2));

    // invalid Hurst index: our validation, exit 2
    let bad = run(&[
        "fbm", "--hurst", "1.5", "--steps", "16", "--out",
        tmp("never.csv").to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(2));

    // resolution guard on a coarse path: numerical failure, exit 1
    let csv = tmp("guard-in.csv");
    make_bm(&csv, 64, 2);
    let guard = run(&[
        "variation",
        "--path",
        csv.to_str().unwrap(),
        "--p",
        "2",
        "--scheme",
        "lebesgue",
        "--levels",
        "9:10",
        "--out",
        tmp("never2.json").to_str().unwrap(),
    ]);
    assert_eq!(guard.status.code(), Some(1), "{}", String::from_utf8_lossy(&guard.stderr));

    // same command with --relaxed succeeds and flags the levels
    let relaxed = run(&[
        "variation",
        "--path",
        csv.to_str().unwrap(),
        "--p",
        "2",
        "--scheme",
        "lebesgue",
        "--levels",
        "9:10",
        "--relaxed",
        "--out",
        tmp("relaxed.json").to_str().unwrap(),
    ]);
    assert!(relaxed.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp("relaxed.json")).unwrap()).unwrap();
    assert_eq!(v["body"]["levels"][0]["resolved"], false);

    // malformed CSV rejected with exit 2
    let broken = tmp("broken.csv");
    std::fs::write(&broken, "t,x1\n0,0\n0.1,1\n0.35,2\n").unwrap();
    let r = run(&[
        "variation", "--path", broken.to_str().unwrap(), "--p", "2", "--levels", "2:3",
    ]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn functional_and_decompose_smoke() {
    let csv = tmp("func-in.csv");
    make_bm(&csv, 8192, 21);
    let f = tmp("func.json");
    let r = run(&[
        "functional",
        "--path",
        csv.to_str().unwrap(),
        "--functional",
        "y2",
        "--p",
        "2",
        "--levels",
        "4:9",
        "--out",
        f.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    // residual at the horizon telescopes for the squared endpoint
    let levels = v["body"]["levels"].as_array().unwrap();
    let last = levels.last().unwrap();
    let residuals = last["residuals"].as_array().unwrap();
    let r_final = residuals.last().unwrap().as_f64().unwrap();
    assert!(r_final.abs() < 1e-10, "residual {r_final}");

    let d = tmp("dec.json");
    let r = run(&[
        "decompose",
        "--path",
        csv.to_str().unwrap(),
        "--functional",
        "terms:1,0,2,0",
        "--p",
        "2",
        "--levels",
        "6:9",
        "--out",
        d.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&d).unwrap()).unwrap();
    assert_eq!(v["body"]["variation_strictly_increasing"], true);
}
