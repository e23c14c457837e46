use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reccone::instances::{epigraph, full_line_shadow, halfplane_shadow, psd_cone_2x2};
use reccone::io::{parse_result, write_instance, InstanceFile};
use serde_json::Value;
use tempfile::TempDir;

fn reccone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reccone"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn put(dir: &TempDir, name: &str, f: &InstanceFile) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, write_instance(f)).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn psd2(dir: &TempDir) -> PathBuf {
    let f = InstanceFile::from_shadow(&psd_cone_2x2().as_shadow());
    put(dir, "psd2.json", &f)
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

#[test]
fn spectra_on_psd_cone_writes_valid_result() {
    let dir = TempDir::new().unwrap();
    let inst = psd2(&dir);
    let out = dir.path().join("out.json");
    let o = reccone(&[
        "approx-spectra",
        "--instance",
        s(&inst),
        "--eps",
        "0.1",
        "--output",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty(), "results go to the output file only");
    let r = parse_result(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(r.algorithm, "spectra");
    assert!(!r.partial);
    assert!(r.certificate_met);
    assert!(r.epsilon_certified <= 0.1);
    assert_eq!(r.assumption_report["C1"], "pass");
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let inst = psd2(&dir);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = reccone(&[
            "approx-spectra",
            "--instance",
            s(&inst),
            "--eps",
            "0.2",
            "--seed",
            "3",
            "--output",
            s(&out),
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn shadow_without_direction_is_input_error() {
    let dir = TempDir::new().unwrap();
    let inst = put(
        &dir,
        "epi.json",
        &InstanceFile::from_shadow(&epigraph().as_shadow()),
    );
    let o = reccone(&["approx-shadow", "--instance", s(&inst), "--eps", "0.1"]);
    assert_eq!(code(&o), 4);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("recession_interior_direction"));
}

#[test]
fn epigraph_fails_strict_feasibility_gate() {
    let dir = TempDir::new().unwrap();
    let inst = put(
        &dir,
        "epi.json",
        &InstanceFile::from_shadow(&epigraph().as_shadow()),
    );
    let o = reccone(&["approx-spectra", "--instance", s(&inst), "--eps", "0.1"]);
    assert_eq!(code(&o), 2);
    let report = json_of(&o.stdout);
    assert_eq!(report["violation"]["assumption"], "C2");
    assert_eq!(report["assumption_report"]["C2"], "fail");
}

#[test]
fn check_reports_full_space_shadow() {
    let dir = TempDir::new().unwrap();
    let case = full_line_shadow();
    let mut f = InstanceFile::from_shadow(&case.shadow);
    f.interior_point = Some(case.interior_point);
    f.lift_witness = Some(case.lift_witness);
    f.recession_interior_direction = Some(case.recession_interior_direction);
    let inst = put(&dir, "fullspace.json", &f);
    let o = reccone(&["check", "--instance", s(&inst)]);
    assert_eq!(code(&o), 2);
    let report = json_of(&o.stdout);
    assert_eq!(report["violation"]["assumption"], "S1");
    assert_eq!(report["assumption_report"]["S1"], "fail");
}

#[test]
fn check_accepts_halfplane_shadow() {
    let dir = TempDir::new().unwrap();
    let case = halfplane_shadow();
    let mut f = InstanceFile::from_shadow(&case.shadow);
    f.interior_point = Some(case.interior_point);
    f.lift_witness = Some(case.lift_witness);
    f.recession_interior_direction = Some(case.recession_interior_direction);
    let inst = put(&dir, "halfplane.json", &f);
    let o = reccone(&["check", "--instance", s(&inst)]);
    assert_eq!(code(&o), 0);
    let report = json_of(&o.stdout);
    assert_eq!(report["status"], "ok");
    assert_eq!(report["assumption_report"]["S1_closed"], "unverified");
}

#[test]
fn nonpositive_eps_rejected_before_reading_instance() {
    for eps in ["0", "-0.5", "nan", "inf"] {
        let o = reccone(&["approx-spectra", "--instance", "/nonexistent", "--eps", eps]);
        assert_eq!(code(&o), 4, "eps {eps}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("--eps"));
    }
}

#[test]
fn malformed_invocations_exit_4() {
    assert_eq!(code(&reccone(&[])), 4);
    assert_eq!(code(&reccone(&["frobnicate"])), 4);
    assert_eq!(code(&reccone(&["approx-spectra", "--eps", "0.1"])), 4);
    assert_eq!(code(&reccone(&["gen", "--family", "soc", "--n", "1"])), 4);
    assert_eq!(code(&reccone(&["--help"])), 0);
}

#[test]
fn malformed_instance_exit_4() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, b"{\"n\": 2, \"m\": 0}").unwrap();
    let o = reccone(&["approx-spectra", "--instance", s(&p), "--eps", "0.1"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn iteration_limit_writes_partial_result() {
    let dir = TempDir::new().unwrap();
    let gen = dir.path().join("soc.json");
    let o = reccone(&[
        "gen",
        "--family",
        "soc",
        "--n",
        "3",
        "--seed",
        "2",
        "--output",
        s(&gen),
    ]);
    assert_eq!(code(&o), 0);
    let out = dir.path().join("partial.json");
    let o = reccone(&[
        "approx-shadow",
        "--instance",
        s(&gen),
        "--eps",
        "0.01",
        "--max-iter",
        "1",
        "--output",
        s(&out),
    ]);
    assert_eq!(code(&o), 3);
    let r = parse_result(&std::fs::read(&out).unwrap()).unwrap();
    assert!(r.partial);
    assert!(!r.certificate_met);
}

#[test]
fn gen_families_feed_the_shadow_algorithm() {
    let dir = TempDir::new().unwrap();
    for (family, n) in [("diagonal", 2), ("soc", 3), ("lifted", 3)] {
        let inst = dir.path().join(format!("{family}.json"));
        let o = reccone(&[
            "gen",
            "--family",
            family,
            "--n",
            &n.to_string(),
            "--seed",
            "5",
            "--output",
            s(&inst),
        ]);
        assert_eq!(code(&o), 0, "{family}");
        let out = dir.path().join(format!("{family}.out.json"));
        let o = reccone(&[
            "approx-shadow",
            "--instance",
            s(&inst),
            "--eps",
            "0.2",
            "--output",
            s(&out),
        ]);
        assert_eq!(
            code(&o),
            0,
            "{family}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let r = parse_result(&std::fs::read(&out).unwrap()).unwrap();
        assert!(r.certificate_met, "{family}");
    }
}

#[test]
fn distance_and_plot_on_result() {
    let dir = TempDir::new().unwrap();
    let inst = psd2(&dir);
    let out = dir.path().join("out.json");
    let o = reccone(&[
        "approx-spectra",
        "--instance",
        s(&inst),
        "--eps",
        "0.1",
        "--output",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);

    let o = reccone(&["distance", "--result", s(&out), "--grid", "2000"]);
    assert_eq!(code(&o), 0);
    let d = json_of(&o.stdout);
    assert_eq!(d["grid"], 2000);
    assert!(d["estimate"].as_f64().unwrap() <= 0.1 + d["error_bound"].as_f64().unwrap());

    let o = reccone(&[
        "distance",
        "--result",
        s(&out),
        "--against",
        s(&out),
        "--grid",
        "500",
    ]);
    assert_eq!(code(&o), 0);
    assert!(json_of(&o.stdout)["estimate"].as_f64().unwrap() <= 1e-12);

    let o = reccone(&["export-plot", "--result", s(&out)]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("kind,x1,x2,x3"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().any(|r| r[0] == "ray"));
    let a = rows.iter().filter(|r| r[0] == "facet_seg_a").count();
    let b = rows.iter().filter(|r| r[0] == "facet_seg_b").count();
    assert!(a > 0 && a == b);
    for r in &rows {
        assert_eq!(r.len(), 4);
        for v in &r[1..] {
            let x: f64 = v.parse().unwrap();
            assert!(x.abs() <= 1.0 + 1e-9, "segments stay in the unit box");
        }
    }
}

/// Set `RECCONE_BLESS=1` to rewrite the golden file after a verified change.
#[test]
fn psd_cone_matches_golden() {
    let golden =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/psd_cone_eps0.25_seed7.json");
    let dir = TempDir::new().unwrap();
    let inst = psd2(&dir);
    let out = dir.path().join("out.json");
    let o = reccone(&[
        "approx-spectra",
        "--instance",
        s(&inst),
        "--eps",
        "0.25",
        "--seed",
        "7",
        "--output",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read(&out).unwrap();
    if std::env::var_os("RECCONE_BLESS").is_some() {
        std::fs::write(&golden, &got).unwrap();
    }
    assert_eq!(got, std::fs::read(&golden).expect("golden file present"));
}
