use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use special_generic::construct::build_basic_unchecked;
use special_generic::pipeline::{write_document, PipelineReport, Verdict};
use special_generic::shapes;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn sgm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("sgm runs")
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sgm(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(sgm(&["certify"], dir.path()).status.code(), Some(2));
    let o = sgm(&["certify", "--config", "/nonexistent.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error"));
}

#[test]
fn certify_writes_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgm(&["certify", "--config", &config("annulus.json")], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["passed"], true);
}

#[test]
fn swapped_annulus_fails_certify() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgm(&["certify", "--config", &config("swapped_annulus.json")], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAILED at stage certify"));
}

#[test]
fn construct_writes_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgm(&["construct", "--config", &config("disk.json")], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("poly.txt")).unwrap();
    assert!(!text.trim().is_empty());
    assert!(dir.path().join("hypersurface.json").exists());
}

#[test]
fn squared_f0_fails_validate() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgm(&["construct", "--config", &config("f0_squared.json")], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAILED at stage validate"), "{}", stderr(&o));
}

#[test]
fn reeb_of_annulus() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgm(&["reeb", "--config", &config("annulus.json")], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("betti1 1"));
    let dot = std::fs::read_to_string(dir.path().join("reeb.dot")).unwrap();
    assert!(dot.starts_with("graph reeb {"));
    let nodes = dot.lines().filter(|l| l.contains("[label=") && !l.contains("--")).count();
    let edges = dot.lines().filter(|l| l.contains("--")).count();
    assert_eq!((nodes, edges), (4, 4));
}

#[test]
fn mesh_of_disk() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgm(&["mesh", "--config", &config("disk.json"), "--mesh-res", "32"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let obj = std::fs::read_to_string(dir.path().join("mesh.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("v ")));
    assert!(obj.lines().any(|l| l.starts_with("f ")));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mesh_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["euler"], 2);
    assert_eq!(summary["components"], 1);
}

#[test]
fn fit_recovers_circle() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("circle.csv");
    let rows: String = (0..40)
        .map(|i| {
            let t = i as f64 * std::f64::consts::TAU / 40.0;
            format!("{},{}\n", 2.0 * t.cos() + 0.5, 2.0 * t.sin())
        })
        .collect();
    std::fs::write(&csv, format!("# x,y\n{rows}")).unwrap();
    let o = sgm(&["fit", csv.to_str().unwrap(), "--degree", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    assert!(rep["rms_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn full_run_verifies_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["full", "--config", &config("annulus.json"), "--no-timestamp"];
    for d in [&a, &b] {
        let o = sgm(&args, d.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["report.json", "hypersurface.json", "mesh.obj", "mesh_summary.json", "reeb.dot", "reeb.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
    let rep: PipelineReport =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(rep.verdict, Verdict::SpecialGenericVerified);
    assert_eq!(rep.generated_unix, None);
}

#[test]
fn skipped_stage_is_unverified() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgm(
        &["full", "--config", &config("disk.json"), "--mesh-res", "32", "--skip-stage", "collar"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep: PipelineReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(rep.verdict, Verdict::Unverified);
}

#[test]
fn duplicated_boundary_fails_nonsingular() {
    let dir = tempfile::tempdir().unwrap();
    let h = build_basic_unchecked(&shapes::duplicated_disk(), 1).unwrap();
    let doc = dir.path().join("dup.json");
    write_document(&doc, &h).unwrap();
    let o = sgm(&["verify", "--hypersurface", doc.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAILED at stage nonsingular"), "{}", stderr(&o));
}
